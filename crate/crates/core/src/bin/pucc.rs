fn main() {
    std::process::exit(pucc::cli::run(std::env::args_os()));
}
