fn main() {
    std::process::exit(medread_cli::run(std::env::args_os()));
}
