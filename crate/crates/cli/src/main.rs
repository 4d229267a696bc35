fn main() {
    std::process::exit(secbc_cli::run(std::env::args_os()));
}
