fn main() {
    std::process::exit(intimacy_cli::run(std::env::args_os()));
}
