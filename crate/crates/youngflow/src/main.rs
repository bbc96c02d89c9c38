fn main() {
    std::process::exit(youngflow::cli::run_cli(std::env::args_os()));
}
