fn main() {
    std::process::exit(tempoca::cli::run_cli(std::env::args_os()));
}
