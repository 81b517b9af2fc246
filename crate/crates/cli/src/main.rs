fn main() {
    std::process::exit(prophet_cli::run(std::env::args_os()));
}
