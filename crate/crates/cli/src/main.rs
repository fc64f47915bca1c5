fn main() {
    std::process::exit(wellfilt_cli::run(std::env::args_os()));
}
