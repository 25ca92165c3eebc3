fn main() {
    std::process::exit(burgers_drift_cli::run(std::env::args_os()));
}
