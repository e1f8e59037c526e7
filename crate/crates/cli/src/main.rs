fn main() {
    std::process::exit(stopped_clock_cli::run_from_env());
}
