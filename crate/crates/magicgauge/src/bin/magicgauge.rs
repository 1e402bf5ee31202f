fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter(magicgauge::cli::LOG_ENV)).init();
    std::process::exit(magicgauge::cli::run_cli(std::env::args_os()));
}
