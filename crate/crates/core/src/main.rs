fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DIFFIETY_LOG")).init();
    std::process::exit(diffiety::cli::run(std::env::args_os()));
}
