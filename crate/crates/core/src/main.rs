use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARCHRECO_LOG", "warn")).init();
    let cli = archreco::cli::Cli::parse();
    std::process::exit(archreco::cli::run(cli));
}
