use clap::Parser;
use keepaway_cli::commands::{run, Cli, EXIT_ERROR};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KEEPAWAY_LOG", "warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = match run(cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    std::process::exit(code);
}
