use clap::Parser;
use metastable::cli::Cli;
use metastable::{exit_code, run, write_outcome};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli);
    let mut code = exit_code(&result);
    match &result {
        Ok(outcome) => {
            if let Err(e) = write_outcome(outcome, &cli.out, cli.format) {
                eprintln!("error: {e}");
                code = 2;
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(code);
}
