use clap::Parser;

use lsc_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = lsc_cli::thread_pool().and_then(|pool| pool.install(|| run(cli)));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
