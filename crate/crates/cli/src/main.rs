use clap::Parser;
use patchkpp_cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli.command));
    match result {
        Ok(a) => {
            println!("{}", serde_json::to_string_pretty(&a.summary).unwrap_or_default());
            eprintln!("wrote {} files to {}", a.files.len() + 1, a.dir.display());
        }
        Err(e) => {
            eprintln!("patchkpp {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
