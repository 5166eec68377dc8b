use clap::Parser;
use lintseq_cli::{run, Cli, EXIT_FATAL};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let status = match run(cli) {
        Ok(status) => status,
        Err(err) => {
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            let record = serde_json::json!({ "status": EXIT_FATAL, "error": chain.join(": ") });
            eprintln!("{record}");
            EXIT_FATAL
        }
    };
    std::process::exit(status);
}
