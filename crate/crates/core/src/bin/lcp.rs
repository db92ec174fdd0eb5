use clap::Parser;

fn main() {
    let cli = lcp::cli::Cli::parse();
    if let Err(e) = lcp::cli::run(cli) {
        eprintln!("lcp: {e}");
        std::process::exit(e.exit_code());
    }
}
