use clap::Parser;
use equinuc_cli::Cli;

fn main() {
    let cli = Cli::parse();
    let code = equinuc_cli::execute(&cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
