use clap::Parser;

fn main() {
    let cli = spanq_cli::Cli::parse();
    std::process::exit(spanq_cli::main_with(cli));
}
