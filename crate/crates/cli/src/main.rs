use clap::Parser;

fn main() {
    let cli = proxsplit_cli::Cli::parse();
    std::process::exit(proxsplit_cli::run(cli));
}
