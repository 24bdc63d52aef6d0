use clap::Parser;

fn main() {
    let cli = nqp::cli::Cli::parse();
    std::process::exit(nqp::cli::run(cli));
}
