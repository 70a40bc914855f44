use clap::Parser;

fn main() {
    sbp::cli::init_threads();
    let cli = sbp::cli::Cli::parse();
    std::process::exit(sbp::cli::run(&cli));
}
