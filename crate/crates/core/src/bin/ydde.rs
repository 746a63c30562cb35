use clap::Parser;

fn main() {
    std::process::exit(ydde::cli::run(ydde::cli::Cli::parse()));
}
