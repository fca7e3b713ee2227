use clap::Parser;

fn main() {
    std::process::exit(tigaug::run(tigaug::Cli::parse()));
}
