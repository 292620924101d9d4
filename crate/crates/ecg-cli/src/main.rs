use clap::Parser;

fn main() {
    let cli = ecg_cli::args::Cli::parse();
    if let Err(error) = ecg_cli::run(&cli) {
        eprintln!("error: {error}");
        std::process::exit(error.stage.exit_code());
    }
}
