use clap::Parser;

fn main() {
    let cli = sketchqa::gateway::cli::Cli::parse();
    match sketchqa::gateway::cli::run(cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
