use clap::Parser;

fn main() {
    let cli = gaitbench::cli::Cli::parse();
    let code = match gaitbench::cli::execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
