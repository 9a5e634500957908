use clap::Parser;

fn main() {
    let cli = match scanverif_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are input errors; clap's own code 2 means "undecided" here
            let _ = e.print();
            std::process::exit(if e.use_stderr() { scanverif_core::report::EXIT_INPUT_ERROR } else { 0 });
        }
    };
    let code = scanverif_cli::run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
