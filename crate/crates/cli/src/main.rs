use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match skyrmion_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successful exits; real argument errors are not
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(skyrmion_cli::run(&cli));
}
