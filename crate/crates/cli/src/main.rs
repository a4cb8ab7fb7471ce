use clap::Parser;
use cutmesh_cli::{configure_threads, execute, parse_config, CliError, Command, Flags};

#[derive(Parser)]
#[command(name = "cutmesh", version, about = "Higher-order quadrature for level-set geometries")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    configure_threads()?;
    let cfg = parse_config(cli.command, &cli.flags)?;
    execute(&cfg)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("cutmesh: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
