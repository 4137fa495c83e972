//! Command implementations behind the `rbm` binary. Each `cmd_*` function
//! returns a typed report; [`run`] prints it and writes the files.

pub mod args;
pub mod commands;
pub mod dataset;

pub use args::{Cli, Command};
pub use commands::{
    cmd_bench, cmd_dataset, cmd_eval, cmd_generate, cmd_train, read_traces, resolve_config, summarize, summary_csv,
    BenchReport, EvalReport, SummaryRow, TrainReport,
};
pub use dataset::load_dataset;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(a) => {
            let report = cmd_train(&a)?;
            println!("{}", report.out_dir.join("summary.csv").display());
        }
        Command::Eval(a) => println!("{}", serde_json::to_string(&cmd_eval(&a)?)?),
        Command::Generate(a) => println!("{}", cmd_generate(&a)?.display()),
        Command::Bench(a) => {
            let report = cmd_bench(&a)?;
            if a.json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                print!("{}", report.to_table());
            }
        }
        Command::Dataset(a) => {
            cmd_dataset(&a)?;
            println!("{}", a.out.display());
        }
    }
    Ok(())
}
