use std::io::Write;
use std::process::ExitCode;

use basel::experiment::config::{parse_args, CliCommand, USAGE};
use basel::experiment::{builtin_catalog, run_experiment, sweep_points};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = match parse_args(&args) {
        Ok(CliCommand::Help) => {
            print!("{}", USAGE);
            return ExitCode::SUCCESS;
        }
        Ok(CliCommand::ListBuiltins) => {
            print!("{}", builtin_catalog());
            return ExitCode::SUCCESS;
        }
        Ok(CliCommand::Run(spec)) => spec,
        Err(msg) => {
            eprintln!("error: {}", msg);
            eprintln!("run with --help for usage");
            return ExitCode::from(2);
        }
    };

    eprintln!("sweep: {} runs", sweep_points(&spec).len());
    let output = match run_experiment(&spec) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };

    match &spec.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.table) {
                eprintln!("error: writing {}: {}", path.display(), e);
                return ExitCode::from(2);
            }
            for (axis, csv) in &output.aggregates {
                let agg_path = path.with_extension(format!("agg.{}.csv", axis));
                if let Err(e) = std::fs::write(&agg_path, csv) {
                    eprintln!("error: writing {}: {}", agg_path.display(), e);
                    return ExitCode::from(2);
                }
                eprintln!("aggregate: {}", agg_path.display());
            }
        }
        None => {
            print!("{}", output.table);
            let _ = std::io::stdout().flush();
        }
    }

    for row in output.rows.iter().filter(|r| r.outcome.is_err()) {
        eprintln!(
            "failed: C={} seed={}: {}",
            row.point.speedup,
            row.point.seed,
            row.outcome.as_ref().unwrap_err()
        );
    }
    if output.any_failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
