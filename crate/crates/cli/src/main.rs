use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctc_cli::report::to_text;
use ctc_cli::{
    execute, grid, parse_assignment, run_text, scenario_doc, scenario_job, scenarios_json, sweep, sweep_csv, verify,
    verify_json, CliError, ModelChoice, Output, EXIT_ERROR, EXIT_OK, EXIT_PARADOX,
};
use ctc_core::catalog::{Params, VerifyStatus};
use ctc_core::{CtcError, Simulator};

#[derive(Parser)]
#[command(name = "ctc-sim", version, about = "Post-selected circuit simulator with CTC channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit document.
    Run {
        doc: PathBuf,
        /// Numeric override at a dotted path, e.g. model.lambda=0.3
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a catalog scenario.
    Scenario {
        name: String,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// exact_bell, noisy_bell, classical, classical_floor or delta
        #[arg(long, default_value = "exact_bell")]
        model: String,
        #[arg(long, default_value_t = 0.2)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        k: f64,
        /// Quadrature nodes per axis for the delta model.
        #[arg(long, default_value_t = ctc_core::engine::DEFAULT_NODES)]
        nodes: usize,
        /// Extra outputs, e.g. flip:a,b or input_bias:psi
        #[arg(long = "output")]
        outputs: Vec<String>,
        /// Check the catalog expectations instead of printing a report.
        #[arg(long, conflicts_with = "emit_doc")]
        verify: bool,
        /// Print the scenario as a circuit document.
        #[arg(long)]
        emit_doc: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one numeric document entry over a grid.
    Sweep {
        doc: PathBuf,
        /// Dotted path of the swept value, e.g. gates.0.params.theta
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// Number of grid points.
        #[arg(long)]
        steps: usize,
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// Also write the list of reports here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the scenario catalog.
    ListScenarios,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn assignments(list: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    list.iter().map(|s| parse_assignment(s)).collect()
}

fn run(cmd: Command) -> Result<i32, CliError> {
    let sim = Simulator::from_env()?;
    match cmd {
        Command::Run { doc, set, out } => {
            let o = run_text(&sim, &read(&doc)?, &assignments(&set)?)?;
            emit(&to_text(&o.report), out.as_deref())?;
            Ok(o.exit_code())
        }
        Command::Scenario {
            name,
            params,
            model,
            lambda,
            k,
            nodes,
            outputs,
            verify: check,
            emit_doc,
            out,
        } => {
            let params: Params = assignments(&params)?.into_iter().collect();
            let model = ModelChoice {
                name: model,
                lambda,
                k,
                nodes,
            }
            .to_model()?;
            if emit_doc {
                emit(&to_text(&scenario_doc(&name, &params, &model)?), out.as_deref())?;
                return Ok(EXIT_OK);
            }
            if check {
                let r = verify(&name, &params, &model)?;
                emit(&to_text(&verify_json(&r)), out.as_deref())?;
                return Ok(if r.status == VerifyStatus::Failed { EXIT_ERROR } else { EXIT_OK });
            }
            let extra = outputs
                .iter()
                .map(|s| Output::parse(s).ok_or_else(|| CtcError::Config(format!("unknown output {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let o = execute(&sim, &scenario_job(&name, &params, &model, &extra)?)?;
            emit(&to_text(&o.report), out.as_deref())?;
            Ok(o.exit_code())
        }
        Command::Sweep {
            doc,
            param,
            from,
            to,
            steps,
            set,
            out,
        } => {
            let points = grid(from, to, steps)?;
            let rows = sweep(&sim, &read(&doc)?, &assignments(&set)?, &param, &points)?;
            if let Some(p) = out {
                let reports: Vec<_> = rows.iter().map(|r| &r.report).collect();
                emit(&to_text(&reports), Some(&p))?;
            }
            print!("{}", sweep_csv(&param, &rows));
            Ok(EXIT_OK)
        }
        Command::ListScenarios => {
            print!("{}", to_text(&scenarios_json()));
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    debug_assert!([EXIT_OK, EXIT_ERROR, EXIT_PARADOX].contains(&code));
    ExitCode::from(code as u8)
}
