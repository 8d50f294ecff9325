use clap::{Args, Parser, Subcommand};
use spinr::numlin::Tolerance;
use spinr::spaces::SpaceId;
use spinr::weights::LoweringTable;
use spinr_cli::report::{cmd_space, markdown, SpaceRequest};
use spinr_cli::table1::{self, cmd_table1};
use spinr_cli::verify::{run_suite, Suite};
use spinr_cli::{exit_code, parse_tolerance, tolerance_from_env, EXIT_INVALID, EXIT_MISMATCH, EXIT_OK};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spinr", version, about = "Invariant twisted spin^r spinors on projective spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Override the residual tolerance (also read from SPINR_TOL).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, conflicts_with = "markdown")]
    json: bool,
    #[arg(long)]
    markdown: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant spinors and checks for one space.
    Space {
        #[arg(long, value_parser = parse_space)]
        space: SpaceId,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        /// Vertical metric scale (symplectic only).
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Charge of the auxiliary U(1) action (CP cases).
        #[arg(long, allow_hyphen_values = true)]
        s: Option<i64>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        dump_basis: Option<std::path::PathBuf>,
        /// Lowering-word table replacing the embedded one.
        #[arg(long)]
        table3: Option<std::path::PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Reproduces every row of the classification table.
    Table1 {
        #[command(flatten)]
        out: Output,
    },
    /// Runs the acceptance ledger.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn parse_space(s: &str) -> Result<SpaceId, String> {
    s.parse::<SpaceId>().map_err(|e| e.to_string())
}

fn tolerance(flag: Option<f64>) -> Result<Tolerance, String> {
    match flag {
        Some(x) => parse_tolerance(&x.to_string()),
        None => tolerance_from_env(),
    }
}

fn run(cli: Cli) -> Result<i32, (i32, String)> {
    let invalid = |e: String| (EXIT_INVALID, e);
    let lib = |e: spinr::Error| (exit_code(&e), e.to_string());
    match cli.command {
        Command::Space { space, n, a, t, s, r, m, dump_basis, table3, out } => {
            let tol = tolerance(out.tol).map_err(invalid)?;
            if t != 1.0 && space != SpaceId::CpnSymplectic {
                return Err(invalid("--t only applies to cpn-symplectic".into()));
            }
            let mut req = SpaceRequest::new(space, n);
            req.a = a;
            req.t = t;
            req.s = s;
            req.r = r;
            req.m = m;
            req.table3 = table3.map(|p| LoweringTable::load(&p)).transpose().map_err(lib)?;
            req.with_basis = dump_basis.is_some();
            let rec = cmd_space(&req, &tol).map_err(lib)?;
            if rec.dim_invariant == 0 {
                eprintln!("note: no invariant spinors for this configuration");
            }
            if let Some(path) = dump_basis {
                let json = serde_json::to_string(&rec.basis).map_err(|e| invalid(e.to_string()))?;
                std::fs::write(&path, json).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            }
            if out.markdown {
                print!("{}", markdown(&rec));
            } else {
                println!("{}", serde_json::to_string_pretty(&rec).expect("record serialises"));
            }
            Ok(EXIT_OK)
        }
        Command::Table1 { out } => {
            let tol = tolerance(out.tol).map_err(invalid)?;
            let rows = cmd_table1(&tol).map_err(lib)?;
            if out.markdown {
                print!("{}", table1::markdown(&rows));
            } else {
                println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialise"));
            }
            Ok(if rows.iter().all(|r| r.matches()) { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Verify { suite, tol } => {
            let tol = tolerance(tol).map_err(invalid)?;
            let outcomes = run_suite(suite, &tol, |o| println!("{}", o.line()));
            let passed = outcomes.iter().filter(|o| o.pass).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            Ok(if passed == outcomes.len() { EXIT_OK } else { EXIT_MISMATCH })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
