use clap::{Parser, Subcommand};
use percher::design::{ClawDesign, SizingSpec};
use percher::hoberman::sweep_mechanical_advantage;
use percher::output::{self, write_atomic};
use percher::scenario::{self, RunError, OUTPUT_DIR_ENV};
use percher::G;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "percher", about = "Perching claw mechanism analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every analysis in a scenario file
    Run { scenario: PathBuf },
    /// Size the default claw and diff it against the fabricated table
    Tables {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the Hoberman bend angle
        #[arg(long)]
        gamma_deg: Option<f64>,
    },
    /// Hoberman force over a (gamma, epsilon) grid
    Sweep {
        #[arg(long, default_value_t = 90.0)]
        gamma_min: f64,
        #[arg(long, default_value_t = 180.0)]
        gamma_max: f64,
        #[arg(long, default_value_t = 10.0)]
        gamma_step: f64,
        #[arg(long, default_value_t = 0.5)]
        epsilon_step: f64,
        #[arg(long, default_value_t = 200.0)]
        payload_g: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Version,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("percher_out"))
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.cmd {
        Cmd::Run { scenario: path } => {
            let r = scenario::run_scenario_file(&path)?;
            for f in &r.files {
                println!("{}", f.display());
            }
        }
        Cmd::Tables { out, gamma_deg } => {
            let mut spec = SizingSpec::default();
            if let Some(g) = gamma_deg {
                spec.gamma = g.to_radians();
            }
            let dir = out_dir(out);
            let (_, rows, files) = scenario::regenerate_tables(&spec, &dir)?;
            let worst = rows.iter().filter(|r| r.unit == "mm").map(|r| r.abs_diff).fold(0.0, f64::max);
            println!("max |sized - table| = {worst:.6} mm");
            for r in rows.iter().filter(|r| r.flagged) {
                println!("flagged {}: {}", r.name, r.note);
            }
            for f in files {
                println!("{}", f.display());
            }
        }
        Cmd::Sweep { gamma_min, gamma_max, gamma_step, epsilon_step, payload_g, out } => {
            if !(gamma_step > 0.0 && epsilon_step > 0.0) || gamma_max < gamma_min {
                return Err(RunError::Input("sweep steps must be > 0 and gamma-max >= gamma-min".into()));
            }
            let n = ((gamma_max - gamma_min) / gamma_step + 1e-9).floor() as usize;
            let gammas: Vec<f64> = (0..=n).map(|k| (gamma_min + k as f64 * gamma_step).to_radians()).collect();
            let pi = std::f64::consts::PI;
            let t = sweep_mechanical_advantage(
                &ClawDesign::table_s1(),
                &gammas,
                (-pi, pi),
                epsilon_step.to_radians(),
                payload_g * 1e-3 * G,
            );
            let dir = out_dir(out);
            let p1 = dir.join("sweep.csv");
            let p2 = dir.join("sweep_limits.csv");
            write_atomic(&p1, &output::sweep_csv(&t))?;
            write_atomic(&p2, &output::sweep_limits_csv(&t))?;
            println!("{}\n{}", p1.display(), p2.display());
        }
        Cmd::Version => println!("percher {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("percher: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
