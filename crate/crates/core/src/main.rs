use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stable_tori::curvature::{max_feasible_r, scan_nonnegativity, write_scan_csv, NONNEG_SLACK};
use stable_tori::moebius::{balance, GridMap, MobiusParam};
use stable_tori::profile::{make_bump, profile, verify_conditions, BumpSpec};
use stable_tori::spectral::{jacobi_spectrum, Backend, TorusGrid};
use stable_tori::surface::willmore;
use stable_tori::verifier::{emit_report, report_json, verify_example, Tolerances};
use stable_tori::Error;

#[derive(Parser, Debug)]
#[command(name = "stable-tori", version, about = "Certificates for CMC-stable Clifford tori in perturbed 3-spheres")]
struct Cli {
    /// Bump radius.
    #[arg(long, global = true, default_value_t = 0.05)]
    r: f64,
    /// Torus grid size (ricci-scan and max-r: t-grid resolution).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Fourier)]
    backend: BackendArg,
    /// Directory for report and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every certificate and the inequality chain.
    VerifyAll,
    /// Normalized Ricci eigenvalues over the bump support.
    RicciScan,
    /// Jacobi operator spectrum for a constant potential.
    Spectrum {
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 13)]
        modes: usize,
    },
    /// Balance a sphere-valued map on the Clifford torus.
    Balance {
        /// `clifford` or `shifted:a1,a2,a3,a4`.
        #[arg(long, default_value = "clifford")]
        map: String,
        /// `uniform` or `file:<csv>` with one weight per grid node.
        #[arg(long, default_value = "uniform")]
        rho: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Willmore energy of parallel tori in both metrics.
    WillmoreCheck {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        t: Vec<f64>,
    },
    /// Bump profile table and condition report.
    BumpDesign {
        /// Negative-lobe amplitude.
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Largest bump radius with nonnegative Ricci curvature.
    MaxR {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Fourier,
    Fd,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Fourier => Backend::Fourier,
            BackendArg::Fd => Backend::Fd,
        }
    }
}

enum Failure {
    Verdict(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::Unbalanced { .. } => Failure::Verdict(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<bool, Failure>;

const DEFAULT_GRID: usize = 64;
const DEFAULT_SCAN: usize = 4096;
const WILLMORE_TOL: f64 = 1e-8;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verdict(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::VerifyAll => verify_all(cli),
        Command::RicciScan => ricci_scan(cli),
        Command::Spectrum { c, modes } => spectrum(cli, *c, *modes),
        Command::Balance { map, rho, tol, max_iter } => run_balance(cli, map, rho, *tol, *max_iter),
        Command::WillmoreCheck { t } => willmore_check(cli, t),
        Command::BumpDesign { amplitude, samples } => bump_design(cli, *amplitude, *samples),
        Command::MaxR { tol } => max_r(cli, *tol),
    }
}

fn print_json<T: Serialize>(v: &T) -> std::result::Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn write_out(cli: &Cli, name: &str, bytes: &[u8]) -> std::result::Result<(), Failure> {
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_failure(&path, e))?;
    }
    Ok(())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn stdout_bytes(bytes: &[u8]) -> std::result::Result<(), Failure> {
    std::io::stdout()
        .write_all(bytes)
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn verify_all(cli: &Cli) -> CliResult {
    let rep = verify_example(cli.r, cli.n.unwrap_or(DEFAULT_GRID), cli.backend.into(), &Tolerances::default())?;
    if let Some(dir) = &cli.out {
        emit_report(&rep, dir)?;
    }
    if cli.json {
        println!("{}", report_json(&rep)?);
    } else {
        for v in &rep.verdicts.checks {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            let kind = if v.control { " (control)" } else { "" };
            println!("{tag} {}{kind}: residual {:e}, tol {:e}", v.name, v.residual, v.tol);
        }
        println!("overall: {}", if rep.verdicts.overall { "PASS" } else { "FAIL" });
    }
    Ok(rep.verdicts.overall)
}

fn ricci_scan(cli: &Cli) -> CliResult {
    let p = profile(&make_bump(cli.r)?);
    let res = cli.n.unwrap_or(DEFAULT_SCAN);
    let scan = scan_nonnegativity(&p, res)?;
    let mut csv = Vec::new();
    write_scan_csv(&p, res, &mut csv)?;
    write_out(cli, "ricci.csv", &csv)?;
    if cli.json {
        print_json(&scan)?;
    } else {
        stdout_bytes(&csv)?;
    }
    Ok(scan.feasible)
}

fn spectrum(cli: &Cli, c: f64, modes: usize) -> CliResult {
    let grid = TorusGrid::new(cli.n.unwrap_or(DEFAULT_GRID))?;
    let rep = jacobi_spectrum(c, &grid, modes, cli.backend.into())?;
    let out = json!({
        "eigenvalues": rep.eigenvalues,
        "index": rep.index,
        "nullity": rep.nullity,
        "cmc_stable": rep.cmc_stable,
    });
    write_out(cli, "spectrum.json", serde_json::to_string_pretty(&out).unwrap_or_default().as_bytes())?;
    if cli.json {
        print_json(&out)?;
    } else {
        println!("index {} nullity {} cmc_stable {}", rep.index, rep.nullity, rep.cmc_stable);
        for (i, mu) in rep.eigenvalues.iter().enumerate() {
            println!("{i} {mu:.12}");
        }
    }
    Ok(true)
}

fn parse_map(spec: &str, grid: TorusGrid) -> std::result::Result<GridMap, Failure> {
    let base = GridMap::clifford(grid);
    if spec == "clifford" {
        return Ok(base);
    }
    let Some(rest) = spec.strip_prefix("shifted:") else {
        return Err(Failure::Usage(format!("unknown map `{spec}`")));
    };
    let a: Vec<f64> = rest
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("bad shift `{rest}`: {e}")))?;
    let a: [f64; 4] = a
        .try_into()
        .map_err(|_| Failure::Usage(format!("shift `{rest}` needs four components")))?;
    Ok(base.compose(&MobiusParam::new(a)?))
}

fn parse_rho(spec: &str) -> std::result::Result<Option<Vec<f64>>, Failure> {
    if spec == "uniform" {
        return Ok(None);
    }
    let Some(path) = spec.strip_prefix("file:") else {
        return Err(Failure::Usage(format!("unknown rho `{spec}`")));
    };
    let text = fs::read_to_string(path).map_err(|e| io_failure(Path::new(path), e))?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    Ok(Some(values))
}

fn run_balance(cli: &Cli, map: &str, rho: &str, tol: f64, max_iter: usize) -> CliResult {
    let grid = TorusGrid::new(cli.n.unwrap_or(DEFAULT_GRID))?;
    let map = parse_map(map, grid)?;
    let rho = parse_rho(rho)?;
    let out = balance(&map.problem(rho.as_deref())?, tol, max_iter)?;
    let doc = json!({
        "a": out.param.a,
        "residual": out.residual,
        "iterations": out.iterations,
    });
    write_out(cli, "balance.json", serde_json::to_string_pretty(&doc).unwrap_or_default().as_bytes())?;
    if cli.json {
        print_json(&doc)?;
    } else {
        let a = out.param.a;
        println!(
            "a = ({:.12}, {:.12}, {:.12}, {:.12}) residual {:e} iterations {}",
            a[0], a[1], a[2], a[3], out.residual, out.iterations
        );
    }
    Ok(out.residual <= tol)
}

#[derive(Serialize)]
struct WillmoreRow {
    t: f64,
    round: f64,
    perturbed: f64,
    closed_form: f64,
    relative_difference: f64,
}

fn willmore_check(cli: &Cli, ts: &[f64]) -> CliResult {
    let p = profile(&make_bump(cli.r)?);
    let grid = TorusGrid::new(cli.n.unwrap_or(DEFAULT_GRID))?;
    let mut rows = Vec::new();
    for &t in ts {
        let round = willmore(None, t, &grid)?;
        let perturbed = willmore(Some(&p), t, &grid)?;
        rows.push(WillmoreRow {
            t,
            round,
            perturbed,
            closed_form: 2.0 * std::f64::consts::PI * std::f64::consts::PI / (2.0 * t).cos(),
            relative_difference: (perturbed - round).abs() / round,
        });
    }
    let mut csv = String::from("t,round,perturbed,closed_form,relative_difference\n");
    for w in &rows {
        csv += &format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            w.t, w.round, w.perturbed, w.closed_form, w.relative_difference
        );
    }
    write_out(cli, "willmore.csv", csv.as_bytes())?;
    if cli.json {
        print_json(&rows)?;
    } else {
        stdout_bytes(csv.as_bytes())?;
    }
    Ok(rows.iter().all(|w| w.relative_difference <= WILLMORE_TOL))
}

fn bump_design(cli: &Cli, amplitude: f64, samples: usize) -> CliResult {
    let b = BumpSpec::with_amplitude(cli.r, amplitude)?;
    let report = verify_conditions(&b, Tolerances::default().geometric);
    let p = profile(&b);
    let mut csv = Vec::new();
    p.write_csv(&mut csv, (2.5 * cli.r).min(0.78), samples.max(2))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    write_out(cli, "profile.csv", &csv)?;
    if cli.json {
        print_json(&json!({ "bump": b, "conditions": report }))?;
    } else {
        stdout_bytes(&csv)?;
    }
    Ok(report.all_passed())
}

fn max_r(cli: &Cli, tol: f64) -> CliResult {
    let res = cli.n.unwrap_or(DEFAULT_SCAN);
    let fr = max_feasible_r(res, tol)?;
    write_out(cli, "max_r.json", serde_json::to_string_pretty(&fr).unwrap_or_default().as_bytes())?;
    if cli.json {
        print_json(&fr)?;
    } else {
        println!(
            "r* = {:.12} (bracket [{:.12}, {:.12}], domain edge {}), min eigenvalue {:e}, slack {:e}",
            fr.r_star, fr.bracket.0, fr.bracket.1, fr.upper_is_domain_edge, fr.min_at_r_star, NONNEG_SLACK
        );
    }
    Ok(fr.min_at_r_star >= -NONNEG_SLACK && fr.half_r_feasible)
}
