use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mpcac_core::cones::{active_gradients_relaxed, check_acq, check_gcq, check_licq, check_mfcq, PairSet};
use mpcac_core::corpus;
use mpcac_core::files::{load_document, parse_index_list, parse_point_spec, Document, REPORT_FORMAT};
use mpcac_core::model::{build_mixed_integer, build_relaxed, build_tightened, companion_y};
use mpcac_core::solver::{kkt_residual_mpcac_report, solve_brute, SolveOptions};
use mpcac_core::stationarity::{
    check_kkt_relaxed, check_m_stationary, check_s_stationary, check_w_stationary,
};
use mpcac_core::{Error, PairPoint, Problem, Tolerances};

#[derive(Parser)]
#[command(name = "mpcac", version, about = "Reformulations, stationarity and constraint qualifications for cardinality-constrained programs")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct TolArgs {
    /// zero threshold for index sets and cardinality
    #[arg(long, global = true)]
    tol_zero: Option<f64>,
    /// constraint residual tolerance
    #[arg(long, global = true)]
    tol_feas: Option<f64>,
    /// simplex pivot tolerance
    #[arg(long, global = true)]
    tol_lp: Option<f64>,
    /// residual bound for accepting multipliers
    #[arg(long, global = true)]
    tol_cert: Option<f64>,
    /// cone membership tolerance
    #[arg(long, global = true)]
    tol_cone: Option<f64>,
    /// relative rank tolerance
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// objective tie tolerance in solve
    #[arg(long, global = true)]
    tol_tie: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, Failure> {
        let d = Tolerances::default();
        let given = [
            ("--tol-zero", self.tol_zero),
            ("--tol-feas", self.tol_feas),
            ("--tol-lp", self.tol_lp),
            ("--tol-cert", self.tol_cert),
            ("--tol-cone", self.tol_cone),
            ("--tol-rank", self.tol_rank),
            ("--tol-tie", self.tol_tie),
        ];
        for (flag, v) in given {
            if let Some(v) = v.filter(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Failure::Usage(format!("{flag} must be positive and finite, got {v}")));
            }
        }
        Ok(Tolerances {
            zero: self.tol_zero.unwrap_or(d.zero),
            feas: self.tol_feas.unwrap_or(d.feas),
            lp: self.tol_lp.unwrap_or(d.lp),
            cert: self.tol_cert.unwrap_or(d.cert),
            cone: self.tol_cone.unwrap_or(d.cone),
            rank: self.tol_rank.unwrap_or(d.rank),
            tie: self.tol_tie.unwrap_or(d.tie),
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a problem or pair-set file and check its invariants
    Validate { file: PathBuf },
    /// Print the relaxed, mixed-integer or I-tightened reformulation
    Reformulate {
        file: PathBuf,
        #[arg(long, value_enum)]
        form: Form,
        /// e.g. "x=0,0;y=1,0" (tightened only)
        #[arg(long)]
        point: Option<String>,
        /// 1-based index list, e.g. "1,3" (tightened only)
        #[arg(long = "I")]
        i: Option<String>,
    },
    /// Certify a stationarity condition at a point
    Check {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, value_enum)]
        condition: Condition,
        #[arg(long = "I")]
        i: Option<String>,
    },
    /// Decide a constraint qualification at a point
    Cq {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Globally solve by support enumeration
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        /// also write the per-support table as plain text to this path
        #[arg(long)]
        emit_table: Option<PathBuf>,
    },
    /// Full stationarity and CQ diagnostic at an x (y optional)
    Diagnose {
        file: PathBuf,
        #[arg(long)]
        point: String,
    },
    /// Run the built-in worked instances
    Corpus {
        /// case id, or a prefix such as "ex4.3" selecting a family
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        json: bool,
        /// write the built-in instances as files into this directory
        #[arg(long)]
        export_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Relaxed,
    Mixed,
    Tightened,
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    Kkt,
    S,
    M,
    W,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Licq,
    Mfcq,
    Acq,
    Gcq,
}

/// Usage and I/O problems (exit 2) versus verdict failures in corpus mode (exit 1).
enum Failure {
    Usage(String),
    Verdicts,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Document, Failure> {
    load_document(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    match load(path)? {
        Document::Problem(p) => Ok(p),
        Document::PairSet(_) => Err(Failure::Usage(format!(
            "{}: this command needs a problem file, not a pair set",
            path.display()
        ))),
    }
}

/// Reads `--point`, filling in the companion `y` when only `x` is given.
fn point_with_y(p: &Problem, spec: &str, tol: &Tolerances) -> Result<(PairPoint, &'static str), Failure> {
    let pt = parse_point_spec(spec)?;
    if pt.y.is_some() {
        return Ok((pt, "given"));
    }
    let (y, _) = companion_y(&pt.x, p.alpha, tol.zero)?;
    Ok((PairPoint::new(pt.x, y)?, "companion"))
}

/// Writes to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

fn emit<T: Serialize>(kind: &str, tol: &Tolerances, body: &T) -> CmdResult {
    let mut v = json!({ "format": REPORT_FORMAT, "tolerances": tol });
    v[kind] = serde_json::to_value(body).map_err(|e| Failure::Usage(e.to_string()))?;
    out(&(serde_json::to_string_pretty(&v).expect("json value serializes") + "\n"));
    Ok(())
}

fn validate(file: &Path) -> CmdResult {
    match load(file)? {
        Document::Problem(p) => out(&format!(
            "ok: problem `{}` with n = {}, alpha = {}, {} inequality and {} equality constraint(s)\n",
            p.name,
            p.n,
            p.alpha,
            p.g.len(),
            p.h.len()
        )),
        Document::PairSet(s) => out(&format!(
            "ok: pair set `{}` with n = {}, {} inequality and {} equality row(s)\n",
            s.name,
            s.n,
            s.ineq.len(),
            s.eq.len()
        )),
    }
    Ok(())
}

fn reformulate(file: &Path, form: Form, point: Option<&str>, i: Option<&str>, tol: &Tolerances) -> CmdResult {
    let p = load_problem(file)?;
    let rp = match form {
        Form::Relaxed => build_relaxed(&p),
        Form::Mixed => build_mixed_integer(&p),
        Form::Tightened => {
            let spec = point.ok_or_else(|| Failure::Usage("--form tightened needs --point".into()))?;
            let pt = parse_point_spec(spec)?;
            let i = parse_index_list(i.ok_or_else(|| Failure::Usage("--form tightened needs --I".into()))?)?;
            build_tightened(&p, &pt, &i, tol)?
        }
    };
    out(&rp.to_string());
    Ok(())
}

fn check(file: &Path, point: &str, cond: Condition, i: Option<&str>, tol: &Tolerances) -> CmdResult {
    let p = load_problem(file)?;
    let (pt, source) = point_with_y(&p, point, tol)?;
    let cert = match cond {
        Condition::Kkt => check_kkt_relaxed(&p, &pt, tol)?,
        Condition::S => check_s_stationary(&p, &pt, tol)?,
        Condition::M => check_m_stationary(&p, &pt, tol)?,
        Condition::W => {
            let i = i.ok_or_else(|| Failure::Usage("--condition w needs --I".into()))?;
            check_w_stationary(&p, &pt, &parse_index_list(i)?, tol)?
        }
    };
    let body = json!({ "point": pt, "y_source": source, "certificate": cert });
    emit("check", tol, &body)
}

fn cq(file: &Path, point: &str, which: Which, tol: &Tolerances) -> CmdResult {
    let doc = load(file)?;
    let (set, pt): (Result<PairSet, Error>, PairPoint) = match &doc {
        Document::Problem(p) => {
            let (pt, _) = point_with_y(p, point, tol)?;
            (PairSet::from_problem(p), pt)
        }
        Document::PairSet(s) => {
            let pt = parse_point_spec(point)?;
            if pt.y.is_none() {
                return Err(Failure::Usage("a pair-set point needs both x and y".into()));
            }
            (Ok(s.clone()), pt)
        }
    };
    let report = match which {
        Which::Licq | Which::Mfcq => {
            let ag = match &doc {
                Document::Problem(p) => active_gradients_relaxed(p, &pt, tol)?,
                Document::PairSet(s) => s.active_gradients(&pt, tol)?,
            };
            if matches!(which, Which::Licq) {
                check_licq(&ag, tol)
            } else {
                check_mfcq(&ag, tol)?
            }
        }
        Which::Acq | Which::Gcq => match set {
            Ok(s) if matches!(which, Which::Acq) => check_acq(&s, &pt, tol)?,
            Ok(s) => check_gcq(&s, &pt, tol)?,
            Err(Error::NonlinearConstraint(msg)) => {
                let name = if matches!(which, Which::Acq) { "acq" } else { "gcq" };
                let body = json!({
                    "which": name,
                    "verdict": Value::Null,
                    "refused": format!("out of certified range: {msg}; tangent cones are only computed for affine constraints"),
                });
                return emit("cq", tol, &body);
            }
            Err(e) => return Err(e.into()),
        },
    };
    emit("cq", tol, &report)
}

fn solve(file: &Path, starts: usize, table: Option<&Path>, tol: &Tolerances) -> CmdResult {
    let p = load_problem(file)?;
    let opts = SolveOptions {
        starts: starts.max(1),
        ..SolveOptions::default()
    };
    let report = solve_brute(&p, &opts, tol)?;
    if let Some(path) = table {
        std::fs::write(path, report.table_text())
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    emit("solve", tol, &report)
}

fn diagnose(file: &Path, point: &str, tol: &Tolerances) -> CmdResult {
    let p = load_problem(file)?;
    let pt = parse_point_spec(point)?;
    let d = kkt_residual_mpcac_report(&p, &pt.x, pt.y.as_deref(), tol)?;
    emit("diagnosis", tol, &d)
}

fn run_corpus(case: Option<&str>, as_json: bool, export_dir: Option<&Path>, tol: &Tolerances) -> CmdResult {
    let cases = corpus::select(case);
    if cases.is_empty() {
        return Err(Failure::Usage(format!("no corpus case matches `{}`", case.unwrap_or(""))));
    }
    if let Some(dir) = export_dir {
        for path in corpus::export(&cases, dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    let report = corpus::run_corpus(&cases, tol, &SolveOptions::default());
    if as_json {
        out(&(report.to_json() + "\n"));
    } else {
        out(&report.table_text());
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verdicts)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.tol.resolve().and_then(|tol| run(&cli.cmd, &tol));
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdicts) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: &Cmd, tol: &Tolerances) -> CmdResult {
    match cmd {
        Cmd::Validate { file } => validate(file),
        Cmd::Reformulate { file, form, point, i } => {
            reformulate(file, *form, point.as_deref(), i.as_deref(), tol)
        }
        Cmd::Check { file, point, condition, i } => check(file, point, *condition, i.as_deref(), tol),
        Cmd::Cq { file, point, which } => cq(file, point, *which, tol),
        Cmd::Solve { file, starts, emit_table } => solve(file, *starts, emit_table.as_deref(), tol),
        Cmd::Diagnose { file, point } => diagnose(file, point, tol),
        Cmd::Corpus { case, json, export_dir } => {
            run_corpus(case.as_deref(), *json, export_dir.as_deref(), tol)
        }
    }
}
