//! biorth: pipelines over a weight spec with JSON reports and CSV tables.
//!
//! Exit codes: 0 when every identity passes, 1 when some identity fails,
//! 2 on structural errors (bad input, non-existence, quadrature failure).

use biorth::assoc::verify_assoc_identities;
use biorth::bops::{build_system, BuildMethod};
use biorth::coeffs::{verify_degrees, CoeffSet};
use biorth::deform::{rebuild, run_rk4};
use biorth::lax::rhp_jump_check;
use biorth::moments::{heine_oracle, toeplitz_det, weight_moments};
use biorth::report::{rel, SCHEMA};
use biorth::samples::annulus_points;
use biorth::suites::{deform_suite, general_suite, strict_suite};
use biorth::weight::validate_weight;
use biorth::{Config, Error, Evaluator, IdentityReport, MomentTable, SemiClassicalWeight, Trajectory, WeightSpec};
use clap::{Parser, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    Moments,
    Build,
    Assoc,
    Coeffs,
    VerifyAll,
    RhpCheck,
    Deform,
    HeineCheck,
}

#[derive(Parser, Debug)]
#[command(name = "biorth", version, about = "Bi-orthogonal polynomial systems on the unit circle")]
struct Args {
    /// weight spec JSON (singularity list or raw moments)
    #[arg(long)]
    weight: PathBuf,
    #[arg(long, value_enum)]
    cmd: Cmd,
    /// maximum level N
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// seed for all sampled points
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// identity tolerance override
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// RK4 steps for `deform`
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// points per angle for `heine-check`; initial node count for moment quadrature otherwise
    #[arg(long)]
    quad_points: Option<usize>,
    /// trajectory JSON for `deform`
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// time samples written to the flow CSV (defaults to every step)
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Serialize)]
struct RunReport {
    schema: &'static str,
    command: Cmd,
    n: usize,
    seed: u64,
    all_pass: bool,
    worst_ratio: f64,
    failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    suites: Vec<IdentityReport>,
}

/// A structural error, reported with exit code 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(j) => Failure(format!("malformed JSON at line {} column {}: {j}", j.line(), j.column())),
            e => Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, v: &T) -> Run<()> {
    let text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    std::fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

struct Ctx {
    args: Args,
    cfg: Config,
    spec: WeightSpec,
}

impl Ctx {
    fn weight(&self) -> Run<&SemiClassicalWeight> {
        match &self.spec {
            WeightSpec::Singular(w) => Ok(w),
            WeightSpec::Moments(_) => Err(Failure(format!(
                "`{}` needs a semi-classical weight; a raw-moments spec only supports moments, build, assoc, verify-all and heine-check",
                cmd_name(self.args.cmd)
            ))),
        }
    }

    fn moments(&self, need: usize) -> Run<MomentTable> {
        let tbl = match &self.spec {
            WeightSpec::Singular(w) => {
                validate_weight(w, false)?;
                weight_moments(w, self.cfg.window.max(need), &self.cfg)?
            }
            WeightSpec::Moments(t) => t.clone(),
        };
        tbl.require(need)?;
        Ok(tbl)
    }

    fn evaluator(&self, levels: usize) -> Run<Evaluator> {
        let tbl = self.moments(levels + 1)?;
        let sys = build_system(&tbl, levels, BuildMethod::Both, &self.cfg)?;
        let w = match &self.spec {
            WeightSpec::Singular(w) => Some(w.clone()),
            WeightSpec::Moments(_) => None,
        };
        Ok(Evaluator::new(sys, w, &self.cfg)?)
    }
}

fn cmd_name(c: Cmd) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn finish(ctx: &Ctx, reports: Vec<IdentityReport>, notes: Vec<String>) -> Run<bool> {
    let mut failures = Vec::new();
    let mut max = 0.0f64;
    for r in &reports {
        max = max.max(r.worst_ratio());
        for f in r.failures() {
            failures.push(match f.n {
                Some(n) => format!("{}/{} n={} residual {:.3e} > {:.1e} [{}]", r.suite, f.id, n, f.residual, f.tol, f.anchor),
                None => format!("{}/{} residual {:.3e} > {:.1e} [{}]", r.suite, f.id, f.residual, f.tol, f.anchor),
            });
        }
    }
    let rep = RunReport {
        schema: SCHEMA,
        command: ctx.args.cmd,
        n: ctx.args.n,
        seed: ctx.args.seed,
        all_pass: failures.is_empty(),
        worst_ratio: max,
        failures,
        notes,
        suites: reports,
    };
    write_json(&ctx.args.out, "report.json", &rep)?;
    let total: usize = rep.suites.iter().map(|s| s.entries.len()).sum();
    println!("{}: {} identities, max residual {:.3e}", cmd_name(ctx.args.cmd), total, max);
    for f in &rep.failures {
        println!("FAIL {f}");
    }
    Ok(rep.all_pass)
}

fn cmd_moments(ctx: &Ctx) -> Run<bool> {
    let tbl = ctx.moments(ctx.args.n + 1)?;
    write_json(&ctx.args.out, "moments.json", &tbl)?;
    let mut w = csv::Writer::from_path(ctx.args.out.join("moments.csv"))?;
    w.write_record(["k", "re", "im"])?;
    let k = tbl.window as i64;
    for j in -k..=k {
        let v = tbl.get(j);
        w.write_record([j.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    w.flush()?;
    println!("moments: window {} written", tbl.window);
    Ok(true)
}

fn cmd_build(ctx: &Ctx) -> Run<bool> {
    let ev = ctx.evaluator(ctx.args.n)?;
    write_json(&ctx.args.out, "system.json", &ev.sys)?;
    let mut w = csv::Writer::from_path(ctx.args.out.join("levels.csv"))?;
    w.write_record(["n", "kappa_re", "kappa_im", "r_re", "r_im", "rbar_re", "rbar_im", "i0_re", "i0_im"])?;
    for n in 0..=ev.max_level() {
        let lv = ev.sys.level(n);
        let i0 = toeplitz_det(ev.moments(), 0, n)?.value;
        let f = |x: f64| x.to_string();
        w.write_record([
            n.to_string(),
            f(lv.kappa.re),
            f(lv.kappa.im),
            f(lv.r.re),
            f(lv.r.im),
            f(lv.rbar.re),
            f(lv.rbar.im),
            f(i0.re),
            f(i0.im),
        ])?;
    }
    w.flush()?;
    let avoid = ev.weight.as_ref().map(|w| w.locations()).unwrap_or_default();
    let zs = annulus_points(0.2, 2.5, 8, 0.05, &avoid, ctx.cfg.seed);
    let pairs = biorth::samples::point_pairs(0.2, 0.8, 6, ctx.cfg.seed + 1);
    let rep = biorth::bops::verify_scalar_identities(&ev.sys, &zs, &pairs, ctx.cfg.identity_tol);
    finish(ctx, vec![rep], vec![])
}

fn cmd_assoc(ctx: &Ctx) -> Run<bool> {
    let ev = ctx.evaluator(ctx.args.n)?;
    write_json(&ctx.args.out, "assoc.json", &ev.assoc)?;
    let avoid = ev.weight.as_ref().map(|w| w.locations()).unwrap_or_default();
    let zs = annulus_points(0.2, 2.5, 8, 0.05, &avoid, ctx.cfg.seed);
    let rep = verify_assoc_identities(&ev, &zs, ctx.cfg.identity_tol)?;
    finish(ctx, vec![rep], vec![])
}

fn cmd_coeffs(ctx: &Ctx) -> Run<bool> {
    ctx.weight()?;
    let ev = ctx.evaluator(ctx.args.n + 2)?;
    let set = CoeffSet::build(&ev, ctx.args.n + 1, &ctx.cfg)?;
    write_json(&ctx.args.out, "coeffs.json", &set)?;
    let rep = verify_degrees(&set, ctx.cfg.degree_cert, ctx.cfg.fit_residual);
    finish(ctx, vec![rep], vec![])
}

fn cmd_verify_all(ctx: &Ctx) -> Run<bool> {
    let tol = ctx.cfg.identity_tol;
    match &ctx.spec {
        WeightSpec::Singular(w) if w.strict => finish(ctx, vec![strict_suite(w, ctx.args.n, &ctx.cfg)?], vec![]),
        WeightSpec::Singular(_) => {
            let ev = ctx.evaluator(ctx.args.n + 2)?;
            let rep = general_suite(&ev, &ctx.cfg, tol, ctx.args.n)?;
            finish(ctx, vec![rep], vec!["weight is not marked strict: semi-classical suites skipped".into()])
        }
        WeightSpec::Moments(_) => {
            let ev = ctx.evaluator(ctx.args.n + 2)?;
            let rep = general_suite(&ev, &ctx.cfg, tol, ctx.args.n)?;
            finish(ctx, vec![rep], vec!["raw-moments spec: semi-classical suites (coeffs, lax, deform) are disabled".into()])
        }
    }
}

fn cmd_rhp(ctx: &Ctx) -> Run<bool> {
    let ev = ctx.evaluator(ctx.args.n + 1)?;
    let th: Vec<f64> = (0..24).map(|q| 2.0 * std::f64::consts::PI * (q as f64 + 0.37) / 24.0).collect();
    let mut reps = Vec::new();
    for n in 1..=ctx.args.n {
        let mut r = rhp_jump_check(&ev, n, &th, ctx.cfg.rhp_offset, ctx.cfg.fd_tol)?;
        r.merge(biorth::assoc::plemelj_check(&ev, n, &th, ctx.cfg.rhp_offset, ctx.cfg.fd_tol)?);
        reps.push(r);
    }
    finish(ctx, reps, vec![])
}

fn cmd_deform(ctx: &Ctx) -> Run<bool> {
    let w = ctx.weight()?;
    let path = ctx.args.trajectory.as_ref().ok_or_else(|| Failure("`deform` needs --trajectory PATH".into()))?;
    let traj = Trajectory::from_json(&read(path)?)?;
    traj.validate(w)?;
    let ns: Vec<usize> = (1..=ctx.args.n).collect();
    let rep = deform_suite(w, &traj, &ns, ctx.args.steps, &ctx.cfg)?;
    let mut out = csv::Writer::from_path(ctx.args.out.join("flow.csv"))?;
    out.write_record(["n", "t", "kappa_re", "kappa_im", "r_re", "r_im", "rbar_re", "rbar_im", "trace_max"])?;
    let every = match ctx.args.samples {
        Some(s) if s >= 2 => (ctx.args.steps / (s - 1)).max(1),
        _ => 1,
    };
    for &n in &ns {
        let (st, _) = rebuild(w, &traj, n, n + 2, traj.t_span.0, &ctx.cfg)?;
        let states = run_rk4(&st, &traj, ctx.args.steps)?;
        for (q, s) in states.iter().enumerate() {
            if q % every != 0 && q + 1 != states.len() {
                continue;
            }
            let tr = s.a.iter().map(|a| (a[(0, 0)] + a[(1, 1)]).norm()).fold(0.0, f64::max);
            let f = |x: f64| x.to_string();
            out.write_record([
                n.to_string(),
                f(s.t),
                f(s.kappa.re),
                f(s.kappa.im),
                f(s.r.re),
                f(s.r.im),
                f(s.rbar.re),
                f(s.rbar.im),
                f(tr),
            ])?;
        }
    }
    out.flush()?;
    finish(ctx, vec![rep], vec![])
}

fn cmd_heine(ctx: &Ctx) -> Run<bool> {
    let top = ctx.args.n.min(3);
    let tbl = ctx.moments(top + 1)?;
    let p = ctx.args.quad_points.unwrap_or(48);
    let mut rep = IdentityReport::new("heine");
    let mut notes = Vec::new();
    if ctx.args.n > 3 {
        notes.push(format!("heine averages limited to N <= 3; requested {}", ctx.args.n));
    }
    for n in 1..=top {
        let want = toeplitz_det(&tbl, 0, n)?.value;
        let got = match &ctx.spec {
            WeightSpec::Singular(w) => heine_oracle(|z| w.eval(z), n, p)?,
            WeightSpec::Moments(t) => heine_oracle(|z| Ok(t.laurent_eval(z)), n, p)?,
        };
        rep.record("heine", "moments:heine", Some(n), rel(got, want), ctx.args.tol.unwrap_or(1e-6));
    }
    finish(ctx, vec![rep], notes)
}

fn run(args: Args) -> Run<bool> {
    let mut cfg = Config { seed: args.seed, ..Config::default() };
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(Failure(format!("--tol must be positive, got {t}")));
        }
        cfg.identity_tol = t;
    }
    if let Some(p) = args.quad_points {
        if args.cmd != Cmd::HeineCheck {
            cfg.quad_start = p.max(8);
        }
    }
    let spec = WeightSpec::from_json(&read(&args.weight)?)?;
    std::fs::create_dir_all(&args.out)?;
    let ctx = Ctx { args, cfg, spec };
    match ctx.args.cmd {
        Cmd::Moments => cmd_moments(&ctx),
        Cmd::Build => cmd_build(&ctx),
        Cmd::Assoc => cmd_assoc(&ctx),
        Cmd::Coeffs => cmd_coeffs(&ctx),
        Cmd::VerifyAll => cmd_verify_all(&ctx),
        Cmd::RhpCheck => cmd_rhp(&ctx),
        Cmd::Deform => cmd_deform(&ctx),
        Cmd::HeineCheck => cmd_heine(&ctx),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
