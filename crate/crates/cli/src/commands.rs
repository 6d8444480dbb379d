use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Subcommand};
use serde_json::json;

use pfhaf::batteries::{self, BatteryItem, Summary, Theorem};
use pfhaf::blockpoly::{self, BlockFamily, CoeffPolynomial};
use pfhaf::format::{self, AnyMatrix, AnyVectors, Mode};
use pfhaf::gram::{GramFactor, Seed};
use pfhaf::inequalities;
use pfhaf::matfun::{self, oracle};
use pfhaf::polarization::{self, OptimizerSettings, SearchSettings, SphereConfig};
use pfhaf::report::InequalityReport;
use pfhaf::wick::{self, MomentSpec};
use pfhaf::{Config, Exec, Functional, Number, Rational, Scalar, SquareMatrix};

use crate::output::Sink;
use crate::Global;

type Outcome = Result<bool, String>;

fn parse_with<T: FromStr<Err = pfhaf::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: pfhaf::Error| e.to_string())
}

fn err(e: pfhaf::Error) -> String {
    e.to_string()
}

fn config(g: &Global) -> Config {
    let cfg = Config {
        exec: exec(g),
        ..Config::default()
    };
    match g.cap {
        Some(c) => cfg.with_cap(c),
        None => cfg,
    }
}

fn exec(g: &Global) -> Exec {
    if g.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_matrix(path: &Path, mode: Option<Mode>) -> Result<AnyMatrix, String> {
    format::parse_matrix(&read(path)?, mode).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_vectors(path: &Path, mode: Option<Mode>) -> Result<AnyVectors, String> {
    format::parse_vectors(&read(path)?, mode).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads two matrices in one mode. Without `--mode`, exact wins if either
/// file is exact.
fn load_pair(a: &Path, b: &Path, mode: Option<Mode>) -> Result<(AnyMatrix, AnyMatrix), String> {
    let ma = load_matrix(a, mode)?;
    let mb = load_matrix(b, Some(mode.unwrap_or(ma.mode())))?;
    if mode.is_none() && ma.mode() == Mode::Float && load_matrix(b, None)?.mode() == Mode::Exact {
        return Ok((
            load_matrix(a, Some(Mode::Exact))?,
            load_matrix(b, Some(Mode::Exact))?,
        ));
    }
    Ok((ma, mb))
}

fn parse_number<T: Scalar>(s: &str) -> Result<T, String> {
    T::parse_literal(s).ok_or_else(|| format!("not a number: {s:?}"))
}

fn print_report(r: &InequalityReport) {
    let verdict = if !r.holds {
        "VIOLATED"
    } else if !r.is_consistent() {
        "MISMATCH"
    } else {
        "ok"
    };
    let predicted = match r.equality_predicted {
        Some(p) => p.to_string(),
        None => "-".into(),
    };
    println!(
        "{:<24} lhs={} rhs={} slack={} equality={} predicted={} {verdict}",
        r.name, r.lhs, r.rhs, r.slack, r.equality_observed, predicted
    );
    if let Some(v) = &r.diagnosis.vanishing_observed {
        println!(
            "{:<24} vanishing={v:?} predicted={:?}",
            "", r.diagnosis.vanishing_predicted
        );
    }
    for note in &r.diagnosis.notes {
        println!("{:<24} note: {note}", "");
    }
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[arg(value_parser = parse_with::<Functional>)]
    pub functional: Functional,
    pub file: PathBuf,
    /// Compare against the definition sum.
    #[arg(long)]
    pub check: bool,
}

fn compute_typed<T: Scalar>(
    f: Functional,
    m: &SquareMatrix<T>,
    check: bool,
    cfg: &Config,
) -> Result<(Number, bool), String> {
    let v = matfun::evaluate(f, m, cfg).map_err(err)?;
    let ok = if check {
        let o = oracle(f, m, cfg).map_err(err)?;
        let diff = v.clone() - o.clone();
        let agree = diff.negligible(o.to_f64().abs().max(1.0), 1e-9);
        println!("oracle {}", o.to_number());
        agree
    } else {
        true
    };
    Ok((v.to_number(), ok))
}

pub fn compute(g: &Global, a: &ComputeArgs) -> Outcome {
    let m = load_matrix(&a.file, g.mode)?;
    let cfg = config(g);
    let mut sink = Sink::open(g.out.as_deref())?;
    let (value, ok) = match &m {
        AnyMatrix::Exact(m) => compute_typed(a.functional, m, a.check, &cfg)?,
        AnyMatrix::Float(m) => compute_typed(a.functional, m, a.check, &cfg)?,
    };
    println!("{value}");
    sink.emit(&json!({
        "functional": a.functional.name(),
        "n": m.n(),
        "mode": m.mode().to_string(),
        "value": value,
    }))?;
    sink.finish()?;
    if !ok {
        println!("FAIL: kernel and definition sum disagree");
    }
    Ok(ok)
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// `per`, `det`, `pf` or `haf`.
    pub family: String,
    /// The full matrix for per/det, `A` for pf/haf.
    pub file: PathBuf,
    /// `B` for pf/haf.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Size of the top-left block for per/det (default n/2).
    #[arg(long)]
    pub split: Option<usize>,
}

fn print_coeffs<T: Scalar>(label: &str, c: &CoeffPolynomial<T>) {
    let s: Vec<String> = c.coeffs().iter().map(|x| x.to_string()).collect();
    println!("{label:<14} {}", s.join(" "));
}

fn coeffs_typed<T: Scalar>(
    family: &str,
    a: SquareMatrix<T>,
    b: Option<SquareMatrix<T>>,
    split: Option<usize>,
    cfg: &Config,
    sink: &mut Sink,
) -> Outcome {
    let fam = match (family, b) {
        ("per" | "det", None) => {
            let k = split.unwrap_or(a.n() / 2);
            let (a1, b, a2) = a.split(k).map_err(err)?;
            if family == "per" {
                BlockFamily::per(a1, a2, b)
            } else {
                BlockFamily::det(a1, a2, b)
            }
        }
        ("per" | "det", Some(_)) => return Err("per/det take one matrix and --split".into()),
        ("pf", Some(b)) => BlockFamily::pf(a, b),
        ("haf", Some(b)) => BlockFamily::haf(a, b),
        ("pf" | "haf", None) => return Err("pf/haf need --b".into()),
        _ => return Err(format!("unknown family {family:?}")),
    }
    .map_err(err)?;
    let interp = blockpoly::block_poly_interpolate(&fam, None, cfg).map_err(err)?;
    print_coeffs("interpolation", &interp);
    let mut ok = true;
    let mut record = json!({
        "family": family,
        "interpolation": interp.coeffs().iter().map(Scalar::to_number).collect::<Vec<_>>(),
    });
    let subset = match &fam {
        BlockFamily::Pf { a, b } => {
            Some(blockpoly::pf_block_coeffs_subset(a, b, cfg).map_err(err)?)
        }
        BlockFamily::Haf { a, b } => {
            Some(blockpoly::haf_block_coeffs_subset(a, b, cfg).map_err(err)?)
        }
        _ => None,
    };
    if let Some(subset) = subset {
        print_coeffs("subset", &subset);
        let agree = subset.coeffs().iter().zip(interp.coeffs()).all(|(x, y)| {
            let scale = x.to_f64().abs().max(y.to_f64().abs()).max(1.0);
            (x.clone() - y.clone()).negligible(scale, 1e-9)
        });
        println!("agree          {agree}");
        record["subset"] = json!(subset
            .coeffs()
            .iter()
            .map(Scalar::to_number)
            .collect::<Vec<_>>());
        ok &= agree;
    }
    if let BlockFamily::Pf { a, b } = &fam {
        let (af, bf) = (a.to_f64(), b.to_f64());
        if let Ok(spec) = blockpoly::skew_spectrum(&af, &bf) {
            let det_b = matfun::det(&bf).map_err(err)?;
            let pf = blockpoly::product_form_poly(det_b, &spec);
            print_coeffs("product form", &pf);
            let agree = pf.coeffs().iter().zip(interp.coeffs()).all(|(x, y)| {
                let y = y.to_f64();
                (x - y).abs() <= 1e-7 * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
            });
            println!("product agree  {agree}");
            record["product_form"] = json!(pf.coeffs());
            ok &= agree;
        }
    }
    sink.emit(&record)?;
    Ok(ok)
}

pub fn coeffs(g: &Global, a: &CoeffsArgs) -> Outcome {
    let cfg = config(g);
    let mut sink = Sink::open(g.out.as_deref())?;
    let (ma, mb) = match &a.b {
        Some(b) => {
            let (x, y) = load_pair(&a.file, b, g.mode)?;
            (x, Some(y))
        }
        None => (load_matrix(&a.file, g.mode)?, None),
    };
    let ok = match (ma, mb) {
        (AnyMatrix::Exact(x), Some(AnyMatrix::Exact(y))) => {
            coeffs_typed(&a.family, x, Some(y), a.split, &cfg, &mut sink)?
        }
        (AnyMatrix::Float(x), Some(AnyMatrix::Float(y))) => {
            coeffs_typed(&a.family, x, Some(y), a.split, &cfg, &mut sink)?
        }
        (AnyMatrix::Exact(x), None) => coeffs_typed(&a.family, x, None, a.split, &cfg, &mut sink)?,
        (AnyMatrix::Float(x), None) => coeffs_typed(&a.family, x, None, a.split, &cfg, &mut sink)?,
        _ => unreachable!("load_pair returns one mode"),
    };
    sink.finish()?;
    Ok(ok)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Theorem name, or `all` for every battery.
    pub theorem: String,
    /// Fixed dimension (random in the battery's range by default).
    #[arg(long)]
    pub n: Option<usize>,
    /// Run only this instance index (replay).
    #[arg(long)]
    pub instance: Option<u64>,
    /// Check this matrix (or vector list, for `moment`) instead of a battery.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `B` for the pf/haf theorems.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Size of the top-left block.
    #[arg(long)]
    pub split: Option<usize>,
    #[arg(long, default_value = "1")]
    pub lambda: String,
}

fn replay_line(theorem: Theorem, n: Option<usize>, seed: Seed, index: u64) -> String {
    let n = n.map(|n| format!(" --n {n}")).unwrap_or_default();
    format!(
        "pfhaf verify {theorem}{n} --seed {} --instance {index}",
        seed.0
    )
}

fn print_failures(items: &[BatteryItem], replay: impl Fn(u64) -> String, seed: Seed, label: &str) {
    for item in items.iter().filter(|i| !i.is_consistent()) {
        println!("FAIL {label} instance={} seed={}", item.index, seed.0);
        println!("  replay: {}", replay(item.index));
        for line in item.input.lines() {
            println!("  | {line}");
        }
        for r in item.reports.iter().filter(|r| !r.is_consistent()) {
            print_report(r);
        }
    }
}

fn summary_row(label: &str, s: &Summary) {
    println!(
        "{label:<14} {:>9} {:>8} {:>10} {:>10} {:>10}  {}",
        s.instances,
        s.reports,
        s.violations,
        s.mismatches,
        s.equalities,
        if s.passed() { "PASS" } else { "FAIL" }
    );
}

fn summary_header(first: &str) {
    println!(
        "{first:<14} {:>9} {:>8} {:>10} {:>10} {:>10}",
        "instances", "reports", "violations", "mismatches", "equalities"
    );
}

fn given_typed<T: Scalar>(
    theorem: Theorem,
    a: SquareMatrix<T>,
    b: Option<SquareMatrix<T>>,
    args: &VerifyArgs,
    cfg: &Config,
) -> Result<InequalityReport, String> {
    let split = || args.split.unwrap_or(a.n() / 2);
    match theorem {
        Theorem::Classical(c) => {
            let split = c.needs_split().then(split);
            inequalities::check_classical(c, &a, split, cfg)
        }
        Theorem::LiebCoeffs | Theorem::DetCoeffs => {
            let (a1, b, a2) = a.split(split()).map_err(err)?;
            if theorem == Theorem::LiebCoeffs {
                inequalities::check_lieb_coeffs(&a1, &a2, &b, cfg)
            } else {
                inequalities::check_det_coeffs(&a1, &a2, &b, cfg)
            }
        }
        Theorem::PfHaf(w) => {
            let b = b.ok_or("this theorem needs --b")?;
            let lambda: T = parse_number(&args.lambda)?;
            inequalities::check_pfhaf(w, &a, &b, &lambda, cfg)
        }
        Theorem::Moment => unreachable!("moment reads a vector list"),
    }
    .map_err(err)
}

fn verify_given(g: &Global, a: &VerifyArgs, theorem: Theorem, input: &Path) -> Outcome {
    let cfg = config(g);
    let report = if theorem == Theorem::Moment {
        match load_vectors(input, g.mode)? {
            AnyVectors::Exact(v) => inequalities::check_moment(&v, &cfg),
            AnyVectors::Float(v) => inequalities::check_moment(&v, &cfg),
        }
        .map_err(err)?
    } else {
        let (ma, mb) = match &a.b {
            Some(b) => {
                let (x, y) = load_pair(input, b, g.mode)?;
                (x, Some(y))
            }
            None => (load_matrix(input, g.mode)?, None),
        };
        match (ma, mb) {
            (AnyMatrix::Exact(x), Some(AnyMatrix::Exact(y))) => {
                given_typed(theorem, x, Some(y), a, &cfg)?
            }
            (AnyMatrix::Float(x), Some(AnyMatrix::Float(y))) => {
                given_typed(theorem, x, Some(y), a, &cfg)?
            }
            (AnyMatrix::Exact(x), None) => given_typed(theorem, x, None, a, &cfg)?,
            (AnyMatrix::Float(x), None) => given_typed(theorem, x, None, a, &cfg)?,
            _ => unreachable!("load_pair returns one mode"),
        }
    };
    print_report(&report);
    let mut sink = Sink::open(g.out.as_deref())?;
    sink.emit(&report)?;
    sink.finish()?;
    Ok(report.is_consistent())
}

pub fn verify(g: &Global, a: &VerifyArgs) -> Outcome {
    let theorems = if a.theorem == "all" {
        Theorem::all()
    } else {
        vec![parse_with::<Theorem>(&a.theorem)?]
    };
    if let Some(input) = &a.input {
        let [theorem] = theorems[..] else {
            return Err("--input needs a single theorem".into());
        };
        return verify_given(g, a, theorem, input);
    }
    if g.mode == Some(Mode::Float) {
        return Err("batteries run in exact mode".into());
    }
    let cfg = config(g);
    let seed = Seed(g.seed);
    let mut sink = Sink::open(g.out.as_deref())?;
    let mut ok = true;
    summary_header("theorem");
    let mut failures = Vec::new();
    for theorem in theorems {
        let items = match a.instance {
            Some(i) => vec![batteries::battery_instance(theorem, a.n, i, seed, &cfg).map_err(err)?],
            None => batteries::run_battery(theorem, a.n, g.count, seed, &cfg).map_err(err)?,
        };
        let s = Summary::of(&items);
        summary_row(theorem.name(), &s);
        ok &= s.passed();
        for item in &items {
            for rec in item.records(seed) {
                sink.emit(&rec)?;
            }
        }
        failures.push((theorem, items));
    }
    for (theorem, items) in &failures {
        print_failures(
            items,
            |i| replay_line(*theorem, a.n, seed, i),
            seed,
            theorem.name(),
        );
    }
    sink.finish()?;
    Ok(ok)
}

#[derive(Args, Debug)]
pub struct WickArgs {
    /// Vector list `x_1, .., x_n`.
    pub file: Option<PathBuf>,
    /// Comma-separated powers `k_i` (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub powers: Option<Vec<usize>>,
    /// Moment battery `E ξ^{2p}` for `p = 1..p_max` instead of a file.
    #[arg(long)]
    pub p_max: Option<usize>,
    /// Agreement margin in standard errors.
    #[arg(long, default_value_t = 5.0)]
    pub sigmas: f64,
}

fn within(exact: f64, est: &wick::McEstimate, sigmas: f64) -> (f64, bool) {
    let diff = est.mean - exact;
    if est.std_error == 0.0 {
        let ok = diff.abs() <= 1e-12 * exact.abs().max(1.0);
        return (if ok { 0.0 } else { f64::INFINITY }, ok);
    }
    let z = diff / est.std_error;
    (z, z.abs() <= sigmas)
}

fn wick_typed<T: Scalar>(
    v: GramFactor<T>,
    powers: Option<&[usize]>,
    g: &Global,
    a: &WickArgs,
    sink: &mut Sink,
) -> Outcome {
    let cfg = config(g);
    let spec = match powers {
        Some(p) => MomentSpec::new(v, p.to_vec()),
        None => Ok(MomentSpec::linear(v)),
    }
    .map_err(err)?;
    let exact = wick::wick_expectation(&spec, &cfg).map_err(err)?;
    let est =
        wick::mc_expectation(&spec.to_f64(), g.samples, Seed(g.seed), exec(g)).map_err(err)?;
    let (z, ok) = within(exact.to_f64(), &est, a.sigmas);
    println!("exact     {exact}");
    println!(
        "estimate  {} ± {} ({} samples)",
        est.mean, est.std_error, est.n_samples
    );
    println!("z         {z:.3}  {}", if ok { "PASS" } else { "FAIL" });
    sink.emit(&json!({"exact": exact.to_number(), "estimate": est, "z": z, "pass": ok}))?;
    Ok(ok)
}

pub fn wick(g: &Global, a: &WickArgs) -> Outcome {
    let mut sink = Sink::open(g.out.as_deref())?;
    let ok = match (&a.file, a.p_max) {
        (Some(file), None) => match load_vectors(file, g.mode)? {
            AnyVectors::Exact(v) => wick_typed(v, a.powers.as_deref(), g, a, &mut sink)?,
            AnyVectors::Float(v) => wick_typed(v, a.powers.as_deref(), g, a, &mut sink)?,
        },
        (None, Some(p_max)) => {
            let cfg = config(g);
            let mut ok = true;
            println!("{:>3} {:>12} {:>14} {:>8}", "p", "exact", "estimate", "z");
            for p in 1..=p_max {
                let one = GramFactor::new(1, vec![vec![Rational::from_i64(1)]]).map_err(err)?;
                let spec = MomentSpec::new(one, vec![2 * p]).map_err(err)?;
                let exact = wick::wick_expectation(&spec, &cfg).map_err(err)?;
                let df = wick::double_factorial(2 * p as i64 - 1).map_err(err)?;
                let exact_ok = exact == Rational::from_integer(df);
                let est = wick::mc_expectation(&spec.to_f64(), g.samples, Seed(g.seed), exec(g))
                    .map_err(err)?;
                let (z, mc_ok) = within(Scalar::to_f64(&exact), &est, a.sigmas);
                println!(
                    "{p:>3} {exact:>12} {:>14.4} {z:>8.3}  {}",
                    est.mean,
                    if exact_ok && mc_ok { "PASS" } else { "FAIL" }
                );
                sink.emit(&json!({"p": p, "exact": exact.to_number(), "estimate": est, "z": z}))?;
                ok &= exact_ok && mc_ok;
            }
            ok
        }
        _ => return Err("give either a vector file or --p-max".into()),
    };
    sink.finish()?;
    Ok(ok)
}

#[derive(Args, Debug)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, default_value_t = 4)]
    pub p_max: usize,
    /// Exact check when `2pn` is at most this.
    #[arg(long, default_value_t = 16)]
    pub exact_limit: usize,
    /// Monte Carlo screen when `2pn` is at most this.
    #[arg(long, default_value_t = 40)]
    pub mc_limit: usize,
    /// Instances per Monte Carlo cell.
    #[arg(long, default_value_t = 5)]
    pub mc_count: u64,
    /// Samples per Monte Carlo instance.
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
}

pub fn conjecture(g: &Global, a: &ConjectureArgs) -> Outcome {
    let cfg = config(g);
    let inner = Config {
        exec: Exec::Sequential,
        ..cfg.clone()
    };
    let seed = Seed(g.seed);
    let mut sink = Sink::open(g.out.as_deref())?;
    let mut ok = true;
    summary_header("n p 2pn");
    for n in 1..=a.n_max {
        for p in 1..=a.p_max {
            let size = 2 * p * n;
            let (method, items) = if size <= a.exact_limit {
                let items: Result<Vec<_>, _> = cfg
                    .exec
                    .map_range(g.count as usize, |i| {
                        batteries::conjecture_instance(n, p, i as u64, seed, &inner)
                    })
                    .into_iter()
                    .collect();
                ("exact", items.map_err(err)?)
            } else if size <= a.mc_limit {
                let items: Result<Vec<_>, _> = (0..a.mc_count)
                    .map(|i| {
                        batteries::conjecture_mc_instance(
                            n,
                            p,
                            a.mc_samples,
                            a.sigmas,
                            i,
                            seed,
                            &cfg,
                        )
                    })
                    .collect();
                ("mc", items.map_err(err)?)
            } else {
                continue;
            };
            let s = Summary::of(&items);
            summary_row(&format!("{n} {p} {size} {method}"), &s);
            ok &= s.passed();
            for item in &items {
                for rec in item.records(seed) {
                    sink.emit(&rec)?;
                }
            }
            print_failures(
                &items,
                |i| format!("instance {i} of (n={n}, p={p}) under --seed {}", seed.0),
                seed,
                &format!("conjecture n={n} p={p}"),
            );
        }
    }
    sink.finish()?;
    Ok(ok)
}

#[derive(Subcommand, Debug)]
pub enum PolarCommand {
    /// Compare the three lower-bound denominators for n = 2..n_max.
    Bounds {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Sphere average of Π (x_i, ξ)² for a unit vector list.
    Average { file: PathBuf },
    /// Certify the product bound for a vector list.
    Certify {
        file: PathBuf,
        /// Rescale the vectors to unit length first.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 60)]
        max_iter: usize,
    },
    /// Search for configurations in R^n with a small product norm.
    Search {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        starts: usize,
        #[arg(long, default_value_t = 25)]
        rounds: usize,
    },
}

pub fn polar(g: &Global, c: &PolarCommand) -> Outcome {
    let mut sink = Sink::open(g.out.as_deref())?;
    let ok = match c {
        PolarCommand::Bounds { n_max } => {
            let rows = polarization::bound_table(*n_max).map_err(err)?;
            println!(
                "{:>3} {:>24} {:>24} {:>24} {:>12} {:>12} {:>12} {:>9}",
                "n",
                "n(n+2)..(3n-2)",
                "(2n)^n/4",
                "n^n",
                "bound_new",
                "bound_rs",
                "bound_conj",
                "estimate"
            );
            for r in &rows {
                println!(
                    "{:>3} {:>24} {:>24} {:>24} {:>12.6e} {:>12.6e} {:>12.6e} {:>9}",
                    r.n,
                    r.denom_new,
                    r.denom_rs,
                    r.denom_conj,
                    r.bound_new,
                    r.bound_rs,
                    r.bound_conj,
                    r.estimate_holds
                );
                sink.emit(r)?;
            }
            let base = polarization::estimate_base();
            println!("3√3/e = {base:.6} < 2: {}", base < 2.0);
            if let Some(n) = polarization::improvement_threshold(*n_max) {
                println!("n(n+2)..(3n-2) < (2n)^n/4 from n = {n}");
            }
            rows.iter().all(|r| r.estimate_holds) && base < 2.0
        }
        PolarCommand::Average { file } => {
            let cfg = config(g);
            let v = load_vectors(file, g.mode)?;
            let vf = v.to_f64();
            let exact = match &v {
                AnyVectors::Exact(v) => {
                    polarization::sphere_average_sq(v, &cfg).map(|x| x.to_number())
                }
                AnyVectors::Float(v) => {
                    polarization::sphere_average_sq(v, &cfg).map(|x| x.to_number())
                }
            }
            .map_err(err)?;
            let constant = polarization::sphere_avg_constant(vf.dim(), vf.len()).map_err(err)?;
            let est = polarization::mc_sphere_average_sq(&vf, g.samples, Seed(g.seed), exec(g))
                .map_err(err)?;
            let (z, ok) = within(exact.to_f64(), &est, 5.0);
            println!("average   {exact}");
            println!("minimum   {constant}");
            println!("estimate  {} ± {}  z={z:.3}", est.mean, est.std_error);
            sink.emit(&json!({"average": exact, "minimum": constant.to_number(), "estimate": est, "z": z}))?;
            ok
        }
        PolarCommand::Certify {
            file,
            normalize,
            restarts,
            max_iter,
        } => {
            let v = load_vectors(file, Some(Mode::Float))?.to_f64();
            let settings = OptimizerSettings {
                restarts: *restarts,
                max_iterations: *max_iter,
                ..OptimizerSettings::default()
            };
            let cfg = if *normalize {
                SphereConfig::normalized(v, settings, Seed(g.seed))
            } else {
                SphereConfig::new(v, settings, Seed(g.seed))
            }
            .map_err(err)?;
            let rep = polarization::verify_product_bound(&cfg, exec(g)).map_err(err)?;
            let c = &rep.certificate;
            println!("n={} d={} span={}", c.n, c.d, c.span_dim);
            println!("value     {:.12} (certified from below)", c.value);
            println!("sqrt avg  {:.12}", c.sqrt_average);
            println!("bound     {:.12}", c.bound);
            println!("margin    {:.3e}", c.value - c.bound);
            println!("witness   {:?}", c.witness);
            for r in &rep.reports {
                print_report(r);
            }
            sink.emit(c)?;
            rep.holds()
        }
        PolarCommand::Search { n, starts, rounds } => {
            let settings = SearchSettings {
                starts: *starts,
                rounds: *rounds,
                ..SearchSettings::default()
            };
            let r = polarization::polarization_search(*n, &settings, Seed(g.seed), exec(g))
                .map_err(err)?;
            println!(
                "n={} best value {:.12} (certified from below)",
                r.n, r.value
            );
            println!("n^(-n/2)  {:.12}", r.conjectured);
            println!("ratio     {:.9}", r.value / r.conjectured);
            print!(
                "{}",
                format::format_vectors(&GramFactor::new(*n, r.vectors.clone()).map_err(err)?)
            );
            sink.emit(&r)?;
            true
        }
    };
    sink.finish()?;
    Ok(ok)
}
