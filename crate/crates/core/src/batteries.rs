//! Seeded instance batteries for every verifier.
//!
//! Instance `i` of a battery is drawn from the stream keyed by `(seed, i)`,
//! so any single instance can be regenerated without running the others.
//! The generators deliberately over-sample the equality cases: diagonal
//! matrices, zero rows, `B = 0`, singular blocks, low-rank and sparse
//! factors.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::format::format_vectors;
use crate::gram::{block_diagonal, zero_out, GramFactor, InstanceRng, Seed};
use crate::inequalities::{self, Classical, PfHaf};
use crate::matfun::Config;
use crate::matrix::{Kind, RectMatrix, SquareMatrix};
use crate::report::{InequalityReport, Record};
use crate::scalar::{Rational, Scalar};
use crate::wick;

/// The `λ` values at which the block inequalities are checked.
pub const LAMBDAS: [(i64, i64); 4] = [(0, 1), (1, 2), (1, 1), (2, 1)];

/// Largest dimension drawn when none is given.
pub const DEFAULT_MAX_N: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Classical(Classical),
    LiebCoeffs,
    DetCoeffs,
    PfHaf(PfHaf),
    Moment,
}

impl Theorem {
    pub fn all() -> Vec<Theorem> {
        let mut v: Vec<Theorem> = Classical::ALL.into_iter().map(Theorem::Classical).collect();
        v.extend([Theorem::LiebCoeffs, Theorem::DetCoeffs]);
        v.extend(PfHaf::ALL.into_iter().map(Theorem::PfHaf));
        v.push(Theorem::Moment);
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Classical(c) => c.name(),
            Theorem::LiebCoeffs => "lieb_coeffs",
            Theorem::DetCoeffs => "det_coeffs",
            Theorem::PfHaf(c) => c.name(),
            Theorem::Moment => "moment",
        }
    }

    /// Smallest dimension the battery can use.
    pub fn min_n(self) -> usize {
        match self {
            Theorem::Classical(c) if c.needs_split() => 2,
            Theorem::LiebCoeffs | Theorem::DetCoeffs => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::all()
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem {s:?}")))
    }
}

/// One generated instance and the reports checked on it.
#[derive(Clone, Debug, PartialEq)]
pub struct BatteryItem {
    pub index: u64,
    pub input: String,
    pub reports: Vec<InequalityReport>,
}

impl BatteryItem {
    pub fn is_consistent(&self) -> bool {
        self.reports.iter().all(InequalityReport::is_consistent)
    }

    pub fn records(&self, seed: Seed) -> Vec<Record> {
        self.reports
            .iter()
            .map(|r| Record {
                instance: self.index,
                seed,
                input: Some(self.input.clone()),
                report: r.clone(),
            })
            .collect()
    }
}

/// Tallies over a battery.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub reports: usize,
    pub violations: usize,
    pub mismatches: usize,
    pub equalities: usize,
}

impl Summary {
    pub fn of(items: &[BatteryItem]) -> Summary {
        let mut s = Summary {
            instances: items.len(),
            ..Summary::default()
        };
        for r in items.iter().flat_map(|i| &i.reports) {
            s.reports += 1;
            s.violations += usize::from(!r.holds);
            s.mismatches += usize::from(r.holds && !r.is_consistent());
            s.equalities += usize::from(r.equality_observed);
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.mismatches == 0
    }
}

/// Runs instances `0..count`. Instances are independent; the output is in
/// index order.
pub fn run_battery(
    theorem: Theorem,
    n: Option<usize>,
    count: u64,
    seed: Seed,
    cfg: &Config,
) -> Result<Vec<BatteryItem>> {
    let inner = Config {
        exec: Exec::Sequential,
        ..cfg.clone()
    };
    cfg.exec
        .map_range(count as usize, |i| {
            battery_instance(theorem, n, i as u64, seed, &inner)
        })
        .into_iter()
        .collect()
}

fn draw_n(g: &mut InstanceRng, n: Option<usize>, min: usize) -> Result<usize> {
    match n {
        Some(n) if n < min => Err(Error::invalid(format!("this battery needs n >= {min}"))),
        Some(n) => Ok(n),
        None => Ok(g.range(min, DEFAULT_MAX_N.max(min))),
    }
}

fn rect_text(b: &RectMatrix<Rational>) -> String {
    let mut s = format!("{} {}\n", b.nrows(), b.ncols());
    for i in 0..b.nrows() {
        let row: Vec<String> = (0..b.ncols()).map(|j| b.get(i, j).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn rect_product(a: &RectMatrix<Rational>, b: &RectMatrix<Rational>) -> RectMatrix<Rational> {
    RectMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        let mut s = Rational::zero();
        for k in 0..a.ncols() {
            s.add_product(a.get(i, k), b.get(k, j));
        }
        s
    })
}

/// PSD matrix from a mix of generic, singular, diagonal, zero-row and
/// block-diagonal cases.
pub fn psd_mix(g: &mut InstanceRng, n: usize, split: Option<usize>) -> SquareMatrix<Rational> {
    match g.range(0, 4) {
        0 => g.posdef(n),
        1 => {
            let r = g.range(0, n.saturating_sub(1));
            g.psd(n, r).expect("rank below n")
        }
        2 => g.diagonal_psd(n, 0.25),
        3 => {
            let r = g.range(0, n);
            let m = g.psd(n, r).expect("rank at most n");
            let i = g.range(0, n - 1);
            zero_out(&m, i)
        }
        _ => {
            let k = split.unwrap_or_else(|| if n >= 2 { g.range(1, n - 1) } else { n });
            let a = g.posdef(k);
            let b = g.posdef(n - k);
            block_diagonal(&a, &b)
        }
    }
}

fn skew_mix(g: &mut InstanceRng, n: usize) -> SquareMatrix<Rational> {
    match g.range(0, 3) {
        0 => g.skew(n),
        1 => {
            let k = 2 * g.range(0, n / 2);
            g.skew_low_rank(n, k)
        }
        2 => SquareMatrix::zeros(n, Kind::Skew),
        _ => {
            // One nonzero pair.
            let v = g.int();
            let (i, j) = (g.range(0, n - 1), g.range(0, n - 1));
            SquareMatrix::from_fn(n, Kind::Skew, |r, c| {
                if (r, c) == (i.min(j), i.max(j)) && i != j {
                    Rational::from_i64(v)
                } else if (r, c) == (i.max(j), i.min(j)) && i != j {
                    Rational::from_i64(-v)
                } else {
                    Rational::zero()
                }
            })
            .unwrap()
        }
    }
}

fn symmetric_mix(g: &mut InstanceRng, n: usize) -> SquareMatrix<Rational> {
    match g.range(0, 3) {
        0 => g.symmetric(n),
        1 => SquareMatrix::diagonal((0..n).map(|_| Rational::from_i64(g.int())).collect()),
        2 => g.sparse_symmetric(n, 0.75),
        _ => SquareMatrix::zeros(n, Kind::Symmetric),
    }
}

fn b_mix(g: &mut InstanceRng, n: usize) -> SquareMatrix<Rational> {
    match g.range(0, 3) {
        0 => g.posdef(n),
        1 => {
            let r = g.range(0, n.saturating_sub(1));
            g.psd(n, r).expect("rank below n")
        }
        2 => g.diagonal_psd(n, 0.0),
        _ => SquareMatrix::identity(n),
    }
}

fn vectors_mix(g: &mut InstanceRng, n: usize) -> GramFactor<Rational> {
    let d = g.range(1, 4);
    let random = |g: &mut InstanceRng, d: usize| {
        (0..d)
            .map(|_| Rational::from_i64(g.int()))
            .collect::<Vec<_>>()
    };
    let scaled_basis = |g: &mut InstanceRng, d: usize, k: usize| {
        let c = loop {
            let c = g.int();
            if c != 0 {
                break c;
            }
        };
        (0..d)
            .map(|j| Rational::from_i64(if j == k { c } else { 0 }))
            .collect::<Vec<_>>()
    };
    let (d, vectors) = match g.range(0, 4) {
        0 => (d, (0..n).map(|_| random(g, d)).collect()),
        1 => {
            // Orthogonal: distinct basis directions, then zero vectors.
            let mut perm: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                perm.swap(i, g.range(0, i));
            }
            let v = (0..n)
                .map(|i| {
                    if i < d {
                        scaled_basis(g, d, perm[i])
                    } else {
                        vec![Rational::zero(); d]
                    }
                })
                .collect();
            (d, v)
        }
        2 => {
            let mut v: Vec<Vec<Rational>> = (0..n).map(|_| random(g, d)).collect();
            let k = g.range(0, n - 1);
            v[k] = vec![Rational::zero(); d];
            (d, v)
        }
        3 => {
            let mut v: Vec<Vec<Rational>> = (0..n).map(|_| random(g, d)).collect();
            let (a, b) = (g.range(0, n - 1), g.range(0, n - 1));
            v[a] = v[b].clone();
            (d, v)
        }
        _ => (n, (0..n).map(|i| scaled_basis(g, n, i)).collect()),
    };
    GramFactor::new(d, vectors).expect("consistent dimension")
}

/// Generates instance `index` and runs the theorem's verifier on it.
pub fn battery_instance(
    theorem: Theorem,
    n: Option<usize>,
    index: u64,
    seed: Seed,
    cfg: &Config,
) -> Result<BatteryItem> {
    let mut g = InstanceRng::for_instance(seed, index);
    let n = draw_n(&mut g, n, theorem.min_n())?;
    let (input, reports) = match theorem {
        Theorem::Classical(which) => {
            let split = which.needs_split().then(|| g.range(1, n - 1));
            let a = psd_mix(&mut g, n, split);
            let input = match split {
                Some(k) => format!("# split {k}\n{a}"),
                None => a.to_string(),
            };
            (
                input,
                vec![inequalities::check_classical(which, &a, split, cfg)?],
            )
        }
        Theorem::LiebCoeffs | Theorem::DetCoeffs => {
            let (a1, a2, b) = lieb_blocks(&mut g, theorem, n);
            let input = format!("# A'\n{a1}# A''\n{a2}# B\n{}", rect_text(&b));
            let report = if theorem == Theorem::LiebCoeffs {
                inequalities::check_lieb_coeffs(&a1, &a2, &b, cfg)?
            } else {
                inequalities::check_det_coeffs(&a1, &a2, &b, cfg)?
            };
            (input, vec![report])
        }
        Theorem::PfHaf(which) => {
            let a = match which {
                PfHaf::PfCoeffs | PfHaf::PfIneq => skew_mix(&mut g, n),
                PfHaf::HafCoeffs | PfHaf::HafIneq => symmetric_mix(&mut g, n),
            };
            let b = b_mix(&mut g, n);
            let input = format!("# A\n{a}# B\n{b}");
            let reports = match which {
                PfHaf::PfCoeffs | PfHaf::HafCoeffs => vec![inequalities::check_pfhaf(
                    which,
                    &a,
                    &b,
                    &Rational::zero(),
                    cfg,
                )?],
                PfHaf::PfIneq | PfHaf::HafIneq => LAMBDAS
                    .iter()
                    .map(|&(p, q)| {
                        inequalities::check_pfhaf(which, &a, &b, &Rational::from_ratio(p, q), cfg)
                    })
                    .collect::<Result<_>>()?,
            };
            (input, reports)
        }
        Theorem::Moment => {
            let v = vectors_mix(&mut g, n);
            (
                format_vectors(&v),
                vec![inequalities::check_moment(&v, cfg)?],
            )
        }
    };
    Ok(BatteryItem {
        index,
        input,
        reports,
    })
}

fn lieb_blocks(
    g: &mut InstanceRng,
    theorem: Theorem,
    n: usize,
) -> (
    SquareMatrix<Rational>,
    SquareMatrix<Rational>,
    RectMatrix<Rational>,
) {
    let p = g.range(1, (n - 1).min(4));
    let q = n - p;
    if theorem == Theorem::DetCoeffs && g.chance(0.25) {
        // Full PSD matrix with a singular A'.
        let r = g.range(0, p - 1);
        let full = g.psd(n, r).expect("rank below n");
        let (a1, b, a2) = full.split(p).expect("1 <= p < n");
        return (a1, a2, b);
    }
    let singular_blocks = theorem == Theorem::LiebCoeffs && g.chance(0.15);
    let block = |g: &mut InstanceRng, k: usize| {
        if singular_blocks {
            let r = g.range(0, k - 1);
            g.psd(k, r).expect("rank below k")
        } else if g.chance(0.2) {
            g.diagonal_psd(k, 0.0)
        } else {
            g.posdef(k)
        }
    };
    let a1 = block(g, p);
    let a2 = block(g, q);
    let b = match g.range(0, 4) {
        0 => g.sparse_rect(p, q, 0.7),
        1 => g.rect(p, q),
        2 => RectMatrix::zeros(p, q),
        3 => {
            let k = g.range(0, p.min(q));
            let (l, r) = (g.rect(p, k), g.rect(k, q));
            rect_product(&l, &r)
        }
        // Large enough that the assembled matrix is usually indefinite.
        _ => g.rect(p, q).map(|x| x * Rational::from_i64(5)),
    };
    (a1, a2, b)
}

/// Exact conjecture check on instance `index` of a PSD mix.
pub fn conjecture_instance(
    n: usize,
    p: usize,
    index: u64,
    seed: Seed,
    cfg: &Config,
) -> Result<BatteryItem> {
    let mut g = InstanceRng::for_instance(seed, index);
    let a = psd_mix(&mut g, n, None);
    let report = wick::conjecture_check_exact(&a, p, cfg)?;
    Ok(BatteryItem {
        index,
        input: a.to_string(),
        reports: vec![report],
    })
}

/// Monte Carlo screen of the conjecture on instance `index`. The sample
/// seed is derived from the instance seed and index.
pub fn conjecture_mc_instance(
    n: usize,
    p: usize,
    n_samples: u64,
    sigmas: f64,
    index: u64,
    seed: Seed,
    cfg: &Config,
) -> Result<BatteryItem> {
    let mut g = InstanceRng::for_instance(seed, index);
    let a = psd_mix(&mut g, n, None);
    let sample_seed = Seed(seed.0 ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let report = wick::conjecture_check_mc(&a, p, n_samples, sigmas, sample_seed, cfg)?;
    Ok(BatteryItem {
        index,
        input: a.to_string(),
        reports: vec![report],
    })
}
