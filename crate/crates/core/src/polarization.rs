//! Sphere averages of squared products of linear functionals, lower bounds
//! for the sup norm of such products, and a numerical optimizer that
//! certifies product norms from below.
//!
//! For unit `x_1, .., x_n` in `R^d`, the average of `Π (x_i, ξ)²` over the
//! unit sphere is `haf [[A, A], [A, A]] / (d (d+2) .. (d+2n-2))` with `A`
//! the Gram matrix. The optimizer only ever reports the value at a feasible
//! point, which is a lower bound on the supremum.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gram::{keyed_rng, GramFactor, Seed};
use crate::matfun::{self, Config};
use crate::report::{Diagnosis, InequalityReport};
use crate::scalar::{Rational, Scalar};
use crate::wick::{self, conjecture_matrix, McEstimate};

/// Tolerance on `|x_i| = 1` in float mode.
pub const UNIT_TOL: f64 = 1e-12;

/// Starting points with some `|(x_i, ξ)|` below this are resampled.
pub const ZERO_SET_TOL: f64 = 1e-14;

/// `1 / (d (d+2) .. (d+2n-2))`.
pub fn sphere_avg_constant(d: usize, n: usize) -> Result<Rational> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let den: BigInt = (0..n).map(|k| BigInt::from(d + 2 * k)).product();
    Ok(Rational::new(BigInt::one(), den))
}

/// `Γ(d/2) / (2^n Γ(d/2 + n))` through log-gamma.
pub fn sphere_avg_constant_gamma(d: usize, n: usize) -> f64 {
    let h = d as f64 / 2.0;
    (ln_gamma(h) - n as f64 * std::f64::consts::LN_2 - ln_gamma(h + n as f64)).exp()
}

fn check_unit<T: Scalar>(g: &GramFactor<T>) -> Result<()> {
    for (i, v) in g.vectors().iter().enumerate() {
        let norm = crate::gram::dot(v, v);
        let ok = if T::EXACT {
            norm.is_one()
        } else {
            (norm.to_f64() - 1.0).abs() <= 2.0 * UNIT_TOL
        };
        if !ok {
            return Err(Error::invalid(format!("vector {i} is not a unit vector")));
        }
    }
    Ok(())
}

/// Average of `Π (x_i, ξ)²` over the unit sphere of `R^d`, `d = g.dim()`.
pub fn sphere_average_sq<T: Scalar>(g: &GramFactor<T>, cfg: &Config) -> Result<T> {
    check_unit(g)?;
    if g.dim() == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let a = g.gram_matrix();
    let mut v = matfun::haf_with(&conjecture_matrix(&a, 1, cfg)?, cfg)?;
    for k in 0..g.len() {
        v /= &T::from_i64((g.dim() + 2 * k) as i64);
    }
    Ok(v)
}

/// Monte Carlo estimate of the same average with `ξ` a normalized Gaussian.
pub fn mc_sphere_average_sq(
    g: &GramFactor<f64>,
    n_samples: u64,
    seed: Seed,
    exec: Exec,
) -> Result<McEstimate> {
    let vectors = g.vectors();
    wick::mc_mean(g.dim(), n_samples, seed, exec, |xi| {
        let norm2: f64 = xi.iter().map(|x| x * x).sum();
        vectors
            .iter()
            .map(|v| crate::gram::dot(v, xi).powi(2))
            .product::<f64>()
            / norm2.powi(vectors.len() as i32)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Ascent stops once the backtracked step falls below this.
    pub step_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 32,
            max_iterations: 60,
            step_tol: 1e-12,
        }
    }
}

/// Unit vectors plus optimizer settings and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereConfig {
    vectors: GramFactor<f64>,
    pub settings: OptimizerSettings,
    pub seed: Seed,
}

impl SphereConfig {
    pub fn new(vectors: GramFactor<f64>, settings: OptimizerSettings, seed: Seed) -> Result<Self> {
        check_unit(&vectors)?;
        Ok(SphereConfig {
            vectors,
            settings,
            seed,
        })
    }

    /// Normalizes every vector first; zero vectors are rejected.
    pub fn normalized(
        vectors: GramFactor<f64>,
        settings: OptimizerSettings,
        seed: Seed,
    ) -> Result<Self> {
        let d = vectors.dim();
        let unit = vectors
            .vectors()
            .iter()
            .map(|v| {
                let norm = crate::gram::dot(v, v).sqrt();
                if norm == 0.0 {
                    return Err(Error::invalid("zero vector"));
                }
                Ok(v.iter().map(|x| x / norm).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(GramFactor::new(d, unit)?, settings, seed)
    }

    pub fn vectors(&self) -> &GramFactor<f64> {
        &self.vectors
    }
}

/// Orthonormal basis of the span (rows) and the coordinates of each vector
/// in it.
pub fn span_coordinates(g: &GramFactor<f64>) -> (Vec<Vec<f64>>, GramFactor<f64>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in g.vectors() {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = crate::gram::dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = crate::gram::dot(&w, &w).sqrt();
        let scale = crate::gram::dot(v, v).sqrt();
        if norm > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    let coords = g
        .vectors()
        .iter()
        .map(|v| basis.iter().map(|q| crate::gram::dot(q, v)).collect())
        .collect();
    let k = basis.len();
    (
        basis,
        GramFactor::new(k, coords).expect("consistent dimension"),
    )
}

/// Best feasible point found; `value = Π |(x_i, witness)|` with `|witness| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductNorm {
    pub value: f64,
    pub witness: Vec<f64>,
    /// Index of the restart that produced the witness.
    pub restart: usize,
    /// Dimension of the span the search ran in.
    pub span_dim: usize,
}

fn log_objective(y: &[Vec<f64>], eta: &[f64]) -> f64 {
    y.iter().map(|v| crate::gram::dot(v, eta).abs().ln()).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// One restart of projected log-ascent; `None` if no feasible start was
/// found.
fn ascend(
    y: &[Vec<f64>],
    k: usize,
    settings: &OptimizerSettings,
    seed: Seed,
    restart: usize,
) -> Option<(f64, Vec<f64>)> {
    let mut rng = keyed_rng(seed, restart as u64);
    let mut eta = (0..100).find_map(|_| {
        let mut e: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        normalize(&mut e);
        y.iter()
            .all(|v| crate::gram::dot(v, &e).abs() >= ZERO_SET_TOL)
            .then_some(e)
    })?;
    let mut f = log_objective(y, &eta);
    for _ in 0..settings.max_iterations {
        let mut grad = vec![0.0; k];
        for v in y {
            let s = crate::gram::dot(v, &eta);
            grad.iter_mut().zip(v).for_each(|(g, x)| *g += x / s);
        }
        let radial = crate::gram::dot(&grad, &eta);
        grad.iter_mut()
            .zip(&eta)
            .for_each(|(g, e)| *g -= radial * e);
        let gnorm = crate::gram::dot(&grad, &grad).sqrt();
        if !gnorm.is_finite() || gnorm <= 0.0 {
            break;
        }
        let mut step = 0.5;
        let improved = loop {
            let mut cand: Vec<f64> = eta
                .iter()
                .zip(&grad)
                .map(|(e, g)| e + step * g / gnorm)
                .collect();
            normalize(&mut cand);
            let fc = log_objective(y, &cand);
            if fc > f {
                break Some((fc, cand));
            }
            step /= 2.0;
            if step < settings.step_tol {
                break None;
            }
        };
        match improved {
            Some((fc, cand)) => {
                f = fc;
                eta = cand;
            }
            None => break,
        }
    }
    Some((f.exp(), eta))
}

/// Multi-start ascent of `Σ log |(x_i, ξ)|` on the unit sphere of the span
/// of the `x_i`. Restarts are keyed by index and reduced in index order.
pub fn product_norm_sup(cfg: &SphereConfig, exec: Exec) -> Result<ProductNorm> {
    let (basis, y) = span_coordinates(&cfg.vectors);
    let d = cfg.vectors.dim();
    let k = basis.len();
    if y.is_empty() {
        let mut witness = vec![0.0; d];
        if d > 0 {
            witness[0] = 1.0;
        }
        return Ok(ProductNorm {
            value: 1.0,
            witness,
            restart: 0,
            span_dim: 0,
        });
    }
    let runs = exec.map_range(cfg.settings.restarts, |r| {
        ascend(y.vectors(), k, &cfg.settings, cfg.seed, r)
    });
    let (restart, best, eta) = runs
        .into_iter()
        .enumerate()
        .filter_map(|(r, run)| run.map(|(v, e)| (r, v, e)))
        .fold(None::<(usize, f64, Vec<f64>)>, |best, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .ok_or(Error::NoFeasibleStart)?;
    let mut witness = vec![0.0; d];
    for (c, q) in eta.iter().zip(&basis) {
        witness.iter_mut().zip(q).for_each(|(w, x)| *w += c * x);
    }
    normalize(&mut witness);
    let value = cfg
        .vectors
        .vectors()
        .iter()
        .map(|v| crate::gram::dot(v, &witness).abs())
        .product::<f64>();
    debug_assert!((value - best).abs() <= 1e-9 * best.max(1e-300));
    Ok(ProductNorm {
        value,
        witness,
        restart,
        span_dim: k,
    })
}

/// `n (n+2) (n+4) .. (3n-2)`.
pub fn product_bound_denominator(n: usize) -> BigInt {
    (0..n).map(|k| BigInt::from(n + 2 * k)).product()
}

/// `1 / √(n (n+2) .. (3n-2))`.
pub fn product_bound(n: usize) -> f64 {
    let ln: f64 = (0..n).map(|k| ((n + 2 * k) as f64).ln()).sum();
    (-0.5 * ln).exp()
}

/// Everything computed for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCertificate {
    pub n: usize,
    pub d: usize,
    pub span_dim: usize,
    /// Optimizer value, certified from below.
    pub value: f64,
    pub witness: Vec<f64>,
    /// Square root of the sphere average in the span.
    pub sqrt_average: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductBoundReport {
    pub certificate: ProductCertificate,
    /// `product_bound` (value ≥ bound), `product_bound_average`
    /// (√average ≥ bound) and `product_norm_vs_average` (value ≥ √average).
    pub reports: Vec<InequalityReport>,
}

impl ProductBoundReport {
    pub fn holds(&self) -> bool {
        self.reports.iter().all(|r| r.holds)
    }
}

/// Checks the optimizer value and the sphere-average certificate against
/// `1/√(n (n+2) .. (3n-2))`. The average is taken over the span of the
/// vectors, whose dimension is at most `n`.
pub fn verify_product_bound(cfg: &SphereConfig, exec: Exec) -> Result<ProductBoundReport> {
    let n = cfg.vectors.len();
    let norm = product_norm_sup(cfg, exec)?;
    let (_, y) = span_coordinates(&cfg.vectors);
    let sqrt_average = if n == 0 {
        1.0
    } else {
        let hcfg = Config {
            exec,
            ..Config::default()
        };
        let unit = GramFactor::new(
            y.dim(),
            y.vectors()
                .iter()
                .map(|v| {
                    let s = crate::gram::dot(v, v).sqrt();
                    v.iter().map(|x| x / s).collect()
                })
                .collect(),
        )?;
        sphere_average_sq(&unit, &hcfg)?.max(0.0).sqrt()
    };
    let bound = product_bound(n);
    let certificate = ProductCertificate {
        n,
        d: cfg.vectors.dim(),
        span_dim: norm.span_dim,
        value: norm.value,
        witness: norm.witness,
        sqrt_average,
        bound,
    };
    let note = "optimizer value is certified from below".to_string();
    let diag = || Diagnosis {
        notes: vec![note.clone()],
        ..Diagnosis::default()
    };
    let reports = vec![
        InequalityReport::compare("product_bound", certificate.value, bound, None, diag()),
        InequalityReport::compare(
            "product_bound_average",
            sqrt_average,
            bound,
            None,
            Diagnosis::default(),
        ),
        InequalityReport::compare(
            "product_norm_vs_average",
            certificate.value,
            sqrt_average,
            None,
            diag(),
        ),
    ];
    Ok(ProductBoundReport {
        certificate,
        reports,
    })
}

/// One row of the comparison between the three denominators under the
/// square root: `n (n+2) .. (3n-2)`, `(2n)^n / 4` and `n^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub n: usize,
    pub denom_new: String,
    pub denom_rs: String,
    pub denom_conj: String,
    pub bound_new: f64,
    pub bound_rs: f64,
    pub bound_conj: f64,
    pub ratio_new_rs: f64,
    pub ratio_conj_new: f64,
    /// `ln (n (n+2) .. (3n-2))` and `n ln (3√3 n / e)`.
    pub ln_denom_new: f64,
    pub ln_estimate: f64,
    pub estimate_holds: bool,
    pub new_improves_on_rs: bool,
}

/// `3√3 / e`.
pub fn estimate_base() -> f64 {
    3.0 * 3f64.sqrt() / std::f64::consts::E
}

pub fn bound_table(n_max: usize) -> Result<Vec<BoundTable>> {
    if n_max < 2 {
        return Err(Error::invalid("n_max must be at least 2"));
    }
    Ok((2..=n_max)
        .map(|n| {
            let new = product_bound_denominator(n);
            let nb = BigInt::from(n);
            let conj = num_traits::pow(nb.clone(), n);
            let rs = Rational::new(num_traits::pow(BigInt::from(2 * n), n), BigInt::from(4));
            let ln_new: f64 = (0..n).map(|k| ((n + 2 * k) as f64).ln()).sum();
            let ln_rs = n as f64 * ((2 * n) as f64).ln() - 4f64.ln();
            let ln_conj = n as f64 * (n as f64).ln();
            let ln_estimate = n as f64 * (estimate_base() * n as f64).ln();
            let bound_new = (-0.5 * ln_new).exp();
            let bound_rs = (-0.5 * ln_rs).exp();
            let bound_conj = (-0.5 * ln_conj).exp();
            BoundTable {
                n,
                denom_new: new.to_string(),
                denom_rs: rs.to_string(),
                denom_conj: conj.to_string(),
                bound_new,
                bound_rs,
                bound_conj,
                ratio_new_rs: (0.5 * (ln_rs - ln_new)).exp(),
                ratio_conj_new: (0.5 * (ln_new - ln_conj)).exp(),
                ln_denom_new: ln_new,
                ln_estimate,
                estimate_holds: ln_new < ln_estimate,
                new_improves_on_rs: Rational::from_integer(new) < rs,
            }
        })
        .collect())
}

/// Smallest `n` with `n (n+2) .. (3n-2) < (2n)^n / 4`, searched up to `limit`.
pub fn improvement_threshold(limit: usize) -> Option<usize> {
    (2..=limit).find(|&n| {
        let rs = Rational::new(num_traits::pow(BigInt::from(2 * n), n), BigInt::from(4));
        Rational::from_integer(product_bound_denominator(n)) < rs
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Random starting configurations besides the orthonormal one.
    pub starts: usize,
    /// Perturbation rounds per start.
    pub rounds: usize,
    /// Optimizer used inside the search.
    pub inner: OptimizerSettings,
    /// Optimizer used to re-certify the final configuration.
    pub certify: OptimizerSettings,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            starts: 4,
            rounds: 25,
            inner: OptimizerSettings {
                restarts: 8,
                max_iterations: 40,
                step_tol: 1e-10,
            },
            certify: OptimizerSettings {
                restarts: 128,
                max_iterations: 120,
                step_tol: 1e-12,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    /// Product norm of `vectors`, certified from below with the
    /// re-certification settings.
    pub value: f64,
    pub vectors: Vec<Vec<f64>>,
    pub witness: Vec<f64>,
    /// `n^{-n/2}`.
    pub conjectured: f64,
    pub seed: Seed,
}

/// Random local search for unit configurations in `R^n` with a small
/// product norm.
pub fn polarization_search(
    n: usize,
    settings: &SearchSettings,
    seed: Seed,
    exec: Exec,
) -> Result<SearchResult> {
    let conjectured = (-0.5 * n as f64 * (n as f64).ln()).exp();
    let eval = |vs: &[Vec<f64>], opt: &OptimizerSettings, s: u64| -> Result<ProductNorm> {
        let g = GramFactor::new(n, vs.to_vec())?;
        product_norm_sup(
            &SphereConfig::normalized(g, opt.clone(), Seed(seed.0 ^ s))?,
            Exec::Sequential,
        )
    };
    if n == 0 {
        return Ok(SearchResult {
            n,
            value: 1.0,
            vectors: Vec::new(),
            witness: Vec::new(),
            conjectured,
            seed,
        });
    }
    let orthonormal: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let runs = exec.map_range(
        settings.starts + 1,
        |s| -> Result<(ProductNorm, Vec<Vec<f64>>)> {
            let mut rng = keyed_rng(seed, 1_000_000 + s as u64);
            let mut current = if s == 0 {
                orthonormal.clone()
            } else {
                (0..n)
                    .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                    .collect()
            };
            let mut value = eval(&current, &settings.inner, s as u64)?.value;
            let mut sigma = 0.3;
            for round in 0..settings.rounds {
                let mut cand = current.clone();
                let i = rng.random_range(0..n);
                cand[i]
                    .iter_mut()
                    .for_each(|x| *x += sigma * rng.sample::<f64, _>(StandardNormal));
                let norm = crate::gram::dot(&cand[i], &cand[i]).sqrt();
                if norm < 1e-9 {
                    continue;
                }
                cand[i].iter_mut().for_each(|x| *x /= norm);
                let v = eval(&cand, &settings.inner, ((s as u64) << 32) | round as u64)?.value;
                if v < value {
                    value = v;
                    current = cand;
                } else {
                    sigma *= 0.9;
                }
            }
            let certified = eval(&current, &settings.certify, (s as u64) << 48)?;
            Ok((certified, current))
        },
    );
    // Minimize over certified values only: the cheap inner estimate can
    // undershoot the supremum.
    let mut best: Option<(ProductNorm, Vec<Vec<f64>>)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.0.value < b.0.value) {
            best = Some(run);
        }
    }
    let (norm, vectors) = best.expect("at least one start");
    let cfg =
        SphereConfig::normalized(GramFactor::new(n, vectors)?, settings.certify.clone(), seed)?;
    Ok(SearchResult {
        n,
        value: norm.value,
        vectors: cfg.vectors().vectors().to_vec(),
        witness: norm.witness,
        conjectured,
        seed,
    })
}

/// `ln` of a positive big integer.
pub fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}
