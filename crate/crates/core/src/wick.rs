//! Gaussian moments: exact values through hafnians of Gram matrices, Monte
//! Carlo estimates, and the moment conjecture scanner.
//!
//! For a standard normal vector `ξ` in `R^d` and vectors `x_1, .., x_n`,
//! `E Π (x_i, ξ) = haf G` where `G` is the Gram matrix of the `x_i`.

use num_bigint::BigInt;
use num_traits::One;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gram::{self, keyed_rng, GramFactor, Seed};
use crate::matfun::{self, Config};
use crate::matrix::{Kind, SquareMatrix};
use crate::report::{Diagnosis, InequalityReport};
use crate::scalar::{Rational, Scalar};

/// Samples per random stream. Stream `c` produces samples
/// `c * MC_CHUNK .. (c + 1) * MC_CHUNK`.
pub const MC_CHUNK: u64 = 4096;

/// `k!! = k (k-2) (k-4) ..` for odd `k ≥ -1`, with `(-1)!! = 1`.
pub fn double_factorial(k: i64) -> Result<BigInt> {
    if k < -1 || k % 2 == 0 {
        return Err(Error::invalid(format!(
            "double factorial needs an odd k >= -1, got {k}"
        )));
    }
    let mut acc = BigInt::one();
    let mut j = k;
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    Ok(acc)
}

/// `E Π (x_i, ξ)^{p_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec<T> {
    factors: GramFactor<T>,
    powers: Vec<usize>,
}

impl<T: Scalar> MomentSpec<T> {
    pub fn new(factors: GramFactor<T>, powers: Vec<usize>) -> Result<Self> {
        if powers.len() != factors.len() {
            return Err(Error::SizeMismatch(format!(
                "{} vectors, {} powers",
                factors.len(),
                powers.len()
            )));
        }
        if powers.contains(&0) {
            return Err(Error::invalid("powers must be positive"));
        }
        Ok(MomentSpec { factors, powers })
    }

    /// Every power equal to one.
    pub fn linear(factors: GramFactor<T>) -> Self {
        let powers = vec![1; factors.len()];
        MomentSpec { factors, powers }
    }

    pub fn factors(&self) -> &GramFactor<T> {
        &self.factors
    }

    pub fn powers(&self) -> &[usize] {
        &self.powers
    }

    pub fn total_degree(&self) -> usize {
        self.powers.iter().sum()
    }

    /// The multiset with `x_i` repeated `p_i` times.
    pub fn expanded(&self) -> GramFactor<T> {
        let vectors = self
            .factors
            .vectors()
            .iter()
            .zip(&self.powers)
            .flat_map(|(v, &p)| std::iter::repeat_n(v.clone(), p))
            .collect();
        GramFactor::new(self.factors.dim(), vectors).expect("same dimension")
    }

    pub fn to_f64(&self) -> MomentSpec<f64> {
        MomentSpec {
            factors: self.factors.to_f64(),
            powers: self.powers.clone(),
        }
    }
}

/// `haf` of the Gram matrix of the expanded multiset; zero for odd total
/// degree.
pub fn wick_expectation<T: Scalar>(spec: &MomentSpec<T>, cfg: &Config) -> Result<T> {
    let g = spec.expanded().gram_matrix();
    if g.n() % 2 == 1 {
        return Ok(T::zero());
    }
    matfun::haf_with(&g, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n_samples`.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: Seed,
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
        }
    }
}

/// Mean of `f(ξ)` over `n_samples` standard normal draws in `R^d`.
/// Sample `i` comes from stream `i / MC_CHUNK`, and chunks are merged in
/// index order, so the result does not depend on `exec` or thread count.
pub(crate) fn mc_mean<F>(
    d: usize,
    n_samples: u64,
    seed: Seed,
    exec: Exec,
    f: F,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if n_samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
    }
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let partial = exec.map_range(chunks as usize, |c| {
        let c = c as u64;
        let mut rng = keyed_rng(seed, c);
        let mut xi = vec![0.0; d];
        let mut acc = Moments::default();
        for _ in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(n_samples) {
            for x in &mut xi {
                *x = StandardNormal.sample(&mut rng);
            }
            acc.push(f(&xi));
        }
        acc
    });
    let total = partial.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.n - 1) as f64;
    Ok(McEstimate {
        mean: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        n_samples,
        seed,
    })
}

/// Monte Carlo estimate of `E Π (x_i, ξ)^{p_i}`.
pub fn mc_expectation(
    spec: &MomentSpec<f64>,
    n_samples: u64,
    seed: Seed,
    exec: Exec,
) -> Result<McEstimate> {
    let vectors = spec.factors.vectors();
    let powers: Vec<i32> = spec.powers.iter().map(|&p| p as i32).collect();
    mc_mean(spec.factors.dim(), n_samples, seed, exec, |xi| {
        vectors
            .iter()
            .zip(&powers)
            .map(|(v, &p)| gram::dot(v, xi).powi(p))
            .product()
    })
}

/// Importance-sampled estimate of `E Π (x_i, ξ)^{p_i}`: draws come from
/// `N(0, s² I)` and are weighted by the density ratio. With
/// `s² = 1 + (total degree) / d` the weighted integrand is bounded, which
/// keeps the standard error honest for high moments. `scale_sq = 1` is plain
/// sampling.
pub fn mc_expectation_scaled(
    spec: &MomentSpec<f64>,
    scale_sq: f64,
    n_samples: u64,
    seed: Seed,
    exec: Exec,
) -> Result<McEstimate> {
    if !scale_sq.is_finite() || scale_sq <= 0.5 {
        return Err(Error::invalid("scale must exceed 1/2"));
    }
    let vectors = spec.factors.vectors();
    let powers: Vec<i32> = spec.powers.iter().map(|&p| p as i32).collect();
    let d = spec.factors.dim();
    let s = scale_sq.sqrt();
    let log_norm = d as f64 * s.ln();
    mc_mean(d, n_samples, seed, exec, |z| {
        let z2: f64 = z.iter().map(|x| x * x).sum();
        let weight = (log_norm - 0.5 * (scale_sq - 1.0) * z2).exp();
        vectors
            .iter()
            .zip(&powers)
            .map(|(v, &p)| (s * gram::dot(v, z)).powi(p))
            .product::<f64>()
            * weight
    })
}

/// Proposal variance used by the conjecture screen.
pub fn default_scale_sq(spec: &MomentSpec<f64>) -> f64 {
    1.0 + spec.total_degree() as f64 / spec.factors.dim().max(1) as f64
}

/// The `2pn × 2pn` matrix made of `2p × 2p` copies of `A`.
pub fn conjecture_matrix<T: Scalar>(
    a: &SquareMatrix<T>,
    p: usize,
    cfg: &Config,
) -> Result<SquareMatrix<T>> {
    if p == 0 {
        return Err(Error::invalid("p must be positive"));
    }
    if a.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "conjecture_matrix",
            expected: "symmetric",
        });
    }
    let n = a.n();
    let size = 2 * p * n;
    if size > cfg.haf_cap {
        return Err(Error::DimensionCap {
            op: "conjecture_matrix",
            n: size,
            cap: cfg.haf_cap,
        });
    }
    SquareMatrix::from_fn(size, Kind::Symmetric, |i, j| a.get(i % n, j % n).clone())
}

/// `((2p-1)!!)^n Π a_ii^p`.
fn conjecture_rhs(a: &SquareMatrix<Rational>, p: usize) -> Rational {
    let df = Rational::from_integer(double_factorial(2 * p as i64 - 1).expect("odd"));
    let mut rhs = Rational::one();
    for i in 0..a.n() {
        rhs *= &df;
        for _ in 0..p {
            rhs *= a.get(i, i);
        }
    }
    rhs
}

fn conjecture_diagnosis(a: &SquareMatrix<Rational>, p: usize, cfg: &Config) -> (bool, Diagnosis) {
    let diag = matfun::diagnostics(a, cfg);
    let predicted = diag.is_diagonal || !diag.zero_rows.is_empty();
    let mut diagnosis = Diagnosis {
        zero_rows: Some(diag.zero_rows),
        is_diagonal: Some(diag.is_diagonal),
        rank: Some(diag.rank),
        ..Diagnosis::default()
    };
    if p >= 2 {
        diagnosis
            .notes
            .push("equality condition for p >= 2 is conjectural".to_string());
    }
    (predicted, diagnosis)
}

fn require_psd(a: &SquareMatrix<Rational>) -> Result<()> {
    if a.kind() != Kind::Symmetric || !gram::is_psd(a) {
        return Err(Error::NotPsd);
    }
    Ok(())
}

/// Exact check of `haf(conjecture_matrix(A, p)) ≥ ((2p-1)!!)^n Π a_ii^p`.
pub fn conjecture_check_exact(
    a: &SquareMatrix<Rational>,
    p: usize,
    cfg: &Config,
) -> Result<InequalityReport> {
    require_psd(a)?;
    let lhs = matfun::haf_with(&conjecture_matrix(a, p, cfg)?, cfg)?;
    let rhs = conjecture_rhs(a, p);
    let (predicted, diagnosis) = conjecture_diagnosis(a, p, cfg);
    Ok(InequalityReport::compare(
        format!("conjecture_p{p}"),
        lhs,
        rhs,
        Some(predicted),
        diagnosis,
    ))
}

/// Monte Carlo screen of the same inequality: `lhs` is the importance-sampled
/// estimate plus `sigmas` standard errors, so `holds` means no violation was
/// detected. Never reports equality.
pub fn conjecture_check_mc(
    a: &SquareMatrix<Rational>,
    p: usize,
    n_samples: u64,
    sigmas: f64,
    seed: Seed,
    cfg: &Config,
) -> Result<InequalityReport> {
    require_psd(a)?;
    if p == 0 {
        return Err(Error::invalid("p must be positive"));
    }
    let factor = gram::factor_psd(a)?.to_f64();
    let n = factor.len();
    let spec = MomentSpec::new(factor, vec![2 * p; n])?;
    let est = mc_expectation_scaled(&spec, default_scale_sq(&spec), n_samples, seed, cfg.exec)?;
    let rhs = conjecture_rhs(a, p).to_f64();
    let upper = est.mean + sigmas * est.std_error;
    let (_, mut diagnosis) = conjecture_diagnosis(a, p, cfg);
    diagnosis.std_error = Some(est.std_error);
    diagnosis
        .notes
        .push(format!("estimate {} over {} samples", est.mean, n_samples));
    let mut r =
        InequalityReport::compare(format!("conjecture_mc_p{p}"), upper, rhs, None, diagnosis);
    r.equality_observed = false;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn unit(d: usize, i: usize) -> Vec<f64> {
        (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn double_factorial_values() {
        let v: Vec<i64> = [-1, 1, 3, 5, 7, 9]
            .iter()
            .map(|&k| double_factorial(k).unwrap().try_into().unwrap())
            .collect();
        assert_eq!(v, vec![1, 1, 3, 15, 105, 945]);
        assert!(double_factorial(4).is_err());
        assert!(double_factorial(-3).is_err());
    }

    #[test]
    fn wick_examples() {
        let cfg = Config::default();
        let e1 = GramFactor::new(2, vec![vec![r(1), r(0)]]).unwrap();
        for (p, want) in [(1, 0), (2, 1), (3, 0), (4, 3), (6, 15)] {
            let spec = MomentSpec::new(e1.clone(), vec![p]).unwrap();
            assert_eq!(wick_expectation(&spec, &cfg).unwrap(), r(want), "p = {p}");
        }
        let ortho = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(0), r(1)]]).unwrap();
        assert_eq!(
            wick_expectation(&MomentSpec::linear(ortho.clone()), &cfg).unwrap(),
            r(0)
        );
        assert_eq!(
            wick_expectation(&MomentSpec::new(ortho, vec![2, 2]).unwrap(), &cfg).unwrap(),
            r(1)
        );
        assert!(MomentSpec::new(e1.clone(), vec![0]).is_err());
        assert!(MomentSpec::new(e1, vec![1, 1]).is_err());
    }

    #[test]
    fn mc_examples() {
        let e1 = GramFactor::new(2, vec![unit(2, 0)]).unwrap();
        let ortho = GramFactor::new(2, vec![unit(2, 0), unit(2, 1)]).unwrap();
        let cases = [
            (MomentSpec::new(e1.clone(), vec![2]).unwrap(), 1.0),
            (MomentSpec::new(e1, vec![4]).unwrap(), 3.0),
            (MomentSpec::new(ortho, vec![2, 2]).unwrap(), 1.0),
        ];
        for (spec, exact) in cases {
            let est = mc_expectation(&spec, 1_000_000, Seed(11), Exec::Parallel).unwrap();
            assert!(
                (est.mean - exact).abs() <= 4.0 * est.std_error,
                "{est:?} vs {exact}"
            );
        }
    }

    #[test]
    fn mc_is_independent_of_exec() {
        let g = GramFactor::new(3, vec![vec![1.0, 0.5, 0.0], vec![0.0, -1.0, 2.0]]).unwrap();
        let spec = MomentSpec::new(g, vec![2, 3]).unwrap();
        let a = mc_expectation(&spec, 50_001, Seed(3), Exec::Parallel).unwrap();
        let b = mc_expectation(&spec, 50_001, Seed(3), Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            mc_expectation(&spec, 50_001, Seed(4), Exec::Sequential).unwrap()
        );
        assert!(mc_expectation(&spec, 1, Seed(3), Exec::Sequential).is_err());
    }

    #[test]
    fn conjecture_matrix_layout() {
        let cfg = Config::default();
        let a = SquareMatrix::from_i64_rows(&[vec![5]], Kind::Symmetric).unwrap();
        assert_eq!(
            conjecture_matrix(&a, 1, &cfg).unwrap(),
            SquareMatrix::from_i64_rows(&[vec![5, 5], vec![5, 5]], Kind::Symmetric).unwrap()
        );
        assert_eq!(conjecture_matrix(&a, 2, &cfg).unwrap().n(), 4);
        let a2 = SquareMatrix::from_i64_rows(&[vec![1, 2], vec![2, 3]], Kind::Symmetric).unwrap();
        let m = conjecture_matrix(&a2, 1, &cfg).unwrap();
        assert_eq!(m.get(2, 1), &r(2));
        assert_eq!(m.get(3, 3), &r(3));
        assert!(matches!(
            conjecture_matrix(&a2, 7, &cfg),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn conjecture_examples() {
        let cfg = Config::default();
        let a = SquareMatrix::from_i64_rows(&[vec![2]], Kind::Symmetric).unwrap();
        let rep = conjecture_check_exact(&a, 2, &cfg).unwrap();
        assert_eq!(rep.lhs.to_f64(), 12.0);
        assert!(rep.equality_observed && rep.is_consistent());

        let d = SquareMatrix::diagonal(vec![r(1), r(3), r(2)]);
        for p in 1..=2 {
            let rep = conjecture_check_exact(&d, p, &cfg).unwrap();
            assert!(rep.equality_observed && rep.is_consistent(), "p = {p}");
        }

        let ones = SquareMatrix::from_i64_rows(&[vec![1, 1], vec![1, 1]], Kind::Symmetric).unwrap();
        let rep = conjecture_check_exact(&ones, 1, &cfg).unwrap();
        assert_eq!((rep.lhs.to_f64(), rep.rhs.to_f64()), (3.0, 1.0));
        assert!(rep.holds && !rep.equality_observed && rep.is_consistent());

        let indefinite =
            SquareMatrix::from_i64_rows(&[vec![1, 2], vec![2, 1]], Kind::Symmetric).unwrap();
        assert_eq!(
            conjecture_check_exact(&indefinite, 1, &cfg),
            Err(Error::NotPsd)
        );
    }

    #[test]
    fn scaled_sampling_handles_high_moments() {
        let one = GramFactor::new(1, vec![vec![1.0]]).unwrap();
        let spec = MomentSpec::new(one, vec![40]).unwrap();
        let exact = num_traits::ToPrimitive::to_f64(&double_factorial(39).unwrap()).unwrap();
        let est = mc_expectation_scaled(
            &spec,
            default_scale_sq(&spec),
            100_000,
            Seed(3),
            Exec::Parallel,
        )
        .unwrap();
        assert!(
            (est.mean - exact).abs() <= 4.0 * est.std_error,
            "{est:?} vs {exact}"
        );
        assert!(est.std_error < 0.05 * exact);
        let g = GramFactor::new(2, vec![vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
        let spec = MomentSpec::new(g, vec![2, 2]).unwrap();
        assert_eq!(
            mc_expectation_scaled(&spec, 1.0, 5000, Seed(1), Exec::Sequential).unwrap(),
            mc_expectation(&spec, 5000, Seed(1), Exec::Sequential).unwrap()
        );
        assert!(mc_expectation_scaled(&spec, 0.4, 5000, Seed(1), Exec::Sequential).is_err());
    }

    #[test]
    fn conjecture_mc_screen() {
        let cfg = Config::default();
        let ones = SquareMatrix::from_i64_rows(&[vec![1, 1], vec![1, 1]], Kind::Symmetric).unwrap();
        let rep = conjecture_check_mc(&ones, 1, 100_000, 4.0, Seed(1), &cfg).unwrap();
        assert!(rep.holds && rep.equality_predicted.is_none());
        assert!(rep.diagnosis.std_error.is_some());
    }
}
