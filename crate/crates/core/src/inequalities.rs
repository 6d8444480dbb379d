//! One verifier per inequality. Each computes both sides, decides whether
//! equality occurred, and compares that with the known characterization of
//! the equality cases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockpoly::{self, subsets, BlockFamily, CoeffPolynomial};
use crate::error::{Error, Result};
use crate::gram::{definiteness, GramFactor};
use crate::matfun::{self, Config};
use crate::matrix::{Kind, RectMatrix, SquareMatrix};
use crate::report::{Diagnosis, InequalityReport};
use crate::scalar::Scalar;
use crate::wick::conjecture_matrix;

/// Largest dimension for which sub-permanents and sub-hafnians are
/// enumerated to predict vanishing coefficients.
pub const MINOR_ENUMERATION_CAP: usize = 10;

/// Float-mode threshold, relative to the largest magnitude involved, below
/// which a value counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classical {
    Hadamard,
    Fischer,
    Marcus,
    LiebPer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfHaf {
    PfCoeffs,
    PfIneq,
    HafCoeffs,
    HafIneq,
}

impl Classical {
    pub const ALL: [Classical; 4] = [
        Classical::Hadamard,
        Classical::Fischer,
        Classical::Marcus,
        Classical::LiebPer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Classical::Hadamard => "hadamard",
            Classical::Fischer => "fischer",
            Classical::Marcus => "marcus",
            Classical::LiebPer => "lieb_per",
        }
    }

    pub fn needs_split(self) -> bool {
        matches!(self, Classical::Fischer | Classical::LiebPer)
    }
}

impl PfHaf {
    pub const ALL: [PfHaf; 4] = [
        PfHaf::PfCoeffs,
        PfHaf::PfIneq,
        PfHaf::HafCoeffs,
        PfHaf::HafIneq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PfHaf::PfCoeffs => "pf_coeffs",
            PfHaf::PfIneq => "pf_ineq",
            PfHaf::HafCoeffs => "haf_coeffs",
            PfHaf::HafIneq => "haf_ineq",
        }
    }
}

impl fmt::Display for Classical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for PfHaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classical {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Classical::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown inequality {s:?}")))
    }
}

impl FromStr for PfHaf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PfHaf::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown check {s:?}")))
    }
}

fn near_zero<T: Scalar>(x: &T, scale: f64) -> bool {
    x.negligible(scale, FLOAT_ZERO_TOL)
}

fn max_abs<T: Scalar>(xs: &[T]) -> f64 {
    xs.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

fn is_zero_matrix<T: Scalar>(xs: &[T]) -> bool {
    let scale = max_abs(xs);
    xs.iter()
        .all(|x| x.is_zero() || (!T::EXACT && scale == 0.0))
}

fn require_psd<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> Result<bool> {
    if m.kind() != Kind::Symmetric {
        return Err(Error::NotPsd);
    }
    let d = definiteness(m, cfg.rank_tol)?;
    if !d.is_psd() {
        return Err(Error::NotPsd);
    }
    Ok(d.is_posdef())
}

fn diag_product<T: Scalar>(m: &SquareMatrix<T>) -> T {
    let mut p = T::one();
    for i in 0..m.n() {
        p *= m.get(i, i);
    }
    p
}

fn structure<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> (bool, Diagnosis) {
    let d = matfun::diagnostics(m, cfg);
    let predicted = d.is_diagonal || !d.zero_rows.is_empty();
    let diagnosis = Diagnosis {
        zero_rows: Some(d.zero_rows),
        is_diagonal: Some(d.is_diagonal),
        rank: Some(d.rank),
        ..Diagnosis::default()
    };
    (predicted, diagnosis)
}

/// Hadamard `det A ≤ Π a_ii`, Fischer `det A ≤ det A' det A''`, Marcus
/// `per A ≥ Π a_ii` and Lieb `per A ≥ per A' per A''` for a PSD `A`. `split`
/// is the size of `A'`.
pub fn check_classical<T: Scalar>(
    which: Classical,
    a: &SquareMatrix<T>,
    split: Option<usize>,
    cfg: &Config,
) -> Result<InequalityReport> {
    require_psd(a, cfg)?;
    let (zero_row_or_diag, mut diagnosis) = structure(a, cfg);
    let blocks = if which.needs_split() {
        let k = split.ok_or_else(|| Error::invalid(format!("{which} needs a block split")))?;
        if k == 0 || k >= a.n() {
            return Err(Error::invalid(format!("split {k} outside 1..{}", a.n())));
        }
        diagnosis.notes.push(format!("split {k}"));
        Some(a.split(k)?)
    } else {
        None
    };
    let (lhs, rhs, predicted) = match (which, blocks) {
        (Classical::Hadamard, _) => (diag_product(a), matfun::det(a)?, zero_row_or_diag),
        (Classical::Marcus, _) => (matfun::per_with(a, cfg)?, diag_product(a), zero_row_or_diag),
        (Classical::Fischer, Some((a1, b, a2))) => {
            let (d1, d2) = (matfun::det(&a1)?, matfun::det(&a2)?);
            let singular = near_zero(&d1, diag_product(&a1).to_f64())
                || near_zero(&d2, diag_product(&a2).to_f64());
            (
                d1 * d2,
                matfun::det(a)?,
                singular || is_zero_matrix(b.data()),
            )
        }
        (Classical::LiebPer, Some((a1, b, a2))) => {
            let rhs = matfun::per_with(&a1, cfg)? * matfun::per_with(&a2, cfg)?;
            let zero_row = !diagnosis.zero_rows.as_ref().is_some_and(Vec::is_empty);
            (
                matfun::per_with(a, cfg)?,
                rhs,
                zero_row || is_zero_matrix(b.data()),
            )
        }
        _ => unreachable!("split checked above"),
    };
    Ok(InequalityReport::compare(
        which.name(),
        lhs,
        rhs,
        Some(predicted),
        diagnosis,
    ))
}

/// Report for "all coefficients are ≥ 0", with `signed` already applied.
/// `lhs` is the smallest coefficient and `rhs` is zero.
fn coefficient_report<T: Scalar>(
    name: &str,
    coeffs: &[T],
    signed: &[T],
    predicted_zero: Option<Vec<usize>>,
) -> InequalityReport {
    let scale = max_abs(coeffs);
    let observed: Vec<usize> = (0..coeffs.len())
        .filter(|&t| near_zero(&coeffs[t], scale))
        .collect();
    let min = signed
        .iter()
        .cloned()
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap_or_else(T::zero);
    let diagnosis = Diagnosis {
        coefficients: Some(coeffs.iter().map(Scalar::to_number).collect()),
        vanishing_observed: Some(observed),
        vanishing_predicted: predicted_zero.clone(),
        ..Diagnosis::default()
    };
    let mut r = InequalityReport::compare(
        name,
        min,
        T::zero(),
        predicted_zero.map(|v| !v.is_empty()),
        diagnosis,
    );
    // The minimum can be a rounding-level negative in float mode.
    r.equality_observed = !r.diagnosis.vanishing_observed.as_ref().unwrap().is_empty();
    r.holds = r.holds
        || (!T::EXACT
            && signed
                .iter()
                .all(|c| *c >= T::zero() || near_zero(c, scale)));
    r
}

/// All `t x t` sub-permanents of `b` vanish, for `t = 0 ..= max_t`.
fn subpermanents_vanish<T: Scalar>(b: &RectMatrix<T>, t: usize, cfg: &Config) -> Result<bool> {
    if t > b.nrows() || t > b.ncols() {
        return Ok(true);
    }
    let scale = max_abs(b.data()).powi(t as i32);
    for rows in subsets(b.nrows(), t) {
        for cols in subsets(b.ncols(), t) {
            let p = matfun::per_with(&b.submatrix(rows.members(), cols.members())?, cfg)?;
            if !near_zero(&p, scale) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn lieb_shape<T: Scalar>(
    a1: &SquareMatrix<T>,
    a2: &SquareMatrix<T>,
    b: &RectMatrix<T>,
) -> Result<()> {
    if b.nrows() != a1.n() || b.ncols() != a2.n() {
        return Err(Error::SizeMismatch(format!(
            "B is {}x{}, diagonal blocks are {} and {}",
            b.nrows(),
            b.ncols(),
            a1.n(),
            a2.n()
        )));
    }
    Ok(())
}

/// `c_t ≥ 0` for `per [[λA', B], [Bᵀ, A'']] = Σ c_t λ^t` with PSD diagonal
/// blocks; the assembled matrix may be indefinite. For positive definite
/// blocks, `c_{n'-t} = 0` exactly when every `t x t` sub-permanent of `B`
/// vanishes.
pub fn check_lieb_coeffs<T: Scalar>(
    a1: &SquareMatrix<T>,
    a2: &SquareMatrix<T>,
    b: &RectMatrix<T>,
    cfg: &Config,
) -> Result<InequalityReport> {
    lieb_shape(a1, a2, b)?;
    let posdef = require_psd(a1, cfg)? & require_psd(a2, cfg)?;
    let family = BlockFamily::per(a1.clone(), a2.clone(), b.clone())?;
    let c = blockpoly::block_poly_interpolate(&family, None, cfg)?;
    let p = a1.n();
    let predicted = if posdef && p + a2.n() <= MINOR_ENUMERATION_CAP {
        let mut v = Vec::new();
        for t in (0..=p).rev() {
            if subpermanents_vanish(b, t, cfg)? {
                v.push(p - t);
            }
        }
        Some(v)
    } else {
        None
    };
    let mut r = coefficient_report("lieb_coeffs", c.coeffs(), c.coeffs(), predicted);
    if !posdef {
        r = r.with_note("diagonal blocks are singular; vanishing pattern not predicted");
    }
    Ok(r)
}

/// Sign pattern of `det [[λA', B], [Bᵀ, A'']] = Σ d_t λ^t`: `D ≡ 0` when
/// `det A' det A'' = 0`; for positive definite blocks `(-1)^t d_{n'-t}` is
/// positive for `t ≤ rk B` and zero beyond. `lhs` is the smallest
/// `(-1)^t d_{n'-t}`.
pub fn check_det_coeffs<T: Scalar>(
    a1: &SquareMatrix<T>,
    a2: &SquareMatrix<T>,
    b: &RectMatrix<T>,
    cfg: &Config,
) -> Result<InequalityReport> {
    lieb_shape(a1, a2, b)?;
    let posdef = require_psd(a1, cfg)? & require_psd(a2, cfg)?;
    let family = BlockFamily::det(a1.clone(), a2.clone(), b.clone())?;
    let d = blockpoly::block_poly_interpolate(&family, None, cfg)?;
    let p = a1.n();
    let rank_b = matfun::rank(b.nrows(), b.ncols(), b.data(), cfg.rank_tol);
    // D ≡ 0 needs the assembled matrix to be PSD; singular PSD diagonal
    // blocks alone do not force it.
    let assembled_psd = posdef || definiteness(&family.assemble(&T::one()), cfg.rank_tol)?.is_psd();
    let predicted: Option<Vec<usize>> = if posdef {
        Some((0..=p).filter(|&k| p - k > rank_b).collect())
    } else {
        assembled_psd.then(|| (0..=p).collect())
    };
    // signed[k] = (-1)^(n'-k) d_k
    let signed: Vec<T> = (0..=p)
        .map(|k| {
            let x = d.coeffs()[k].clone();
            if (p - k) % 2 == 1 {
                -x
            } else {
                x
            }
        })
        .collect();
    let mut r = coefficient_report("det_coeffs", d.coeffs(), &signed, predicted);
    r.diagnosis.rank = Some(rank_b);
    if !posdef && assembled_psd {
        r = r.with_note("det A' det A'' = 0 with PSD assembled matrix: D vanishes identically");
    } else if !posdef {
        // Outside every hypothesis; only report the coefficients.
        r.holds = true;
        r = r.with_note("singular diagonal blocks, assembled matrix not PSD: no claim");
    }
    Ok(r)
}

/// All principal `2t x 2t` sub-hafnians of `a` vanish.
fn subhafnians_vanish<T: Scalar>(a: &SquareMatrix<T>, t: usize, cfg: &Config) -> Result<bool> {
    let scale = max_abs(a.data()).powi(t as i32);
    for s in subsets(a.n(), 2 * t) {
        if !near_zero(&matfun::haf_with(&a.principal(s.members()), cfg)?, scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The pfaffian and hafnian block theorems. `B` must be PSD; `λ ≥ 0` for
/// the `*_ineq` variants and is ignored by the `*_coeffs` variants.
pub fn check_pfhaf<T: Scalar>(
    which: PfHaf,
    a: &SquareMatrix<T>,
    b: &SquareMatrix<T>,
    lambda: &T,
    cfg: &Config,
) -> Result<InequalityReport> {
    let b_posdef = require_psd(b, cfg)?;
    let mut r = match which {
        PfHaf::PfCoeffs => {
            let coeffs: CoeffPolynomial<T> = blockpoly::pf_block_coeffs_subset(a, b, cfg)?;
            let rank_a = matfun::rank(a.n(), a.n(), a.data(), cfg.rank_tol);
            let predicted = b_posdef.then(|| {
                (0..coeffs.coeffs().len())
                    .filter(|&t| 2 * t > rank_a)
                    .collect()
            });
            let mut r =
                coefficient_report(which.name(), coeffs.coeffs(), coeffs.coeffs(), predicted);
            r.diagnosis.rank = Some(rank_a);
            r
        }
        PfHaf::HafCoeffs => {
            let coeffs = blockpoly::haf_block_coeffs_subset(a, b, cfg)?;
            let predicted = if b_posdef && a.n() <= MINOR_ENUMERATION_CAP {
                let mut v = Vec::new();
                for t in 0..coeffs.coeffs().len() {
                    if subhafnians_vanish(a, t, cfg)? {
                        v.push(t);
                    }
                }
                Some(v)
            } else {
                None
            };
            coefficient_report(which.name(), coeffs.coeffs(), coeffs.coeffs(), predicted)
        }
        PfHaf::PfIneq | PfHaf::HafIneq => {
            if *lambda < T::zero() {
                return Err(Error::invalid("λ must be non-negative"));
            }
            let (family, rhs, a_trivial) = if which == PfHaf::PfIneq {
                (
                    BlockFamily::pf(a.clone(), b.clone())?,
                    matfun::det(b)?,
                    is_zero_matrix(a.data()),
                )
            } else {
                (
                    BlockFamily::haf(a.clone(), b.clone())?,
                    matfun::per_with(b, cfg)?,
                    a.is_diagonal(),
                )
            };
            let lhs = family.evaluate(lambda, cfg)?;
            let predicted = b_posdef.then_some(lambda.is_zero() || a_trivial);
            let diagnosis = Diagnosis {
                is_diagonal: Some(a.is_diagonal()),
                rank: Some(matfun::rank(a.n(), a.n(), a.data(), cfg.rank_tol)),
                ..Diagnosis::default()
            };
            InequalityReport::compare(which.name(), lhs, rhs, predicted, diagnosis)
                .with_note(format!("λ = {lambda}"))
        }
    };
    if !b_posdef {
        r = r.with_note("B is singular; equality cases not predicted");
    }
    Ok(r)
}

/// `E Π X_i² ≥ Π E X_i²` for `X_i = (x_i, ξ)`, i.e.
/// `haf [[A, A], [A, A]] ≥ Π a_ii` for the Gram matrix `A`.
pub fn check_moment<T: Scalar>(g: &GramFactor<T>, cfg: &Config) -> Result<InequalityReport> {
    let a = g.gram_matrix();
    let lhs = matfun::haf_with(&conjecture_matrix(&a, 1, cfg)?, cfg)?;
    let (predicted, diagnosis) = structure(&a, cfg);
    Ok(InequalityReport::compare(
        "moment",
        lhs,
        diag_product(&a),
        Some(predicted),
        diagnosis,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn sym(rows: &[Vec<i64>]) -> SquareMatrix<Rational> {
        SquareMatrix::from_i64_rows(rows, Kind::Symmetric).unwrap()
    }

    fn rect(rows: &[Vec<i64>]) -> RectMatrix<Rational> {
        RectMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| r(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn classical_examples() {
        let cfg = Config::default();
        let rep = check_classical(
            Classical::Marcus,
            &SquareMatrix::diagonal(vec![r(2), r(3)]),
            None,
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.lhs.to_f64(), 6.0);
        assert!(
            rep.equality_observed && rep.equality_predicted == Some(true) && rep.is_consistent()
        );

        let ones = sym(&[vec![1, 1], vec![1, 1]]);
        let rep = check_classical(Classical::Marcus, &ones, None, &cfg).unwrap();
        assert_eq!((rep.lhs.to_f64(), rep.rhs.to_f64()), (2.0, 1.0));
        assert!(!rep.equality_observed && rep.is_consistent());

        let rep = check_classical(Classical::Hadamard, &ones, None, &cfg).unwrap();
        assert_eq!((rep.lhs.to_f64(), rep.rhs.to_f64()), (1.0, 0.0));
        assert!(rep.is_consistent());

        let rep = check_classical(
            Classical::LiebPer,
            &SquareMatrix::<Rational>::identity(4),
            Some(2),
            &cfg,
        )
        .unwrap();
        assert!(rep.equality_observed && rep.equality_predicted == Some(true));
    }

    #[test]
    fn classical_rejects_bad_input() {
        let cfg = Config::default();
        let indefinite = sym(&[vec![1, 2], vec![2, 1]]);
        assert_eq!(
            check_classical(Classical::Marcus, &indefinite, None, &cfg),
            Err(Error::NotPsd)
        );
        let i = SquareMatrix::<Rational>::identity(3);
        assert!(check_classical(Classical::Fischer, &i, None, &cfg).is_err());
        assert!(check_classical(Classical::Fischer, &i, Some(3), &cfg).is_err());
    }

    #[test]
    fn fischer_singular_block_is_an_equality() {
        let cfg = Config::default();
        // A' = [[1,1],[1,1]] singular, B nonzero.
        let a = sym(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 2]]);
        let rep = check_classical(Classical::Fischer, &a, Some(2), &cfg).unwrap();
        assert!(rep.equality_observed && rep.is_consistent());
        let a = sym(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]);
        let rep = check_classical(Classical::Fischer, &a, Some(1), &cfg).unwrap();
        assert!(!rep.equality_observed && rep.is_consistent());
    }

    #[test]
    fn lieb_coeff_examples() {
        let cfg = Config::default();
        let one = sym(&[vec![1]]);
        let rep = check_lieb_coeffs(&one, &one, &rect(&[vec![1]]), &cfg).unwrap();
        assert_eq!(
            rep.diagnosis.coefficients,
            Some(vec![r(1).to_number(), r(1).to_number()])
        );
        assert!(rep.is_consistent());

        let i2 = SquareMatrix::<Rational>::identity(2);
        let rep = check_lieb_coeffs(&i2, &i2, &rect(&[vec![0, 0], vec![0, 0]]), &cfg).unwrap();
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![0, 1]));
        assert!(rep.is_consistent());

        let rep = check_lieb_coeffs(&i2, &i2, &rect(&[vec![0, 5], vec![0, 0]]), &cfg).unwrap();
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![0]));
        assert!(rep.is_consistent());

        // Indefinite assembled matrix, PSD diagonal blocks.
        let rep = check_lieb_coeffs(&i2, &i2, &rect(&[vec![3, -2], vec![1, 3]]), &cfg).unwrap();
        assert!(rep.holds && rep.is_consistent());
    }

    #[test]
    fn det_coeff_examples() {
        let cfg = Config::default();
        let one = sym(&[vec![1]]);
        let rep = check_det_coeffs(&one, &one, &rect(&[vec![1]]), &cfg).unwrap();
        assert_eq!(
            rep.diagnosis.coefficients,
            Some(vec![r(-1).to_number(), r(1).to_number()])
        );
        assert!(rep.holds && rep.is_consistent());

        let i2 = SquareMatrix::<Rational>::identity(2);
        let rep = check_det_coeffs(&i2, &i2, &RectMatrix::zeros(2, 2), &cfg).unwrap();
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![0, 1]));
        assert!(rep.is_consistent());

        // Gram matrix of (1,0,0), (1,0,0), (1,1,0), (0,0,1).
        let singular = sym(&[vec![1, 1], vec![1, 1]]);
        let a2 = SquareMatrix::diagonal(vec![r(2), r(1)]);
        let rep = check_det_coeffs(&singular, &a2, &rect(&[vec![1, 0], vec![1, 0]]), &cfg).unwrap();
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![0, 1, 2]));
        assert_eq!(rep.diagnosis.vanishing_predicted, Some(vec![0, 1, 2]));
        assert!(rep.is_consistent());

        // Same diagonal blocks, assembled matrix indefinite: d_0 = det(B Bᵀ) ≠ 0.
        let rep = check_det_coeffs(&singular, &i2, &rect(&[vec![1, 2], vec![3, 4]]), &cfg).unwrap();
        assert_eq!(rep.diagnosis.vanishing_predicted, None);
        assert_eq!(rep.diagnosis.coefficients.unwrap()[0], r(4).to_number());
    }

    #[test]
    fn pfhaf_examples() {
        let cfg = Config::default();
        let b = sym(&[vec![2, 1], vec![1, 2]]);
        let diag_a = SquareMatrix::diagonal(vec![r(3), r(-1)]);
        for lambda in [r(0), Rational::from_ratio(1, 2), r(2)] {
            let rep = check_pfhaf(PfHaf::HafIneq, &diag_a, &b, &lambda, &cfg).unwrap();
            assert!(rep.equality_observed && rep.is_consistent());
        }

        let a = SquareMatrix::from_i64_rows(&[vec![0, 2], vec![-2, 0]], Kind::Skew).unwrap();
        let rep = check_pfhaf(PfHaf::PfIneq, &a, &b, &r(0), &cfg).unwrap();
        assert_eq!(rep.lhs, rep.rhs);
        assert!(rep.equality_observed && rep.is_consistent());
        let rep = check_pfhaf(PfHaf::PfIneq, &a, &b, &r(1), &cfg).unwrap();
        assert!(!rep.equality_observed && rep.is_consistent());

        let ones = sym(&[vec![1, 1], vec![1, 1]]);
        let rep = check_pfhaf(PfHaf::HafIneq, &ones, &ones, &r(1), &cfg).unwrap();
        assert_eq!((rep.lhs.to_f64(), rep.rhs.to_f64()), (3.0, 2.0));
        assert!(rep.holds && rep.equality_predicted.is_none());

        let skew = SquareMatrix::from_i64_rows(
            &[vec![0, 1, 2], vec![-1, 0, 3], vec![-2, -3, 0]],
            Kind::Skew,
        )
        .unwrap();
        let rep = check_pfhaf(
            PfHaf::PfCoeffs,
            &skew,
            &SquareMatrix::identity(3),
            &r(0),
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.diagnosis.coefficients.as_ref().unwrap().len(), 2);
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![]));
        assert!(rep.is_consistent());

        assert!(check_pfhaf(PfHaf::PfIneq, &a, &b, &r(-1), &cfg).is_err());
        assert!(check_pfhaf(PfHaf::HafIneq, &a, &b, &r(1), &cfg).is_err());
    }

    #[test]
    fn haf_coeff_vanishing() {
        let cfg = Config::default();
        // Only a_34 is off-diagonal, so every 4x4 sub-hafnian vanishes.
        let a = sym(&[
            vec![1, 0, 0, 0],
            vec![0, 2, 0, 0],
            vec![0, 0, 0, 5],
            vec![0, 0, 5, 0],
        ]);
        let rep = check_pfhaf(
            PfHaf::HafCoeffs,
            &a,
            &SquareMatrix::identity(4),
            &r(0),
            &cfg,
        )
        .unwrap();
        assert_eq!(rep.diagnosis.vanishing_observed, Some(vec![2]));
        assert!(rep.is_consistent());
    }

    #[test]
    fn moment_examples() {
        let cfg = Config::default();
        let ortho = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(0), r(3)]]).unwrap();
        assert!(check_moment(&ortho, &cfg).unwrap().equality_observed);
        let zero = GramFactor::new(2, vec![vec![r(0), r(0)], vec![r(1), r(3)]]).unwrap();
        let rep = check_moment(&zero, &cfg).unwrap();
        assert!(rep.equality_observed && rep.lhs.to_f64() == 0.0 && rep.is_consistent());
        let same = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(1), r(0)]]).unwrap();
        let rep = check_moment(&same, &cfg).unwrap();
        assert_eq!((rep.lhs.to_f64(), rep.rhs.to_f64()), (3.0, 1.0));
        assert!(rep.is_consistent());
    }

    #[test]
    fn float_mode_verifiers() {
        let cfg = Config::default();
        let a = SquareMatrix::symmetric(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let rep = check_classical(Classical::Marcus, &a, None, &cfg).unwrap();
        assert!(rep.holds && !rep.equality_observed && rep.is_consistent());
        let d = SquareMatrix::diagonal(vec![0.3, 0.7, 1.1]);
        let rep = check_classical(Classical::Hadamard, &d, None, &cfg).unwrap();
        assert!(rep.equality_observed && rep.is_consistent());
    }
}
