//! Coefficients of the block λ-polynomials
//!
//! ```text
//! per [[λA', B], [Bᵀ, A'']] = Σ c_t λ^t      det [[λA', B], [Bᵀ, A'']] = Σ d_t λ^t
//! (-1)^⌊n/2⌋ pf [[-λA, B], [-B, A]] = Σ p_t λ^t      haf [[λA, B], [B, A]] = Σ h_t λ^t
//! ```
//!
//! Every family can be interpolated exactly from point evaluations. `p_t` and
//! `h_t` also have closed double-subset sums, and for positive definite `B`
//! the pfaffian polynomial factors as `det B · Π (1 + a_i² λ)` over the skew
//! spectrum of `B^{-1/2} A B^{-1/2}`.

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, Config};
use crate::matrix::{Kind, RectMatrix, SquareMatrix};
use crate::scalar::Scalar;

/// Sorted subset of `{0, .., n-1}`. Signs are computed with one-based
/// indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    n: usize,
    members: Vec<usize>,
}

impl SubsetIndex {
    pub fn new(n: usize, members: Vec<usize>) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("subset members must be strictly increasing"));
        }
        if members.last().is_some_and(|&m| m >= n) {
            return Err(Error::invalid(format!(
                "subset member out of range for n = {n}"
            )));
        }
        Ok(SubsetIndex { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self) -> SubsetIndex {
        let members = (0..self.n)
            .filter(|i| self.members.binary_search(i).is_err())
            .collect();
        SubsetIndex { n: self.n, members }
    }
}

/// All `k`-subsets of `{0, .., n-1}` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = SubsetIndex> {
    (0..n)
        .combinations(k)
        .map(move |members| SubsetIndex { n, members })
}

/// `(-1)^T = (-1)^(t + Σ_{j∈T} j)` for `|T| = 2t`, indices one-based.
pub fn subset_sign(t: &SubsetIndex) -> Result<i64> {
    if t.len() % 2 == 1 {
        return Err(Error::invalid("subset sign needs an even-sized subset"));
    }
    let exponent = t.len() / 2 + t.members.iter().map(|j| j + 1).sum::<usize>();
    Ok(if exponent.is_multiple_of(2) { 1 } else { -1 })
}

/// Coefficient list `coeffs[t]` of `λ^t`; trailing zeros are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> CoeffPolynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        CoeffPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Largest exponent represented, `m` for `m + 1` stored coefficients.
    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn get(&self, t: usize) -> Option<&T> {
        self.coeffs.get(t)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn to_f64(&self) -> CoeffPolynomial<f64> {
        CoeffPolynomial {
            coeffs: self.coeffs.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Indices `t` with a zero coefficient.
    pub fn zero_indices(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&t| self.coeffs[t].is_zero())
            .collect()
    }
}

fn check_square_pair<T: Scalar>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch(format!(
            "A is {0}x{0}, B is {1}x{1}",
            a.n(),
            b.n()
        )));
    }
    if b.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "block polynomial",
            expected: "symmetric B",
        });
    }
    Ok(())
}

/// Principal minors of `A` over all `2t`-subsets, skipping zeros.
fn principal_values<T: Scalar>(
    a: &SquareMatrix<T>,
    size: usize,
    f: impl Fn(&SquareMatrix<T>) -> Result<T>,
) -> Result<Vec<(SubsetIndex, T)>> {
    let mut out = Vec::new();
    for s in subsets(a.n(), size) {
        let v = f(&a.principal(s.members()))?;
        if !v.is_zero() {
            out.push((s, v));
        }
    }
    Ok(out)
}

/// `Σ_S Σ_T w_S w_T g(B_{N∖S, N∖T})`, parallel over `S`.
fn double_subset_sum<T: Scalar>(
    weighted: &[(SubsetIndex, T)],
    b: &SquareMatrix<T>,
    cfg: &Config,
    g: impl Fn(&SquareMatrix<T>) -> Result<T> + Sync + Send,
) -> Result<T> {
    let rows = cfg.exec.map_slice(weighted, |(s, ws)| -> Result<T> {
        let sc = s.complement();
        let mut acc = T::zero();
        for (t, wt) in weighted {
            let tc = t.complement();
            let v = g(&b.submatrix(sc.members(), tc.members())?)?;
            if !v.is_zero() {
                let mut term = ws.clone();
                term *= wt;
                term *= &v;
                acc += &term;
            }
        }
        Ok(acc)
    });
    let mut sum = T::zero();
    for r in rows {
        sum += &r?;
    }
    Ok(sum)
}

/// `h_t = Σ_{|S|=|T|=2t} haf A_{S,S} · haf A_{T,T} · per B_{N∖S, N∖T}`.
pub fn haf_block_coeffs_subset<T: Scalar>(
    a: &SquareMatrix<T>,
    b: &SquareMatrix<T>,
    cfg: &Config,
) -> Result<CoeffPolynomial<T>> {
    check_square_pair(a, b)?;
    if a.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "haf block polynomial",
            expected: "symmetric A",
        });
    }
    let seq = Config {
        exec: crate::exec::Exec::Sequential,
        ..cfg.clone()
    };
    (0..=a.n() / 2)
        .map(|t| {
            let w = principal_values(a, 2 * t, |m| matfun::haf_with(m, &seq))?;
            double_subset_sum(&w, b, cfg, |m| matfun::per_with(m, &seq))
        })
        .collect::<Result<Vec<_>>>()
        .map(CoeffPolynomial::new)
}

/// `p_t = Σ_{|S|=|T|=2t} (-1)^S (-1)^T pf A_{S,S} · pf A_{T,T} · det B_{N∖S, N∖T}`.
pub fn pf_block_coeffs_subset<T: Scalar>(
    a: &SquareMatrix<T>,
    b: &SquareMatrix<T>,
    cfg: &Config,
) -> Result<CoeffPolynomial<T>> {
    check_square_pair(a, b)?;
    if a.kind() != Kind::Skew {
        return Err(Error::WrongKind {
            op: "pf block polynomial",
            expected: "skew A",
        });
    }
    let seq = Config {
        exec: crate::exec::Exec::Sequential,
        ..cfg.clone()
    };
    (0..=a.n() / 2)
        .map(|t| {
            let mut w = principal_values(a, 2 * t, |m| matfun::pf_with(m, &seq))?;
            for (s, v) in &mut w {
                if subset_sign(s)? < 0 {
                    *v = -v.clone();
                }
            }
            double_subset_sum(&w, b, cfg, |m| matfun::det(m))
        })
        .collect::<Result<Vec<_>>>()
        .map(CoeffPolynomial::new)
}

/// One of the four block assemblies.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockFamily<T> {
    /// `per [[λA', B], [Bᵀ, A'']]`, degree `n'`.
    Per {
        a1: SquareMatrix<T>,
        a2: SquareMatrix<T>,
        b: RectMatrix<T>,
    },
    /// `det [[λA', B], [Bᵀ, A'']]`, degree `n'`.
    Det {
        a1: SquareMatrix<T>,
        a2: SquareMatrix<T>,
        b: RectMatrix<T>,
    },
    /// `(-1)^⌊n/2⌋ pf [[-λA, B], [-B, A]]`, degree `⌊n/2⌋`.
    Pf {
        a: SquareMatrix<T>,
        b: SquareMatrix<T>,
    },
    /// `haf [[λA, B], [B, A]]`, degree `⌊n/2⌋`.
    Haf {
        a: SquareMatrix<T>,
        b: SquareMatrix<T>,
    },
}

impl<T: Scalar> BlockFamily<T> {
    pub fn per(a1: SquareMatrix<T>, a2: SquareMatrix<T>, b: RectMatrix<T>) -> Result<Self> {
        Self::check_lieb_shape(&a1, &a2, &b)?;
        Ok(BlockFamily::Per { a1, a2, b })
    }

    pub fn det(a1: SquareMatrix<T>, a2: SquareMatrix<T>, b: RectMatrix<T>) -> Result<Self> {
        Self::check_lieb_shape(&a1, &a2, &b)?;
        Ok(BlockFamily::Det { a1, a2, b })
    }

    pub fn pf(a: SquareMatrix<T>, b: SquareMatrix<T>) -> Result<Self> {
        check_square_pair(&a, &b)?;
        if a.kind() != Kind::Skew {
            return Err(Error::WrongKind {
                op: "pf block polynomial",
                expected: "skew A",
            });
        }
        Ok(BlockFamily::Pf { a, b })
    }

    pub fn haf(a: SquareMatrix<T>, b: SquareMatrix<T>) -> Result<Self> {
        check_square_pair(&a, &b)?;
        if a.kind() != Kind::Symmetric {
            return Err(Error::WrongKind {
                op: "haf block polynomial",
                expected: "symmetric A",
            });
        }
        Ok(BlockFamily::Haf { a, b })
    }

    fn check_lieb_shape(
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

    pub fn degree(&self) -> usize {
        match self {
            BlockFamily::Per { a1, .. } | BlockFamily::Det { a1, .. } => a1.n(),
            BlockFamily::Pf { a, .. } | BlockFamily::Haf { a, .. } => a.n() / 2,
        }
    }

    /// The block matrix at `λ`.
    pub fn assemble(&self, lambda: &T) -> SquareMatrix<T> {
        match self {
            BlockFamily::Per { a1, a2, b } | BlockFamily::Det { a1, a2, b } => {
                let p = a1.n();
                let kind = if a1.kind() == Kind::Symmetric && a2.kind() == Kind::Symmetric {
                    Kind::Symmetric
                } else {
                    Kind::General
                };
                SquareMatrix::from_fn(p + a2.n(), kind, |i, j| match (i < p, j < p) {
                    (true, true) => {
                        let mut x = a1.get(i, j).clone();
                        x *= lambda;
                        x
                    }
                    (true, false) => b.get(i, j - p).clone(),
                    (false, true) => b.get(j, i - p).clone(),
                    (false, false) => a2.get(i - p, j - p).clone(),
                })
                .expect("block assembly preserves the kind")
            }
            BlockFamily::Pf { a, b } => {
                let n = a.n();
                SquareMatrix::from_fn(2 * n, Kind::Skew, |i, j| match (i < n, j < n) {
                    (true, true) => {
                        let mut x = -a.get(i, j).clone();
                        x *= lambda;
                        x
                    }
                    (true, false) => b.get(i, j - n).clone(),
                    (false, true) => -b.get(i - n, j).clone(),
                    (false, false) => a.get(i - n, j - n).clone(),
                })
                .expect("pfaffian block is skew")
            }
            BlockFamily::Haf { a, b } => {
                let n = a.n();
                SquareMatrix::from_fn(2 * n, Kind::Symmetric, |i, j| match (i < n, j < n) {
                    (true, true) => {
                        let mut x = a.get(i, j).clone();
                        x *= lambda;
                        x
                    }
                    (true, false) => b.get(i, j - n).clone(),
                    (false, true) => b.get(i - n, j).clone(),
                    (false, false) => a.get(i - n, j - n).clone(),
                })
                .expect("hafnian block is symmetric")
            }
        }
    }

    /// The polynomial's value at `λ`, including the pfaffian sign.
    pub fn evaluate(&self, lambda: &T, cfg: &Config) -> Result<T> {
        let m = self.assemble(lambda);
        match self {
            BlockFamily::Per { .. } => matfun::per_with(&m, cfg),
            BlockFamily::Det { .. } => matfun::det(&m),
            BlockFamily::Haf { .. } => matfun::haf_with(&m, cfg),
            BlockFamily::Pf { a, .. } => {
                let v = matfun::pf_with(&m, cfg)?;
                Ok(if (a.n() / 2) % 2 == 1 { -v } else { v })
            }
        }
    }
}

/// Coefficients by exact interpolation through `degree + 1` nodes
/// (default `0, 1, .., degree`).
pub fn block_poly_interpolate<T: Scalar>(
    family: &BlockFamily<T>,
    nodes: Option<&[T]>,
    cfg: &Config,
) -> Result<CoeffPolynomial<T>> {
    let m = family.degree();
    let nodes: Vec<T> = match nodes {
        Some(x) if x.len() != m + 1 => {
            return Err(Error::invalid(format!("{} nodes for degree {m}", x.len())));
        }
        Some(x) => x.to_vec(),
        None => (0..=m as i64).map(T::from_i64).collect(),
    };
    for i in 0..nodes.len() {
        if nodes[..i].contains(&nodes[i]) {
            return Err(Error::DuplicateNodes);
        }
    }
    let values = nodes
        .iter()
        .map(|x| family.evaluate(x, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoeffPolynomial::new(interpolate(&nodes, values)))
}

/// Newton divided differences, then expansion to the monomial basis.
fn interpolate<T: Scalar>(x: &[T], mut c: Vec<T>) -> Vec<T> {
    let m = x.len() - 1;
    for j in 1..=m {
        for i in (j..=m).rev() {
            let num = c[i].clone() - c[i - 1].clone();
            c[i] = num / (x[i].clone() - x[i - j].clone());
        }
    }
    let mut poly = vec![T::zero(); m + 1];
    poly[0] = c[m].clone();
    for k in (0..m).rev() {
        // poly <- poly * (λ - x_k) + c_k
        for i in (1..=m).rev() {
            let mut shifted = poly[i].clone();
            shifted *= &x[k];
            let prev = poly[i - 1].clone();
            poly[i] = prev - shifted;
        }
        poly[0] *= &x[k];
        poly[0] = c[k].clone() - poly[0].clone();
    }
    poly
}

/// The `a_i ≥ 0` for which the eigenvalues of `B^{-1/2} A B^{-1/2}` are
/// `±a_i √-1`; one value per pair, `⌊n/2⌋` in total, zeros included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewSpectrum {
    pub a_values: Vec<f64>,
}

pub fn skew_spectrum(a: &SquareMatrix<f64>, b: &SquareMatrix<f64>) -> Result<SkewSpectrum> {
    check_square_pair(a, b)?;
    if a.kind() != Kind::Skew {
        return Err(Error::WrongKind {
            op: "skew_spectrum",
            expected: "skew A",
        });
    }
    let n = a.n();
    if n == 0 {
        return Ok(SkewSpectrum {
            a_values: Vec::new(),
        });
    }
    let eb = SymmetricEigen::new(DMatrix::from_row_slice(n, n, b.data()));
    let top = eb.eigenvalues.max();
    if eb
        .eigenvalues
        .iter()
        .any(|&w| w <= Config::default().rank_tol * top.max(0.0) || w <= 0.0)
    {
        return Err(Error::NotPosDef);
    }
    let inv_sqrt = DMatrix::from_diagonal(&eb.eigenvalues.map(|w| w.sqrt().recip()));
    let s = &eb.eigenvectors * inv_sqrt * eb.eigenvectors.transpose();
    let m = &s * DMatrix::from_row_slice(n, n, a.data()) * &s;
    // MᵀM = -M² has eigenvalues a_i², each twice.
    let mtm = m.transpose() * &m;
    let mtm = (&mtm + mtm.transpose()) * 0.5;
    let mut w: Vec<f64> = SymmetricEigen::new(mtm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    w.sort_by(|x, y| y.total_cmp(x));
    let a_values = w
        .chunks_exact(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    Ok(SkewSpectrum { a_values })
}

/// Expands `det B · Π (1 + a_i² λ)`.
pub fn product_form_poly(det_b: f64, s: &SkewSpectrum) -> CoeffPolynomial<f64> {
    let mut coeffs = vec![det_b];
    for a in &s.a_values {
        let sq = a * a;
        coeffs.push(0.0);
        for t in (1..coeffs.len()).rev() {
            coeffs[t] += sq * coeffs[t - 1];
        }
    }
    CoeffPolynomial::new(coeffs)
}
