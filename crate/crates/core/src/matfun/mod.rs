//! Determinant, permanent, pfaffian and hafnian.
//!
//! Exact mode: fraction-free Bareiss elimination for `det`, memoized
//! expansion along the first row for `pf` and `haf`. Float mode: partial
//! pivoting LU for `det`, skew Parlett-Reid tridiagonalization for `pf`.
//! `per` is Ryser's inclusion-exclusion with Gray-code updates in both modes.

mod oracle;

use std::collections::HashMap;
use std::fmt;
use std::ops::{AddAssign, Mul, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::matrix::{Kind, SquareMatrix};
use crate::scalar::{Rational, Scalar};

pub use oracle::oracle;

/// Dimension caps, rank tolerance and execution policy.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub per_cap: usize,
    pub haf_cap: usize,
    pub pf_cap: usize,
    /// Cap for the factorial-time definition sums.
    pub oracle_cap: usize,
    /// Pivots below `rank_tol * largest pivot` count as zero in float mode.
    pub rank_tol: f64,
    pub exec: Exec,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            per_cap: 28,
            haf_cap: 26,
            pf_cap: 26,
            oracle_cap: 10,
            rank_tol: 1e-10,
            exec: Exec::default(),
        }
    }
}

impl Config {
    pub fn sequential() -> Self {
        Config {
            exec: Exec::Sequential,
            ..Config::default()
        }
    }

    /// Applies one cap to every fast kernel.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.per_cap = cap;
        self.haf_cap = cap;
        self.pf_cap = cap;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Det,
    Per,
    Pf,
    Haf,
}

impl Functional {
    pub const ALL: [Functional; 4] = [
        Functional::Det,
        Functional::Per,
        Functional::Pf,
        Functional::Haf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Det => "det",
            Functional::Per => "per",
            Functional::Pf => "pf",
            Functional::Haf => "haf",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Functional::Det),
            "per" => Ok(Functional::Per),
            "pf" => Ok(Functional::Pf),
            "haf" => Ok(Functional::Haf),
            _ => Err(Error::invalid(format!("unknown functional {s:?}"))),
        }
    }
}

/// Evaluates `f` with the fast kernel.
pub fn evaluate<T: Scalar>(f: Functional, m: &SquareMatrix<T>, cfg: &Config) -> Result<T> {
    match f {
        Functional::Det => det(m),
        Functional::Per => per_with(m, cfg),
        Functional::Pf => pf_with(m, cfg),
        Functional::Haf => haf_with(m, cfg),
    }
}

pub fn det<T: Scalar>(m: &SquareMatrix<T>) -> Result<T> {
    if m.n() == 0 {
        return Ok(T::one());
    }
    T::det_kernel(m)
}

pub fn per<T: Scalar>(m: &SquareMatrix<T>) -> Result<T> {
    per_with(m, &Config::default())
}

pub fn pf<T: Scalar>(m: &SquareMatrix<T>) -> Result<T> {
    pf_with(m, &Config::default())
}

pub fn haf<T: Scalar>(m: &SquareMatrix<T>) -> Result<T> {
    haf_with(m, &Config::default())
}

pub(crate) fn det_bareiss(m: &SquareMatrix<Rational>) -> Rational {
    let n = m.n();
    // Scale each row to integers; det picks up the product of the scales.
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let lcm = m
                .row(i)
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let row = m
                .row(i)
                .iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect();
            scale *= lcm;
            row
        })
        .collect();

    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    negate = !negate;
                }
                None => return Rational::zero(),
            }
        }
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = Rational::new(a[n - 1][n - 1].clone(), scale);
    if negate {
        -d
    } else {
        d
    }
}

pub(crate) fn det_lu(m: &SquareMatrix<f64>) -> Result<f64> {
    let n = m.n();
    let mut a = m.data().to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pmax == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det.check_finite("det")
}

/// Gray-code chunking used by `per`; depends only on `n` so the summation
/// order is the same under either execution policy.
fn ryser_chunks(n: usize) -> u64 {
    if n >= 16 {
        64
    } else {
        1
    }
}

pub fn per_with<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> Result<T> {
    let n = m.n();
    if n > cfg.per_cap {
        return Err(Error::DimensionCap {
            op: "per",
            n,
            cap: cfg.per_cap,
        });
    }
    if n == 0 {
        return Ok(T::one());
    }
    let total = 1u64 << n;
    let chunks = ryser_chunks(n);
    let len = total / chunks;
    let partials = cfg.exec.map_range(chunks as usize, |c| {
        ryser_range(m, c as u64 * len, (c as u64 + 1) * len)
    });
    let mut sum = T::zero();
    for p in &partials {
        sum += p;
    }
    let sum = if n % 2 == 1 { -sum } else { sum };
    sum.check_finite("per")
}

/// Signed Ryser terms for Gray-code indices `start..end`.
fn ryser_range<T: Scalar>(m: &SquareMatrix<T>, start: u64, end: u64) -> T {
    let n = m.n();
    let gray = |k: u64| k ^ (k >> 1);
    let mut rowsum = vec![T::zero(); n];
    let g0 = gray(start);
    for (i, rs) in rowsum.iter_mut().enumerate() {
        for j in 0..n {
            if g0 >> j & 1 == 1 {
                *rs += m.get(i, j);
            }
        }
    }
    let mut acc = T::zero();
    for k in start..end {
        if k > start {
            let j = k.trailing_zeros() as usize;
            let added = gray(k) >> j & 1 == 1;
            for (i, rs) in rowsum.iter_mut().enumerate() {
                if added {
                    *rs += m.get(i, j);
                } else {
                    *rs -= m.get(i, j);
                }
            }
        }
        let g = gray(k);
        if g == 0 {
            continue;
        }
        let mut prod = rowsum[0].clone();
        for rs in &rowsum[1..] {
            if prod.is_zero() {
                break;
            }
            prod *= rs;
        }
        if g.count_ones() % 2 == 1 {
            acc -= &prod;
        } else {
            acc += &prod;
        }
    }
    acc
}

pub fn haf_with<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> Result<T> {
    if m.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "haf",
            expected: "symmetric",
        });
    }
    let n = m.n();
    if n > cfg.haf_cap {
        return Err(Error::DimensionCap {
            op: "haf",
            n,
            cap: cfg.haf_cap,
        });
    }
    if n % 2 == 1 {
        return Ok(T::zero());
    }
    T::haf_kernel(m, cfg).check_finite("haf")
}

pub fn pf_with<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> Result<T> {
    if m.kind() != Kind::Skew {
        return Err(Error::WrongKind {
            op: "pf",
            expected: "skew",
        });
    }
    let n = m.n();
    if n % 2 == 1 {
        return Err(Error::OddDimension { op: "pf", n });
    }
    if n == 0 {
        return Ok(T::one());
    }
    T::pf_kernel(m, cfg)
}

pub(crate) fn pf_expansion(m: &SquareMatrix<Rational>, cfg: &Config) -> Result<Rational> {
    if m.n() > cfg.pf_cap {
        return Err(Error::DimensionCap {
            op: "pf",
            n: m.n(),
            cap: cfg.pf_cap,
        });
    }
    Ok(matching_sum_exact(m, cfg.exec, true))
}

/// Entry ring of the matching recursion.
trait Ring:
    Clone
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Mul<Output = Self>
    + for<'a> AddAssign<&'a Self>
{
}

impl<R> Ring for R where
    R: Clone
        + Send
        + Sync
        + Zero
        + One
        + Neg<Output = R>
        + Mul<Output = R>
        + for<'a> AddAssign<&'a R>
{
}

/// Sum over perfect matchings of the index set, expanding along the smallest
/// surviving index and memoizing on the surviving set. With `signed`, the
/// partner at position `k` among the remaining indices carries `(-1)^k`,
/// giving the pfaffian; otherwise the hafnian. `a` is row-major `n x n`.
fn matching_sum<R: Ring>(a: &[R], n: usize, exec: Exec, signed: bool) -> R {
    if n == 0 {
        return R::one();
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let rest = full & !1;
    if !exec.is_parallel() || n < 14 {
        let mut memo = HashMap::new();
        return expand(a, n, full, signed, &mut memo);
    }
    // One memo per first-row partner; summed in partner order.
    let partners: Vec<usize> = (1..n).collect();
    let terms = exec.map_slice(&partners, |&j| {
        let c = &a[j];
        if c.is_zero() {
            return R::zero();
        }
        let mut memo = HashMap::new();
        let t = c.clone() * expand(a, n, rest & !(1u64 << j), signed, &mut memo);
        if signed && (j - 1) % 2 == 1 {
            -t
        } else {
            t
        }
    });
    let mut sum = R::zero();
    for t in &terms {
        sum += t;
    }
    sum
}

fn expand<R: Ring>(a: &[R], n: usize, mask: u64, signed: bool, memo: &mut HashMap<u64, R>) -> R {
    if mask == 0 {
        return R::one();
    }
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1u64 << i);
    let mut acc = R::zero();
    let mut r = rest;
    let mut pos = 0usize;
    while r != 0 {
        let j = r.trailing_zeros() as usize;
        r &= r - 1;
        let c = &a[i * n + j];
        if !c.is_zero() {
            let term = c.clone() * expand(a, n, rest & !(1u64 << j), signed, memo);
            if signed && pos % 2 == 1 {
                acc += &(-term);
            } else {
                acc += &term;
            }
        }
        pos += 1;
    }
    memo.insert(mask, acc.clone());
    acc
}

/// Exact matching sum. Denominators are cleared first; when
/// `(n-1)!! * max|entry|^(n/2)` stays below `2^120` the recursion runs in
/// `i128`, which cannot overflow under that bound.
fn matching_sum_exact(m: &SquareMatrix<Rational>, exec: Exec, signed: bool) -> Rational {
    let n = m.n();
    let lcm = m.data().iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = m
        .data()
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let max = ints
        .iter()
        .map(|x| x.magnitude().clone())
        .max()
        .unwrap_or_default();
    let log2_max = if max.is_zero() {
        0.0
    } else {
        max.bits() as f64
    };
    let log2_count: f64 = (1..n).step_by(2).map(|k| (k as f64).log2()).sum();
    if log2_count + (n / 2) as f64 * log2_max < 120.0 {
        let small: Vec<i128> = ints
            .iter()
            .map(|x| i128::try_from(x).expect("bounded"))
            .collect();
        let v = matching_sum(&small, n, exec, signed);
        Rational::new(BigInt::from(v), num_traits::pow(lcm, n / 2))
    } else {
        matching_sum(m.data(), n, exec, signed)
    }
}

pub(crate) fn haf_exact(m: &SquareMatrix<Rational>, cfg: &Config) -> Rational {
    matching_sum_exact(m, cfg.exec, false)
}

pub(crate) fn haf_float(m: &SquareMatrix<f64>, cfg: &Config) -> f64 {
    matching_sum(m.data(), m.n(), cfg.exec, false)
}

/// Skew Parlett-Reid reduction to tridiagonal form with row/column pivoting.
pub(crate) fn pf_tridiagonal(m: &SquareMatrix<f64>) -> Result<f64> {
    let n = m.n();
    let mut a = m.data().to_vec();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // Largest entry in column k below the diagonal.
        let (p, _) = (k + 1..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k + 1, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if p != k + 1 {
            for j in 0..n {
                a.swap((k + 1) * n + j, p * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k + 1, i * n + p);
            }
            pf = -pf;
        }
        let pivot = a[k * n + k + 1];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[k * n + j] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[i * n + k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[i * n + j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf.check_finite("pf")
}

/// Rank, zero rows and diagonality of a matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDiagnostics {
    pub rank: usize,
    /// Zero-based indices of rows that are entirely zero.
    pub zero_rows: Vec<usize>,
    pub is_diagonal: bool,
}

pub fn diagnostics<T: Scalar>(m: &SquareMatrix<T>, cfg: &Config) -> MatrixDiagnostics {
    MatrixDiagnostics {
        rank: rank(m.n(), m.n(), m.data(), cfg.rank_tol),
        zero_rows: m.zero_rows(),
        is_diagonal: m.is_diagonal(),
    }
}

/// Rank of a row-major `rows x cols` buffer. Exact mode eliminates exactly;
/// float mode uses complete pivoting and treats pivots below
/// `rel_tol * (first pivot)` as zero.
pub fn rank<T: Scalar>(rows: usize, cols: usize, data: &[T], rel_tol: f64) -> usize {
    let mut a = data.to_vec();
    let mut rank = 0;
    let mut scale = 0.0f64;
    let mut used_cols = vec![false; cols];
    for r in 0..rows.min(cols) {
        // Pivot search over the remaining submatrix.
        let mut best: Option<(usize, usize, f64)> = None;
        for i in r..rows {
            for j in (0..cols).filter(|&j| !used_cols[j]) {
                let x = &a[i * cols + j];
                if x.is_zero() {
                    continue;
                }
                let mag = x.to_f64().abs();
                if T::EXACT {
                    best = Some((i, j, mag));
                    break;
                }
                if best.is_none_or(|b| mag > b.2) {
                    best = Some((i, j, mag));
                }
            }
            if T::EXACT && best.is_some() {
                break;
            }
        }
        let Some((pi, pj, mag)) = best else { break };
        if r == 0 {
            scale = mag;
        }
        if a[pi * cols + pj].negligible(scale, rel_tol) {
            break;
        }
        for j in 0..cols {
            a.swap(r * cols + j, pi * cols + j);
        }
        used_cols[pj] = true;
        let pivot = a[r * cols + pj].clone();
        for i in r + 1..rows {
            let x = a[i * cols + pj].clone();
            if x.is_zero() {
                continue;
            }
            let f = x / pivot.clone();
            for j in 0..cols {
                let mut t = a[r * cols + j].clone();
                t *= &f;
                a[i * cols + j] -= &t;
            }
        }
        rank += 1;
    }
    rank
}
