//! Gram factorizations of positive semi-definite matrices and seeded
//! generation of test instances.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, Config};
use crate::matrix::{Kind, RectMatrix, SquareMatrix};
use crate::scalar::{Rational, Scalar};

/// A list of vectors in `R^d` (or `Q^d`).
#[derive(Clone, Debug, PartialEq)]
pub struct GramFactor<T> {
    d: usize,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> GramFactor<T> {
    pub fn new(d: usize, vectors: Vec<Vec<T>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::SizeMismatch(format!(
                "vector of length {} in dimension {d}",
                v.len()
            )));
        }
        Ok(GramFactor { d, vectors })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[T] {
        &self.vectors[i]
    }

    pub fn into_vectors(self) -> Vec<Vec<T>> {
        self.vectors
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GramFactor<U> {
        GramFactor {
            d: self.d,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> GramFactor<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn gram_matrix(&self) -> SquareMatrix<T> {
        let n = self.vectors.len();
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(&self.vectors[i], &self.vectors[j]);
                data[j * n + i] = v.clone();
                data[i * n + j] = v;
            }
        }
        SquareMatrix::new(n, data, Kind::Symmetric).expect("gram matrix is symmetric")
    }
}

pub fn gram_matrix<T: Scalar>(g: &GramFactor<T>) -> SquareMatrix<T> {
    g.gram_matrix()
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s.add_product(x, y);
    }
    s
}

/// Outcome of symmetric pivoted elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    Indefinite,
    /// Positive semi-definite with the given rank.
    Semidefinite {
        rank: usize,
    },
    Definite,
}

impl Definiteness {
    pub fn is_psd(self) -> bool {
        !matches!(self, Definiteness::Indefinite)
    }

    pub fn is_posdef(self) -> bool {
        matches!(self, Definiteness::Definite)
    }
}

/// Classifies a symmetric matrix by outer-product elimination with
/// diagonal pivoting. Exact mode needs no tolerance; float mode treats
/// values below `rel_tol * max|a_ii|` as zero.
pub fn definiteness<T: Scalar>(m: &SquareMatrix<T>, rel_tol: f64) -> Result<Definiteness> {
    if m.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "definiteness",
            expected: "symmetric",
        });
    }
    let n = m.n();
    let scale = (0..n)
        .map(|i| m.get(i, i).to_f64().abs())
        .fold(0.0, f64::max);
    let mut a = m.data().to_vec();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    while !alive.is_empty() {
        let (pos, &k) = alive
            .iter()
            .enumerate()
            .max_by(|x, y| a[x.1 * n + x.1].partial_cmp(&a[y.1 * n + y.1]).unwrap())
            .unwrap();
        let p = a[k * n + k].clone();
        if p.negligible(scale, rel_tol) || p < T::zero() {
            let rest_zero = alive.iter().all(|&i| {
                alive
                    .iter()
                    .all(|&j| a[i * n + j].negligible(scale, rel_tol))
            });
            return Ok(if rest_zero {
                Definiteness::Semidefinite { rank }
            } else {
                Definiteness::Indefinite
            });
        }
        alive.swap_remove(pos);
        for &i in &alive {
            let f = a[i * n + k].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for &j in &alive {
                let mut t = a[k * n + j].clone();
                t *= &f;
                a[i * n + j] -= &t;
            }
        }
        rank += 1;
    }
    Ok(if rank == n {
        Definiteness::Definite
    } else {
        Definiteness::Semidefinite { rank }
    })
}

pub fn is_psd<T: Scalar>(m: &SquareMatrix<T>) -> bool {
    m.kind() == Kind::Symmetric
        && definiteness(m, Config::default().rank_tol).is_ok_and(Definiteness::is_psd)
}

pub fn is_posdef<T: Scalar>(m: &SquareMatrix<T>) -> bool {
    m.kind() == Kind::Symmetric
        && definiteness(m, Config::default().rank_tol).is_ok_and(Definiteness::is_posdef)
}

/// Result of [`factor_psd`].
#[derive(Clone, Debug, PartialEq)]
pub enum PsdFactor {
    Exact(GramFactor<Rational>),
    /// Float eigen-square-root factor; `fell_back` is set when an exact
    /// input needed irrational square roots.
    Float {
        factor: GramFactor<f64>,
        fell_back: bool,
    },
}

impl PsdFactor {
    pub fn to_f64(&self) -> GramFactor<f64> {
        match self {
            PsdFactor::Exact(g) => g.to_f64(),
            PsdFactor::Float { factor, .. } => factor.clone(),
        }
    }
}

/// Exact factor via pivoted `LDL^T` when every pivot is a rational square,
/// otherwise the float eigen factor with `fell_back = true`.
pub fn factor_psd(b: &SquareMatrix<Rational>) -> Result<PsdFactor> {
    match definiteness(b, 0.0)? {
        Definiteness::Indefinite => Err(Error::NotPsd),
        _ => Ok(match factor_exact(b) {
            Some(g) => PsdFactor::Exact(g),
            None => PsdFactor::Float {
                factor: factor_psd_float(&b.to_f64())?,
                fell_back: true,
            },
        }),
    }
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let sq = |v: &BigInt| {
        let r = v.sqrt();
        (&r * &r == *v).then_some(r)
    };
    Some(Rational::new(sq(x.numer())?, sq(x.denom())?))
}

fn factor_exact(b: &SquareMatrix<Rational>) -> Option<GramFactor<Rational>> {
    let n = b.n();
    let mut a = b.data().to_vec();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut columns: Vec<Vec<Rational>> = Vec::new();
    while let Some((pos, &k)) = alive
        .iter()
        .enumerate()
        .max_by(|x, y| a[x.1 * n + x.1].cmp(&a[y.1 * n + y.1]))
    {
        let p = a[k * n + k].clone();
        if !p.is_positive() {
            break;
        }
        let root = rational_sqrt(&p)?;
        let col: Vec<Rational> = (0..n)
            .map(|i| {
                if alive.contains(&i) {
                    &a[i * n + k] / &root
                } else {
                    Rational::zero()
                }
            })
            .collect();
        alive.swap_remove(pos);
        for &i in &alive {
            for &j in &alive {
                let t = &col[i] * &col[j];
                a[i * n + j] -= t;
            }
        }
        columns.push(col);
    }
    let d = columns.len();
    let vectors = (0..n)
        .map(|i| (0..d).map(|c| columns[c][i].clone()).collect())
        .collect();
    GramFactor::new(d, vectors).ok()
}

/// Eigen-square-root factor: with `B = Q diag(w) Q^T`, vector `i` is row `i`
/// of `Q diag(sqrt(w))` restricted to the non-negligible eigenvalues.
pub fn factor_psd_float(b: &SquareMatrix<f64>) -> Result<GramFactor<f64>> {
    if b.kind() != Kind::Symmetric {
        return Err(Error::WrongKind {
            op: "factor_psd",
            expected: "symmetric",
        });
    }
    let n = b.n();
    if n == 0 {
        return GramFactor::new(0, Vec::new());
    }
    let tol = Config::default().rank_tol;
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, b.data()));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if eig.eigenvalues.iter().any(|&w| w < -tol * scale.max(1.0)) {
        return Err(Error::NotPsd);
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > tol * scale)
        .collect();
    let vectors = (0..n)
        .map(|i| {
            keep.iter()
                .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt())
                .collect()
        })
        .collect();
    GramFactor::new(keep.len(), vectors)
}

/// Seed for every randomized generator; identical seeds give identical
/// instances on every platform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(0x5eed_2008)
    }
}

/// ChaCha8 stream keyed by a seed and a stream index.
pub(crate) fn keyed_rng(seed: Seed, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    General,
    Psd,
    Posdef,
    Symmetric,
    Skew,
    UnitVectors,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "general" => InstanceKind::General,
            "psd" => InstanceKind::Psd,
            "posdef" => InstanceKind::Posdef,
            "symmetric" => InstanceKind::Symmetric,
            "skew" => InstanceKind::Skew,
            "unit_vectors" | "unit-vectors" => InstanceKind::UnitVectors,
            _ => return Err(Error::invalid(format!("unknown instance kind {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Matrix(SquareMatrix<Rational>),
    Vectors(GramFactor<f64>),
}

/// Seeded generator of small-integer test matrices.
#[derive(Clone, Debug)]
pub struct InstanceRng {
    rng: ChaCha8Rng,
    bound: i64,
}

impl InstanceRng {
    pub fn new(seed: Seed) -> Self {
        Self::for_instance(seed, 0)
    }

    /// Independent stream for instance `index` under `seed`.
    pub fn for_instance(seed: Seed, index: u64) -> Self {
        InstanceRng {
            rng: keyed_rng(seed, index),
            bound: 3,
        }
    }

    /// Entries are drawn from `[-bound, bound]`.
    pub fn with_bound(mut self, bound: i64) -> Self {
        self.bound = bound;
        self
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn int(&mut self) -> i64 {
        self.rng.random_range(-self.bound..=self.bound)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn entry(&mut self) -> Rational {
        Rational::from_i64(self.int())
    }

    pub fn rect(&mut self, rows: usize, cols: usize) -> RectMatrix<Rational> {
        RectMatrix::from_fn(rows, cols, |_, _| self.entry())
    }

    /// Rectangular matrix whose entries are zero with probability `p_zero`.
    pub fn sparse_rect(&mut self, rows: usize, cols: usize, p_zero: f64) -> RectMatrix<Rational> {
        RectMatrix::from_fn(rows, cols, |_, _| {
            if self.chance(p_zero) {
                Rational::zero()
            } else {
                self.entry()
            }
        })
    }

    pub fn general(&mut self, n: usize) -> SquareMatrix<Rational> {
        SquareMatrix::from_fn(n, Kind::General, |_, _| self.entry()).unwrap()
    }

    pub fn symmetric(&mut self, n: usize) -> SquareMatrix<Rational> {
        self.sparse_symmetric(n, 0.0)
    }

    /// Symmetric matrix whose upper-triangle entries are zero with
    /// probability `p_zero`.
    pub fn sparse_symmetric(&mut self, n: usize, p_zero: f64) -> SquareMatrix<Rational> {
        let upper = self.sparse_rect(n, n, p_zero);
        SquareMatrix::from_fn(n, Kind::Symmetric, |i, j| {
            upper.get(i.min(j), i.max(j)).clone()
        })
        .unwrap()
    }

    pub fn skew(&mut self, n: usize) -> SquareMatrix<Rational> {
        let upper = self.rect(n, n);
        SquareMatrix::from_fn(n, Kind::Skew, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => upper.get(i, j).clone(),
            std::cmp::Ordering::Equal => Rational::zero(),
            std::cmp::Ordering::Greater => -upper.get(j, i).clone(),
        })
        .unwrap()
    }

    /// Skew matrix `G K G^T` with `K` a random `k x k` skew and `G` a random
    /// `n x k` integer matrix; its rank is at most `k`.
    pub fn skew_low_rank(&mut self, n: usize, k: usize) -> SquareMatrix<Rational> {
        let kk = self.skew(k);
        let g = self.rect(n, k);
        SquareMatrix::from_fn(n, Kind::Skew, |i, j| {
            let mut s = Rational::zero();
            for a in 0..k {
                for b in 0..k {
                    s += g.get(i, a) * kk.get(a, b) * g.get(j, b);
                }
            }
            s
        })
        .unwrap()
    }

    /// `G^T G` with `G` a `rank x n` integer matrix of exactly that rank.
    pub fn psd(&mut self, n: usize, rank: usize) -> Result<SquareMatrix<Rational>> {
        if rank > n {
            return Err(Error::invalid(format!("rank {rank} exceeds dimension {n}")));
        }
        let g = loop {
            let g = self.rect(rank, n);
            if matfun::rank(rank, n, g.data(), 0.0) == rank {
                break g;
            }
        };
        Ok(SquareMatrix::from_fn(n, Kind::Symmetric, |i, j| {
            let mut s = Rational::zero();
            for r in 0..rank {
                s.add_product(g.get(r, i), g.get(r, j));
            }
            s
        })
        .unwrap())
    }

    pub fn posdef(&mut self, n: usize) -> SquareMatrix<Rational> {
        self.psd(n, n).unwrap()
    }

    /// Diagonal PSD matrix; each entry is zero with probability `p_zero`.
    pub fn diagonal_psd(&mut self, n: usize, p_zero: f64) -> SquareMatrix<Rational> {
        let diag = (0..n)
            .map(|_| {
                if self.chance(p_zero) {
                    Rational::zero()
                } else {
                    Rational::from_i64(
                        self.rng
                            .random_range(1..=self.bound.max(1) * self.bound.max(1)),
                    )
                }
            })
            .collect();
        SquareMatrix::diagonal(diag)
    }

    /// `n` unit vectors in `R^d`, normalized Gaussian directions.
    pub fn unit_vectors(&mut self, n: usize, d: usize) -> GramFactor<f64> {
        let vectors = (0..n)
            .map(|_| loop {
                let v: Vec<f64> = (0..d).map(|_| self.rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    break v.into_iter().map(|x| x / norm).collect();
                }
            })
            .collect();
        GramFactor::new(d, vectors).unwrap()
    }
}

/// Zeroes row and column `i` of a symmetric matrix; PSD is preserved.
pub fn zero_out(m: &SquareMatrix<Rational>, i: usize) -> SquareMatrix<Rational> {
    SquareMatrix::from_fn(m.n(), m.kind(), |r, c| {
        if r == i || c == i {
            Rational::zero()
        } else {
            m.get(r, c).clone()
        }
    })
    .unwrap()
}

/// Block-diagonal `diag(a, b)`.
pub fn block_diagonal(
    a: &SquareMatrix<Rational>,
    b: &SquareMatrix<Rational>,
) -> SquareMatrix<Rational> {
    let (p, q) = (a.n(), b.n());
    SquareMatrix::from_fn(p + q, Kind::Symmetric, |i, j| {
        if i < p && j < p {
            a.get(i, j).clone()
        } else if i >= p && j >= p {
            b.get(i - p, j - p).clone()
        } else {
            Rational::zero()
        }
    })
    .unwrap()
}

/// One seeded instance. `rank` applies to `psd`; `d` to `unit_vectors`.
pub fn random_instance(
    kind: InstanceKind,
    n: usize,
    d: usize,
    rank: Option<usize>,
    seed: Seed,
) -> Result<Instance> {
    let mut g = InstanceRng::new(seed);
    Ok(match kind {
        InstanceKind::General => Instance::Matrix(g.general(n)),
        InstanceKind::Psd => Instance::Matrix(g.psd(n, rank.unwrap_or(n))?),
        InstanceKind::Posdef => Instance::Matrix(g.posdef(n)),
        InstanceKind::Symmetric => Instance::Matrix(g.symmetric(n)),
        InstanceKind::Skew => Instance::Matrix(g.skew(n)),
        InstanceKind::UnitVectors => {
            if d == 0 && n > 0 {
                return Err(Error::invalid("unit vectors need d >= 1"));
            }
            Instance::Vectors(g.unit_vectors(n, d))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn gram_matrix_examples() {
        let e = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(0), r(1)]]).unwrap();
        assert_eq!(e.gram_matrix(), SquareMatrix::identity(2));
        let same = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(1), r(0)]]).unwrap();
        assert_eq!(
            same.gram_matrix(),
            SquareMatrix::from_i64_rows(&[vec![1, 1], vec![1, 1]], Kind::Symmetric).unwrap()
        );
        let g = GramFactor::new(2, vec![vec![r(1), r(0)], vec![r(1), r(1)]]).unwrap();
        assert_eq!(
            g.gram_matrix(),
            SquareMatrix::from_i64_rows(&[vec![1, 1], vec![1, 2]], Kind::Symmetric).unwrap()
        );
    }

    #[test]
    fn factor_identity_and_rank_one() {
        let PsdFactor::Exact(f) = factor_psd(&SquareMatrix::identity(3)).unwrap() else {
            panic!("identity factors exactly");
        };
        assert_eq!(f.gram_matrix(), SquareMatrix::identity(3));
        let ones =
            SquareMatrix::from_i64_rows(&[vec![1; 3], vec![1; 3], vec![1; 3]], Kind::Symmetric)
                .unwrap();
        let PsdFactor::Exact(f) = factor_psd(&ones).unwrap() else {
            panic!("all-ones factors exactly");
        };
        assert_eq!(f.dim(), 1);
        assert!(f.vectors().iter().all(|v| v == &vec![r(1)]));
    }

    #[test]
    fn irrational_pivots_fall_back_to_float() {
        let b = SquareMatrix::from_i64_rows(&[vec![2, 1], vec![1, 2]], Kind::Symmetric).unwrap();
        let PsdFactor::Float { factor, fell_back } = factor_psd(&b).unwrap() else {
            panic!("sqrt(2) is irrational");
        };
        assert!(fell_back);
        let g = factor.gram_matrix();
        for (x, y) in g.data().iter().zip(b.to_f64().data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let b = SquareMatrix::from_i64_rows(&[vec![1, 2], vec![2, 1]], Kind::Symmetric).unwrap();
        assert_eq!(factor_psd(&b), Err(Error::NotPsd));
        assert!(matches!(factor_psd_float(&b.to_f64()), Err(Error::NotPsd)));
        let b = SquareMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]], Kind::Symmetric).unwrap();
        assert_eq!(definiteness(&b, 0.0), Ok(Definiteness::Indefinite));
    }

    #[test]
    fn definiteness_examples() {
        let ones = SquareMatrix::from_i64_rows(&[vec![1, 1], vec![1, 1]], Kind::Symmetric).unwrap();
        assert_eq!(
            definiteness(&ones, 0.0),
            Ok(Definiteness::Semidefinite { rank: 1 })
        );
        assert_eq!(
            definiteness(&SquareMatrix::<Rational>::identity(3), 0.0),
            Ok(Definiteness::Definite)
        );
        assert_eq!(
            definiteness(&SquareMatrix::<Rational>::zeros(2, Kind::Symmetric), 0.0),
            Ok(Definiteness::Semidefinite { rank: 0 })
        );
        assert!(!is_posdef(&ones.to_f64().scaled(&2.0)));
    }

    #[test]
    fn generated_instances_honor_their_contract() {
        let cfg = Config::default();
        for s in 0..20 {
            let mut g = InstanceRng::new(Seed(s));
            let p = g.posdef(3);
            assert_eq!(definiteness(&p, 0.0), Ok(Definiteness::Definite));
            let q = g.psd(4, 2).unwrap();
            assert_eq!(matfun::diagnostics(&q, &cfg).rank, 2);
            let k = g.skew(4);
            assert_eq!(k.kind(), Kind::Skew);
            let low = g.skew_low_rank(5, 2);
            assert!(matfun::diagnostics(&low, &cfg).rank <= 2);
        }
        assert!(InstanceRng::new(Seed(1)).psd(2, 3).is_err());
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_instance(InstanceKind::Psd, 4, 0, Some(2), Seed(9)).unwrap();
        let b = random_instance(InstanceKind::Psd, 4, 0, Some(2), Seed(9)).unwrap();
        let c = random_instance(InstanceKind::Psd, 4, 0, Some(2), Seed(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let Instance::Vectors(u) =
            random_instance(InstanceKind::UnitVectors, 3, 4, None, Seed(1)).unwrap()
        else {
            panic!()
        };
        for v in u.vectors() {
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
