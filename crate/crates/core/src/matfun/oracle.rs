//! Literal definition sums. Factorial time; ground truth for the kernels.

use super::{Config, Functional};
use crate::error::{Error, Result};
use crate::matrix::{Kind, SquareMatrix};
use crate::scalar::Scalar;

/// Calls `visit(perm, sign)` for every permutation of `0..n` (Heap's
/// algorithm; every step is one transposition).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize], bool)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut odd = false;
    visit(&perm, odd);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            odd = !odd;
            visit(&perm, odd);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `det`/`per` as sums over the symmetric group; `pf`/`haf` as the
/// normalized sum over `S_{2m}` divided by `m! 2^m`.
pub fn oracle<T: Scalar>(f: Functional, m: &SquareMatrix<T>, cfg: &Config) -> Result<T> {
    let n = m.n();
    if n > cfg.oracle_cap {
        return Err(Error::DimensionCap {
            op: "oracle",
            n,
            cap: cfg.oracle_cap,
        });
    }
    match f {
        Functional::Pf if m.kind() != Kind::Skew => {
            return Err(Error::WrongKind {
                op: "pf",
                expected: "skew",
            })
        }
        Functional::Pf if n % 2 == 1 => return Err(Error::OddDimension { op: "pf", n }),
        Functional::Haf if m.kind() != Kind::Symmetric => {
            return Err(Error::WrongKind {
                op: "haf",
                expected: "symmetric",
            })
        }
        Functional::Haf if n % 2 == 1 => return Ok(T::zero()),
        _ => {}
    }

    let signed = matches!(f, Functional::Det | Functional::Pf);
    let pairs = matches!(f, Functional::Pf | Functional::Haf);
    let mut sum = T::zero();
    for_each_permutation(n, |perm, odd| {
        let mut prod = T::one();
        if pairs {
            for k in 0..n / 2 {
                prod *= m.get(perm[2 * k], perm[2 * k + 1]);
            }
        } else {
            for (i, &p) in perm.iter().enumerate() {
                prod *= m.get(i, p);
            }
        }
        if signed && odd {
            sum -= &prod;
        } else {
            sum += &prod;
        }
    });
    if pairs {
        let half = n / 2;
        let mut norm = T::one();
        for k in 1..=half {
            norm *= &T::from_i64(2 * k as i64);
        }
        sum /= &norm;
    }
    sum.check_finite("oracle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn visits_every_permutation_with_its_sign() {
        let mut seen = Vec::new();
        let mut even = 0;
        for_each_permutation(4, |p, odd| {
            seen.push(p.to_vec());
            // Sign by inversion count.
            let inv = (0..4)
                .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            assert_eq!(inv % 2 == 1, odd);
            if !odd {
                even += 1;
            }
        });
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
        assert_eq!(even, 12);
    }

    #[test]
    fn oracle_examples() {
        let cfg = Config::default();
        let ones = |n, kind| {
            SquareMatrix::<Rational>::from_fn(n, kind, |_, _| Rational::from_i64(1)).unwrap()
        };
        assert_eq!(
            oracle(Functional::Per, &ones(2, Kind::General), &cfg).unwrap(),
            Rational::from_i64(2)
        );
        assert_eq!(
            oracle(Functional::Haf, &ones(4, Kind::Symmetric), &cfg).unwrap(),
            Rational::from_i64(3)
        );
        let j = SquareMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]], Kind::Skew).unwrap();
        assert_eq!(
            oracle(Functional::Pf, &j, &cfg).unwrap(),
            Rational::from_i64(1)
        );
        assert_eq!(
            oracle(
                Functional::Det,
                &SquareMatrix::<Rational>::zeros(0, Kind::General),
                &cfg
            )
            .unwrap(),
            Rational::from_i64(1)
        );
    }

    #[test]
    fn oracle_cap() {
        let cfg = Config::default();
        let m = SquareMatrix::<f64>::identity(11);
        assert!(matches!(
            oracle(Functional::Det, &m, &cfg),
            Err(Error::DimensionCap { op: "oracle", .. })
        ));
    }
}
