use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{dk, mobius, phi, primes_up_to, radical, Factorizer};
use crate::config::Limits;
use crate::error::{Error, Result};

fn check_range(n: u64, limit: u64, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(Error::limit(what, n, limit));
    }
    Ok(())
}

/// `sum_{n <= N} c_n / r_n^k` over a common denominator `(prod_{p <= N} p)^k`,
/// where every `r_n` is squarefree.
fn exact_sum(upto: u64, k: u32, term: impl Fn(u64) -> Result<Option<(u64, u64)>>) -> Result<BigRational> {
    let primorial = primes_up_to(upto).iter().fold(BigUint::one(), |acc, &p| acc * p);
    let denom = primorial.pow(k);
    let mut numer = BigUint::zero();
    for n in 1..=upto {
        let Some((c, r)) = term(n)? else { continue };
        let mut share = denom.clone();
        for _ in 0..k {
            share /= r;
        }
        numer += share * c;
    }
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// `S(x) = sum_{n <= x} |mu(n)| d_6(n) phi(n) / n`, exactly.
pub fn s_sum(x: f64, limits: &Limits) -> Result<BigRational> {
    if x.is_nan() || x < 1.0 {
        return Err(Error::invalid("x must be at least 1"));
    }
    let n = x.floor() as u64;
    check_range(n, limits.sum_limit, "S(x) range")?;
    let fz = Factorizer::global();
    exact_sum(n, 1, |m| {
        let f = fz.factor(m as i64)?;
        Ok((mobius(&f) != 0).then(|| (dk(&f, 6) * phi(&f), m)))
    })
}

/// `(x, S(x), S(x) / (x log^5 x))` at each requested `x`, in floating point.
pub fn s_sum_ratios(xs: &[u64], limits: &Limits) -> Result<Vec<(u64, f64, f64)>> {
    let top = xs.iter().copied().max().unwrap_or(0);
    check_range(top, limits.factor_limit, "S(x) sweep")?;
    let fz = Factorizer::global();
    let mut sorted: Vec<u64> = xs.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0f64;
    let mut next = sorted.iter().peekable();
    for n in 1..=top {
        let f = fz.factor(n as i64)?;
        if mobius(&f) != 0 {
            acc += dk(&f, 6) as f64 * phi(&f) as f64 / n as f64;
        }
        while next.peek() == Some(&&n) {
            let xf = n as f64;
            out.push((n, acc, acc / (xf * xf.ln().powi(5))));
            next.next();
        }
    }
    Ok(out)
}

/// The largest `P` with `P^201 <= B^2`.
pub fn lower_sum_cutoff(b: &BigUint) -> u64 {
    let b2 = b * b;
    let mut lo = 1u64;
    let mut hi = 2u64;
    while BigUint::from(hi).pow(201) <= b2 {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if BigUint::from(mid).pow(201) <= b2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `sum_{P <= B^{2/201}} |mu(P)| d_6(P) (B / P) (phi(P) / P)`, exactly.
pub fn lower_sum(b: &BigUint, limits: &Limits) -> Result<BigRational> {
    if b.is_zero() {
        return Err(Error::invalid("B must be positive"));
    }
    let cutoff = lower_sum_cutoff(b);
    check_range(cutoff, limits.sum_limit, "B^(2/201)")?;
    let fz = Factorizer::global();
    let inner = exact_sum(cutoff, 2, |m| {
        let f = fz.factor(m as i64)?;
        Ok((mobius(&f) != 0).then(|| (dk(&f, 6) * phi(&f), m)))
    })?;
    Ok(inner * BigRational::from_integer(BigInt::from(b.clone())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSum {
    #[serde(with = "rational_string")]
    pub sum: BigRational,
    pub ratio: f64,
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `sum_{n <= z} theta(n)^2` with `theta(n) = prod_{p | n} (1 + 1/p)`,
/// exactly, and its ratio to `z`.
pub fn theta_sum(z: u64, limits: &Limits) -> Result<ThetaSum> {
    if z == 0 {
        return Err(Error::invalid("z must be positive"));
    }
    check_range(z, limits.sum_limit, "theta sum range")?;
    let fz = Factorizer::global();
    let sum = exact_sum(z, 2, |m| {
        let f = fz.factor(m as i64)?;
        let c: u64 = f.primes().map(|p| (p + 1) * (p + 1)).product();
        Ok(Some((c, radical(&f))))
    })?;
    let ratio = sum.to_f64().unwrap_or(f64::NAN) / z as f64;
    Ok(ThetaSum { sum, ratio })
}

/// The same sum in floating point, for ranges past the exact limit.
pub fn theta_sum_f64(z: u64, limits: &Limits) -> Result<f64> {
    check_range(z, limits.factor_limit, "theta sum range")?;
    let fz = Factorizer::global();
    let mut acc = 0.0;
    for n in 1..=z {
        let f = fz.factor(n as i64)?;
        acc += f.primes().map(|p| (1.0 + 1.0 / p as f64).powi(2)).product::<f64>();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Term-by-term rational accumulation.
    fn naive(upto: u64, term: impl Fn(u64) -> BigRational) -> BigRational {
        (1..=upto).map(term).fold(BigRational::zero(), |a, t| a + t)
    }

    #[test]
    fn s_examples() {
        let l = Limits::default();
        assert_eq!(s_sum(1.0, &l).unwrap(), r(1, 1));
        assert_eq!(s_sum(2.0, &l).unwrap(), r(4, 1));
        assert_eq!(s_sum(4.0, &l).unwrap(), r(8, 1));
        assert_eq!(s_sum(4.9, &l).unwrap(), r(8, 1));
        assert!(s_sum(0.5, &l).is_err());
        let small = Limits {
            sum_limit: 10,
            ..Limits::default()
        };
        assert!(matches!(s_sum(11.0, &small), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn s_matches_naive_sum() {
        let l = Limits::default();
        let want = naive(300, |n| {
            let f = factor(n as i64).unwrap();
            if mobius(&f) == 0 {
                BigRational::zero()
            } else {
                r((dk(&f, 6) * phi(&f)) as i64, n as i64)
            }
        });
        assert_eq!(s_sum(300.0, &l).unwrap(), want);
        let fl = s_sum_ratios(&[300], &l).unwrap()[0];
        assert!((fl.1 - want.to_f64().unwrap()).abs() < 1e-9 * fl.1);
    }

    #[test]
    fn theta_examples() {
        let l = Limits::default();
        let t = theta_sum(1, &l).unwrap();
        assert_eq!(t.sum, r(1, 1));
        assert_eq!(t.ratio, 1.0);
        assert_eq!(theta_sum(3, &l).unwrap().sum, r(181, 36));
        let want = naive(500, |n| {
            let f = factor(n as i64).unwrap();
            let th = crate::arith::theta(&f);
            let th = r(*th.numer(), *th.denom());
            &th * &th
        });
        assert_eq!(theta_sum(500, &l).unwrap().sum, want);
        assert!((theta_sum_f64(500, &l).unwrap() - want.to_f64().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn lower_sum_small_b() {
        let l = Limits::default();
        for b in [1u64, 7, 1000, 1 << 40] {
            let bb = BigUint::from(b);
            assert_eq!(lower_sum_cutoff(&bb), 1);
            assert_eq!(lower_sum(&bb, &l).unwrap(), r(b as i64, 1));
        }
        // 2^201 <= B^2 exactly when B >= 2^100.5.
        let b = BigUint::one() << 101u32;
        assert_eq!(lower_sum_cutoff(&b), 2);
        let want = BigRational::from_integer(BigInt::from(b.clone())) * r(5, 2);
        assert_eq!(lower_sum(&b, &l).unwrap(), want);
        assert_eq!(lower_sum_cutoff(&(BigUint::one() << 100u32)), 1);
        assert!(lower_sum(&BigUint::zero(), &l).is_err());
    }
}
