//! Exact integer arithmetic: factorization and the multiplicative functions
//! used by every other module.
//!
//! Factorization is backed by a smallest-prime-factor sieve. The sieve for
//! the default limit is built lazily once and never mutated afterwards, so
//! every function here is safe to call from any number of threads.

use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

pub const DEFAULT_FACTOR_LIMIT: u64 = 1_000_000;

/// A nonzero integer together with its prime factorization.
///
/// Primes are strictly increasing, exponents are positive and the product of
/// the prime powers is `|value|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    value: i64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    /// Builds a factored integer from explicit parts, checking the invariants.
    pub fn from_parts(value: i64, factors: Vec<(u64, u32)>) -> Result<Self> {
        if value == 0 {
            return Err(Error::Zero);
        }
        let mut prev = 1u64;
        let mut prod: u128 = 1;
        for &(p, e) in &factors {
            if p <= prev || e == 0 {
                return Err(Error::invalid(
                    "factors must have increasing primes and positive exponents",
                ));
            }
            prev = p;
            for _ in 0..e {
                prod = prod.checked_mul(p as u128).ok_or(Error::Overflow("factor product"))?;
            }
        }
        if prod != value.unsigned_abs() as u128 {
            return Err(Error::invalid("factor product does not equal |value|"));
        }
        Ok(FactoredInt { value, factors })
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn abs(&self) -> u64 {
        self.value.unsigned_abs()
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Factorization of the product of two coprime integers.
    pub fn mul_coprime(&self, other: &FactoredInt) -> Result<FactoredInt> {
        let value = self.value.checked_mul(other.value).ok_or(Error::Overflow("product"))?;
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            match (self.factors.get(i), other.factors.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    return Err(Error::invalid("operands are not coprime"));
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    factors.push(*a);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    factors.push(*b);
                    j += 1;
                }
                (Some(a), None) => {
                    factors.push(*a);
                    i += 1;
                }
                (None, Some(b)) => {
                    factors.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(FactoredInt { value, factors })
    }
}

/// Prime sieve up to a fixed limit `L`.
///
/// Integers up to `L` are split with a smallest-prime-factor table, larger
/// ones by trial division against the sieved primes, which settles every
/// `|n| <= L^2`. Anything bigger is refused.
#[derive(Debug)]
pub struct Factorizer {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

static GLOBAL: OnceLock<Factorizer> = OnceLock::new();

impl Factorizer {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let primes = (2..=n).filter(|&i| spf[i] as usize == i).map(|i| i as u64).collect();
        Factorizer { limit, spf, primes }
    }

    /// The shared factorizer. Its limit is the default unless
    /// [`Factorizer::install_global`] ran first.
    pub fn global() -> &'static Factorizer {
        GLOBAL.get_or_init(|| Factorizer::new(DEFAULT_FACTOR_LIMIT))
    }

    /// Sets the limit of the shared factorizer. Returns false if it was
    /// already built.
    pub fn install_global(limit: u64) -> bool {
        GLOBAL.set(Factorizer::new(limit)).is_ok()
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Largest magnitude [`Factorizer::factor`] accepts.
    pub fn max_input(&self) -> u128 {
        self.limit as u128 * self.limit as u128
    }

    pub fn factor(&self, n: i64) -> Result<FactoredInt> {
        if n == 0 {
            return Err(Error::Zero);
        }
        let mut m = n.unsigned_abs();
        if m as u128 > self.max_input() {
            return Err(Error::limit("factorization input", m, self.max_input()));
        }
        let mut factors = Vec::new();
        if m > self.limit {
            for &p in &self.primes {
                if p * p > m {
                    break;
                }
                let mut e = 0;
                while m.is_multiple_of(p) {
                    m /= p;
                    e += 1;
                }
                if e > 0 {
                    factors.push((p, e));
                }
                if m <= self.limit {
                    break;
                }
            }
            if m > self.limit {
                factors.push((m, 1));
                return Ok(FactoredInt { value: n, factors });
            }
        }
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Ok(FactoredInt { value: n, factors })
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }
}

/// Factors `n` with the shared factorizer.
pub fn factor(n: i64) -> Result<FactoredInt> {
    Factorizer::global().factor(n)
}

/// All primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn mobius(n: &FactoredInt) -> i8 {
    if n.factors.iter().any(|&(_, e)| e >= 2) {
        0
    } else if n.factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn small_omega(n: &FactoredInt) -> u32 {
    n.factors.len() as u32
}

/// Number of ordered factorizations of `n` into `k` positive factors.
pub fn dk(n: &FactoredInt, k: u32) -> u64 {
    assert!(k >= 1, "dk needs k >= 1");
    n.factors
        .iter()
        .map(|&(_, e)| binomial((e + k - 1) as u64, (k - 1) as u64))
        .product()
}

fn binomial(n: u64, r: u64) -> u64 {
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn phi(n: &FactoredInt) -> u64 {
    n.factors.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// `prod_{p | n} (1 + 1/p)`, exactly.
pub fn theta(n: &FactoredInt) -> Ratio<i64> {
    let (num, den) = n
        .factors
        .iter()
        .fold((1i64, 1i64), |(a, b), &(p, _)| (a * (p as i64 + 1), b * p as i64));
    Ratio::new(num, den)
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: &FactoredInt) -> u64 {
    n.primes().product()
}

/// The squarefree `w` with `|n| / w` a perfect square.
pub fn squarefree_kernel(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p)
        .product()
}

/// Positive divisors of `|n|`, ascending.
pub fn divisors(n: &FactoredInt) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in &n.factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Squarefree positive divisors of `|n|`, each paired with its Möbius value.
pub fn squarefree_divisors(n: &FactoredInt) -> Vec<(u64, i8)> {
    let mut out = vec![(1u64, 1i8)];
    for p in n.primes() {
        let len = out.len();
        for i in 0..len {
            let (d, m) = out[i];
            out.push((d * p, -m));
        }
    }
    out.sort_unstable();
    out
}

/// The quadratic symbol `(a | n)` extended multiplicatively over the
/// factorization of `n`, with every factor at the prime 2 equal to zero.
///
/// For odd `n` this is the Jacobi symbol; for even `n > 1` it is 0.
/// `(a | 1) = 1` for every `a`.
pub fn symbol(a: i64, n: u64) -> i8 {
    assert!(n >= 1, "symbol needs a positive modulus");
    if n == 1 {
        return 1;
    }
    if n.is_multiple_of(2) {
        return 0;
    }
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

/// Exact integer square root of `n` when `n` is a perfect square.
pub fn exact_sqrt(n: u128) -> Option<u128> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}
