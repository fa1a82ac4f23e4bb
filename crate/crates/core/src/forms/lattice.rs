//! Sublattices of Z^3 carrying the solutions of
//! `a u^2 + p^sigma b v^2 + p^tau c w^2 = 0` for an odd prime `p`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::Factorizer;
use crate::error::{Error, Result};

/// Basis vectors of a full-rank sublattice of Z^3, one per row.
pub type Basis = [[i64; 3]; 3];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub lattices: Vec<Basis>,
    pub determinants: Vec<u64>,
    pub expected_determinant: u64,
    /// Every determinant equals `p^delta(sigma, tau)`.
    pub determinants_ok: bool,
    /// Primitive box solutions found.
    pub solutions: u64,
    pub uncovered: u64,
    pub covered: bool,
    pub witness: Option<[i64; 3]>,
}

/// `delta(sigma, tau)`: `sigma + tau - 3 sigma / 2` for even `sigma`,
/// `sigma + tau - floor(3 sigma / 2) + 1` for odd `sigma`.
pub fn delta_exponent(sigma: u32, tau: u32) -> Result<u32> {
    if sigma > tau {
        return Err(Error::invalid(format!("sigma = {sigma} exceeds tau = {tau}")));
    }
    let base = sigma + tau - 3 * sigma / 2;
    Ok(if sigma.is_multiple_of(2) { base } else { base + 1 })
}

type Mat = [[i64; 3]; 3];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn diag(d: [i64; 3]) -> Mat {
    [[d[0], 0, 0], [0, d[1], 0], [0, 0, d[2]]]
}

fn det(m: &Mat) -> i128 {
    let m = m.map(|r| r.map(|x| x as i128));
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn adjugate(m: &Mat) -> [[i128; 3]; 3] {
    let m = m.map(|r| r.map(|x| x as i128));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        })
    })
}

/// Roots `r mod m` of `b r^2 + a = 0 (mod m)`.
fn roots(a: i64, b: i64, m: i64) -> Vec<i64> {
    (0..m)
        .filter(|&r| (b as i128 * (r * r) as i128 + a as i128).rem_euclid(m as i128) == 0)
        .collect()
}

/// Substitution matrices `T` with `(u, v, w)^T = T (params)` whose images
/// carry the solutions, following the case analysis on the parity of `sigma`.
fn construct(p: i64, a: i64, b: i64, c: i64, sigma: u32, tau: u32) -> Vec<Mat> {
    let s = sigma / 2;
    if sigma.is_multiple_of(2) {
        let t0 = diag([p.pow(s), 1, 1]);
        if tau == sigma {
            return vec![t0];
        }
        let m = p.pow(tau - sigma);
        roots(a, b, m)
            .into_iter()
            .map(|r| mat_mul(&t0, &[[1, 0, 0], [r, m, 0], [0, 0, 1]]))
            .collect()
    } else {
        // p^{s+1} | u; what remains is p a U^2 + b v^2 + p^{tau - sigma} c w^2 = 0.
        let t0 = diag([p.pow(s + 1), 1, 1]);
        if tau == sigma {
            return roots(b, c, p)
                .into_iter()
                .map(|r| mat_mul(&t0, &[[1, 0, 0], [0, 1, 0], [0, r, p]]))
                .collect();
        }
        // p | v, leaving a U^2 + p b V^2 + p^{tau - sigma - 1} c w^2 = 0.
        let t1 = mat_mul(&t0, &diag([1, p, 1]));
        let k = tau - sigma - 1;
        if k == 0 {
            // a U^2 + c w^2 + p b V^2: the even case with v and w swapped.
            let swap: Mat = [[1, 0, 0], [0, 0, 1], [0, 1, 0]];
            construct(p, a, c, b, 0, 1)
                .into_iter()
                .map(|r| mat_mul(&mat_mul(&t1, &swap), &r))
                .collect()
        } else {
            construct(p, a, b, c, 1, k)
                .into_iter()
                .map(|r| mat_mul(&t1, &r))
                .collect()
        }
    }
}

fn contains(adj: &[[i128; 3]; 3], d: i128, x: [i64; 3]) -> bool {
    (0..3).all(|i| {
        let c: i128 = (0..3).map(|j| adj[i][j] * x[j] as i128).sum();
        c % d == 0
    })
}

/// Builds the lattices of the case analysis and checks them against every
/// primitive solution in `[-M, M]^3`.
pub fn sublattice_cover(p: u64, abc: [i64; 3], sigma: u32, tau: u32, m: u32) -> Result<CoverReport> {
    if p < 3 || p.is_multiple_of(2) || !Factorizer::global().is_prime(p) {
        return Err(Error::invalid(format!("p = {p} is not an odd prime")));
    }
    let pi = p as i64;
    let [a, b, c] = abc;
    if abc.iter().any(|&x| x % pi == 0) {
        return Err(Error::invalid(format!("p = {p} divides a coefficient of {abc:?}")));
    }
    let delta = delta_exponent(sigma, tau)?;
    const MAX_MODULUS: u128 = 10_000_000;
    let modulus = (p as u128).saturating_pow(tau);
    if modulus > MAX_MODULUS {
        return Err(Error::limit("p^tau", modulus, MAX_MODULUS));
    }
    let expected = p.pow(delta);
    let mats = construct(pi, a, b, c, sigma, tau);
    let lattices: Vec<Basis> = mats
        .iter()
        .map(|t| [0, 1, 2].map(|col| [t[0][col], t[1][col], t[2][col]]))
        .collect();
    let determinants: Vec<u64> = mats.iter().map(|t| det(t).unsigned_abs() as u64).collect();
    let determinants_ok = determinants.iter().all(|&d| d == expected);

    let ps = (pi as i128).pow(sigma);
    let pt = (pi as i128).pow(tau);
    let checks: Vec<_> = mats.iter().map(|t| (adjugate(t), det(t))).collect();
    let mi = m as i64;
    let mut solutions = 0u64;
    let mut uncovered = 0u64;
    let mut witness = None;
    for u in -mi..=mi {
        for v in -mi..=mi {
            let partial = a as i128 * (u * u) as i128 + ps * b as i128 * (v * v) as i128;
            let denom = pt * c as i128;
            if partial % denom != 0 {
                continue;
            }
            let w2 = -partial / denom;
            if w2 < 0 {
                continue;
            }
            let Some(w) = crate::arith::exact_sqrt(w2 as u128) else {
                continue;
            };
            if w > m as u128 {
                continue;
            }
            let w = w as i64;
            for w in if w == 0 { vec![0] } else { vec![w, -w] } {
                if u.gcd(&v).gcd(&w) != 1 {
                    continue;
                }
                solutions += 1;
                let x = [u, v, w];
                let hit = checks.iter().any(|(adj, d)| contains(adj, *d, x));
                if !hit {
                    uncovered += 1;
                    witness.get_or_insert(x);
                }
            }
        }
    }
    Ok(CoverReport {
        lattices,
        determinants,
        expected_determinant: expected,
        determinants_ok,
        solutions,
        uncovered,
        covered: uncovered == 0,
        witness,
    })
}
