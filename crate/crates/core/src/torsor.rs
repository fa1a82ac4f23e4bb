//! The torsor parametrization of the surface.
//!
//! A torsor point `(s0, s, u, y)` satisfies
//!
//! ```text
//! s0 s1 s2 s3 u1 u2 u3 = y1 u1 s1^2 + y2 u2 s2^2 + y3 u3 s3^2
//! ```
//!
//! together with two systems of coprimality conditions, and maps to the
//! surface point `x_i = y_i u_i^2 u_j u_k s0^2 s_i^2`, `x4 = y1 y2 y3`.
//! Index letters `i, j, k` always denote distinct indices.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, exact_sqrt, isqrt};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::surface::{self, Class, ProjPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TorsorPoint {
    pub s0: u64,
    pub s: [u64; 3],
    pub u: [u64; 3],
    pub y: [i64; 3],
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

impl TorsorPoint {
    pub fn new(s0: u64, s: [u64; 3], u: [u64; 3], y: [i64; 3]) -> Result<Self> {
        let t = TorsorPoint { s0, s, u, y };
        t.validate()?;
        Ok(t)
    }

    /// `(lhs, rhs)` of the torsor equation.
    fn equation_sides(&self) -> Result<(i128, i128)> {
        let over = || Error::Overflow("torsor equation");
        let mut lhs = self.s0 as i128;
        for v in self.s.iter().chain(self.u.iter()) {
            lhs = lhs.checked_mul(*v as i128).ok_or_else(over)?;
        }
        let mut rhs = 0i128;
        for i in 0..3 {
            let term = (self.y[i] as i128)
                .checked_mul(self.u[i] as i128)
                .and_then(|t| t.checked_mul(self.s[i] as i128))
                .and_then(|t| t.checked_mul(self.s[i] as i128))
                .ok_or_else(over)?;
            rhs = rhs.checked_add(term).ok_or_else(over)?;
        }
        Ok((lhs, rhs))
    }

    /// Checks the torsor equation and both coprimality systems.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invariant(format!("{msg} for {self:?}")));
        let (s0, s, u, y) = (self.s0, self.s, self.u, self.y);
        if s0 == 0 || s.contains(&0) || u.contains(&0) || y.contains(&0) {
            return bad("s0, s, u must be positive and y nonzero");
        }
        let (lhs, rhs) = self.equation_sides()?;
        if lhs != rhs {
            return bad("torsor equation fails");
        }
        let uprod = u[0] as u128 * u[1] as u128 * u[2] as u128;
        if uprod > u64::MAX as u128 || !is_squarefree(uprod as u64) {
            return bad("u1 u2 u3 is not squarefree");
        }
        let ya = y.map(|v| v.unsigned_abs());
        for &(i, j) in &PAIRS {
            if gcd(s[i], s[j]) != 1 || gcd(s[i], u[j]) != 1 {
                return bad("s_i must be coprime to s_j and u_j");
            }
            if gcd(s[i], ya[j]) != 1 {
                return bad("s_i must be coprime to y_j");
            }
        }
        for i in 0..3 {
            if gcd(s0, ya[i]) != 1 {
                return bad("s0 must be coprime to every y_i");
            }
            if ya.iter().any(|&v| gcd(u[i], v) != 1) {
                return bad("u_i must be coprime to y1 y2 y3");
            }
        }
        if gcd(gcd(ya[0], ya[1]), ya[2]) != 1 {
            return bad("y is not primitive");
        }
        Ok(())
    }

    /// The four surface coordinates before sign normalization.
    pub fn raw_image(&self) -> Result<[i128; 4]> {
        let over = || Error::Overflow("torsor image");
        let s0sq = (self.s0 as i128).checked_mul(self.s0 as i128).ok_or_else(over)?;
        let uprod = self
            .u
            .iter()
            .try_fold(1i128, |a, &v| a.checked_mul(v as i128))
            .ok_or_else(over)?;
        let mut x = [0i128; 4];
        for (i, xi) in x.iter_mut().take(3).enumerate() {
            // u_i^2 u_j u_k = u_i * (u1 u2 u3)
            let si = self.s[i] as i128;
            *xi = (self.y[i] as i128)
                .checked_mul(self.u[i] as i128)
                .and_then(|t| t.checked_mul(uprod))
                .and_then(|t| t.checked_mul(s0sq))
                .and_then(|t| t.checked_mul(si * si))
                .ok_or_else(over)?;
        }
        x[3] = (self.y[0] as i128)
            .checked_mul(self.y[1] as i128)
            .and_then(|t| t.checked_mul(self.y[2] as i128))
            .ok_or_else(over)?;
        Ok(x)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.s0, self.s[0], self.s[1], self.s[2], self.u[0], self.u[1], self.u[2], self.y[0], self.y[1], self.y[2]
        )
    }
}

/// The surface point of a torsor point, canonicalized.
pub fn to_surface(t: &TorsorPoint) -> Result<ProjPoint> {
    t.validate()?;
    let raw = t.raw_image()?;
    let mut x = [0i64; 4];
    for i in 0..4 {
        x[i] = i64::try_from(raw[i]).map_err(|_| Error::Overflow("torsor image"))?;
    }
    ProjPoint::new(x)
}

/// Height of the image, `max{|y_i u_i^2 u_j u_k s0^2 s_i^2|, |y1 y2 y3|}`.
pub fn torsor_height(t: &TorsorPoint) -> Result<u128> {
    Ok(t.raw_image()?.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0))
}

/// One stratum of the search: everything except `y` is fixed.
struct Stratum {
    s0: u64,
    s: [u64; 3],
    u: [u64; 3],
    /// Coefficients `u_i s_i^2` of the linear equation in `y`.
    coef: [i128; 3],
    target: i128,
    /// Bounds on `|y_i|` from the height box.
    ybound: [i64; 3],
}

impl Stratum {
    fn accept(&self, y: [i64; 3], b: u64, out: &mut Vec<TorsorPoint>) {
        let prod = (y[0] as i128 * y[1] as i128 * y[2] as i128).unsigned_abs();
        if prod > b as u128 {
            return;
        }
        let ya = y.map(|v| v.unsigned_abs());
        for i in 0..3 {
            if gcd(self.s0, ya[i]) != 1 {
                return;
            }
            if ya.iter().any(|&v| gcd(self.u[i], v) != 1) {
                return;
            }
        }
        for &(i, j) in &PAIRS {
            if gcd(self.s[i], ya[j]) != 1 {
                return;
            }
        }
        if gcd(gcd(ya[0], ya[1]), ya[2]) != 1 {
            return;
        }
        out.push(TorsorPoint {
            s0: self.s0,
            s: self.s,
            u: self.u,
            y,
        });
    }

    /// Solves for `y_k` given the other two, honouring its box.
    fn solve(&self, k: usize, rest: i128) -> Option<i64> {
        if rest % self.coef[k] != 0 {
            return None;
        }
        let yk = rest / self.coef[k];
        (yk != 0 && yk.unsigned_abs() <= self.ybound[k] as u128).then_some(yk as i64)
    }

    /// Loops the two smallest boxes and solves the third coordinate.
    fn solve_box(&self, b: u64, out: &mut Vec<TorsorPoint>) {
        let mut idx = [0usize, 1, 2];
        idx.sort_by_key(|&i| (self.ybound[i], i));
        let (m, j, k) = (idx[0], idx[1], idx[2]);
        for ym in nonzero_range(self.ybound[m]) {
            let r1 = self.target - self.coef[m] * ym as i128;
            for yj in nonzero_range(self.ybound[j]) {
                let rest = r1 - self.coef[j] * yj as i128;
                if let Some(yk) = self.solve(k, rest) {
                    let mut y = [0; 3];
                    y[m] = ym;
                    y[j] = yj;
                    y[k] = yk;
                    self.accept(y, b, out);
                }
            }
        }
    }

    /// Uses `|y1 y2 y3| <= b`: the smallest `|y|` is at most `b^(1/3)` and the
    /// middle one at most `(b / smallest)^(1/2)`. Each solution is produced
    /// once, under the ordering of `(|y_i|, i)`.
    fn solve_ordered(&self, b: u64, out: &mut Vec<TorsorPoint>) {
        let cbrt = icbrt(b) as i64;
        for perm in PERMS {
            let [m, j, k] = perm;
            let key = |i: usize, v: i64| (v.unsigned_abs(), i);
            let mmax = self.ybound[m].min(cbrt);
            for ym in nonzero_range(mmax) {
                let am = ym.unsigned_abs();
                let jmax = (isqrt((b / am) as u128) as i64).min(self.ybound[j]);
                let r1 = self.target - self.coef[m] * ym as i128;
                for yj in nonzero_range(jmax) {
                    if key(j, yj) <= key(m, ym) {
                        continue;
                    }
                    let rest = r1 - self.coef[j] * yj as i128;
                    if let Some(yk) = self.solve(k, rest) {
                        if key(k, yk) <= key(j, yj) {
                            continue;
                        }
                        let mut y = [0; 3];
                        y[m] = ym;
                        y[j] = yj;
                        y[k] = yk;
                        self.accept(y, b, out);
                    }
                }
            }
        }
    }

    fn box_cost(&self) -> u128 {
        let mut v = self.ybound;
        v.sort_unstable();
        4 * v[0] as u128 * v[1] as u128
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn nonzero_range(bound: i64) -> impl Iterator<Item = i64> {
    (-bound..=bound).filter(|&v| v != 0)
}

fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt() as u64;
    while r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `(s0, u)` pairs with `u1 u2 u3` squarefree and room left in the box.
fn outer_strata(b: u64) -> Vec<(u64, [u64; 3])> {
    let mut out = Vec::new();
    let mut s0 = 1u64;
    while s0 * s0 <= b {
        let cap = b / (s0 * s0);
        // u_i * (u1 u2 u3) <= cap for each i
        let mut u1 = 1u64;
        while u1 * u1 <= cap {
            let mut u2 = 1u64;
            while u1 * u2 * u1.max(u2) <= cap {
                let mut u3 = 1u64;
                while u1 * u2 * u3 * u1.max(u2).max(u3) <= cap {
                    let uprod = u1 * u2 * u3;
                    if gcd(u1, u2) == 1 && gcd(u1, u3) == 1 && gcd(u2, u3) == 1 && is_squarefree(uprod) {
                        out.push((s0, [u1, u2, u3]));
                    }
                    u3 += 1;
                }
                u2 += 1;
            }
            u1 += 1;
        }
        s0 += 1;
    }
    out
}

fn enumerate_outer(b: u64, s0: u64, u: [u64; 3], out: &mut Vec<TorsorPoint>) {
    let uprod = u[0] * u[1] * u[2];
    let base = s0 * s0 * uprod;
    // |y_i| u_i s_i^2 <= b / (s0^2 u1 u2 u3), so the left side of the torsor
    // equation, s0 s1 s2 s3 u1 u2 u3, is at most three times that.
    let sprod_max = 3 * (b / base) / (s0 * uprod);
    let k = [base * u[0], base * u[1], base * u[2]];
    let smax = |i: usize| isqrt((b / k[i]) as u128) as u64;
    for s1 in 1..=smax(0) {
        if gcd(s1, u[1]) != 1 || gcd(s1, u[2]) != 1 || s1 > sprod_max {
            continue;
        }
        for s2 in 1..=smax(1) {
            if s1 * s2 > sprod_max || gcd(s2, s1) != 1 || gcd(s2, u[0]) != 1 || gcd(s2, u[2]) != 1 {
                continue;
            }
            for s3 in 1..=smax(2) {
                if s1 * s2 * s3 > sprod_max {
                    break;
                }
                if gcd(s3, s1) != 1 || gcd(s3, s2) != 1 || gcd(s3, u[0]) != 1 || gcd(s3, u[1]) != 1 {
                    continue;
                }
                let s = [s1, s2, s3];
                let coef = [0, 1, 2].map(|i| (u[i] * s[i] * s[i]) as i128);
                let ybound = [0, 1, 2].map(|i| (b / (k[i] * s[i] * s[i])) as i64);
                let st = Stratum {
                    s0,
                    s,
                    u,
                    coef,
                    target: (s0 * s1 * s2 * s3 * uprod) as i128,
                    ybound,
                };
                // The ordered search costs roughly b^(5/6) per stratum.
                let ordered_cost = 36 * (b as f64).powf(5.0 / 6.0) as u128;
                if st.box_cost() <= ordered_cost {
                    st.solve_box(b, out);
                } else {
                    st.solve_ordered(b, out);
                }
            }
        }
    }
}

/// All torsor points whose image has height at most `b`, sorted.
pub fn enumerate_torsor(b: u64, limits: &Limits) -> Result<Vec<TorsorPoint>> {
    if b == 0 {
        return Err(Error::invalid("height bound must be positive"));
    }
    if b > limits.torsor_limit {
        return Err(Error::limit("torsor search height", b, limits.torsor_limit));
    }
    let mut pts: Vec<TorsorPoint> = outer_strata(b)
        .into_par_iter()
        .flat_map_iter(|(s0, u)| {
            let mut out = Vec::new();
            enumerate_outer(b, s0, u, &mut out);
            out
        })
        .collect();
    pts.sort_unstable();
    Ok(pts)
}

/// Every torsor point mapping to `p`.
///
/// Walks the descent: factor `x4 = y1 y2 y3` with `y_i | x_i` and
/// `z_i = x_i / y_i > 0`, split `z_i = w_i t_i^2` with `w_i` squarefree,
/// recover `u_i` from `w_i = u_j u_k`, then `s0 = gcd(t_i / u_i)` and
/// `s_i = t_i / (s0 u_i)`. Candidates failing any torsor condition are
/// dropped. Both sign representatives of `p` are tried.
pub fn preimages(p: &ProjPoint) -> Result<Vec<TorsorPoint>> {
    match surface::classify(p) {
        Class::InU => {}
        Class::NotOnSurface => return Err(Error::NotOnSurface),
        Class::OnLine(l) => return Err(Error::OnLine(l)),
    }
    let mut found = BTreeSet::new();
    for sign in [1i64, -1] {
        let x = p.coords().map(|c| c * sign);
        let x4 = arith::factor(x[3])?;
        let xa = [x[0], x[1], x[2]].map(|v| v.unsigned_abs());
        for a1 in arith::divisors(&x4) {
            if xa[0] % a1 != 0 {
                continue;
            }
            let rest = x4.abs() / a1;
            let rest_f = arith::factor(rest as i64)?;
            for a2 in arith::divisors(&rest_f) {
                let a3 = rest / a2;
                if xa[1] % a2 != 0 || xa[2] % a3 != 0 {
                    continue;
                }
                let a = [a1, a2, a3];
                let y = [0, 1, 2].map(|i| x[i].signum() * a[i] as i64);
                if y[0] * y[1] * y[2] != x[3] {
                    continue;
                }
                if let Some(t) = descend(&xa, &a, y)? {
                    if to_surface(&t)? == *p {
                        found.insert(t);
                    }
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

fn descend(xa: &[u64; 3], a: &[u64; 3], y: [i64; 3]) -> Result<Option<TorsorPoint>> {
    let mut w = [0u64; 3];
    let mut t = [0u64; 3];
    for i in 0..3 {
        let z = xa[i] / a[i];
        let zf = arith::factor(z as i64)?;
        w[i] = arith::squarefree_kernel(&zf);
        match exact_sqrt((z / w[i]) as u128) {
            Some(r) => t[i] = r as u64,
            None => return Ok(None),
        }
    }
    if exact_sqrt(w[0] as u128 * w[1] as u128 * w[2] as u128).is_none() {
        return Ok(None);
    }
    let mut u = [0u64; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let wjk = w[j] as u128 * w[k] as u128;
        if !wjk.is_multiple_of(w[i] as u128) {
            return Ok(None);
        }
        match exact_sqrt(wjk / w[i] as u128) {
            Some(r) => u[i] = r as u64,
            None => return Ok(None),
        }
        if t[i] % u[i] != 0 {
            return Ok(None);
        }
    }
    let q = [0, 1, 2].map(|i| t[i] / u[i]);
    let s0 = gcd(gcd(q[0], q[1]), q[2]);
    let s = q.map(|v| v / s0);
    let cand = TorsorPoint { s0, s, u, y };
    Ok(cand.validate().is_ok().then_some(cand))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub n_surface: u64,
    pub n_torsor: u64,
    /// `n_torsor / n_surface` in lowest terms.
    pub ratio: String,
    pub sets_equal: bool,
    pub multiplicity_histogram: BTreeMap<u64, u64>,
}

/// Runs both enumerators at height `b` and compares their outputs.
pub fn compare(b: u64, limits: &Limits) -> Result<Comparison> {
    let direct = surface::enumerate_points(b, limits)?;
    let torsor = enumerate_torsor(b, limits)?;
    let mut images: BTreeMap<ProjPoint, u64> = BTreeMap::new();
    for t in &torsor {
        *images.entry(to_surface(t)?).or_default() += 1;
    }
    let sets_equal = images.len() == direct.len() && direct.iter().all(|p| images.contains_key(p));
    let mut hist = BTreeMap::new();
    for p in &direct {
        *hist.entry(images.get(p).copied().unwrap_or(0)).or_default() += 1;
    }
    let ratio = if direct.is_empty() {
        "undefined".to_string()
    } else {
        Ratio::new(torsor.len() as u64, direct.len() as u64).to_string()
    };
    Ok(Comparison {
        n_surface: direct.len() as u64,
        n_torsor: torsor.len() as u64,
        ratio,
        sets_equal,
        multiplicity_histogram: hist,
    })
}
