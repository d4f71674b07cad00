//! Traces of Frobenius `a_p` of elliptic curves over `Q` by point counting,
//! and a scanner for primes with `a_p = 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SsError {
    #[error("curve is singular (discriminant 0)")]
    Singular,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, SsError>;

/// Caveat attached to every scan.
pub const SCAN_NOTE: &str =
    "finitely many primes were checked; this is evidence only and says nothing about whether a_p = 0 infinitely often";

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllipticCurve {
    pub a: [i64; 5],
    #[serde(serialize_with = "big_as_string")]
    pub discriminant: BigInt,
}

fn big_as_string<S: serde::Serializer>(b: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

impl EllipticCurve {
    pub fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<Self> {
        let [b2, b4, b6, b8] = b_invariants(&[a1, a2, a3, a4, a6]);
        let disc = -&b2 * &b2 * &b8 - BigInt::from(8) * &b4 * &b4 * &b4 - BigInt::from(27) * &b6 * &b6
            + BigInt::from(9) * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return Err(SsError::Singular);
        }
        Ok(EllipticCurve { a: [a1, a2, a3, a4, a6], discriminant: disc })
    }

    pub fn from_slice(a: &[i64]) -> Result<Self> {
        match a {
            [a1, a2, a3, a4, a6] => Self::new(*a1, *a2, *a3, *a4, *a6),
            _ => Err(SsError::Singular),
        }
    }

    pub fn good_at(&self, p: u64) -> bool {
        !(&self.discriminant % BigInt::from(p)).is_zero()
    }

    pub fn is_short(&self) -> bool {
        self.a[0] == 0 && self.a[1] == 0 && self.a[2] == 0
    }
}

fn b_invariants(a: &[i64; 5]) -> [BigInt; 4] {
    let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
    let b2 = &a1 * &a1 + BigInt::from(4) * &a2;
    let b4 = BigInt::from(2) * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + BigInt::from(4) * &a6;
    let b8 = &a1 * &a1 * &a6 + BigInt::from(4) * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
    [b2, b4, b6, b8]
}

fn modp(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    u64::try_from(r).expect("residue fits")
}

fn modp_i(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            (i * i..=n).step_by(i).for_each(|j| sieve[j] = false);
        }
        i += 1;
    }
    (0..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Affine points by enumerating every `(x, y)`.
fn count_exhaustive(e: &EllipticCurve, p: u64) -> u64 {
    let a: Vec<u64> = e.a.iter().map(|&c| modp_i(c, p)).collect();
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = (y * y + a[0] * x * y + a[2] * y) % p;
            let rhs = (x * x % p * x + a[1] * x % p * x + a[3] * x + a[4]) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// `#E(F_p)` including the point at infinity.
pub fn count_points(e: &EllipticCurve, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(SsError::NotPrime(p));
    }
    if !e.good_at(p) {
        return Err(SsError::BadReduction(p));
    }
    if p <= 3 {
        return Ok(count_exhaustive(e, p));
    }
    // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    let [b2, b4, b6, _] = b_invariants(&e.a);
    let (c2, c1, c0) = (modp(&b2, p), modp(&(BigInt::from(2) * b4), p), modp(&b6, p));
    let mut roots = vec![0u8; p as usize];
    for y in 0..p {
        let s = (y * y % p) as usize;
        roots[s] = if s == 0 { 1 } else { 2 };
    }
    let mut n = 1u64;
    for x in 0..p {
        let v = ((4 * x % p * x % p + c2 * x % p) % p * x % p + c1 * x % p + c0) % p;
        n += roots[v as usize] as u64;
    }
    Ok(n)
}

/// `a_p = p + 1 - #E(F_p)`.
pub fn trace(e: &EllipticCurve, p: u64) -> Result<i64> {
    Ok(p as i64 + 1 - count_points(e, p)? as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub p: u64,
    pub ap: i64,
    pub supersingular: bool,
}

pub fn hasse_ok(p: u64, ap: i64) -> bool {
    (ap as i128) * (ap as i128) <= 4 * p as i128
}

fn record(e: &EllipticCurve, p: u64) -> Option<TraceRecord> {
    let ap = trace(e, p).ok()?;
    assert!(hasse_ok(p, ap), "Hasse bound fails at p = {p}: a_p = {ap}");
    Some(TraceRecord { p, ap, supersingular: ap == 0 })
}

/// Records for every good prime `p <= bound`, in increasing order.
pub fn scan_traces(e: &EllipticCurve, bound: u64, jobs: usize) -> Result<Vec<TraceRecord>> {
    let primes = primes_up_to(bound);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|err| SsError::Pool(err.to_string()))?;
    // indexed collect keeps prime order whatever the pool size
    Ok(pool.install(|| primes.par_iter().with_min_len(16).filter_map(|&p| record(e, p)).collect()))
}

/// Good primes `p <= bound` with `a_p = 0`.
pub fn scan_supersingular(e: &EllipticCurve, bound: u64, jobs: usize) -> Result<Vec<TraceRecord>> {
    Ok(scan_traces(e, bound, jobs)?.into_iter().filter(|r| r.supersingular).collect())
}

pub fn max_abs_trace(records: &[TraceRecord]) -> i64 {
    records.iter().map(|r| r.ap.abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn congruent_number_curve() {
        let e = EllipticCurve::new(0, 0, 0, -1, 0).unwrap();
        assert_eq!(e.discriminant, BigInt::from(64));
        assert_eq!(count_points(&e, 3).unwrap(), 4);
        assert_eq!(trace(&e, 3).unwrap(), 0);
        assert_eq!(count_points(&e, 5).unwrap(), 8);
        assert_eq!(trace(&e, 5).unwrap(), -2);
        assert!(matches!(count_points(&e, 2), Err(SsError::BadReduction(2))));
        assert!(matches!(count_points(&e, 9), Err(SsError::NotPrime(9))));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(EllipticCurve::new(0, 0, 0, 0, 0), Err(SsError::Singular));
    }

    #[test]
    fn small_bound() {
        let e = EllipticCurve::new(0, 0, 1, -1, 0).unwrap();
        assert!(scan_supersingular(&e, 2, 1).unwrap().len() <= 1);
    }

    #[test]
    fn long_weierstrass_matches_exhaustive() {
        let e = EllipticCurve::new(1, -1, 1, -3, 5).unwrap();
        for p in primes_up_to(60) {
            if e.good_at(p) {
                assert_eq!(count_points(&e, p).unwrap(), count_exhaustive(&e, p), "p = {p}");
            }
        }
    }
}
