//! Binary quadratic forms and class groups of quadratic fields.
//!
//! Imaginary discriminants use Gauss-reduced positive definite forms; real
//! discriminants use cycles of reduced indefinite forms, which compute the
//! narrow class group directly. The ordinary group is then the quotient by
//! the class of the form `(-1, b, c)`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{self, AbError, FinAbGroup, GroupElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("form {0} is not primitive")]
    NonPrimitive(QuadForm),
    #[error("form {0} is not positive definite")]
    IndefiniteInDefiniteRoutine(QuadForm),
    #[error("discriminants differ: {0} and {1}")]
    DiscriminantMismatch(i64, i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("discriminant {0} has the wrong sign for this routine")]
    WrongSign(i64),
    #[error(transparent)]
    Group(#[from] AbError),
}

pub type Result<T> = std::result::Result<T, QuadError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// A 2x2 integer matrix acting on forms by substitution.
pub type Transform = [[i64; 2]; 2];

fn tmul(x: &Transform, y: &Transform) -> Transform {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// The form `(a, -b, c)`, inverse in the class group.
    pub fn opposite(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c)
    }

    /// `f(p x + q y, r x + s y)` for the matrix `[[p, q], [r, s]]`.
    pub fn transform(&self, m: &Transform) -> Self {
        let (p, q, r, s) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        let (a, b, c) = (self.a, self.b, self.c);
        QuadForm::new(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )
    }

    /// Reduced positive definite form: `|b| <= a <= c`, and `b >= 0` when
    /// `|b| = a` or `a = c`.
    pub fn is_reduced_definite(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Reduced indefinite form: `0 < b < sqrt(D)` and `sqrt(D) - b < 2|a| < sqrt(D) + b`.
    pub fn is_reduced_indefinite(&self) -> bool {
        let d = self.discriminant();
        if d <= 0 || self.b <= 0 {
            return false;
        }
        let b2 = self.b * self.b;
        let two_a = 2 * self.a.abs();
        // b < sqrt(D)
        if b2 >= d {
            return false;
        }
        // sqrt(D) - b < 2|a|  <=>  sqrt(D) < 2|a| + b
        let lo = two_a + self.b;
        // 2|a| < sqrt(D) + b  <=>  2|a| - b < sqrt(D)
        let hi = two_a - self.b;
        lo * lo > d && (hi < 0 || hi * hi < d)
    }
}

/// Gauss reduction of a positive definite primitive form, with a witness
/// `M` in SL2(Z) such that `f.transform(M)` is the result.
pub fn reduce_form(f: &QuadForm) -> Result<(QuadForm, Transform)> {
    if !f.is_primitive() {
        return Err(QuadError::NonPrimitive(*f));
    }
    if f.discriminant() >= 0 || f.a <= 0 {
        return Err(QuadError::IndefiniteInDefiniteRoutine(*f));
    }
    let mut g = *f;
    let mut m: Transform = [[1, 0], [0, 1]];
    loop {
        if g.b > g.a || g.b <= -g.a {
            // translate b into (-a, a]
            let k = Integer::div_floor(&(g.a - g.b), &(2 * g.a));
            let t = [[1, k], [0, 1]];
            g = g.transform(&t);
            m = tmul(&m, &t);
        }
        if g.a > g.c {
            let s = [[0, -1], [1, 0]];
            g = g.transform(&s);
            m = tmul(&m, &s);
            continue;
        }
        if g.a == g.c && g.b < 0 {
            let s = [[0, -1], [1, 0]];
            g = g.transform(&s);
            m = tmul(&m, &s);
        }
        break;
    }
    debug_assert!(g.is_reduced_definite());
    Ok((g, m))
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as i64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Gauss composition of two primitive forms of the same discriminant,
/// without reduction.
pub fn compose_raw(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let d = f.discriminant();
    if d != g.discriminant() {
        return Err(QuadError::DiscriminantMismatch(d, g.discriminant()));
    }
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let dd = d as i128;
    let h = (b1 + b2) / 2;
    let e1 = a1.extended_gcd(&a2);
    let e2 = e1.gcd.extended_gcd(&h);
    let e = e2.gcd;
    let p = e2.x * e1.x;
    let q = e2.x * e1.y;
    let r = e2.y;
    let big_a = a1 * a2 / (e * e);
    let num = p * a1 * b2 + q * a2 * b1 + r * (b1 * b2 + dd) / 2;
    let big_b = (num / e).rem_euclid(2 * big_a.abs());
    let big_c = (big_b * big_b - dd) / (4 * big_a);
    let out = QuadForm::new(big_a as i64, big_b as i64, big_c as i64);
    debug_assert_eq!(out.discriminant(), d);
    Ok(out)
}

/// Reduced representative of the composite class (definite forms).
pub fn compose_classes(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let h = compose_raw(f, g)?;
    Ok(reduce_form(&h)?.0)
}

/// `(1, b0, c0)` with `b0` the parity of `D`.
pub fn principal_form(d: i64) -> QuadForm {
    let b = d.rem_euclid(2);
    QuadForm::new(1, b, (b * b - d) / 4)
}

fn squarefree(n: i64) -> bool {
    let mut n = n.abs();
    if n == 0 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
        }
        _ => false,
    }
}

/// Distinct primes dividing `n`.
pub fn prime_divisors(n: i64) -> Vec<i64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Reduced positive definite primitive forms of discriminant `d < 0`.
pub fn reduced_forms(d: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    let amax = isqrt(-d / 3);
    for a in 1..=amax {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = QuadForm::new(a, b, num / (4 * a));
            if f.is_reduced_definite() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    out
}

/// A class group with a chosen representative for each class.
#[derive(Clone, Debug, Serialize)]
pub struct FormClassGroup {
    pub disc: i64,
    pub narrow: bool,
    pub representatives: Vec<QuadForm>,
    pub group: FinAbGroup,
    /// `elem_map[i]` is the group element of `representatives[i]`.
    pub elem_map: Vec<GroupElem>,
}

impl FormClassGroup {
    pub fn h(&self) -> usize {
        self.representatives.len()
    }

    pub fn elem_of(&self, f: &QuadForm) -> Option<&GroupElem> {
        self.representatives.iter().position(|g| g == f).map(|i| &self.elem_map[i])
    }
}

pub fn group_from_table(table: &[Vec<usize>], identity: usize) -> Result<(FinAbGroup, Vec<GroupElem>)> {
    Ok(abgroup::from_cayley_table(table, identity)?)
}

fn check_negative(d: i64) -> Result<()> {
    if d >= 0 {
        return Err(QuadError::WrongSign(d));
    }
    if !is_fundamental(d) {
        return Err(QuadError::NotFundamental(d));
    }
    Ok(())
}

/// Cayley table of the reduced forms under composition, built in parallel.
pub fn cayley_table(forms: &[QuadForm]) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<QuadForm, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    forms
        .par_iter()
        .map(|f| {
            forms
                .iter()
                .map(|g| {
                    let c = compose_classes(f, g)?;
                    Ok(*index.get(&c).expect("composition closes on reduced forms"))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect()
}

/// Class group of an imaginary quadratic field of discriminant `d`.
pub fn class_group(d: i64) -> Result<FormClassGroup> {
    check_negative(d)?;
    let forms = reduced_forms(d);
    let table = cayley_table(&forms)?;
    let id = forms.iter().position(|f| *f == principal_form(d)).expect("principal form is reduced");
    let (group, elem_map) = group_from_table(&table, id)?;
    Ok(FormClassGroup { disc: d, narrow: false, representatives: forms, group, elem_map })
}

// ---------------------------------------------------------------------------
// Real quadratic fields

/// All reduced indefinite primitive forms of discriminant `d > 0`.
pub fn reduced_indefinite_forms(d: i64) -> Vec<QuadForm> {
    let s = isqrt(d);
    let mut out = Vec::new();
    for b in 1..=s {
        if (b - d).rem_euclid(2) != 0 {
            continue;
        }
        let num = b * b - d; // negative
        for a_abs in 1..=(s + b) / 2 + 1 {
            if num % (4 * a_abs) != 0 {
                continue;
            }
            for a in [a_abs, -a_abs] {
                let f = QuadForm::new(a, b, num / (4 * a));
                if f.is_reduced_indefinite() && f.is_primitive() {
                    out.push(f);
                }
            }
        }
    }
    out.sort();
    out
}

/// Normalize `b` modulo `2|c|` into the standard window for `rho`.
fn rho_b(b: i64, c: i64, d: i64) -> i64 {
    let s = isqrt(d);
    let m = 2 * c.abs();
    let target = if c.abs() > s {
        // -|c| < b' <= |c|
        let lo = -c.abs() + 1;
        lo + (b - lo).rem_euclid(m)
    } else {
        // sqrt(D) - 2|c| < b' < sqrt(D); with b' integral and D not a square
        let lo = s - m + 1;
        lo + (b - lo).rem_euclid(m)
    };
    debug_assert_eq!((target - b).rem_euclid(m), 0);
    target
}

/// One step of the reduction operator on indefinite forms.
pub fn rho(f: &QuadForm) -> QuadForm {
    let d = f.discriminant();
    let b = rho_b(-f.b, f.c, d);
    QuadForm::new(f.c, b, (b * b - d) / (4 * f.c))
}

/// Reduce an indefinite form by iterating `rho`.
pub fn reduce_indefinite(f: &QuadForm) -> Result<QuadForm> {
    if !f.is_primitive() {
        return Err(QuadError::NonPrimitive(*f));
    }
    let d = f.discriminant();
    if d <= 0 {
        return Err(QuadError::WrongSign(d));
    }
    let mut g = *f;
    let mut steps = 0usize;
    while !g.is_reduced_indefinite() {
        g = rho(&g);
        steps += 1;
        assert!(steps < 10_000, "indefinite reduction failed to converge on {f}");
    }
    Ok(g)
}

/// The cycles of reduced forms under `rho`, each starting at its least form.
pub fn cycles(d: i64) -> Vec<Vec<QuadForm>> {
    let forms = reduced_indefinite_forms(d);
    let mut seen: HashMap<QuadForm, usize> = HashMap::new();
    let mut out: Vec<Vec<QuadForm>> = Vec::new();
    for f in &forms {
        if seen.contains_key(f) {
            continue;
        }
        let mut cyc = vec![*f];
        let mut g = rho(f);
        while g != *f {
            cyc.push(g);
            g = rho(&g);
        }
        for x in &cyc {
            seen.insert(*x, out.len());
        }
        out.push(cyc);
    }
    out
}

fn check_positive(d: i64) -> Result<()> {
    if d <= 0 {
        return Err(QuadError::WrongSign(d));
    }
    if !is_fundamental(d) {
        return Err(QuadError::NotFundamental(d));
    }
    Ok(())
}

/// Narrow or ordinary class group of a real quadratic field.
pub fn real_class_group(d: i64, narrow: bool) -> Result<FormClassGroup> {
    check_positive(d)?;
    let cyc = cycles(d);
    let mut which: HashMap<QuadForm, usize> = HashMap::new();
    for (i, c) in cyc.iter().enumerate() {
        for f in c {
            which.insert(*f, i);
        }
    }
    let reps: Vec<QuadForm> = cyc.iter().map(|c| c[0]).collect();
    let class_of = |f: &QuadForm| -> Result<usize> {
        let r = reduce_indefinite(f)?;
        Ok(*which.get(&r).expect("reduced form lies on a cycle"))
    };
    let table: Vec<Vec<usize>> = reps
        .par_iter()
        .map(|f| reps.iter().map(|g| class_of(&compose_raw(f, g)?)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let id = class_of(&principal_form(d))?;
    let (ngroup, nmap) = group_from_table(&table, id)?;
    if narrow {
        return Ok(FormClassGroup { disc: d, narrow: true, representatives: reps, group: ngroup, elem_map: nmap });
    }
    let b0 = d.rem_euclid(2);
    let minus = class_of(&QuadForm::new(-1, b0, (b0 * b0 - d) / -4))?;
    let (group, proj) = abgroup::quotient(&ngroup, &[nmap[minus].clone()])?;
    let mut representatives = Vec::new();
    let mut elem_map: Vec<GroupElem> = Vec::new();
    for (i, f) in reps.iter().enumerate() {
        let e = proj.apply(&nmap[i]);
        if !elem_map.contains(&e) {
            representatives.push(*f);
            elem_map.push(e);
        }
    }
    Ok(FormClassGroup { disc: d, narrow: false, representatives, group, elem_map })
}

// ---------------------------------------------------------------------------
// Fundamental units

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalUnit {
    /// `(x + y sqrt(D)) / 2` is the unit.
    #[serde(serialize_with = "as_decimal")]
    pub x: BigInt,
    #[serde(serialize_with = "as_decimal")]
    pub y: BigInt,
    pub norm: i8,
    pub period: usize,
}

fn as_decimal<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Fundamental unit from the continued fraction of `(1 + sqrt D)/2` or
/// `sqrt(D/4)`.
pub fn fundamental_unit(d: i64) -> Result<FundamentalUnit> {
    check_positive(d)?;
    let one_mod_four = d.rem_euclid(4) == 1;
    // the surd (p0 + sqrt(n)) / q0
    let (n, p0, q0) = if one_mod_four { (d, 1i64, 2i64) } else { (d / 4, 0, 1) };
    let s = isqrt(n);
    let nb = BigInt::from(n);
    let (mut p, mut q) = (BigInt::from(p0), BigInt::from(q0));
    // convergents h/k
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut states: Vec<(BigInt, BigInt)> = Vec::new();
    let mut unit: Option<(BigInt, BigInt, i8)> = None;
    let mut period = 0usize;
    for step in 0.. {
        let a = (&p + BigInt::from(s)).div_floor(&q);
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        if unit.is_none() {
            let norm = if one_mod_four {
                &h * &h - &h * &k - &k * &k * BigInt::from((d - 1) / 4)
            } else {
                &h * &h - &nb * &k * &k
            };
            if norm.abs().is_one() {
                let sign = if norm.is_positive() { 1 } else { -1 };
                let (x, y) = if one_mod_four {
                    (BigInt::from(2) * &h - &k, k.clone())
                } else {
                    (BigInt::from(2) * &h, k.clone())
                };
                unit = Some((x, y, sign));
            }
        }
        p = &a * &q - &p;
        q = (&nb - &p * &p) / &q;
        if step >= 1 {
            let st = (p.clone(), q.clone());
            if let Some(pos) = states.iter().position(|x| *x == st) {
                period = states.len() - pos;
            }
            states.push(st);
        } else {
            states.push((p.clone(), q.clone()));
        }
        if period > 0 && unit.is_some() {
            break;
        }
    }
    let (x, y, norm) = unit.expect("continued fraction yields a unit");
    Ok(FundamentalUnit { x, y, norm, period })
}
