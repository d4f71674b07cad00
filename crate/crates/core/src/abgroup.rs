//! Finite abelian groups in invariant-factor form, their homomorphisms and
//! character groups.
//!
//! A group is a list `d1 | d2 | ... | dk` with every factor at least 2; the
//! trivial group is the empty list. Elements are coordinate vectors, homs are
//! integer matrices whose column `j` is the image of generator `j`, and
//! characters are vectors of rationals mod 1.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbError {
    #[error("relations do not present a finite group")]
    InfiniteQuotient,
    #[error("ill-formed homomorphism: {0}")]
    IllFormedHom(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("group of order {order} exceeds the enumeration bound {limit}")]
    GroupTooLarge { order: u128, limit: u64 },
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid character: {0}")]
    InvalidCharacter(String),
}

pub type Result<T> = std::result::Result<T, AbError>;

/// Upper bound for exhaustive enumeration, from `PERIODLAB_MAX_GROUP_ORDER`.
pub fn max_group_order() -> u64 {
    std::env::var("PERIODLAB_MAX_GROUP_ORDER")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1_000_000)
}

// ---------------------------------------------------------------------------
// Smith normal form

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Full Smith decomposition `U * M * V = D`, with the inverse of `V` kept
/// alongside since presentations need both directions.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.len().min(self.d.first().map_or(0, |r| r.len()));
        (0..n).map(|i| self.d[i][i].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

pub fn identity_matrix(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, inner: usize) -> IntMatrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination (Bareiss).
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

struct SnfWork {
    a: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
    rows: usize,
    cols: usize,
}

impl SnfWork {
    // row i += k * row j
    fn row_add(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let t = &self.a[j][c] * k;
            self.a[i][c] += t;
        }
        for c in 0..self.rows {
            let t = &self.u[j][c] * k;
            self.u[i][c] += t;
        }
    }

    // col i += k * col j
    fn col_add(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let t = &self.a[r][j] * k;
            self.a[r][i] += t;
        }
        for r in 0..self.cols {
            let t = &self.v[r][j] * k;
            self.v[r][i] += t;
        }
        for c in 0..self.cols {
            let t = &self.v_inv[i][c] * k;
            self.v_inv[j][c] -= t;
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        for row in self.v.iter_mut() {
            row.swap(i, j);
        }
        self.v_inv.swap(i, j);
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -x.clone();
        }
        for x in self.u[i].iter_mut() {
            *x = -x.clone();
        }
    }
}

/// Smith normal form of an arbitrary integer matrix, exact over `BigInt`.
pub fn smith(m: &IntMatrix, cols: usize) -> Smith {
    let rows = m.len();
    let mut w = SnfWork {
        a: m.clone(),
        u: identity_matrix(rows),
        v: identity_matrix(cols),
        v_inv: identity_matrix(cols),
        rows,
        cols,
    };
    let n = rows.min(cols);
    'outer: for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if w.a[i][j].is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if w.a[bi][bj].abs() <= w.a[i][j].abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'outer };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                if w.a[i][t].is_zero() {
                    continue;
                }
                let q = -(&w.a[i][t] / &w.a[t][t]);
                w.row_add(i, t, &q);
                if !w.a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if w.a[t][j].is_zero() {
                    continue;
                }
                let q = -(&w.a[t][j] / &w.a[t][t]);
                w.col_add(j, t, &q);
                if !w.a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let p = w.a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&w.a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => w.row_add(t, i, &BigInt::one()),
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
    }
    Smith { u: w.u, d: w.a, v: w.v, v_inv: w.v_inv }
}

/// `U * M * V = D` with `D` diagonal, `d_i | d_{i+1}` and `U`, `V` unimodular.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let cols = m.first().map_or(0, |r| r.len());
    let s = smith(m, cols);
    (s.u, s.d, s.v)
}

pub fn to_big(m: &[Vec<i64>]) -> IntMatrix {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn big_mod(x: &BigInt, m: i64) -> i64 {
    x.mod_floor(&BigInt::from(m)).to_i64().expect("reduced value fits")
}

// ---------------------------------------------------------------------------
// Groups and elements

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr")]
pub struct FinAbGroup {
    invariants: Vec<i64>,
}

#[derive(Deserialize)]
struct GroupRepr {
    invariants: Vec<i64>,
}

impl TryFrom<GroupRepr> for FinAbGroup {
    type Error = AbError;
    fn try_from(r: GroupRepr) -> Result<Self> {
        FinAbGroup::new(r.invariants)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElem {
    pub coords: Vec<i64>,
}

impl GroupElem {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElem { coords }
    }
}

/// A group built from generators and relations, together with the maps
/// between the original generators and the canonical ones.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub group: FinAbGroup,
    /// Image of original generator `j` in the canonical group.
    pub proj: Vec<GroupElem>,
    /// Canonical generator `i` written in the original generators.
    pub lift: Vec<Vec<i64>>,
}

impl Presentation {
    /// Image of an integer combination of the original generators.
    pub fn project(&self, combo: &[i64]) -> GroupElem {
        let mut acc = self.group.zero();
        for (c, img) in combo.iter().zip(&self.proj) {
            acc = self.group.add(&acc, &self.group.scale(img, *c));
        }
        acc
    }
}

impl FinAbGroup {
    /// Builds a group from a list that already satisfies the divisibility chain.
    pub fn new(invariants: Vec<i64>) -> Result<Self> {
        if invariants.iter().any(|&d| d < 2) {
            return Err(AbError::InvalidElement(format!(
                "invariant factors must be at least 2, got {invariants:?}"
            )));
        }
        if invariants.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(AbError::InvalidElement(format!(
                "invariant factors {invariants:?} do not form a divisibility chain"
            )));
        }
        Ok(FinAbGroup { invariants })
    }

    pub fn trivial() -> Self {
        FinAbGroup { invariants: vec![] }
    }

    pub fn cyclic(n: i64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FinAbGroup { invariants: vec![n] }
        }
    }

    /// Direct sum of cyclic groups of arbitrary orders, canonicalized.
    pub fn from_orders(orders: &[i64]) -> Result<Presentation> {
        let k = orders.len();
        let rows: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { orders[i] } else { 0 }).collect())
            .collect();
        from_relations(&rows, k)
    }

    pub fn invariants(&self) -> &[i64] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn order(&self) -> u128 {
        self.invariants.iter().map(|&d| d as u128).product()
    }

    pub fn exponent(&self) -> i64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    /// Number of invariant factors divisible by `p` (the `p`-rank).
    pub fn p_rank(&self, p: i64) -> usize {
        self.invariants.iter().filter(|&&d| d % p == 0).count()
    }

    pub fn zero(&self) -> GroupElem {
        GroupElem { coords: vec![0; self.rank()] }
    }

    pub fn generator(&self, i: usize) -> GroupElem {
        let mut c = vec![0; self.rank()];
        c[i] = 1;
        GroupElem { coords: c }
    }

    pub fn generators(&self) -> Vec<GroupElem> {
        (0..self.rank()).map(|i| self.generator(i)).collect()
    }

    /// Reduces arbitrary integer coordinates into canonical range.
    pub fn elem(&self, coords: &[i64]) -> Result<GroupElem> {
        if coords.len() != self.rank() {
            return Err(AbError::InvalidElement(format!(
                "expected {} coordinates, got {}",
                self.rank(),
                coords.len()
            )));
        }
        Ok(self.reduce(coords))
    }

    pub fn reduce(&self, coords: &[i64]) -> GroupElem {
        GroupElem {
            coords: coords.iter().zip(&self.invariants).map(|(&c, &d)| c.rem_euclid(d)).collect(),
        }
    }

    pub fn contains(&self, x: &GroupElem) -> bool {
        x.coords.len() == self.rank()
            && x.coords.iter().zip(&self.invariants).all(|(&c, &d)| (0..d).contains(&c))
    }

    pub fn check(&self, x: &GroupElem) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(AbError::InvalidElement(format!("{:?} is not an element of {}", x.coords, self)))
        }
    }

    pub fn add(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        GroupElem {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(&self.invariants)
                .map(|((&a, &b), &d)| (a + b).rem_euclid(d))
                .collect(),
        }
    }

    pub fn neg(&self, x: &GroupElem) -> GroupElem {
        self.scale(x, -1)
    }

    pub fn sub(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, x: &GroupElem, n: i64) -> GroupElem {
        GroupElem {
            coords: x
                .coords
                .iter()
                .zip(&self.invariants)
                .map(|(&a, &d)| ((a as i128 * n as i128).rem_euclid(d as i128)) as i64)
                .collect(),
        }
    }

    pub fn is_zero(&self, x: &GroupElem) -> bool {
        x.coords.iter().all(|&c| c == 0)
    }

    pub fn elem_order(&self, x: &GroupElem) -> i64 {
        x.coords
            .iter()
            .zip(&self.invariants)
            .map(|(&a, &d)| d / a.gcd(&d))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> Result<Vec<GroupElem>> {
        self.bounded(max_group_order())?;
        Ok(self.elements_unchecked())
    }

    fn elements_unchecked(&self) -> Vec<GroupElem> {
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut cur = vec![0i64; self.rank()];
        loop {
            out.push(GroupElem { coords: cur.clone() });
            let mut i = self.rank();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.invariants[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    fn bounded(&self, limit: u64) -> Result<()> {
        if self.order() > limit as u128 {
            Err(AbError::GroupTooLarge { order: self.order(), limit })
        } else {
            Ok(())
        }
    }

    /// Index of an element in the lexicographic enumeration.
    pub fn index_of(&self, x: &GroupElem) -> usize {
        x.coords
            .iter()
            .zip(&self.invariants)
            .fold(0usize, |acc, (&c, &d)| acc * d as usize + c as usize)
    }

    // -- characters ---------------------------------------------------------

    pub fn trivial_character(&self) -> Character {
        Character { components: vec![Ratio::zero(); self.rank()] }
    }

    /// The character sending generator `i` to `exp(2 pi i a_i / d_i)`.
    pub fn character(&self, numerators: &[i64]) -> Result<Character> {
        if numerators.len() != self.rank() {
            return Err(AbError::InvalidCharacter(format!(
                "expected {} components, got {}",
                self.rank(),
                numerators.len()
            )));
        }
        Ok(Character {
            components: numerators
                .iter()
                .zip(&self.invariants)
                .map(|(&a, &d)| Ratio::new(a.rem_euclid(d), d))
                .collect(),
        })
    }

    pub fn check_character(&self, chi: &Character) -> Result<()> {
        if chi.components.len() != self.rank() {
            return Err(AbError::GroupMismatch(format!(
                "character has {} components, group {} has rank {}",
                chi.components.len(),
                self,
                self.rank()
            )));
        }
        for (c, &d) in chi.components.iter().zip(&self.invariants) {
            if d % c.denom() != 0 || c < &Ratio::zero() || c >= &Ratio::one() {
                return Err(AbError::InvalidCharacter(format!(
                    "component {c} is not a {d}-th root of unity exponent"
                )));
            }
        }
        Ok(())
    }

    /// Every character of the group, the trivial one first.
    pub fn enumerate_characters(&self) -> Result<Vec<Character>> {
        self.bounded(max_group_order())?;
        Ok(self
            .elements_unchecked()
            .into_iter()
            .map(|e| self.character(&e.coords).expect("rank matches"))
            .collect())
    }

    /// Some `eta` with `eta^n = chi`, if one exists.
    pub fn character_nth_root(&self, chi: &Character, n: i64) -> Option<Character> {
        assert!(n >= 1, "root index must be positive");
        let mut nums = Vec::with_capacity(self.rank());
        for (c, &d) in chi.components.iter().zip(&self.invariants) {
            let a = c.numer() * (d / c.denom());
            let g = n.gcd(&d);
            if a % g != 0 {
                return None;
            }
            let (dg, ng, ag) = (d / g, n / g, a / g);
            let inv = mod_inverse(ng, dg);
            nums.push(((ag as i128 * inv as i128).rem_euclid(dg as i128)) as i64);
        }
        self.character(&nums).ok()
    }

    /// The `n`-torsion subgroup `G[n]` as a list of generators.
    pub fn torsion_generators(&self, n: i64) -> Vec<GroupElem> {
        self.invariants
            .iter()
            .enumerate()
            .filter_map(|(i, &d)| {
                let g = n.gcd(&d);
                (g > 1).then(|| self.scale(&self.generator(i), d / g))
            })
            .collect()
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    if m == 1 {
        return 0;
    }
    let e = a.rem_euclid(m).extended_gcd(&m);
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m)
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.invariants.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Cokernel of the row space of `rows` inside `Z^k`.
pub fn from_relations(rows: &[Vec<i64>], k: usize) -> Result<Presentation> {
    if let Some(r) = rows.iter().find(|r| r.len() != k) {
        return Err(AbError::InvalidElement(format!(
            "relation of length {} over {} generators",
            r.len(),
            k
        )));
    }
    let m = to_big(rows);
    let s = smith(&m, k);
    let diag = s.diagonal();
    if diag.len() < k || diag.iter().any(|d| d.is_zero()) {
        return Err(AbError::InfiniteQuotient);
    }
    let kept: Vec<usize> = (0..k).filter(|&i| diag[i] > BigInt::one()).collect();
    let invariants: Vec<i64> = kept
        .iter()
        .map(|&i| diag[i].to_i64().ok_or(AbError::InfiniteQuotient))
        .collect::<Result<_>>()?;
    let group = FinAbGroup { invariants };
    let exp = group.exponent();
    let proj = (0..k)
        .map(|j| GroupElem {
            coords: kept.iter().zip(group.invariants()).map(|(&t, &d)| big_mod(&s.v[j][t], d)).collect(),
        })
        .collect();
    let lift = kept.iter().map(|&t| s.v_inv[t].iter().map(|x| big_mod(x, exp)).collect()).collect();
    Ok(Presentation { group, proj, lift })
}

/// Basis of `{ n in Z^s : sum n_j c_j = 0 in G }`.
fn relation_lattice(g: &FinAbGroup, elems: &[GroupElem]) -> Vec<Vec<i64>> {
    let s = elems.len();
    let k = g.rank();
    let mut rows: Vec<Vec<i64>> = elems.iter().map(|e| e.coords.clone()).collect();
    for (i, &d) in g.invariants().iter().enumerate() {
        let mut r = vec![0; k];
        r[i] = d;
        rows.push(r);
    }
    if k == 0 {
        return (0..s).map(|i| (0..s).map(|j| i64::from(i == j)).collect()).collect();
    }
    let sm = smith(&to_big(&rows), k);
    let rank = sm.rank();
    sm.u[rank..]
        .iter()
        .map(|r| r[..s].iter().map(|x| x.to_i64().expect("kernel entries fit in i64")).collect())
        .filter(|r: &Vec<i64>| r.iter().any(|&x| x != 0))
        .collect()
}

/// Group structure from a Cayley table `table[x][y] = index of x*y`.
///
/// The relation lattice uses rows `e_x + e_g - e_{xg}` for `g` in a greedy
/// generating set together with `e_identity`; these present the same group
/// as the full table, with far fewer rows.
pub fn from_cayley_table(table: &[Vec<usize>], identity: usize) -> Result<(FinAbGroup, Vec<GroupElem>)> {
    let h = table.len();
    let mut reached = vec![false; h];
    reached[identity] = true;
    let mut gens = Vec::new();
    for g in 0..h {
        if reached[g] {
            continue;
        }
        gens.push(g);
        // closure of the subgroup generated so far
        let mut frontier: Vec<usize> = (0..h).filter(|&x| reached[x]).collect();
        while let Some(x) = frontier.pop() {
            for &s in &gens {
                let y = table[x][s];
                if !reached[y] {
                    reached[y] = true;
                    frontier.push(y);
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(h * gens.len() + 1);
    let mut id = vec![0i64; h];
    id[identity] = 1;
    rows.push(id);
    for x in 0..h {
        for &g in &gens {
            let mut r = vec![0i64; h];
            r[x] += 1;
            r[g] += 1;
            r[table[x][g]] -= 1;
            rows.push(r);
        }
    }
    let pres = from_relations(&rows, h)?;
    Ok((pres.group, pres.proj))
}

// ---------------------------------------------------------------------------
// Homomorphisms

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupHom {
    /// `matrix[i][j]` is coordinate `i` of the image of generator `j`.
    pub matrix: Vec<Vec<i64>>,
    pub domain: FinAbGroup,
    pub codomain: FinAbGroup,
}

#[derive(Clone, Debug)]
pub struct KernelImage {
    pub kernel: FinAbGroup,
    pub kernel_embedding: GroupHom,
    pub image: FinAbGroup,
    pub image_embedding: GroupHom,
}

impl GroupHom {
    /// Hom from the images of the domain generators.
    pub fn from_images(domain: &FinAbGroup, codomain: &FinAbGroup, images: &[GroupElem]) -> Result<Self> {
        if images.len() != domain.rank() {
            return Err(AbError::IllFormedHom(format!(
                "{} images for a domain of rank {}",
                images.len(),
                domain.rank()
            )));
        }
        let matrix = (0..codomain.rank())
            .map(|i| images.iter().map(|e| e.coords.get(i).copied().unwrap_or(0)).collect())
            .collect();
        Self::new(domain.clone(), codomain.clone(), matrix)
    }

    pub fn new(domain: FinAbGroup, codomain: FinAbGroup, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if matrix.len() != codomain.rank() || matrix.iter().any(|r| r.len() != domain.rank()) {
            return Err(AbError::IllFormedHom(format!(
                "matrix shape does not match {} -> {}",
                domain, codomain
            )));
        }
        let mut h = GroupHom { matrix, domain, codomain };
        for i in 0..h.codomain.rank() {
            let d = h.codomain.invariants[i];
            for x in h.matrix[i].iter_mut() {
                *x = x.rem_euclid(d);
            }
        }
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        for (j, &d) in self.domain.invariants().iter().enumerate() {
            let img = self.image_of_generator(j);
            if !self.codomain.is_zero(&self.codomain.scale(&img, d)) {
                return Err(AbError::IllFormedHom(format!(
                    "generator {j} has order {d} but its image {:?} does not",
                    img.coords
                )));
            }
        }
        Ok(())
    }

    pub fn identity(g: &FinAbGroup) -> Self {
        Self::scalar(g, 1)
    }

    pub fn scalar(g: &FinAbGroup, n: i64) -> Self {
        let imgs: Vec<GroupElem> = g.generators().iter().map(|x| g.scale(x, n)).collect();
        Self::from_images(g, g, &imgs).expect("scalar maps are well defined")
    }

    pub fn zero(domain: &FinAbGroup, codomain: &FinAbGroup) -> Self {
        let imgs = vec![codomain.zero(); domain.rank()];
        Self::from_images(domain, codomain, &imgs).expect("zero map is well defined")
    }

    pub fn image_of_generator(&self, j: usize) -> GroupElem {
        self.codomain.reduce(&self.matrix.iter().map(|r| r[j]).collect::<Vec<_>>())
    }

    pub fn images(&self) -> Vec<GroupElem> {
        (0..self.domain.rank()).map(|j| self.image_of_generator(j)).collect()
    }

    pub fn apply(&self, x: &GroupElem) -> GroupElem {
        let mut out = vec![0i128; self.codomain.rank()];
        for (j, &c) in x.coords.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[i][j] as i128 * c as i128;
            }
        }
        GroupElem {
            coords: out
                .iter()
                .zip(self.codomain.invariants())
                .map(|(&v, &d)| v.rem_euclid(d as i128) as i64)
                .collect(),
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &GroupHom) -> Result<GroupHom> {
        if first.codomain != self.domain {
            return Err(AbError::GroupMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.domain, self.codomain, first.domain, first.codomain
            )));
        }
        let imgs: Vec<GroupElem> = first.images().iter().map(|x| self.apply(x)).collect();
        GroupHom::from_images(&first.domain, &self.codomain, &imgs)
    }

    pub fn add(&self, other: &GroupHom) -> Result<GroupHom> {
        self.same_shape(other)?;
        let imgs: Vec<GroupElem> = self
            .images()
            .iter()
            .zip(other.images())
            .map(|(a, b)| self.codomain.add(a, &b))
            .collect();
        GroupHom::from_images(&self.domain, &self.codomain, &imgs)
    }

    pub fn neg(&self) -> GroupHom {
        let imgs: Vec<GroupElem> = self.images().iter().map(|a| self.codomain.neg(a)).collect();
        GroupHom::from_images(&self.domain, &self.codomain, &imgs).expect("negation is well defined")
    }

    pub fn sub(&self, other: &GroupHom) -> Result<GroupHom> {
        self.add(&other.neg())
    }

    fn same_shape(&self, other: &GroupHom) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(AbError::GroupMismatch(format!(
                "{} -> {} versus {} -> {}",
                self.domain, self.codomain, other.domain, other.codomain
            )));
        }
        Ok(())
    }

    /// Pointwise equality on generators.
    pub fn equals(&self, other: &GroupHom) -> bool {
        self.domain == other.domain && self.codomain == other.codomain && self.images() == other.images()
    }

    /// First generator where the two maps disagree.
    pub fn first_difference(&self, other: &GroupHom) -> Option<usize> {
        (0..self.domain.rank()).find(|&j| self.image_of_generator(j) != other.image_of_generator(j))
    }

    pub fn kernel_image(&self) -> Result<KernelImage> {
        self.validate()?;
        let imgs = self.images();
        let lattice = relation_lattice(&self.codomain, &imgs);
        let kernel_gens: Vec<GroupElem> = lattice.iter().map(|r| self.domain.reduce(r)).collect();
        let (kernel, kernel_embedding) = subgroup_generated(&self.domain, &kernel_gens)?;
        let (image, image_embedding) = subgroup_generated(&self.codomain, &imgs)?;
        Ok(KernelImage { kernel, kernel_embedding, image, image_embedding })
    }

    pub fn is_injective(&self) -> Result<bool> {
        Ok(self.kernel_image()?.kernel.is_trivial())
    }
}

/// Subgroup generated by `elems`, with its embedding.
pub fn subgroup_generated(g: &FinAbGroup, elems: &[GroupElem]) -> Result<(FinAbGroup, GroupHom)> {
    for e in elems {
        g.check(e)?;
    }
    let s = elems.len();
    let rels = relation_lattice(g, elems);
    let pres = if s == 0 { from_relations(&[], 0)? } else { from_relations(&rels, s)? };
    let imgs: Vec<GroupElem> = pres
        .lift
        .iter()
        .map(|combo| {
            combo
                .iter()
                .zip(elems)
                .fold(g.zero(), |acc, (&c, e)| g.add(&acc, &g.scale(e, c)))
        })
        .collect();
    let emb = GroupHom::from_images(&pres.group, g, &imgs)?;
    Ok((pres.group, emb))
}

/// `G / <elems>` with the projection.
pub fn quotient(g: &FinAbGroup, elems: &[GroupElem]) -> Result<(FinAbGroup, GroupHom)> {
    for e in elems {
        g.check(e)?;
    }
    let k = g.rank();
    let mut rows: Vec<Vec<i64>> = elems.iter().map(|e| e.coords.clone()).collect();
    for (i, &d) in g.invariants().iter().enumerate() {
        let mut r = vec![0; k];
        r[i] = d;
        rows.push(r);
    }
    let pres = from_relations(&rows, k)?;
    let proj = GroupHom::from_images(g, &pres.group, &pres.proj)?;
    Ok((pres.group, proj))
}

pub fn hom_kernel_image(f: &GroupHom) -> Result<KernelImage> {
    f.kernel_image()
}

// ---------------------------------------------------------------------------
// Characters

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    pub components: Vec<Ratio<i64>>,
}

impl Character {
    pub fn is_trivial(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn mul(&self, other: &Character) -> Character {
        Character {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| frac_part(a + b))
                .collect(),
        }
    }

    pub fn inv(&self) -> Character {
        Character { components: self.components.iter().map(|a| frac_part(-a)).collect() }
    }

    pub fn div(&self, other: &Character) -> Character {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> Character {
        Character {
            components: self.components.iter().map(|a| frac_part(a * Ratio::from_integer(n))).collect(),
        }
    }

    pub fn order(&self) -> i64 {
        self.components.iter().fold(1, |acc, c| acc.lcm(c.denom()))
    }

    /// Value at `x` as an element of `Q/Z`.
    pub fn eval(&self, x: &GroupElem) -> Ratio<i64> {
        let mut s = Ratio::zero();
        for (c, &a) in self.components.iter().zip(&x.coords) {
            s = frac_part(s + c * Ratio::from_integer(a));
        }
        s
    }

    /// `self o f`.
    pub fn pullback(&self, f: &GroupHom) -> Result<Character> {
        if self.components.len() != f.codomain.rank() {
            return Err(AbError::GroupMismatch(format!(
                "character of rank {} pulled back along a map into {}",
                self.components.len(),
                f.codomain
            )));
        }
        Ok(Character { components: f.images().iter().map(|x| self.eval(x)).collect() })
    }

    pub fn kills(&self, xs: &[GroupElem]) -> bool {
        xs.iter().all(|x| self.eval(x).is_zero())
    }
}

pub fn pullback_character(chi: &Character, f: &GroupHom) -> Result<Character> {
    chi.pullback(f)
}

pub fn frac_part(r: Ratio<i64>) -> Ratio<i64> {
    r - r.floor()
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for Character {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            components: Vec<String>,
        }
        Repr {
            components: self.components.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Character {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            components: Vec<String>,
        }
        let r = Repr::deserialize(d)?;
        let components = r
            .components
            .iter()
            .map(|s| parse_ratio(s).map(frac_part).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Character { components })
    }
}

pub fn parse_ratio(s: &str) -> std::result::Result<Ratio<i64>, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if d == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Ratio::new(n, d))
        }
        None => s.parse::<i64>().map(Ratio::from_integer).map_err(|_| format!("bad rational {s:?}")),
    }
}

/// Serde adapter for lists of rationals written as `"a/b"` strings.
pub mod ratio_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Ratio<i64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Ratio<i64>>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter().map(|s| parse_ratio(s).map_err(D::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(m: &[&[i64]]) -> IntMatrix {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn snf_diag_2_3() {
        let m = big(&[&[2, 0], &[0, 3]]);
        let (u, d, v) = smith_normal_form(&m);
        assert_eq!(d, big(&[&[1, 0], &[0, 6]]));
        assert_eq!(mat_mul(&mat_mul(&u, &m, 2), &v, 2), d);
    }

    #[test]
    fn snf_zero_matrix() {
        let m = big(&[&[0, 0], &[0, 0]]);
        let (u, d, v) = smith_normal_form(&m);
        assert_eq!(d, m);
        assert_eq!(u, identity_matrix(2));
        assert_eq!(v, identity_matrix(2));
    }

    #[test]
    fn relations_examples() {
        assert_eq!(from_relations(&[vec![16]], 1).unwrap().group.invariants(), &[16]);
        let g = from_relations(&[vec![2, 0], vec![0, 2]], 2).unwrap().group;
        assert_eq!(g.invariants(), &[2, 2]);
        assert_eq!(from_relations(&[vec![2, 0]], 2).unwrap_err(), AbError::InfiniteQuotient);
        assert!(from_relations(&[vec![1]], 1).unwrap().group.is_trivial());
    }

    #[test]
    fn reduction_map_kernel_image() {
        let f = GroupHom::from_images(&FinAbGroup::cyclic(16), &FinAbGroup::cyclic(8), &[GroupElem::new(vec![1])])
            .unwrap();
        let ki = f.kernel_image().unwrap();
        assert_eq!(ki.kernel.invariants(), &[2]);
        assert_eq!(ki.image.invariants(), &[8]);
        let id = GroupHom::identity(&FinAbGroup::cyclic(3));
        let ki = id.kernel_image().unwrap();
        assert!(ki.kernel.is_trivial());
        assert_eq!(ki.image.invariants(), &[3]);
    }

    #[test]
    fn ill_formed_hom_rejected() {
        let r = GroupHom::from_images(&FinAbGroup::cyclic(3), &FinAbGroup::cyclic(4), &[GroupElem::new(vec![1])]);
        assert!(matches!(r, Err(AbError::IllFormedHom(_))));
    }

    #[test]
    fn pullback_examples() {
        let z4 = FinAbGroup::cyclic(4);
        let two = GroupHom::scalar(&z4, 2);
        assert!(z4.trivial_character().pullback(&two).unwrap().is_trivial());
        let chi = z4.character(&[1]).unwrap();
        assert_eq!(chi.pullback(&two).unwrap().order(), 2);
    }

    #[test]
    fn pullback_onto_image_of_reduction() {
        let z16 = FinAbGroup::cyclic(16);
        let z8 = FinAbGroup::cyclic(8);
        let f = GroupHom::from_images(&z16, &z8, &[GroupElem::new(vec![1])]).unwrap();
        let chi = z8.character(&[2]).unwrap();
        assert_eq!(chi.order(), 4);
        let back = chi.pullback(&f).unwrap();
        // evaluate on every element of Z/16 through both routes
        for x in z16.elements().unwrap() {
            assert_eq!(back.eval(&x), chi.eval(&f.apply(&x)));
        }
        assert_eq!(back.order(), 4);
        assert!(back.eval(&GroupElem::new(vec![8])).is_zero());
    }

    #[test]
    fn nth_root_examples() {
        let z2 = FinAbGroup::cyclic(2);
        let z4 = FinAbGroup::cyclic(4);
        assert!(z2.character_nth_root(&z2.trivial_character(), 2).unwrap().is_trivial());
        assert!(z2.character_nth_root(&z2.character(&[1]).unwrap(), 2).is_none());
        let chi = z4.character(&[2]).unwrap();
        let eta = z4.character_nth_root(&chi, 2).unwrap();
        assert_eq!(eta.pow(2), chi);
        assert_eq!(eta.order(), 4);
        let brute: Vec<_> = z4.enumerate_characters().unwrap().into_iter().filter(|e| e.pow(2) == chi).collect();
        assert_eq!(brute.len(), 2);
        assert!(brute.contains(&eta));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(FinAbGroup::trivial().enumerate_characters().unwrap().len(), 1);
        let v4 = FinAbGroup::new(vec![2, 2]).unwrap();
        let cs = v4.enumerate_characters().unwrap();
        assert_eq!(cs.len(), 4);
        assert_eq!(cs.iter().filter(|c| c.order() == 2).count(), 3);
        let z16 = FinAbGroup::cyclic(16);
        let cs = z16.enumerate_characters().unwrap();
        assert!(cs[0].is_trivial());
        assert_eq!(cs.iter().filter(|c| c.order() == 4).count(), 2);
    }

    #[test]
    fn orders() {
        let z16 = FinAbGroup::cyclic(16);
        assert_eq!(z16.trivial_character().order(), 1);
        assert_eq!(z16.character(&[1]).unwrap().order(), 16);
        assert_eq!(z16.character(&[4]).unwrap().order(), 4);
        assert_eq!(z16.elem_order(&GroupElem::new(vec![6])), 8);
    }

    #[test]
    fn serde_round_trip() {
        let g = FinAbGroup::cyclic(16);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"invariants":[16]}"#);
        let x = GroupElem::new(vec![3]);
        assert_eq!(serde_json::to_string(&x).unwrap(), r#"{"coords":[3]}"#);
        let chi = g.character(&[4]).unwrap();
        let s = serde_json::to_string(&chi).unwrap();
        assert_eq!(s, r#"{"components":["1/4"]}"#);
        assert_eq!(serde_json::from_str::<Character>(&s).unwrap(), chi);
        let h = GroupHom::scalar(&FinAbGroup::cyclic(4), 2);
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"matrix":[[2]],"domain":{"invariants":[4]},"codomain":{"invariants":[4]}}"#);
        let back: GroupHom = serde_json::from_str(&s).unwrap();
        assert!(back.equals(&h));
    }

    #[test]
    fn mixed_orders_canonicalize() {
        let p = FinAbGroup::from_orders(&[8, 3]).unwrap();
        assert_eq!(p.group.invariants(), &[24]);
        let p = FinAbGroup::from_orders(&[2, 4, 3]).unwrap();
        assert_eq!(p.group.invariants(), &[2, 12]);
        assert_eq!(p.group.elem_order(&p.proj[2]), 3);
    }
}
