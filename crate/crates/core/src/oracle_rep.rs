//! Class-function oracle for finite groups with an index-2 subgroup.
//!
//! Groups are multiplication tables; class functions take exact values in a
//! cyclotomic field `Q(zeta_N)` with `N` the group exponent. Induction and the
//! twisted tensor (Asai) lift are computed from their defining formulas,
//! independently of the symbolic rules in [`crate::monomial`].

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::abgroup::{Character, FinAbGroup, GroupElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("no index-2 subgroup designated")]
    NoSubgroup,
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("class functions live on different groups")]
    GroupMismatch,
    #[error("value is not rational")]
    NotRational,
}

pub type Result<T> = std::result::Result<T, OracleError>;

pub type Q = Ratio<i64>;

// ---------------------------------------------------------------------------
// Cyclotomic arithmetic

/// `Q(zeta_n)` in the power basis `1, zeta, ..., zeta^(phi(n)-1)`.
#[derive(Debug, PartialEq, Eq)]
pub struct CycloField {
    pub n: usize,
    pub degree: usize,
    /// `zeta^k` in the power basis for `0 <= k < 2n`.
    powers: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both in ascending order, den monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let qn = r.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for k in (0..=qn).rev() {
        let c = r[k + dn];
        q[k] = c;
        for (i, &d) in den.iter().enumerate() {
            r[k + i] -= c * d;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// Coefficients of the `n`-th cyclotomic polynomial, ascending.
pub fn cyclotomic_poly(n: usize) -> Vec<i64> {
    let mut memo: HashMap<usize, Vec<i64>> = HashMap::new();
    fn go(n: usize, memo: &mut HashMap<usize, Vec<i64>>) -> Vec<i64> {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut num = vec![0i64; n + 1];
        num[0] = -1;
        num[n] = 1;
        for d in 1..n {
            if n % d == 0 {
                let p = go(d, memo);
                num = poly_div_exact(&num, &p);
            }
        }
        memo.insert(n, num.clone());
        num
    }
    go(n, &mut memo)
}

impl CycloField {
    pub fn new(n: usize) -> Arc<Self> {
        let n = n.max(1);
        let phi = cyclotomic_poly(n);
        let degree = phi.len() - 1;
        let mut powers = Vec::with_capacity(2 * n);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        if degree == 1 && n == 1 {
            // zeta = 1
            cur[0] = 1;
        }
        for _ in 0..2 * n {
            powers.push(cur.clone());
            // multiply by x and reduce by phi
            let top = cur[degree - 1];
            let mut next = vec![0i64; degree];
            for i in (1..degree).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..degree {
                next[i] -= top * phi[i];
            }
            cur = next;
        }
        Arc::new(CycloField { n, degree, powers })
    }

    pub fn zero(&self) -> Vec<Q> {
        vec![Q::zero(); self.degree]
    }

    pub fn one(&self) -> Vec<Q> {
        self.root(0)
    }

    pub fn rational(&self, q: Q) -> Vec<Q> {
        let mut v = self.zero();
        v[0] = q;
        v
    }

    /// `zeta^k`.
    pub fn root(&self, k: i64) -> Vec<Q> {
        let k = k.rem_euclid(self.n as i64) as usize;
        self.powers[k].iter().map(|&c| Q::from_integer(c)).collect()
    }

    /// `exp(2 pi i r)` for a rational `r` whose denominator divides `n`.
    pub fn exp(&self, r: &Q) -> Vec<Q> {
        let k = r * Q::from_integer(self.n as i64);
        assert!(k.is_integer(), "root of unity {r} outside Q(zeta_{})", self.n);
        self.root(k.to_integer())
    }

    pub fn add(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn scale(&self, a: &[Q], q: Q) -> Vec<Q> {
        a.iter().map(|x| x * q).collect()
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let d = self.degree;
        let mut conv = vec![Q::zero(); 2 * d];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    conv[i + j] += x * y;
                }
            }
        }
        let mut out = self.zero();
        for (k, c) in conv.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&self.powers[k]) {
                if p != 0 {
                    *o += c * Q::from_integer(p);
                }
            }
        }
        out
    }

    /// Complex conjugation, `zeta -> zeta^-1`.
    pub fn conj(&self, a: &[Q]) -> Vec<Q> {
        let mut out = self.zero();
        for (k, c) in a.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = &self.powers[(self.n - k % self.n) % self.n];
            for (o, &p) in out.iter_mut().zip(r) {
                if p != 0 {
                    *o += c * Q::from_integer(p);
                }
            }
        }
        out
    }

    pub fn as_rational(&self, a: &[Q]) -> Option<Q> {
        a[1..].iter().all(|x| x.is_zero()).then(|| a[0])
    }
}

// ---------------------------------------------------------------------------
// Finite groups

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    identity: usize,
    orders: Vec<u32>,
    subgroup: Option<Vec<bool>>,
}

impl FiniteGroup {
    /// Builds and checks a group from a full multiplication table.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(OracleError::NotAGroup("table is not square over 0..n".into()));
        }
        let flat: Vec<u32> = table.iter().flatten().map(|&x| x as u32).collect();
        Self::from_flat(n, flat, None)
    }

    fn from_flat(n: usize, table: Vec<u32>, gens: Option<Vec<usize>>) -> Result<Self> {
        let at = |x: usize, y: usize| table[x * n + y] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| OracleError::NotAGroup("no identity".into()))?;
        let mut inverse = vec![0u32; n];
        for x in 0..n {
            let y = (0..n)
                .find(|&y| at(x, y) == identity)
                .ok_or_else(|| OracleError::NotAGroup(format!("element {x} has no inverse")))?;
            if at(y, x) != identity {
                return Err(OracleError::NotAGroup(format!("element {x} has only a one-sided inverse")));
            }
            inverse[x] = y as u32;
        }
        for x in 0..n {
            let mut seen = vec![false; n];
            for y in 0..n {
                let z = at(x, y);
                if seen[z] {
                    return Err(OracleError::NotAGroup("table is not a Latin square".into()));
                }
                seen[z] = true;
            }
        }
        let mut g = FiniteGroup { n, table, inverse, identity, orders: vec![0; n], subgroup: None };
        let gens = gens.unwrap_or_else(|| g.generating_set());
        // associativity suffices on a generating set
        for x in 0..n {
            for y in 0..n {
                let xy = g.mul(x, y);
                for &z in &gens {
                    if g.mul(xy, z) != g.mul(x, g.mul(y, z)) {
                        return Err(OracleError::NotAGroup(format!("({x}*{y})*{z} != {x}*({y}*{z})")));
                    }
                }
            }
        }
        g.orders = (0..n)
            .map(|x| {
                let mut k = 1;
                let mut y = x;
                while y != identity {
                    y = g.mul(y, x);
                    k += 1;
                }
                k
            })
            .collect();
        Ok(g)
    }

    /// Closure of `gens` under `mul`, returning the group and its elements.
    pub fn generate<T, F>(gens: &[T], identity: T, mul: F) -> Result<(Self, Vec<T>)>
    where
        T: Clone + Eq + Hash,
        F: Fn(&T, &T) -> T,
    {
        let mut elems = vec![identity.clone()];
        let mut index: HashMap<T, usize> = HashMap::new();
        index.insert(identity, 0);
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let y = mul(&elems[i], g);
                if !index.contains_key(&y) {
                    index.insert(y.clone(), elems.len());
                    elems.push(y);
                }
            }
            i += 1;
            if elems.len() > 100_000 {
                return Err(OracleError::NotAGroup("closure exceeds 100000 elements".into()));
            }
        }
        let n = elems.len();
        let mut table = Vec::with_capacity(n * n);
        for x in &elems {
            for y in &elems {
                let z = mul(x, y);
                let k = *index
                    .get(&z)
                    .ok_or_else(|| OracleError::NotAGroup("product escapes the closure".into()))?;
                table.push(k as u32);
            }
        }
        let gen_idx: Vec<usize> = gens.iter().map(|g| index[g]).collect();
        Ok((Self::from_flat(n, table, Some(gen_idx))?, elems))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.n + y] as usize
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x] as usize
    }

    /// `g^-1 x g`.
    pub fn conj(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn elem_order(&self, x: usize) -> usize {
        self.orders[x] as usize
    }

    pub fn exponent(&self) -> usize {
        self.orders.iter().fold(1usize, |a, &o| a.lcm(&(o as usize)))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|x| (0..self.n).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    /// A greedy generating set.
    pub fn generating_set(&self) -> Vec<usize> {
        self.generating_set_of(&vec![true; self.n])
    }

    pub fn generating_set_of(&self, mask: &[bool]) -> Vec<usize> {
        let mut reached = vec![false; self.n];
        reached[self.identity] = true;
        let mut gens = Vec::new();
        for g in 0..self.n {
            if !mask[g] || reached[g] {
                continue;
            }
            gens.push(g);
            let mut frontier: Vec<usize> = (0..self.n).filter(|&x| reached[x]).collect();
            while let Some(x) = frontier.pop() {
                for &s in &gens {
                    let y = self.mul(x, s);
                    if !reached[y] {
                        reached[y] = true;
                        frontier.push(y);
                    }
                }
            }
        }
        gens
    }

    pub fn is_subgroup(&self, mask: &[bool]) -> bool {
        mask.len() == self.n
            && mask[self.identity]
            && (0..self.n).all(|x| !mask[x] || (0..self.n).all(|y| !mask[y] || mask[self.mul(x, self.inv(y))]))
    }

    pub fn is_normal(&self, mask: &[bool]) -> bool {
        self.is_subgroup(mask) && (0..self.n).all(|x| !mask[x] || (0..self.n).all(|g| mask[self.conj(x, g)]))
    }

    /// Designates an index-2 subgroup.
    pub fn with_subgroup(mut self, mask: Vec<bool>) -> Result<Self> {
        if !self.is_subgroup(&mask) {
            return Err(OracleError::InvalidSubgroup("not closed".into()));
        }
        if mask.iter().filter(|&&b| b).count() * 2 != self.n {
            return Err(OracleError::InvalidSubgroup("index is not 2".into()));
        }
        self.subgroup = Some(mask);
        Ok(self)
    }

    pub fn subgroup(&self) -> Option<&[bool]> {
        self.subgroup.as_deref()
    }

    /// Fixed representative of the nontrivial coset (the first element outside `H`).
    pub fn coset_rep(&self) -> Result<usize> {
        let h = self.subgroup.as_ref().ok_or(OracleError::NoSubgroup)?;
        Ok((0..self.n).find(|&x| !h[x]).expect("index 2"))
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for x in 0..self.n {
            if seen[x] {
                continue;
            }
            let mut cls: Vec<usize> = (0..self.n).map(|g| self.conj(x, g)).collect();
            cls.sort_unstable();
            cls.dedup();
            for &y in &cls {
                seen[y] = true;
            }
            out.push(cls);
        }
        out
    }

    /// Closure of `elems` under multiplication.
    pub fn closure(&self, elems: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        mask[self.identity] = true;
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in elems {
                let y = self.mul(x, g);
                if !mask[y] {
                    mask[y] = true;
                    frontier.push(y);
                }
            }
        }
        mask
    }

    /// Commutator subgroup of the subgroup `mask`.
    pub fn derived_subgroup(&self, mask: &[bool]) -> Vec<bool> {
        let members: Vec<usize> = (0..self.n).filter(|&x| mask[x]).collect();
        let mut comms = Vec::new();
        for &x in &members {
            for &y in &members {
                let c = self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y));
                if c != self.identity && !comms.contains(&c) {
                    comms.push(c);
                }
            }
        }
        self.closure(&comms)
    }

    /// Abelianization of the subgroup `mask`: the group and the image of each
    /// member (non-members map to `None`).
    pub fn abelianization(&self, mask: &[bool]) -> (FinAbGroup, Vec<Option<GroupElem>>) {
        let derived: Vec<usize> = (0..self.n).filter(|&x| self.derived_subgroup(mask)[x]).collect();
        let mut coset = vec![usize::MAX; self.n];
        let mut reps = Vec::new();
        for x in 0..self.n {
            if !mask[x] || coset[x] != usize::MAX {
                continue;
            }
            for &d in &derived {
                coset[self.mul(x, d)] = reps.len();
            }
            reps.push(x);
        }
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| coset[self.mul(a, b)]).collect())
            .collect();
        let (group, images) =
            crate::abgroup::from_cayley_table(&table, coset[self.identity]).expect("finite abelian quotient");
        let out = (0..self.n).map(|x| mask[x].then(|| images[coset[x]].clone())).collect();
        (group, out)
    }

    /// Linear characters of the whole group, trivial first.
    pub fn linear_characters(self: &Arc<Self>) -> Vec<ClassFunction> {
        let all = vec![true; self.n];
        let (ab, proj) = self.abelianization(&all);
        let field = CycloField::new(self.exponent());
        ab.enumerate_characters()
            .expect("abelianization of a small group")
            .iter()
            .map(|chi| ClassFunction::from_character(self, &field, chi, &proj))
            .collect()
    }

    /// Index-2 subgroups, as masks.
    pub fn index_two_subgroups(&self) -> Vec<Vec<bool>> {
        let all = vec![true; self.n];
        let (ab, proj) = self.abelianization(&all);
        let chars = ab.enumerate_characters().expect("small group");
        chars
            .iter()
            .filter(|c| c.order() == 2)
            .map(|c| (0..self.n).map(|x| c.eval(proj[x].as_ref().unwrap()).is_zero()).collect())
            .collect()
    }
}

/// Semidirect product `Z/m x| A` with `A = Z/2` or `V4`, each generator of
/// `A` acting by multiplication by the given unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActingGroup {
    Z2,
    V4,
}

pub fn build_semidirect(m: i64, acting: ActingGroup, action: &[i64]) -> Result<(FiniteGroup, Vec<(i64, u8)>)> {
    let need = match acting {
        ActingGroup::Z2 => 1,
        ActingGroup::V4 => 2,
    };
    if m < 1 || action.len() != need {
        return Err(OracleError::InvalidAction(format!("need {need} multipliers for m = {m}")));
    }
    for &u in action {
        if u.gcd(&m) != 1 || (u * u - 1).rem_euclid(m) != 0 {
            return Err(OracleError::InvalidAction(format!("{u} is not an involutive unit mod {m}")));
        }
    }
    let act = action.to_vec();
    let mul = move |x: &(i64, u8), y: &(i64, u8)| -> (i64, u8) {
        let mut b = y.0;
        for (i, &u) in act.iter().enumerate() {
            if x.1 >> i & 1 == 1 {
                b = (b * u).rem_euclid(m);
            }
        }
        ((x.0 + b).rem_euclid(m), x.1 ^ y.1)
    };
    let mut gens = vec![(1i64.rem_euclid(m), 0u8)];
    for i in 0..need {
        gens.push((0, 1 << i));
    }
    FiniteGroup::generate(&gens, (0, 0), mul)
}

// ---------------------------------------------------------------------------
// Class functions

#[derive(Clone, Debug)]
pub struct ClassFunction {
    pub group: Arc<FiniteGroup>,
    pub field: Arc<CycloField>,
    /// Values per element (constant on conjugacy classes).
    pub values: Vec<Vec<Q>>,
}

impl PartialEq for ClassFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.values == other.values
    }
}

impl ClassFunction {
    pub fn zero(group: &Arc<FiniteGroup>, field: &Arc<CycloField>) -> Self {
        ClassFunction { group: group.clone(), field: field.clone(), values: vec![field.zero(); group.order()] }
    }

    pub fn trivial(group: &Arc<FiniteGroup>, field: &Arc<CycloField>) -> Self {
        ClassFunction { group: group.clone(), field: field.clone(), values: vec![field.one(); group.order()] }
    }

    /// Lift of a character of an abelianization through `proj`; zero off the subgroup.
    pub fn from_character(
        group: &Arc<FiniteGroup>,
        field: &Arc<CycloField>,
        chi: &Character,
        proj: &[Option<GroupElem>],
    ) -> Self {
        let values = proj
            .iter()
            .map(|p| match p {
                Some(x) => field.exp(&chi.eval(x)),
                None => field.zero(),
            })
            .collect();
        ClassFunction { group: group.clone(), field: field.clone(), values }
    }

    fn same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) {
            Ok(())
        } else {
            Err(OracleError::GroupMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| self.field.add(a, b)).collect();
        Ok(ClassFunction { values, ..self.clone() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| self.field.mul(a, b)).collect();
        Ok(ClassFunction { values, ..self.clone() })
    }

    pub fn degree(&self) -> Q {
        self.field.as_rational(&self.values[self.group.identity()]).expect("degree is rational")
    }

    /// Restriction to the designated subgroup (zero outside it).
    pub fn restrict(&self) -> Result<Self> {
        let h = self.group.subgroup().ok_or(OracleError::NoSubgroup)?;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| if h[x] { v.clone() } else { self.field.zero() })
            .collect();
        Ok(ClassFunction { values, ..self.clone() })
    }

    /// `Sym^2` of a class function: `(f(g)^2 + f(g^2)) / 2`.
    pub fn sym2(&self) -> Self {
        self.square_part(Q::one())
    }

    /// `Wedge^2`: `(f(g)^2 - f(g^2)) / 2`.
    pub fn wedge2(&self) -> Self {
        self.square_part(-Q::one())
    }

    fn square_part(&self, sign: Q) -> Self {
        let g = &self.group;
        let half = Q::new(1, 2);
        let values = (0..g.order())
            .map(|x| {
                let sq = self.field.mul(&self.values[x], &self.values[x]);
                let psi = self.field.scale(&self.values[g.mul(x, x)], sign);
                self.field.scale(&self.field.add(&sq, &psi), half)
            })
            .collect();
        ClassFunction { values, ..self.clone() }
    }
}

/// `(1/|G|) sum f(x) conj(g(x))`.
pub fn inner_product(f: &ClassFunction, g: &ClassFunction) -> Result<Q> {
    inner_product_within(f, g, &vec![true; f.group.order()])
}

/// Inner product over the designated subgroup only.
pub fn inner_product_on_subgroup(f: &ClassFunction, g: &ClassFunction) -> Result<Q> {
    let h = f.group.subgroup().ok_or(OracleError::NoSubgroup)?.to_vec();
    inner_product_within(f, g, &h)
}

/// Inner product of the restrictions to the subgroup `mask`.
pub fn inner_product_within(f: &ClassFunction, g: &ClassFunction, mask: &[bool]) -> Result<Q> {
    f.same(g)?;
    let field = &f.field;
    let mut acc = field.zero();
    let mut size = 0i64;
    for x in 0..f.group.order() {
        if mask[x] {
            acc = field.add(&acc, &field.mul(&f.values[x], &field.conj(&g.values[x])));
            size += 1;
        }
    }
    let total = field.as_rational(&acc).ok_or(OracleError::NotRational)?;
    Ok(total / Q::from_integer(size))
}

/// `Ind_H^G f` for `f` supported on the designated subgroup `H`.
pub fn induce_class_function(f: &ClassFunction) -> Result<ClassFunction> {
    let h = f.group.subgroup().ok_or(OracleError::NoSubgroup)?.to_vec();
    induce_within(f, &h, &vec![true; f.group.order()])
}

/// Induction from `h` to `k`, where `h` has index 2 in `k`; zero off `k`.
pub fn induce_within(f: &ClassFunction, h: &[bool], k: &[bool]) -> Result<ClassFunction> {
    let g = &f.group;
    let r = index_two_rep(g, h, k)?;
    let values = (0..g.order())
        .map(|x| {
            if h[x] {
                f.field.add(&f.values[x], &f.values[g.conj(x, r)])
            } else {
                f.field.zero()
            }
        })
        .collect();
    Ok(ClassFunction { values, ..f.clone() })
}

/// The twisted tensor lift: `f(h) f(s^-1 h s)` on `H`, `f(g^2)` off `H`.
///
/// With this sign, `asai(Res V) = Sym^2 V + Wedge^2 V * omega` for every
/// character `V` of `G`; the opposite sign would negate the second clause.
pub fn asai_class_function(f: &ClassFunction) -> Result<ClassFunction> {
    let h = f.group.subgroup().ok_or(OracleError::NoSubgroup)?.to_vec();
    asai_within(f, &h, &vec![true; f.group.order()])
}

/// Twisted tensor lift from `h` to `k`; zero off `k`.
pub fn asai_within(f: &ClassFunction, h: &[bool], k: &[bool]) -> Result<ClassFunction> {
    let g = &f.group;
    let r = index_two_rep(g, h, k)?;
    let values = (0..g.order())
        .map(|x| {
            if h[x] {
                f.field.mul(&f.values[x], &f.values[g.conj(x, r)])
            } else if k[x] {
                f.values[g.mul(x, x)].clone()
            } else {
                f.field.zero()
            }
        })
        .collect();
    Ok(ClassFunction { values, ..f.clone() })
}

fn index_two_rep(g: &FiniteGroup, h: &[bool], k: &[bool]) -> Result<usize> {
    let nh = h.iter().filter(|&&b| b).count();
    let nk = k.iter().filter(|&&b| b).count();
    if nk != 2 * nh || (0..g.order()).any(|x| h[x] && !k[x]) {
        return Err(OracleError::InvalidSubgroup("not an index-2 pair".into()));
    }
    Ok((0..g.order()).find(|&x| k[x] && !h[x]).expect("index 2"))
}

/// Recorded convention for the lift off `H`.
pub const ASAI_CONVENTION: &str = "value f(g^2) at g outside H";

/// The sign character of `G/H`.
pub fn omega_g_h(group: &Arc<FiniteGroup>, field: &Arc<CycloField>) -> Result<ClassFunction> {
    let h = group.subgroup().ok_or(OracleError::NoSubgroup)?;
    let values = (0..group.order())
        .map(|x| if h[x] { field.one() } else { field.rational(-Q::one()) })
        .collect();
    Ok(ClassFunction { group: group.clone(), field: field.clone(), values })
}

/// All 1- and 2-dimensional characters of `G`: linear ones, sums of two
/// linear ones, and irreducible inductions from index-2 subgroups.
pub fn small_characters(group: &Arc<FiniteGroup>) -> (Vec<ClassFunction>, Vec<ClassFunction>) {
    let linear = group.linear_characters();
    let field = linear[0].field.clone();
    let mut two: Vec<ClassFunction> = Vec::new();
    for i in 0..linear.len() {
        for j in i..linear.len() {
            two.push(linear[i].add(&linear[j]).expect("same group"));
        }
    }
    for mask in group.index_two_subgroups() {
        let sub = Arc::new((**group).clone().with_subgroup(mask.clone()).expect("index-2 subgroup"));
        let (ab, proj) = sub.abelianization(&mask);
        for chi in ab.enumerate_characters().expect("small group") {
            let f = ClassFunction::from_character(&sub, &field, &chi, &proj);
            let ind = induce_class_function(&f).expect("designated");
            if inner_product(&ind, &ind).expect("same group") == Q::one() {
                let moved = ClassFunction { group: group.clone(), field: field.clone(), values: ind.values };
                if !two.contains(&moved) {
                    two.push(moved);
                }
            }
        }
    }
    (linear, two)
}

/// Checks `asai(Res_H V) = Sym^2 V + Wedge^2 V * omega` for one character `V`
/// of the group carrying the designated subgroup.
pub fn asai_identity_holds(v: &ClassFunction) -> Result<bool> {
    let res = v.restrict()?;
    let lhs = asai_class_function(&res)?;
    let omega = omega_g_h(&v.group, &v.field)?;
    let rhs = v.sym2().add(&v.wedge2().mul(&omega)?)?;
    Ok(lhs.values == rhs.values)
}

/// Rebinds a class function to a group value sharing the same table.
pub fn rebind(f: &ClassFunction, group: &Arc<FiniteGroup>) -> ClassFunction {
    assert_eq!(f.group.order(), group.order());
    ClassFunction { group: group.clone(), field: f.field.clone(), values: f.values.clone() }
}

/// Convenience: the field generated by the exponent of `group`.
pub fn field_for(group: &FiniteGroup) -> Arc<CycloField> {
    CycloField::new(group.exponent())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> Arc<FiniteGroup> {
        let (g, elems) = build_semidirect(3, ActingGroup::Z2, &[2]).unwrap();
        let mask = elems.iter().map(|e| e.1 == 0).collect();
        Arc::new(g.with_subgroup(mask).unwrap())
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(8), vec![1, 0, 0, 0, 1]);
        let f = CycloField::new(12);
        let z = f.root(1);
        assert_eq!(f.mul(&z, &f.conj(&z)), f.one());
        let mut acc = f.zero();
        for k in 0..12 {
            acc = f.add(&acc, &f.root(k));
        }
        assert_eq!(acc, f.zero());
    }

    #[test]
    fn semidirect_orders() {
        let (g, _) = build_semidirect(3, ActingGroup::Z2, &[2]).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        assert_eq!(g.conjugacy_classes().len(), 3);
        let (g, _) = build_semidirect(8, ActingGroup::Z2, &[7]).unwrap();
        assert_eq!(g.order(), 16);
        let (g, _) = build_semidirect(8, ActingGroup::V4, &[7, 1]).unwrap();
        assert_eq!(g.order(), 32);
        assert!(matches!(build_semidirect(8, ActingGroup::Z2, &[2]), Err(OracleError::InvalidAction(_))));
    }

    #[test]
    fn induction_on_s3() {
        let g = s3();
        let field = field_for(&g);
        let triv = ClassFunction::trivial(&g, &field).restrict().unwrap();
        let ind = induce_class_function(&triv).unwrap();
        let id = g.identity();
        assert_eq!(field.as_rational(&ind.values[id]), Some(Q::from_integer(2)));
        let outside = (0..6).find(|&x| !g.subgroup().unwrap()[x]).unwrap();
        assert_eq!(field.as_rational(&ind.values[outside]), Some(Q::zero()));
        let h: Vec<bool> = g.subgroup().unwrap().to_vec();
        let (ab, proj) = g.abelianization(&h);
        assert_eq!(ab.invariants(), &[3]);
        let chi = ab.character(&[1]).unwrap();
        let f = ClassFunction::from_character(&g, &field, &chi, &proj);
        let ind = induce_class_function(&f).unwrap();
        assert_eq!(inner_product(&ind, &ind).unwrap(), Q::one());
        assert_eq!(ind.degree(), Q::from_integer(2));
    }

    #[test]
    fn inner_products_basic() {
        let g = s3();
        let field = field_for(&g);
        let lin = g.linear_characters();
        assert_eq!(lin.len(), 2);
        assert_eq!(inner_product(&lin[0], &lin[0]).unwrap(), Q::one());
        assert_eq!(inner_product(&lin[0], &lin[1]).unwrap(), Q::zero());
        let mut reg = ClassFunction::zero(&g, &field);
        reg.values[g.identity()] = field.rational(Q::from_integer(6));
        assert_eq!(inner_product(&reg, &lin[0]).unwrap(), Q::one());
    }

    #[test]
    fn asai_trivial_and_identity_on_d8() {
        let (g, elems) = build_semidirect(4, ActingGroup::Z2, &[3]).unwrap();
        let mask = elems.iter().map(|e| e.1 == 0).collect();
        let g = Arc::new(g.with_subgroup(mask).unwrap());
        let field = field_for(&g);
        let triv = ClassFunction::trivial(&g, &field);
        let a = asai_class_function(&triv.restrict().unwrap()).unwrap();
        assert_eq!(a.values, triv.values);
        let (lin, two) = small_characters(&g);
        assert_eq!(lin.len(), 4);
        for v in lin.iter().chain(&two) {
            assert!(asai_identity_holds(v).unwrap());
        }
    }
}
