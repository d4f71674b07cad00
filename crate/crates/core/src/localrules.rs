//! Local `SL_2` distinction for principal series at modeled places.
//!
//! A place `K/k` is modeled by finite quotients of `K^*` and `k^*`: a
//! valuation part and the tame units `F_{q^2}^* / F_q^*` (inert) or two copies
//! of `k^*` (split). Characters of the `K` model stand for local characters.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{AbError, Character, FinAbGroup, GroupElem, GroupHom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("character does not live on this place: {0}")]
    PlaceMismatch(String),
    #[error("not a group of characters")]
    NotAGroup,
    #[error("order {0} is not allowed here")]
    InvalidOrder(usize),
    #[error("place is not split")]
    NotSplit,
    #[error("bad place parameters: {0}")]
    BadPlace(String),
    #[error(transparent)]
    Group(#[from] AbError),
}

pub type Result<T> = std::result::Result<T, LocalError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceKind {
    Inert,
    Split,
    /// The complex place over the real place: an always-distinguished stub.
    Archimedean,
}

/// Parameters of a place, as read from a place file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceSpec {
    pub kind: PlaceKind,
    /// Residue field size of `k`.
    #[serde(default = "default_q")]
    pub q: i64,
    /// Modulus for the unramified part on the `K` side.
    #[serde(default = "default_val")]
    pub valuation_order: i64,
}

fn default_q() -> i64 {
    3
}

fn default_val() -> i64 {
    4
}

#[derive(Clone, Debug)]
pub struct LocalPlaceModel {
    pub spec: PlaceSpec,
    pub k_group: FinAbGroup,
    pub big_group: FinAbGroup,
    /// `k^* -> K^*`.
    pub inclusion: GroupHom,
    /// `K^* -> k^*`.
    pub norm: GroupHom,
    pub sigma: GroupHom,
    /// Raw generator images: `K` raw coordinates are
    /// `(valuation, units)` per factor, `k` raw coordinates `(valuation, units)`.
    k_raw: crate::abgroup::Presentation,
    big_raw: crate::abgroup::Presentation,
}

/// A character given by its values on the raw generators (uniformizer and
/// unit generator of each factor).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCharacter {
    #[serde(with = "crate::abgroup::ratio_list")]
    pub unramified: Vec<Ratio<i64>>,
    #[serde(with = "crate::abgroup::ratio_list")]
    pub ramified: Vec<Ratio<i64>>,
}

impl LocalPlaceModel {
    pub fn new(spec: PlaceSpec) -> Result<Self> {
        let (q, n) = (spec.q, spec.valuation_order);
        if q < 2 || n < 1 {
            return Err(LocalError::BadPlace(format!("q = {q}, valuation order = {n}")));
        }
        let (k_orders, big_orders, incl, norm, sigma): (Vec<i64>, Vec<i64>, Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>) =
            match spec.kind {
                PlaceKind::Inert => (
                    // k valuation modulus 2n so that N = 2 on valuations is onto
                    vec![2 * n, q - 1],
                    vec![n, q * q - 1],
                    vec![vec![1, 0], vec![0, q + 1]],
                    vec![vec![2, 0], vec![0, 1]],
                    vec![vec![1, 0], vec![0, q]],
                ),
                PlaceKind::Split | PlaceKind::Archimedean => (
                    vec![n, q - 1],
                    vec![n, q - 1, n, q - 1],
                    vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]],
                    vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]],
                    vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, 1, 0, 0]],
                ),
            };
        let k_raw = FinAbGroup::from_orders(&k_orders)?;
        let big_raw = FinAbGroup::from_orders(&big_orders)?;
        // rows above list the raw image of each raw generator
        let map = |src: &crate::abgroup::Presentation, dst: &crate::abgroup::Presentation, rows: &[Vec<i64>]| {
            let imgs: Vec<GroupElem> = src
                .group
                .generators()
                .iter()
                .enumerate()
                .map(|(j, _)| {
                    let combo = &src.lift[j];
                    let mut raw = vec![0i64; dst.proj.len()];
                    for (i, &c) in combo.iter().enumerate() {
                        for (r, &v) in raw.iter_mut().zip(&rows[i]) {
                            *r += c * v;
                        }
                    }
                    dst.project(&raw)
                })
                .collect();
            GroupHom::from_images(&src.group, &dst.group, &imgs)
        };
        let inclusion = map(&k_raw, &big_raw, &incl)?;
        let norm = map(&big_raw, &k_raw, &norm)?;
        let sigma = map(&big_raw, &big_raw, &sigma)?;
        Ok(LocalPlaceModel {
            spec,
            k_group: k_raw.group.clone(),
            big_group: big_raw.group.clone(),
            inclusion,
            norm,
            sigma,
            k_raw,
            big_raw,
        })
    }

    pub fn inert(q: i64, valuation_order: i64) -> Result<Self> {
        Self::new(PlaceSpec { kind: PlaceKind::Inert, q, valuation_order })
    }

    pub fn split(q: i64, valuation_order: i64) -> Result<Self> {
        Self::new(PlaceSpec { kind: PlaceKind::Split, q, valuation_order })
    }

    pub fn archimedean() -> Result<Self> {
        Self::new(PlaceSpec { kind: PlaceKind::Archimedean, q: 2, valuation_order: 1 })
    }

    fn factors(&self) -> usize {
        match self.spec.kind {
            PlaceKind::Inert => 1,
            _ => 2,
        }
    }

    /// Converts values on raw generators into a character of the `K` model.
    pub fn character(&self, raw: &RawCharacter) -> Result<Character> {
        if raw.unramified.len() != self.factors() || raw.ramified.len() != self.factors() {
            return Err(LocalError::PlaceMismatch(format!("expected {} factor(s)", self.factors())));
        }
        let mut vals = Vec::new();
        for (u, r) in raw.unramified.iter().zip(&raw.ramified) {
            vals.push(*u);
            vals.push(*r);
        }
        let orders = self.raw_orders_big();
        for (v, &o) in vals.iter().zip(&orders) {
            if !(v * Ratio::from_integer(o)).is_integer() {
                return Err(LocalError::PlaceMismatch(format!("value {v} is not an {o}-th root of unity")));
            }
        }
        let components = self
            .big_raw
            .lift
            .iter()
            .map(|combo| {
                let s: Ratio<i64> = combo.iter().zip(&vals).map(|(&c, v)| v * Ratio::from_integer(c)).sum();
                crate::abgroup::frac_part(s)
            })
            .collect();
        let chi = Character { components };
        self.big_group.check_character(&chi)?;
        Ok(chi)
    }

    fn raw_orders_big(&self) -> Vec<i64> {
        let (q, n) = (self.spec.q, self.spec.valuation_order);
        match self.spec.kind {
            PlaceKind::Inert => vec![n, q * q - 1],
            _ => vec![n, q - 1, n, q - 1],
        }
    }

    /// Whether `chi` is trivial on the units.
    pub fn is_unramified(&self, chi: &Character) -> bool {
        let units: Vec<GroupElem> = (0..self.factors())
            .map(|f| {
                let mut raw = vec![0i64; self.big_raw.proj.len()];
                raw[2 * f + 1] = 1;
                self.big_raw.project(&raw)
            })
            .collect();
        chi.kills(&units)
    }

    /// `omega_{K/k}`: the character of `k` killing the norms, or trivial when split.
    pub fn omega(&self) -> Result<Character> {
        let norms = self.norm.images();
        Ok(self
            .k_group
            .enumerate_characters()?
            .into_iter()
            .find(|c| !c.is_trivial() && c.kills(&norms))
            .unwrap_or_else(|| self.k_group.trivial_character()))
    }

    fn check(&self, chi: &Character) -> Result<()> {
        self.big_group
            .check_character(chi)
            .map_err(|e| LocalError::PlaceMismatch(e.to_string()))
    }

    /// Value of a `k` character on the raw `k` generators.
    pub fn raw_k_values(&self, nu: &Character) -> Vec<Ratio<i64>> {
        (0..self.k_raw.proj.len()).map(|i| nu.eval(&self.k_raw.proj[i])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    #[serde(rename = "ratio-trivial-on-k")]
    RatioTrivialOnK,
    #[serde(rename = "ratio-sigma-invariant")]
    RatioSigmaInvariant,
    #[serde(rename = "split-automatic")]
    SplitAutomatic,
    #[serde(rename = "none")]
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalVerdict {
    pub distinguished: bool,
    pub reason: Reason,
    /// Set when the verdict rests on an unproved stub.
    pub assumed: bool,
}

/// Distinction of `Ps(chi1, chi2)` by `SL_2(k)`: the ratio is trivial on `k`
/// or `sigma`-invariant.
pub fn ps_sl2_distinguished(chi1: &Character, chi2: &Character, p: &LocalPlaceModel) -> Result<LocalVerdict> {
    p.check(chi1)?;
    p.check(chi2)?;
    if p.spec.kind == PlaceKind::Archimedean {
        return Ok(LocalVerdict { distinguished: true, reason: Reason::SplitAutomatic, assumed: true });
    }
    let ratio = chi1.div(chi2);
    let on_k = ratio.pullback(&p.inclusion)?.is_trivial();
    let invariant = ratio.pullback(&p.sigma)? == ratio;
    let reason = if on_k {
        Reason::RatioTrivialOnK
    } else if invariant {
        Reason::RatioSigmaInvariant
    } else {
        Reason::None
    };
    Ok(LocalVerdict { distinguished: on_k || invariant, reason, assumed: false })
}

/// The characters `nu` of `k` for which `Ps(chi, chi)` is `nu`-distinguished:
/// `chi|_k` and `chi|_k omega_{K/k}`.
pub fn equal_character_distinctions(chi: &Character, p: &LocalPlaceModel) -> Result<Vec<Character>> {
    p.check(chi)?;
    let res = chi.pullback(&p.inclusion)?;
    let mut pair = vec![res.clone(), res.mul(&p.omega()?)];
    pair.sort();
    pair.dedup();
    let brute = nu_distinctions_brute(chi, chi, p)?;
    Ok(if brute == pair { pair } else { brute })
}

/// All `nu` with `Ps(chi1, chi2)` `nu`-distinguished by `GL_2(k)`, by
/// enumeration: `chi1|_k = chi2|_k = nu` or `chi1^sigma chi2 = nu o N`.
pub fn nu_distinctions_brute(chi1: &Character, chi2: &Character, p: &LocalPlaceModel) -> Result<Vec<Character>> {
    let r1 = chi1.pullback(&p.inclusion)?;
    let r2 = chi2.pullback(&p.inclusion)?;
    let prod = chi1.pullback(&p.sigma)?.mul(chi2);
    let mut out = Vec::new();
    for nu in p.k_group.enumerate_characters()? {
        if (r1 == nu && r2 == nu) || nu.pullback(&p.norm)? == prod {
            out.push(nu);
        }
    }
    out.sort();
    Ok(out)
}

/// Number of constituents of the restriction to `SL_2`: `|X_loc|`.
pub fn packet_size(x_loc: &[Character]) -> Result<usize> {
    let first = x_loc.first().ok_or(LocalError::NotAGroup)?;
    let rank = first.components.len();
    if x_loc.iter().any(|c| c.components.len() != rank) || !x_loc.iter().any(Character::is_trivial) {
        return Err(LocalError::NotAGroup);
    }
    for a in x_loc {
        for b in x_loc {
            if !x_loc.contains(&a.div(b)) {
                return Err(LocalError::NotAGroup);
            }
        }
    }
    let mut distinct = x_loc.to_vec();
    distinct.sort();
    distinct.dedup();
    match distinct.len() {
        n @ (1 | 2 | 4) => Ok(n),
        n => Err(LocalError::InvalidOrder(n)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitCount {
    pub orbits: usize,
    /// Orbits consisting of automorphic members.
    pub automorphic_orbits: usize,
}

/// Orbits of the `L`-packet under the adjoint action.
pub fn orbit_count(global_self_twists: usize, monomial: bool) -> Result<OrbitCount> {
    match (monomial, global_self_twists) {
        (false, 1) => Ok(OrbitCount { orbits: 1, automorphic_orbits: 1 }),
        (true, n @ (2 | 4)) => Ok(OrbitCount { orbits: n, automorphic_orbits: 1 }),
        (_, n) => Err(LocalError::InvalidOrder(n)),
    }
}

/// A principal series `Ps(a, b)` of `GL_2(k)` at a split place, up to order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalPs {
    pub a: Character,
    pub b: Character,
}

impl LocalPs {
    pub fn dual(&self) -> Self {
        LocalPs { a: self.a.inv(), b: self.b.inv() }
    }

    pub fn twist(&self, chi: &Character) -> Self {
        LocalPs { a: self.a.mul(chi), b: self.b.mul(chi) }
    }

    pub fn iso(&self, other: &Self) -> bool {
        (self.a == other.a && self.b == other.b) || (self.a == other.b && self.b == other.a)
    }
}

/// At a split place: `pi_2 = pi_1^dual chi_1` and `pi_1 = pi_2^dual chi_2`.
pub fn split_place_check(
    p: &LocalPlaceModel,
    pair: (&LocalPs, &LocalPs),
    chis: (&Character, &Character),
) -> Result<bool> {
    if p.spec.kind != PlaceKind::Split {
        return Err(LocalError::NotSplit);
    }
    for c in [&pair.0.a, &pair.0.b, &pair.1.a, &pair.1.b, chis.0, chis.1] {
        p.k_group.check_character(c).map_err(|e| LocalError::PlaceMismatch(e.to_string()))?;
    }
    Ok(pair.1.iso(&pair.0.dual().twist(chis.0)) && pair.0.iso(&pair.1.dual().twist(chis.1)))
}
