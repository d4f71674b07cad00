//! Monomial parameters `Ind_{W_M}^{W_E} mu` over a field diagram: self-twists,
//! quadratic sources, the Asai lift, the distinguishing set and the
//! factorizability verdict.
//!
//! Everything here is computed from the diagram maps alone. The class-function
//! oracle in [`crate::oracle_rep`] is the independent check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{AbError, Character, FinAbGroup};
use crate::fieldnet::{classify_quadratic_extension, FieldDiagram, FieldError, GaloisKind, GaloisType, Node};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoError {
    #[error("mu = mu^tau, so the induced parameter is reducible")]
    Reducible,
    #[error("no origin character on the L node")]
    MissingOrigin,
    #[error("descriptor does not say whether it is distinguished")]
    InsufficientProvenance,
    #[error("factorizability needs a distinguished representation")]
    NotDistinguished,
    #[error("{0} quadratic sources; only 1 or 3 are possible")]
    InvalidSourceCount(usize),
    #[error("chi = chi^sigma; twist by a character to reduce to the classical case")]
    GaloisInvariantChi,
    #[error("chi / chi^sigma does not cut out M over E")]
    ChiNotDefiningM,
    #[error("F node too small: {0}")]
    DegenerateFNode(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] AbError),
}

pub type Result<T> = std::result::Result<T, MonoError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonomialDatum {
    pub diagram: FieldDiagram,
    /// The inducing character on the `M` node.
    pub mu: Character,
    /// `eta` on the `L` node when `mu = eta o N_{M/L}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Character>,
}

impl MonomialDatum {
    pub fn new(diagram: FieldDiagram, mu: Character) -> Result<Self> {
        diagram.group(Node::M).check_character(&mu)?;
        let d = MonomialDatum { diagram, mu, origin: None };
        if d.mu_tau()? == d.mu {
            return Err(MonoError::Reducible);
        }
        Ok(d)
    }

    /// The datum with `mu = eta o N_{M/L}`.
    pub fn from_origin(diagram: FieldDiagram, eta: Character) -> Result<Self> {
        diagram.group(Node::L).check_character(&eta)?;
        let mu = eta.pullback(diagram.down(Node::M, Node::L))?;
        let mut d = Self::new(diagram, mu)?;
        d.origin = Some(eta);
        Ok(d)
    }

    /// Re-checks a deserialized datum.
    pub fn check(&self) -> Result<()> {
        self.diagram.check_shapes()?;
        self.diagram.group(Node::M).check_character(&self.mu)?;
        if self.mu_tau()? == self.mu {
            return Err(MonoError::Reducible);
        }
        if let Some(eta) = &self.origin {
            if eta.pullback(self.diagram.down(Node::M, Node::L))? != self.mu {
                return Err(MonoError::InvariantViolation("mu differs from origin o N_M/L".into()));
            }
        }
        Ok(())
    }

    pub fn mu_tau(&self) -> Result<Character> {
        Ok(self.mu.pullback(&self.diagram.tau)?)
    }

    pub fn mu_sigma(&self) -> Result<Character> {
        Ok(self.mu.pullback(&self.diagram.sigma)?)
    }

    /// `mu^tau / mu`.
    pub fn ratio(&self) -> Result<Character> {
        Ok(self.mu_tau()?.div(&self.mu))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepDescriptor {
    Monomial(MonomialDatum),
    /// A non-monomial parameter: only its trivial self-twist group is known.
    NonMonomial {
        tag: String,
        #[serde(default = "FinAbGroup::trivial")]
        f_node: FinAbGroup,
        #[serde(default = "FinAbGroup::trivial")]
        e_node: FinAbGroup,
        #[serde(default)]
        distinguished: Option<bool>,
    },
}

impl RepDescriptor {
    pub fn non_monomial(tag: &str, distinguished: Option<bool>) -> Self {
        RepDescriptor::NonMonomial {
            tag: tag.into(),
            f_node: FinAbGroup::trivial(),
            e_node: FinAbGroup::trivial(),
            distinguished,
        }
    }
}

/// Characters `nu` of the `E` node with `Ind(mu) (x) nu = Ind(mu)`.
pub fn self_twists(r: &RepDescriptor) -> Result<Vec<Character>> {
    match r {
        RepDescriptor::NonMonomial { e_node, .. } => Ok(vec![e_node.trivial_character()]),
        RepDescriptor::Monomial(d) => monomial_self_twists(d),
    }
}

fn monomial_self_twists(d: &MonomialDatum) -> Result<Vec<Character>> {
    let ratio = d.ratio()?;
    let norm = d.diagram.down(Node::M, Node::E);
    let mut out = Vec::new();
    for nu in d.diagram.group(Node::E).enumerate_characters()? {
        let lifted = nu.pullback(norm)?;
        if lifted.is_trivial() || lifted == ratio {
            out.push(nu);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Source {
    pub omega: Character,
    pub galois_type: GaloisKind,
    pub restriction: Character,
}

/// One entry per nontrivial self-twist, each classified over `F`.
pub fn quadratic_sources(d: &MonomialDatum) -> Result<Vec<Source>> {
    let mut out = Vec::new();
    for nu in monomial_self_twists(d)? {
        if nu.is_trivial() {
            continue;
        }
        let GaloisType { kind, restriction } = classify_quadratic_extension(&nu, &d.diagram)?;
        out.push(Source { omega: nu, galois_type: kind, restriction });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Asai lift

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AsaiSummand {
    /// A character of the `F` node.
    Character { label: String, chi: Character },
    /// `Ind_{W_K}^{W_F}` of a character of the node `from`.
    Induced { from: Node, chi: Character },
}

impl AsaiSummand {
    pub fn dimension(&self) -> usize {
        match self {
            AsaiSummand::Character { .. } => 1,
            AsaiSummand::Induced { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsaiDecomposition {
    pub summands: Vec<AsaiSummand>,
    pub contains_trivial: bool,
}

impl AsaiDecomposition {
    pub fn dimension(&self) -> usize {
        self.summands.iter().map(AsaiSummand::dimension).sum()
    }
}

/// The nontrivial character of the `F` node killing `N_{L/F}`.
pub fn omega_lf(d: &FieldDiagram) -> Result<Character> {
    let norms = d.down(Node::L, Node::F).images();
    let found: Vec<Character> = d
        .group(Node::F)
        .enumerate_characters()?
        .into_iter()
        .filter(|c| !c.is_trivial() && c.kills(&norms))
        .collect();
    match found.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(MonoError::DegenerateFNode(format!(
            "{} nontrivial characters kill N_L/F",
            found.len()
        ))),
    }
}

/// Asai lift of the restriction to `W_E` of `Ind_{W_L}^{W_F} eta`:
/// `Ind(eta^2) + 1 + omega_EF omega_LF`.
pub fn asai_decompose(r: &RepDescriptor) -> Result<AsaiDecomposition> {
    let d = match r {
        RepDescriptor::Monomial(d) => d,
        RepDescriptor::NonMonomial { .. } => return Err(MonoError::MissingOrigin),
    };
    let eta = d.origin.as_ref().ok_or(MonoError::MissingOrigin)?;
    let f = d.diagram.group(Node::F);
    let w = d.diagram.omega_EF.mul(&omega_lf(&d.diagram)?);
    let summands = vec![
        AsaiSummand::Induced { from: Node::L, chi: eta.pow(2) },
        AsaiSummand::Character { label: "1".into(), chi: f.trivial_character() },
        AsaiSummand::Character { label: "omega_EF omega_LF".into(), chi: w },
    ];
    Ok(AsaiDecomposition { summands, contains_trivial: true })
}

/// Asai lift of any monomial datum by Mackey's formula:
/// `Ind_{W_L}^{W_F}(mu o j_L) + Ind_{W_L'}^{W_F}(mu o j_L')`.
pub fn asai_mackey(d: &MonomialDatum) -> Result<AsaiDecomposition> {
    let a = d.mu.pullback(d.diagram.up(Node::L, Node::M))?;
    let b = d.mu.pullback(d.diagram.up(Node::Lp, Node::M))?;
    let contains_trivial = a.is_trivial() || b.is_trivial();
    Ok(AsaiDecomposition {
        summands: vec![AsaiSummand::Induced { from: Node::L, chi: a }, AsaiSummand::Induced { from: Node::Lp, chi: b }],
        contains_trivial,
    })
}

// ---------------------------------------------------------------------------
// Tensor products

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TensorSummand {
    /// A character of the `E` node.
    Character { chi: Character },
    /// `Ind_{W_M}^{W_E} nu` with `nu != nu^tau`.
    Induced { nu: Character },
}

/// `Ind(mu1) (x) Ind(mu2) = Ind(mu1 mu2) + Ind(mu1 mu2^tau)`, splitting each
/// `Ind(nu)` with `nu = nu^tau` into the two `E` characters above `nu`.
pub fn tensor_monomial(d: &FieldDiagram, mu1: &Character, mu2: &Character) -> Result<Vec<TensorSummand>> {
    let m = d.group(Node::M);
    m.check_character(mu1)?;
    m.check_character(mu2)?;
    let mut out = Vec::new();
    for nu in [mu1.mul(mu2), mu1.mul(&mu2.pullback(&d.tau)?)] {
        if nu.pullback(&d.tau)? != nu {
            out.push(TensorSummand::Induced { nu });
            continue;
        }
        let norm = d.down(Node::M, Node::E);
        let lam = d
            .group(Node::E)
            .enumerate_characters()?
            .into_iter()
            .find(|l| l.pullback(norm).map(|x| x == nu).unwrap_or(false))
            .ok_or_else(|| MonoError::InvariantViolation("tau-invariant character does not descend to E".into()))?;
        let other = lam.mul(&d.omega_ME);
        out.push(TensorSummand::Character { chi: lam });
        out.push(TensorSummand::Character { chi: other });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Distinguishing set

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distinction {
    /// Characters `chi` of the `F` node for which the representation is `chi`-distinguished.
    #[serde(rename = "X")]
    pub x: Vec<Character>,
    /// Self-twists trivial on the image of `F`.
    #[serde(rename = "Y")]
    pub y: Vec<Character>,
    /// `chi -> chi o N_{E/F}`, present when the trivial character is in `X`.
    pub witness: Option<Vec<(Character, Character)>>,
}

impl Distinction {
    pub fn distinguished(&self) -> bool {
        self.x.iter().any(Character::is_trivial)
    }
}

pub fn distinguishing_set(r: &RepDescriptor) -> Result<Distinction> {
    match r {
        RepDescriptor::NonMonomial { f_node, e_node, distinguished, .. } => {
            let dist = distinguished.ok_or(MonoError::InsufficientProvenance)?;
            let one_f = f_node.trivial_character();
            let one_e = e_node.trivial_character();
            let (x, witness) = if dist {
                (vec![one_f.clone()], Some(vec![(one_f, one_e.clone())]))
            } else {
                (vec![], None)
            };
            Ok(Distinction { x, y: vec![one_e], witness })
        }
        RepDescriptor::Monomial(d) => monomial_distinction(d),
    }
}

fn monomial_distinction(d: &MonomialDatum) -> Result<Distinction> {
    let dg = &d.diagram;
    let a = d.mu.pullback(dg.up(Node::L, Node::M))?;
    let b = d.mu.pullback(dg.up(Node::Lp, Node::M))?;
    let (nl, nlp) = (dg.down(Node::L, Node::F), dg.down(Node::Lp, Node::F));
    let mut x = Vec::new();
    for chi in dg.group(Node::F).enumerate_characters()? {
        if chi.pullback(nl)? == a || chi.pullback(nlp)? == b {
            x.push(chi);
        }
    }
    let jf = dg.up(Node::F, Node::E);
    let twists = monomial_self_twists(d)?;
    let mut y = Vec::new();
    for nu in &twists {
        if nu.pullback(jf)?.is_trivial() {
            y.push(nu.clone());
        }
    }
    let mut out = Distinction { x, y, witness: None };
    if !out.distinguished() {
        return Ok(out);
    }
    let ef = dg.down(Node::E, Node::F);
    let mut pairs = Vec::new();
    for chi in &out.x {
        pairs.push((chi.clone(), chi.pullback(ef)?));
    }
    let mut images: Vec<&Character> = pairs.iter().map(|p| &p.1).collect();
    images.sort();
    images.dedup();
    let mut ys: Vec<&Character> = out.y.iter().collect();
    ys.sort();
    if images.len() != pairs.len() || images != ys {
        return Err(MonoError::InvariantViolation("chi -> chi o N_E/F is not a bijection X -> Y".into()));
    }
    if !dg.omega_EF.is_trivial() {
        for nu in &twists {
            if nu.pullback(jf)? == dg.omega_EF {
                return Err(MonoError::InvariantViolation(
                    "a self-twist of a distinguished representation restricts to omega_EF".into(),
                ));
            }
        }
    }
    if ![2, 4].contains(&out.x.len()) {
        return Err(MonoError::InvariantViolation(format!(
            "distinguished monomial representation with |X| = {}",
            out.x.len()
        )));
    }
    out.witness = Some(pairs);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Factorizability

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "d")]
pub enum Factorizability {
    Factorizable,
    NotFactorizable(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizabilityReport {
    pub verdict: Factorizability,
    pub distinction: Distinction,
    pub sources: Vec<Source>,
    /// The values `d` in `{2, 4}` are asserted, not derived, by the source theorem.
    pub d_asserted: bool,
}

pub fn factorizability(r: &RepDescriptor, distinguished: bool) -> Result<FactorizabilityReport> {
    if !distinguished {
        return Err(MonoError::NotDistinguished);
    }
    let d = match r {
        RepDescriptor::NonMonomial { f_node, e_node, tag, .. } => {
            let r = RepDescriptor::NonMonomial {
                tag: tag.clone(),
                f_node: f_node.clone(),
                e_node: e_node.clone(),
                distinguished: Some(true),
            };
            return Ok(FactorizabilityReport {
                verdict: Factorizability::Factorizable,
                distinction: distinguishing_set(&r)?,
                sources: vec![],
                d_asserted: false,
            });
        }
        RepDescriptor::Monomial(d) => d,
    };
    let distinction = monomial_distinction(d)?;
    if !distinction.distinguished() {
        return Err(MonoError::InvariantViolation(
            "flagged distinguished but the trivial character is not in X".into(),
        ));
    }
    let sources = quadratic_sources(d)?;
    let galois = sources.iter().filter(|s| s.galois_type != GaloisKind::NonGalois).count();
    let verdict = match (sources.len(), galois) {
        (1, _) => Factorizability::NotFactorizable(2),
        (3, 3) => Factorizability::NotFactorizable(4),
        (3, 1) => Factorizability::Factorizable,
        (3, g) => {
            return Err(MonoError::InvariantViolation(format!("{g} of 3 sources Galois over F")));
        }
        (n, _) => return Err(MonoError::InvalidSourceCount(n)),
    };
    if let Factorizability::NotFactorizable(k) = verdict {
        if k != distinction.x.len() {
            return Err(MonoError::InvariantViolation(format!(
                "asserted d = {k} but |X| = {}",
                distinction.x.len()
            )));
        }
    }
    Ok(FactorizabilityReport { verdict, distinction, sources, d_asserted: true })
}

// ---------------------------------------------------------------------------
// Pseudo-distinction conditions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PseudoBranch {
    /// `mu mu^sigma = chi o N_{M/E}`.
    Sigma,
    /// `mu mu^{sigma tau} = chi o N_{M/E}`.
    SigmaTau,
}

/// Checks the two pseudo-distinction identities for `mu` against `chi` on `E`.
pub fn pseudo_condition_check(d: &MonomialDatum, chi: &Character) -> Result<Option<PseudoBranch>> {
    let dg = &d.diagram;
    dg.group(Node::E).check_character(chi)?;
    let chi_s = chi.pullback(&dg.conj(Node::E)?)?;
    if &chi_s == chi {
        return Err(MonoError::GaloisInvariantChi);
    }
    if chi.div(&chi_s) != dg.omega_ME {
        return Err(MonoError::ChiNotDefiningM);
    }
    let target = chi.pullback(dg.down(Node::M, Node::E))?;
    if d.mu.mul(&d.mu_sigma()?) == target {
        return Ok(Some(PseudoBranch::Sigma));
    }
    let st = dg.sigma_tau()?;
    if d.mu.mul(&d.mu.pullback(&st)?) == target {
        return Ok(Some(PseudoBranch::SigmaTau));
    }
    Ok(None)
}
