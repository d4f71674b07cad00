//! Pseudo-distinguished monomial representations.
//!
//! Given `chi` on `E` with `chi / chi^sigma = omega_{M/E}`, find `mu~` on `L`
//! with `mu~ o N_{M/L} = chi o N_{M/E}`, then every `mu` on `M` extending
//! `mu~` gives `mu mu^sigma = chi o N_{M/E}`.

use serde::Serialize;
use thiserror::Error;

use crate::abgroup::{AbError, Character};
use crate::fieldnet::{classify_quadratic_extension, FieldDiagram, FieldError, GaloisKind, Node};
use crate::monomial::{pseudo_condition_check, MonoError, MonomialDatum, PseudoBranch};

#[derive(Debug, Error)]
pub enum PseudoError {
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("no mu~ solves the norm identity: {0}")]
    NoSolution(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mono(#[from] MonoError),
    #[error(transparent)]
    Group(#[from] AbError),
}

pub type Result<T> = std::result::Result<T, PseudoError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseudoSolution {
    pub mu_tilde: Character,
    /// `mu~ omega_{M/L}`, which is also `mu~` composed with the conjugation of `L`.
    pub partner: Character,
    /// Characters of `M` with `mu o j_{L -> M} = mu~`.
    pub extensions: Vec<Character>,
}

impl PseudoSolution {
    pub fn orbit(&self) -> [&Character; 2] {
        [&self.mu_tilde, &self.partner]
    }
}

/// The nontrivial character of `L` killing `N_{M/L}`.
pub fn omega_ml(d: &FieldDiagram) -> Result<Character> {
    let norms = d.down(Node::M, Node::L).images();
    let found: Vec<Character> = d
        .group(Node::L)
        .enumerate_characters()?
        .into_iter()
        .filter(|c| !c.is_trivial() && c.kills(&norms))
        .collect();
    match found.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(PseudoError::PreconditionFailed(format!(
            "{} nontrivial characters of L kill N_M/L",
            found.len()
        ))),
    }
}

fn check_chi(d: &FieldDiagram, chi: &Character) -> Result<()> {
    d.group(Node::E).check_character(chi)?;
    let ratio = chi.div(&chi.pullback(&d.conj(Node::E)?)?);
    if ratio.is_trivial() {
        return Err(PseudoError::PreconditionFailed("chi = chi^sigma".into()));
    }
    if ratio != d.omega_ME {
        return Err(PseudoError::PreconditionFailed(format!("chi / chi^sigma = {ratio} does not cut out M")));
    }
    let kind = classify_quadratic_extension(&ratio, d)?.kind;
    if kind != GaloisKind::Biquadratic {
        return Err(PseudoError::PreconditionFailed(format!("M/F is {kind}, not LE")));
    }
    Ok(())
}

/// All characters of `L` solving `mu~ o N_{M/L} = chi o N_{M/E}`.
pub fn solution_set(d: &FieldDiagram, chi: &Character) -> Result<Vec<Character>> {
    let target = chi.pullback(d.down(Node::M, Node::E))?;
    let n = d.down(Node::M, Node::L);
    let mut out = Vec::new();
    for c in d.group(Node::L).enumerate_characters()? {
        if c.pullback(n)? == target {
            out.push(c);
        }
    }
    Ok(out)
}

pub fn solve_mu_tilde(d: &FieldDiagram, chi: &Character) -> Result<PseudoSolution> {
    check_chi(d, chi)?;
    let sols = solution_set(d, chi)?;
    let Some(mu_tilde) = sols.first().cloned() else {
        return Err(PseudoError::NoSolution(format!(
            "chi = {chi}; chi o N_M/E = {}",
            chi.pullback(d.down(Node::M, Node::E))?
        )));
    };
    let om = omega_ml(d)?;
    let partner = mu_tilde.mul(&om);
    let mut want = vec![mu_tilde.clone(), partner.clone()];
    want.sort();
    if sols != want {
        return Err(PseudoError::InvariantViolation(format!(
            "solution set has {} elements, expected {{mu~, mu~ omega_M/L}}",
            sols.len()
        )));
    }
    let conj = mu_tilde.pullback(&d.conj(Node::L)?)?;
    if !sols.contains(&conj) {
        return Err(PseudoError::InvariantViolation("conjugate of mu~ is not a solution".into()));
    }
    let extensions = extensions_of(d, &mu_tilde)?;
    Ok(PseudoSolution { mu_tilde, partner, extensions })
}

/// Characters of `M` restricting to `mu~` along `j_{L -> M}`.
pub fn extensions_of(d: &FieldDiagram, mu_tilde: &Character) -> Result<Vec<Character>> {
    let j = d.up(Node::L, Node::M);
    let mut out = Vec::new();
    for mu in d.group(Node::M).enumerate_characters()? {
        if &mu.pullback(j)? == mu_tilde {
            out.push(mu);
        }
    }
    Ok(out)
}

/// Characters of `M` trivial on `j_{L -> M}(L)`.
pub fn trivial_on_l_image(d: &FieldDiagram) -> Result<Vec<Character>> {
    let img = d.up(Node::L, Node::M).images();
    Ok(d.group(Node::M)
        .enumerate_characters()?
        .into_iter()
        .filter(|c| c.kills(&img))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoReps {
    pub solution: PseudoSolution,
    /// Extensions of both orbit members, sorted.
    pub extensions: Vec<Character>,
    /// Extensions that are irreducible data (`mu^tau != mu`).
    pub data: Vec<MonomialDatum>,
}

/// Every `mu` extending a solution; each is checked against the pseudo
/// conditions and the extensions of each `mu~` are matched with the
/// characters of `M` trivial on the image of `L`.
pub fn enumerate_pseudo_reps(d: &FieldDiagram, chi: &Character) -> Result<PseudoReps> {
    let solution = solve_mu_tilde(d, chi)?;
    let trivial = trivial_on_l_image(d)?;
    let mut extensions = Vec::new();
    for mt in solution.orbit() {
        let ext = extensions_of(d, mt)?;
        if let Some(base) = ext.first() {
            let mut shifted: Vec<Character> = trivial.iter().map(|t| base.mul(t)).collect();
            shifted.sort();
            if shifted != ext {
                return Err(PseudoError::InvariantViolation("extensions are not a coset of the annihilator".into()));
            }
        }
        extensions.extend(ext);
    }
    extensions.sort();
    extensions.dedup();
    let mut data = Vec::new();
    for mu in &extensions {
        let Ok(datum) = MonomialDatum::new(d.clone(), mu.clone()) else { continue };
        match pseudo_condition_check(&datum, chi)? {
            Some(PseudoBranch::Sigma) => data.push(datum),
            other => {
                return Err(PseudoError::InvariantViolation(format!("extension {mu} gave branch {other:?}")));
            }
        }
    }
    Ok(PseudoReps { solution, extensions, data })
}
