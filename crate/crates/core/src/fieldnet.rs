//! V4 field diagrams `F < E, L, L' < M` with a finite abelian group at each
//! node, extension maps `j` going up, norms `N` going down, and the Galois
//! involutions of the top node.
//!
//! `sigma` fixes `L` and `tau` fixes `E`, so `sigma tau` fixes `L'`. The
//! conjugation of each quadratic node over `F` is not stored: it is recovered
//! as `j o N - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{AbError, Character, FinAbGroup, GroupElem, GroupHom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("character is not quadratic (order {0})")]
    NotQuadratic(i64),
    #[error("no character of order {n} on {group} meets the constraints")]
    NoSuchCharacter { n: i64, group: String },
    #[error("diagram is invalid: {0}")]
    InvalidDiagram(String),
    #[error(transparent)]
    Group(#[from] AbError),
}

pub type Result<T> = std::result::Result<T, FieldError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    F,
    E,
    L,
    Lp,
    M,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Node::F => "F",
            Node::E => "E",
            Node::L => "L",
            Node::Lp => "L'",
            Node::M => "M",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Nodes {
    pub F: FinAbGroup,
    pub E: FinAbGroup,
    pub L: FinAbGroup,
    pub Lp: FinAbGroup,
    pub M: FinAbGroup,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct UpMaps {
    pub F_E: GroupHom,
    pub F_L: GroupHom,
    pub F_Lp: GroupHom,
    pub E_M: GroupHom,
    pub L_M: GroupHom,
    pub Lp_M: GroupHom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DownMaps {
    pub E_F: GroupHom,
    pub L_F: GroupHom,
    pub Lp_F: GroupHom,
    pub M_E: GroupHom,
    pub M_L: GroupHom,
    pub M_Lp: GroupHom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct FieldDiagram {
    pub nodes: Nodes,
    pub up_maps: UpMaps,
    pub down_maps: DownMaps,
    pub sigma: GroupHom,
    pub tau: GroupHom,
    pub omega_EF: Character,
    pub omega_ME: Character,
}

impl FieldDiagram {
    pub fn group(&self, n: Node) -> &FinAbGroup {
        match n {
            Node::F => &self.nodes.F,
            Node::E => &self.nodes.E,
            Node::L => &self.nodes.L,
            Node::Lp => &self.nodes.Lp,
            Node::M => &self.nodes.M,
        }
    }

    /// `j_{F -> K}` for `K` in `E, L, L'`, or `j_{K -> M}`.
    pub fn up(&self, from: Node, to: Node) -> &GroupHom {
        match (from, to) {
            (Node::F, Node::E) => &self.up_maps.F_E,
            (Node::F, Node::L) => &self.up_maps.F_L,
            (Node::F, Node::Lp) => &self.up_maps.F_Lp,
            (Node::E, Node::M) => &self.up_maps.E_M,
            (Node::L, Node::M) => &self.up_maps.L_M,
            (Node::Lp, Node::M) => &self.up_maps.Lp_M,
            _ => panic!("no extension map {from} -> {to}"),
        }
    }

    pub fn down(&self, from: Node, to: Node) -> &GroupHom {
        match (from, to) {
            (Node::E, Node::F) => &self.down_maps.E_F,
            (Node::L, Node::F) => &self.down_maps.L_F,
            (Node::Lp, Node::F) => &self.down_maps.Lp_F,
            (Node::M, Node::E) => &self.down_maps.M_E,
            (Node::M, Node::L) => &self.down_maps.M_L,
            (Node::M, Node::Lp) => &self.down_maps.M_Lp,
            _ => panic!("no norm map {from} -> {to}"),
        }
    }

    pub fn sigma_tau(&self) -> Result<GroupHom> {
        Ok(self.sigma.compose(&self.tau)?)
    }

    /// The nontrivial automorphism of a quadratic node over `F`, as `j o N - 1`.
    pub fn conj(&self, k: Node) -> Result<GroupHom> {
        let jn = self.up(Node::F, k).compose(self.down(k, Node::F))?;
        Ok(jn.sub(&GroupHom::identity(self.group(k)))?)
    }

    /// The element of `Gal(M/F)` generating `Gal(M/K)`.
    pub fn stabilizer(&self, k: Node) -> Result<GroupHom> {
        match k {
            Node::E => Ok(self.tau.clone()),
            Node::L => Ok(self.sigma.clone()),
            Node::Lp => self.sigma_tau(),
            _ => Err(FieldError::InvalidDiagram(format!("{k} is not a quadratic node"))),
        }
    }

    /// `chi^g` for `chi` on the `M` node and `g` an automorphism of it.
    pub fn twist_m(&self, mu: &Character, g: &GroupHom) -> Result<Character> {
        Ok(mu.pullback(g)?)
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, String> {
        let d: FieldDiagram = serde_json::from_str(s).map_err(|e| e.to_string())?;
        d.check_shapes().map_err(|e| e.to_string())?;
        Ok(d)
    }

    /// Domains, codomains and characters attached to the right nodes.
    pub fn check_shapes(&self) -> Result<()> {
        use Node::*;
        let ups = [(F, E), (F, L), (F, Lp), (E, M), (L, M), (Lp, M)];
        for (a, b) in ups {
            let h = self.up(a, b);
            if &h.domain != self.group(a) || &h.codomain != self.group(b) {
                return Err(FieldError::InvalidDiagram(format!("extension map {a} -> {b} has wrong shape")));
            }
            h.validate()?;
            let n = self.down(b, a);
            if &n.domain != self.group(b) || &n.codomain != self.group(a) {
                return Err(FieldError::InvalidDiagram(format!("norm map {b} -> {a} has wrong shape")));
            }
            n.validate()?;
        }
        for (name, g) in [("sigma", &self.sigma), ("tau", &self.tau)] {
            if &g.domain != self.group(M) || &g.codomain != self.group(M) {
                return Err(FieldError::InvalidDiagram(format!("{name} is not an endomorphism of the M node")));
            }
            g.validate()?;
        }
        self.group(F).check_character(&self.omega_EF)?;
        self.group(E).check_character(&self.omega_ME)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Check `sigma = +1` on the image of `L` and `conj` on the image of `L'`.
    pub assume_sigma_action: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { assume_sigma_action: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    pub check: String,
    pub identity: String,
    /// Node and generator index at which the two sides differ.
    pub node: Option<Node>,
    pub generator: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub checks_run: usize,
    pub failures: Vec<CheckFailure>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has(&self, check: &str) -> bool {
        self.failures.iter().any(|f| f.check == check)
    }

    fn compare(&mut self, check: &str, identity: &str, node: Node, lhs: &GroupHom, rhs: &GroupHom) {
        self.checks_run += 1;
        if let Some(g) = lhs.first_difference(rhs) {
            self.failures.push(CheckFailure {
                check: check.into(),
                identity: identity.into(),
                node: Some(node),
                generator: Some(g),
            });
        }
    }

    fn fail(&mut self, check: &str, identity: String) {
        self.failures.push(CheckFailure { check: check.into(), identity, node: None, generator: None });
    }
}

/// Checks every structural identity of the diagram; never panics on bad data.
pub fn validate_diagram(d: &FieldDiagram, opts: ValidationOptions) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let Err(e) = d.check_shapes() {
        r.fail("shape", e.to_string());
        return r;
    }
    match validate_inner(d, opts, &mut r) {
        Ok(()) => r,
        Err(e) => {
            r.fail("shape", e.to_string());
            r
        }
    }
}

fn validate_inner(d: &FieldDiagram, opts: ValidationOptions, r: &mut ValidationReport) -> Result<()> {
    use Node::*;
    let m = d.group(M);
    let id_m = GroupHom::identity(m);
    let (s, t) = (&d.sigma, &d.tau);
    let st = d.sigma_tau()?;

    r.compare("sigma-involution", "sigma^2 = 1", M, &s.compose(s)?, &id_m);
    r.compare("tau-involution", "tau^2 = 1", M, &t.compose(t)?, &id_m);
    r.compare("commute", "sigma tau = tau sigma", M, &st, &t.compose(s)?);

    for (a, b) in [(F, E), (F, L), (F, Lp), (E, M), (L, M), (Lp, M)] {
        let nj = d.down(b, a).compose(d.up(a, b))?;
        let two = GroupHom::scalar(d.group(a), 2);
        r.compare("norm-extension", &format!("N_{b}/{a} o j_{a}->{b} = 2"), a, &nj, &two);
    }

    let mut conj = std::collections::BTreeMap::new();
    for k in [E, L, Lp] {
        let c = d.conj(k)?;
        let id = GroupHom::identity(d.group(k));
        r.compare("conj-involution", &format!("conj_{k}^2 = 1"), k, &c.compose(&c)?, &id);
        conj.insert(k, c);
    }

    for k in [E, L, Lp] {
        let g = d.stabilizer(k)?;
        let jn = d.up(k, M).compose(d.down(M, k))?;
        r.compare("extension-norm", &format!("j_{k}->M o N_M/{k} = 1 + g"), M, &jn, &id_m.add(&g)?);
        // the stabilizer acts trivially on the norm
        let n = d.down(M, k);
        r.compare("norm-equivariance", &format!("N_M/{k} o g = N_M/{k}"), M, &n.compose(&g)?, n);
    }

    // tau: identity on E, conjugation on L and L'
    r.compare("tau-action", "tau o j_L = j_L o conj_L", L, &t.compose(d.up(L, M))?, &d.up(L, M).compose(&conj[&L])?);
    r.compare("tau-action", "tau o j_L' = j_L' o conj_L'", Lp, &t.compose(d.up(Lp, M))?, &d.up(Lp, M).compose(&conj[&Lp])?);
    r.compare("tau-action", "tau o j_E = j_E", E, &t.compose(d.up(E, M))?, d.up(E, M));
    for (k, g) in [(E, s.clone()), (L, t.clone()), (Lp, s.clone())] {
        let n = d.down(M, k);
        r.compare("norm-equivariance", &format!("N_M/{k} o g = conj_{k} o N_M/{k}"), M, &n.compose(&g)?, &conj[&k].compose(n)?);
    }

    if opts.assume_sigma_action {
        r.compare("sigma-action", "sigma o j_L = j_L", L, &s.compose(d.up(L, M))?, d.up(L, M));
        r.compare("sigma-action", "sigma o j_L' = j_L' o conj_L'", Lp, &s.compose(d.up(Lp, M))?, &d.up(Lp, M).compose(&conj[&Lp])?);
        r.compare("sigma-action", "sigma o j_E = j_E o conj_E", E, &s.compose(d.up(E, M))?, &d.up(E, M).compose(&conj[&E])?);
    } else {
        r.notes.push("sigma action on the images of L and L' not checked".into());
    }

    let nf = d.down(E, F).compose(d.down(M, E))?;
    r.compare("norm-transitivity", "N_E/F N_M/E = N_L/F N_M/L", M, &nf, &d.down(L, F).compose(d.down(M, L))?);
    r.compare("norm-transitivity", "N_E/F N_M/E = N_L'/F N_M/L'", M, &nf, &d.down(Lp, F).compose(d.down(M, Lp))?);
    let jf = d.up(E, M).compose(d.up(F, E))?;
    r.compare("extension-transitivity", "j_E j_F->E = j_L j_F->L", F, &jf, &d.up(L, M).compose(d.up(F, L))?);
    r.compare("extension-transitivity", "j_E j_F->E = j_L' j_F->L'", F, &jf, &d.up(Lp, M).compose(d.up(F, Lp))?);

    omega_check(r, "omega-EF", &d.omega_EF, d.group(F), d.down(E, F));
    omega_check(r, "omega-ME", &d.omega_ME, d.group(E), d.down(M, E));
    Ok(())
}

fn omega_check(r: &mut ValidationReport, name: &str, omega: &Character, g: &FinAbGroup, norm: &GroupHom) {
    r.checks_run += 1;
    match omega.order() {
        2 => {}
        1 if g.is_trivial() => r.notes.push(format!("{name} is trivial because its node is a trivial stub")),
        o => r.fail(name, format!("{name} has order {o}, expected 2")),
    }
    r.checks_run += 1;
    if !omega.kills(&norm.images()) {
        r.fail(name, format!("{name} does not kill the norm image"));
    }
}

// ---------------------------------------------------------------------------
// Galois type of a quadratic extension of E

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaloisKind {
    Biquadratic,
    CyclicQuartic,
    NonGalois,
}

impl fmt::Display for GaloisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GaloisType {
    pub kind: GaloisKind,
    /// `omega o j_{F -> E}`.
    pub restriction: Character,
}

/// Galois type over `F` of the quadratic extension of `E` cut out by `omega`.
pub fn classify_quadratic_extension(omega: &Character, d: &FieldDiagram) -> Result<GaloisType> {
    let e = d.group(Node::E);
    e.check_character(omega)?;
    let o = omega.order();
    if o != 2 {
        return Err(FieldError::NotQuadratic(o));
    }
    let restriction = omega.pullback(d.up(Node::F, Node::E))?;
    let kind = if restriction.is_trivial() {
        GaloisKind::Biquadratic
    } else if restriction == d.omega_EF {
        GaloisKind::CyclicQuartic
    } else {
        GaloisKind::NonGalois
    };
    let sigma_moves = omega_moved_by_sigma(omega, d)?;
    if sigma_moves != (kind == GaloisKind::NonGalois) {
        return Err(FieldError::InvalidDiagram(format!(
            "restriction test says {kind} but omega^sigma {} omega",
            if sigma_moves { "!=" } else { "=" }
        )));
    }
    Ok(GaloisType { kind, restriction })
}

/// `omega != omega^sigma` on the `E` node.
pub fn omega_moved_by_sigma(omega: &Character, d: &FieldDiagram) -> Result<bool> {
    Ok(&omega.pullback(&d.conj(Node::E)?)? != omega)
}

/// `chi o N_{E/F}`.
pub fn base_change_character(chi: &Character, d: &FieldDiagram) -> Result<Character> {
    d.group(Node::F).check_character(chi)?;
    Ok(chi.pullback(d.down(Node::E, Node::F))?)
}

/// `chi o N` for any norm map.
pub fn norm_character(chi: &Character, norm: &GroupHom) -> Result<Character> {
    norm.codomain.check_character(chi)?;
    Ok(chi.pullback(norm)?)
}

/// A character `eta` of the `L` node of order `n`, trivial on the image of `F`.
///
/// Triviality on `F` forces `eta^tau = eta^-1` (because `j N = 1 + tau`), so
/// `eta / eta^tau = eta^2` has order `n / gcd(n, 2)`; that order is re-verified.
pub fn construct_eta(d: &FieldDiagram, n: i64) -> Result<Character> {
    let conj = d.conj(Node::L)?;
    let ratio = if n % 2 == 0 { n / 2 } else { n };
    construct_eta_on(d.group(Node::L), &conj, &d.up(Node::F, Node::L).images(), n, ratio)
}

/// Search over the dual of `l` for `eta` of order `n` killing `f_image` with
/// `eta / eta^conj` of order `ratio_order`; first coordinate varies fastest.
pub fn construct_eta_on(
    l: &FinAbGroup,
    conj: &GroupHom,
    f_image: &[GroupElem],
    n: i64,
    ratio_order: i64,
) -> Result<Character> {
    let none = || FieldError::NoSuchCharacter { n, group: l.to_string() };
    if l.exponent() % n != 0 {
        return Err(none());
    }
    let mut chars = l.enumerate_characters()?;
    chars.sort_by(|a, b| a.components.iter().rev().cmp(b.components.iter().rev()));
    for eta in chars {
        if eta_conditions(&eta, conj, f_image, n, ratio_order)? {
            return Ok(eta);
        }
    }
    Err(none())
}

/// Re-verification of the defining conditions of [`construct_eta_on`].
pub fn eta_conditions(eta: &Character, conj: &GroupHom, f_image: &[GroupElem], n: i64, ratio_order: i64) -> Result<bool> {
    let ratio = eta.div(&eta.pullback(conj)?);
    Ok(eta.order() == n && eta.kills(f_image) && ratio.order() == ratio_order)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn hom(a: &FinAbGroup, b: &FinAbGroup, imgs: &[&[i64]]) -> GroupHom {
        let imgs: Vec<GroupElem> = imgs.iter().map(|c| b.reduce(c)).collect();
        GroupHom::from_images(a, b, &imgs).unwrap()
    }

    /// F trivial, E = Z/2, L = L' = Z/4, M = C_L + C_L'.
    pub(crate) fn toy() -> FieldDiagram {
        let f = FinAbGroup::trivial();
        let c4 = FinAbGroup::cyclic(4);
        let m = FinAbGroup::new(vec![4, 4]).unwrap();
        let e = FinAbGroup::cyclic(2);
        FieldDiagram {
            nodes: Nodes { F: f.clone(), E: e.clone(), L: c4.clone(), Lp: c4.clone(), M: m.clone() },
            up_maps: UpMaps {
                F_E: GroupHom::zero(&f, &e),
                F_L: GroupHom::zero(&f, &c4),
                F_Lp: GroupHom::zero(&f, &c4),
                E_M: GroupHom::zero(&e, &m),
                L_M: hom(&c4, &m, &[&[1, 0]]),
                Lp_M: hom(&c4, &m, &[&[0, 1]]),
            },
            down_maps: DownMaps {
                E_F: GroupHom::zero(&e, &f),
                L_F: GroupHom::zero(&c4, &f),
                Lp_F: GroupHom::zero(&c4, &f),
                M_E: GroupHom::zero(&m, &e),
                M_L: hom(&m, &c4, &[&[2], &[0]]),
                M_Lp: hom(&m, &c4, &[&[0], &[2]]),
            },
            sigma: hom(&m, &m, &[&[1, 0], &[0, -1]]),
            tau: hom(&m, &m, &[&[-1, 0], &[0, -1]]),
            omega_EF: f.trivial_character(),
            omega_ME: e.character(&[1]).unwrap(),
        }
    }

    #[test]
    fn toy_validates() {
        let d = toy();
        let r = validate_diagram(&d, ValidationOptions::default());
        assert!(r.ok(), "{:?}", r.failures);
        assert!(r.checks_run > 20);
    }

    #[test]
    fn tau_identity_flagged() {
        let mut d = toy();
        d.tau = GroupHom::identity(&d.nodes.M);
        let r = validate_diagram(&d, ValidationOptions::default());
        assert!(r.has("tau-action"));
    }

    #[test]
    fn perturbed_norm_flagged() {
        let mut d = toy();
        d.down_maps.M_L = hom(&d.nodes.M, &d.nodes.L, &[&[1], &[0]]);
        let r = validate_diagram(&d, ValidationOptions::default());
        assert!(r.has("norm-extension"));
        let f = r.failures.iter().find(|f| f.check == "norm-extension").unwrap();
        assert_eq!(f.generator, Some(0));
    }

    #[test]
    fn sigma_assumption_toggle() {
        let mut d = toy();
        d.sigma = GroupHom::identity(&d.nodes.M);
        d.tau = hom(&d.nodes.M, &d.nodes.M, &[&[-1, 0], &[0, -1]]);
        let on = validate_diagram(&d, ValidationOptions { assume_sigma_action: true });
        assert!(on.has("sigma-action"));
        let off = validate_diagram(&d, ValidationOptions { assume_sigma_action: false });
        assert!(!off.has("sigma-action"));
    }

    #[test]
    fn classify_basic() {
        let d = toy();
        let t = classify_quadratic_extension(&d.omega_ME, &d).unwrap();
        assert_eq!(t.kind, GaloisKind::Biquadratic);
        assert!(matches!(
            classify_quadratic_extension(&d.nodes.E.trivial_character(), &d),
            Err(FieldError::NotQuadratic(1))
        ));
    }

    #[test]
    fn base_change_trivial() {
        let d = toy();
        let chi = d.nodes.F.trivial_character();
        assert!(base_change_character(&chi, &d).unwrap().is_trivial());
    }

    #[test]
    fn eta_split_place() {
        let l = FinAbGroup::new(vec![8, 8]).unwrap();
        let swap = hom(&l, &l, &[&[0, 1], &[1, 0]]);
        let eta = construct_eta_on(&l, &swap, &[], 8, 8).unwrap();
        assert_eq!(eta, l.character(&[1, 0]).unwrap());
        assert!(eta_conditions(&eta, &swap, &[], 8, 8).unwrap());
        let one = construct_eta_on(&l, &swap, &[], 1, 1).unwrap();
        assert!(one.is_trivial());
        let c2 = FinAbGroup::cyclic(2);
        let neg = GroupHom::identity(&c2);
        assert!(matches!(construct_eta_on(&c2, &neg, &[], 8, 8), Err(FieldError::NoSuchCharacter { .. })));
    }

    #[test]
    fn eta_on_diagram() {
        let d = toy();
        let eta = construct_eta(&d, 4).unwrap();
        assert_eq!(eta.order(), 4);
        assert!(construct_eta(&d, 1).unwrap().is_trivial());
        assert!(matches!(construct_eta(&d, 8), Err(FieldError::NoSuchCharacter { .. })));
    }

    #[test]
    fn json_round_trip() {
        let d = toy();
        let s = serde_json::to_string(&d).unwrap();
        let back = FieldDiagram::from_json(&s).unwrap();
        assert!(validate_diagram(&back, ValidationOptions::default()).ok());
        assert!(s.contains("\"omega_EF\""));
    }
}
