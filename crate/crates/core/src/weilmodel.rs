//! Finite models of the Weil groups behind a V4 field diagram.
//!
//! A finite group `G` with a normal abelian subgroup `G_M` of index 4 and
//! `G / G_M = V4 = <s, t>` yields a [`FieldDiagram`]: node groups are the
//! abelianizations of `G_F = G`, `G_E = <G_M, t>`, `G_L = <G_M, s>`,
//! `G_L' = <G_M, st>` and `G_M`; extension maps are transfers, norms are
//! induced by inclusion, and `sigma`, `tau` act on `G_M` by conjugation.
//! Characters of every node then become class functions on `G`, which gives
//! a brute-force route to self-twists and Asai multiplicities.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::abgroup::{Character, FinAbGroup, GroupElem, GroupHom};
use crate::fieldnet::{DownMaps, FieldDiagram, Node, Nodes, UpMaps};
use crate::oracle_rep::{
    build_semidirect, ActingGroup,
    asai_within, induce_within, inner_product_within, ClassFunction, CycloField, FiniteGroup, OracleError, Q,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeilError {
    #[error("not a V4 extension: {0}")]
    NotV4Extension(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Group(#[from] crate::abgroup::AbError),
}

pub type Result<T> = std::result::Result<T, WeilError>;

const NODES: [Node; 5] = [Node::F, Node::E, Node::L, Node::Lp, Node::M];

fn slot(n: Node) -> usize {
    match n {
        Node::F => 0,
        Node::E => 1,
        Node::L => 2,
        Node::Lp => 3,
        Node::M => 4,
    }
}

#[derive(Clone, Debug)]
struct NodeData {
    mask: Vec<bool>,
    group: FinAbGroup,
    proj: Vec<Option<GroupElem>>,
    /// An element of `G` over each generator of `group`.
    lifts: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct WeilModel {
    pub group: Arc<FiniteGroup>,
    pub s: usize,
    pub t: usize,
    pub field: Arc<CycloField>,
    pub diagram: FieldDiagram,
    nodes: Vec<NodeData>,
}

impl WeilModel {
    pub fn from_group(group: FiniteGroup, m_mask: Vec<bool>, s: usize, t: usize) -> Result<Self> {
        let bad = |m: &str| Err(WeilError::NotV4Extension(m.into()));
        let n = group.order();
        if !group.is_normal(&m_mask) {
            return bad("G_M is not a normal subgroup");
        }
        if m_mask.iter().filter(|&&b| b).count() * 4 != n {
            return bad("G_M does not have index 4");
        }
        let st = group.mul(s, t);
        if m_mask[s] || m_mask[t] || m_mask[st] {
            return bad("s, t, st must lie outside G_M");
        }
        if !m_mask[group.mul(s, s)] || !m_mask[group.mul(t, t)] {
            return bad("s^2 and t^2 must lie in G_M");
        }
        let members: Vec<usize> = (0..n).filter(|&x| m_mask[x]).collect();
        if members.iter().any(|&x| members.iter().any(|&y| group.mul(x, y) != group.mul(y, x))) {
            return bad("G_M is not abelian");
        }
        let coset_mask = |r: usize| -> Vec<bool> {
            let mut mask = m_mask.clone();
            for &x in &members {
                mask[group.mul(x, r)] = true;
            }
            mask
        };
        let masks = [vec![true; n], coset_mask(t), coset_mask(s), coset_mask(st), m_mask.clone()];
        let nodes: Vec<NodeData> = masks
            .into_iter()
            .map(|mask| {
                let (g, proj) = group.abelianization(&mask);
                let lifts = g
                    .generators()
                    .iter()
                    .map(|gen| (0..n).find(|&x| proj[x].as_ref() == Some(gen)).expect("projection is onto"))
                    .collect();
                NodeData { mask, group: g, proj, lifts }
            })
            .collect();
        let field = CycloField::new(group.exponent());
        let group = Arc::new(group);
        let diagram = build_diagram(&group, &nodes, s, t)?;
        Ok(WeilModel { group, s, t, field, diagram, nodes })
    }

    /// The extension of `V4` by `B = (Z/m)^k` described by `p`.
    pub fn extension(p: &ExtensionParams) -> Result<Self> {
        let k = p.rank;
        let m = p.modulus;
        let mut gens: Vec<ExtElem> = (0..k)
            .map(|i| {
                let mut b = vec![0i64; k];
                b[i] = 1 % m;
                (b, 0, 0)
            })
            .collect();
        gens.push((vec![0; k], 1, 0));
        gens.push((vec![0; k], 0, 1));
        let (g, elems) = FiniteGroup::generate(&gens, (vec![0; k], 0, 0), |x, y| p.mul(x, y))?;
        let expected = 4 * (m as usize).pow(k as u32);
        if g.order() != expected {
            return Err(WeilError::NotV4Extension(format!(
                "closure has {} elements, expected {expected}",
                g.order()
            )));
        }
        let mask = elems.iter().map(|e| e.1 == 0 && e.2 == 0).collect();
        let s = elems.iter().position(|e| *e == (vec![0; k], 1, 0)).expect("generator");
        let t = elems.iter().position(|e| *e == (vec![0; k], 0, 1)).expect("generator");
        Self::from_group(g, mask, s, t)
    }

    /// A random valid model of order at most `max_order`.
    pub fn random<R: Rng>(rng: &mut R, max_order: usize) -> Self {
        loop {
            if let Some(p) = ExtensionParams::random(rng, max_order) {
                if let Ok(w) = Self::extension(&p) {
                    return w;
                }
            }
        }
    }

    fn node(&self, n: Node) -> &NodeData {
        &self.nodes[slot(n)]
    }

    /// `Z/8 x| <a, b>` with `a = -1`, `b = +1`, `G_M = <x^2, b>`, `s = x`, `t = a`.
    /// Order 32, with `M` of order 8 and an `L` node carrying characters of order 8.
    pub fn octic() -> Result<Self> {
        let (g, elems) = build_semidirect(8, ActingGroup::V4, &[7, 1])?;
        let mask = elems.iter().map(|e| e.0 % 2 == 0 && e.1 & 1 == 0).collect();
        let s = elems.iter().position(|e| *e == (1, 0)).expect("x in group");
        let t = elems.iter().position(|e| *e == (0, 1)).expect("a in group");
        Self::from_group(g, mask, s, t)
    }

    pub fn mask(&self, n: Node) -> &[bool] {
        &self.node(n).mask
    }

    /// Image in the node group of an element of `G_K`.
    pub fn project(&self, n: Node, x: usize) -> Option<&GroupElem> {
        self.node(n).proj[x].as_ref()
    }

    /// A character of a node as a class function on `G` supported on `G_K`.
    pub fn class_function(&self, n: Node, chi: &Character) -> ClassFunction {
        ClassFunction::from_character(&self.group, &self.field, chi, &self.node(n).proj)
    }

    /// `Ind_{G_M}^{G_E} mu`, supported on `G_E`.
    pub fn induced(&self, mu: &Character) -> Result<ClassFunction> {
        let f = self.class_function(Node::M, mu);
        Ok(induce_within(&f, self.mask(Node::M), self.mask(Node::E))?)
    }

    /// Characters `nu` of the `E` node with `nu (Ind mu) = Ind mu`, by inner products.
    pub fn self_twists_oracle(&self, mu: &Character) -> Result<Vec<Character>> {
        let pi = self.induced(mu)?;
        let e = self.mask(Node::E);
        let mut out = Vec::new();
        for nu in self.diagram.nodes.E.enumerate_characters()? {
            let twisted = pi.mul(&self.class_function(Node::E, &nu))?;
            if inner_product_within(&twisted, &pi, e)? == Q::one() {
                out.push(nu);
            }
        }
        Ok(out)
    }

    /// Characters of the `F` node occurring in the Asai lift of `Ind mu`.
    pub fn distinguishing_oracle(&self, mu: &Character) -> Result<Vec<Character>> {
        let pi = self.induced(mu)?;
        let all = vec![true; self.group.order()];
        let asai = asai_within(&pi, self.mask(Node::E), &all)?;
        let mut out = Vec::new();
        for chi in self.diagram.nodes.F.enumerate_characters()? {
            let m = inner_product_within(&asai, &self.class_function(Node::F, &chi), &all)?;
            if !m.is_zero() {
                out.push(chi);
            }
        }
        Ok(out)
    }

    /// `<Ind mu, Ind mu>` over `G_E`.
    pub fn induced_norm(&self, mu: &Character) -> Result<Q> {
        let pi = self.induced(mu)?;
        Ok(inner_product_within(&pi, &pi, self.mask(Node::E))?)
    }
}

fn transfer(group: &FiniteGroup, big: &[bool], small: &[bool], g: usize) -> usize {
    let r = (0..group.order()).find(|&x| big[x] && !small[x]).expect("index 2");
    let ri = group.inv(r);
    if small[g] {
        group.mul(g, group.mul(ri, group.mul(g, r)))
    } else {
        group.mul(group.mul(ri, g), group.mul(g, r))
    }
}

fn build_diagram(group: &FiniteGroup, nodes: &[NodeData], s: usize, t: usize) -> Result<FieldDiagram> {
    let up = |a: Node, b: Node| -> Result<GroupHom> {
        let (na, nb) = (&nodes[slot(a)], &nodes[slot(b)]);
        let imgs: Vec<GroupElem> = na
            .lifts
            .iter()
            .map(|&x| nb.proj[transfer(group, &na.mask, &nb.mask, x)].clone().expect("transfer lands in G_K"))
            .collect();
        Ok(GroupHom::from_images(&na.group, &nb.group, &imgs)?)
    };
    let down = |a: Node, b: Node| -> Result<GroupHom> {
        let (na, nb) = (&nodes[slot(a)], &nodes[slot(b)]);
        let imgs: Vec<GroupElem> = na.lifts.iter().map(|&x| nb.proj[x].clone().expect("inclusion")).collect();
        Ok(GroupHom::from_images(&na.group, &nb.group, &imgs)?)
    };
    let conj_m = |g: usize| -> Result<GroupHom> {
        let nm = &nodes[slot(Node::M)];
        let imgs: Vec<GroupElem> = nm
            .lifts
            .iter()
            .map(|&x| nm.proj[group.conj(x, group.inv(g))].clone().expect("G_M is normal"))
            .collect();
        Ok(GroupHom::from_images(&nm.group, &nm.group, &imgs)?)
    };
    let sign = |n: Node, kernel: &[bool]| -> Character {
        let nd = &nodes[slot(n)];
        Character {
            components: nd
                .lifts
                .iter()
                .map(|&x| if kernel[x] { Q::zero() } else { Q::new(1, 2) })
                .collect(),
        }
    };
    use Node::*;
    let g = |n: Node| nodes[slot(n)].group.clone();
    Ok(FieldDiagram {
        nodes: Nodes { F: g(F), E: g(E), L: g(L), Lp: g(Lp), M: g(M) },
        up_maps: UpMaps {
            F_E: up(F, E)?,
            F_L: up(F, L)?,
            F_Lp: up(F, Lp)?,
            E_M: up(E, M)?,
            L_M: up(L, M)?,
            Lp_M: up(Lp, M)?,
        },
        down_maps: DownMaps {
            E_F: down(E, F)?,
            L_F: down(L, F)?,
            Lp_F: down(Lp, F)?,
            M_E: down(M, E)?,
            M_L: down(M, L)?,
            M_Lp: down(M, Lp)?,
        },
        sigma: conj_m(s)?,
        tau: conj_m(t)?,
        omega_EF: sign(F, &nodes[slot(E)].mask),
        omega_ME: sign(E, &nodes[slot(M)].mask),
    })
}

/// Every node of a model, in diagram order.
pub fn nodes() -> [Node; 5] {
    NODES
}

// ---------------------------------------------------------------------------
// Extensions of V4 by (Z/m)^k

type ExtElem = (Vec<i64>, u8, u8);

/// Elements `b s^i t^j` with `s b s^-1 = A_sigma b`, `t b t^-1 = A_tau b`,
/// `s^2 = alpha`, `t^2 = beta`, `t s = c s t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionParams {
    pub modulus: i64,
    pub rank: usize,
    pub a_sigma: Vec<Vec<i64>>,
    pub a_tau: Vec<Vec<i64>>,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub c: Vec<i64>,
}

impl ExtensionParams {
    fn apply(&self, a: &[Vec<i64>], b: &[i64]) -> Vec<i64> {
        a.iter()
            .map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum::<i64>().rem_euclid(self.modulus))
            .collect()
    }

    fn act(&self, i: u8, j: u8, b: &[i64]) -> Vec<i64> {
        let mut v = b.to_vec();
        if j == 1 {
            v = self.apply(&self.a_tau, &v);
        }
        if i == 1 {
            v = self.apply(&self.a_sigma, &v);
        }
        v
    }

    fn add(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        x.iter().zip(y).map(|(a, b)| (a + b).rem_euclid(self.modulus)).collect()
    }

    fn mul(&self, x: &ExtElem, y: &ExtElem) -> ExtElem {
        let (b1, i1, j1) = x;
        let (b2, i2, j2) = y;
        let mut b = self.add(b1, &self.act(*i1, *j1, b2));
        if j1 * i2 == 1 {
            b = self.add(&b, &self.act(*i1, 0, &self.c));
        }
        if i1 + i2 == 2 {
            b = self.add(&b, &self.alpha);
        }
        if j1 + j2 == 2 {
            b = self.add(&b, &self.act((i1 + i2) % 2, 0, &self.beta));
        }
        (b, (i1 + i2) % 2, (j1 + j2) % 2)
    }

    /// Random parameters; `None` when the draw is inconsistent.
    pub fn random<R: Rng>(rng: &mut R, max_order: usize) -> Option<Self> {
        let mut shapes: Vec<(i64, usize)> = Vec::new();
        for m in 2..=12i64 {
            for k in 1..=2usize {
                if 4 * (m as usize).pow(k as u32) <= max_order {
                    shapes.push((m, k));
                }
            }
        }
        let &(m, k) = shapes.choose(rng)?;
        let invs = involutions(m, k);
        let a_sigma = invs.choose(rng)?.clone();
        let commuting: Vec<&Vec<Vec<i64>>> = invs.iter().filter(|b| mat_mul(&a_sigma, b, m) == mat_mul(b, &a_sigma, m)).collect();
        let a_tau = (*commuting.choose(rng)?).clone();
        let split = rng.gen_bool(0.3);
        let vec = |rng: &mut R| -> Vec<i64> {
            if split {
                vec![0; k]
            } else {
                (0..k).map(|_| rng.gen_range(0..m)).collect()
            }
        };
        let alpha = vec(rng);
        let beta = vec(rng);
        let c = vec(rng);
        Some(ExtensionParams { modulus: m, rank: k, a_sigma, a_tau, alpha, beta, c })
    }
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>], m: i64) -> Vec<Vec<i64>> {
    let k = a.len();
    (0..k)
        .map(|i| (0..k).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum::<i64>().rem_euclid(m)).collect())
        .collect()
}

/// Involutive automorphisms of `(Z/m)^k` for `k <= 2`.
fn involutions(m: i64, k: usize) -> Vec<Vec<Vec<i64>>> {
    let id: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| i64::from(i == j) % m).collect()).collect();
    let mut out = Vec::new();
    let total = m.pow((k * k) as u32);
    for code in 0..total {
        let mut c = code;
        let a: Vec<Vec<i64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        let v = c % m;
                        c /= m;
                        v
                    })
                    .collect()
            })
            .collect();
        if mat_mul(&a, &a, m) == id {
            out.push(a);
        }
    }
    out
}
