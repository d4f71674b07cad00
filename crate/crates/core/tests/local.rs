//! The local SL(2) rule against direct enumeration of distinguishing characters.

use std::time::Instant;

use periodlab::abgroup::Character;
use periodlab::localrules::{equal_character_distinctions, ps_sl2_distinguished, LocalPlaceModel, PlaceKind};

/// `Ps(chi1, chi2)` is `nu`-distinguished by `GL_2(k)` iff both restrictions
/// equal `nu`, or `chi1^sigma chi2 = nu o N`. SL(2) distinction asks for some `nu`.
fn brute(p: &LocalPlaceModel, chi1: &Character, chi2: &Character) -> Vec<Character> {
    let ks = p.k_group.enumerate_characters().unwrap();
    let r1 = chi1.pullback(&p.inclusion).unwrap();
    let r2 = chi2.pullback(&p.inclusion).unwrap();
    let lhs = chi1.pullback(&p.sigma).unwrap().mul(chi2);
    ks.into_iter()
        .filter(|nu| (r1 == *nu && r2 == *nu) || nu.pullback(&p.norm).unwrap() == lhs)
        .collect()
}

fn models() -> Vec<LocalPlaceModel> {
    let mut out = Vec::new();
    for q in [2, 3, 4, 5, 7] {
        for n in [1, 2] {
            out.push(LocalPlaceModel::inert(q, n).unwrap());
        }
        out.push(LocalPlaceModel::split(q, 2).unwrap());
    }
    out
}

#[test]
fn rule_matches_enumeration_on_small_unit_models() {
    let start = Instant::now();
    let mut pairs = 0usize;
    for p in models() {
        let chars = p.big_group.enumerate_characters().unwrap();
        for a in &chars {
            for b in &chars {
                let v = ps_sl2_distinguished(a, b, &p).unwrap();
                assert_eq!(v.distinguished, !brute(&p, a, b).is_empty(), "{:?} {a} {b}", p.spec);
                pairs += 1;
            }
        }
    }
    eprintln!("{pairs} pairs in {:?}", start.elapsed());
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn equal_characters_have_two_distinctions_at_inert_places() {
    for p in models().into_iter().filter(|p| p.spec.kind == PlaceKind::Inert) {
        let om = p.omega().unwrap();
        assert_eq!(om.order(), 2);
        for chi in p.big_group.enumerate_characters().unwrap() {
            let got = equal_character_distinctions(&chi, &p).unwrap();
            let mut want = brute(&p, &chi, &chi);
            want.sort();
            assert_eq!(got, want);
            assert_eq!(got.len(), 2);
            let res = chi.pullback(&p.inclusion).unwrap();
            assert!(got.contains(&res) && got.contains(&res.mul(&om)));
        }
    }
}

#[test]
fn ramified_sigma_variant_ratio_is_not_distinguished() {
    // k units [4]: q = 5
    let p = LocalPlaceModel::inert(5, 1).unwrap();
    let chars = p.big_group.enumerate_characters().unwrap();
    let one = p.big_group.trivial_character();
    let mut seen = 0;
    for chi in &chars {
        let on_k = chi.pullback(&p.inclusion).unwrap();
        let variant = chi.pullback(&p.sigma).unwrap() != *chi;
        if !p.is_unramified(chi) && !on_k.is_trivial() && variant {
            assert!(!ps_sl2_distinguished(chi, &one, &p).unwrap().distinguished);
            seen += 1;
        }
    }
    assert!(seen > 0);
}
