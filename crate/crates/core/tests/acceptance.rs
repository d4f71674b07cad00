//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach stdout; the process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use periodlab::abgroup::Character;
use periodlab::casestudy::{run_example_257, VERDICT_257};
use periodlab::cli::run;
use periodlab::fieldnet::{construct_eta, Node};
use periodlab::localrules::{ps_sl2_distinguished, LocalPlaceModel};
use periodlab::monomial::{
    asai_decompose, distinguishing_set, factorizability, omega_lf, quadratic_sources, AsaiSummand, Factorizability,
    MonomialDatum, RepDescriptor,
};
use periodlab::oracle_rep::{asai_identity_holds, asai_within, induce_within, small_characters, ClassFunction};
use periodlab::pseudo::{omega_ml, solve_mu_tilde};
use periodlab::quadclass::{class_group, is_fundamental, prime_divisors, reduced_forms};
use periodlab::ssprimes::{hasse_ok, primes_up_to, scan_supersingular, trace, EllipticCurve};
use periodlab::weilmodel::WeilModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn cli_invariants(disc: &str) -> Result<serde_json::Value, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["periodlab", "classgroup", "--disc", disc], &mut out, &mut err);
    ensure(code == 0, || format!("exit {code}: {}", String::from_utf8_lossy(&err)))?;
    let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    Ok(v["invariants"].clone())
}

fn c1_class_groups() -> Outcome {
    for (disc, want) in [("-1028", serde_json::json!([16])), ("257", serde_json::json!([3]))] {
        let start = Instant::now();
        let got = cli_invariants(disc)?;
        ensure(got == want, || format!("disc {disc}: got {got}, want {want}"))?;
        within(start, Duration::from_secs(1))?;
    }
    Ok("-1028 -> [16], 257 -> [3]".into())
}

fn c2_form_engine() -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for d in (-1999..0).filter(|&d| is_fundamental(d)) {
        let g = class_group(d).map_err(|e| e.to_string())?.group;
        let forms = reduced_forms(d).len();
        ensure(g.order() as usize == forms, || format!("D = {d}: |SNF| = {} but {forms} forms", g.order()))?;
        let t = prime_divisors(d.abs()).len();
        ensure(g.p_rank(2) == t - 1, || format!("D = {d}: 2-rank {} but t = {t}", g.p_rank(2)))?;
        n += 1;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{n} fundamental discriminants"))
}

fn random_models(seed: u64, count: usize, max_order: usize) -> Vec<WeilModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| WeilModel::random(&mut rng, max_order)).collect()
}

fn c3_bijection() -> Outcome {
    let mut diagrams = 0;
    let mut data = 0;
    for w in random_models(3, 260, 128) {
        let d = &w.diagram;
        let n_ef = d.down(Node::E, Node::F);
        let mut touched = false;
        for mu in d.nodes.M.enumerate_characters().map_err(|e| e.to_string())? {
            let Ok(datum) = MonomialDatum::new(d.clone(), mu.clone()) else { continue };
            let x = distinguishing_set(&RepDescriptor::Monomial(datum)).map_err(|e| e.to_string())?;
            // brute-force sides from class functions
            let bx = w.distinguishing_oracle(&mu).map_err(|e| e.to_string())?;
            let fimg = d.up(Node::F, Node::E);
            let by: Vec<Character> = w
                .self_twists_oracle(&mu)
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter(|nu| nu.pullback(fimg).map(|c| c.is_trivial()).unwrap_or(false))
                .collect();
            ensure(bx.len() == x.x.len(), || "X differs from the oracle".into())?;
            if !bx.iter().any(Character::is_trivial) {
                continue;
            }
            ensure(bx.len() == by.len(), || format!("|X| = {} but |Y| = {}", bx.len(), by.len()))?;
            let mut images: Vec<Character> = bx.iter().map(|c| c.pullback(n_ef).unwrap()).collect();
            images.sort();
            images.dedup();
            let mut by = by;
            by.sort();
            ensure(images == by, || "chi -> chi o N is not a bijection onto Y".into())?;
            touched = true;
            data += 1;
        }
        if touched {
            diagrams += 1;
        }
    }
    ensure(diagrams >= 100, || format!("only {diagrams} diagrams carried distinguished data"))?;
    Ok(format!("{diagrams} diagrams, {data} distinguished data"))
}

fn c4_factorizability() -> Outcome {
    let nm = RepDescriptor::non_monomial("sym2", Some(true));
    let f = factorizability(&nm, true).map_err(|e| e.to_string())?;
    ensure(f.verdict == Factorizability::Factorizable, || "non-monomial".into())?;

    let w = WeilModel::octic().map_err(|e| e.to_string())?;
    let eta = construct_eta(&w.diagram, 8).map_err(|e| e.to_string())?;
    let datum = MonomialDatum::from_origin(w.diagram.clone(), eta).map_err(|e| e.to_string())?;
    let f = factorizability(&RepDescriptor::Monomial(datum.clone()), true).map_err(|e| e.to_string())?;
    let galois = f.sources.iter().filter(|s| s.galois_type != periodlab::fieldnet::GaloisKind::NonGalois).count();
    ensure(f.verdict == Factorizability::Factorizable && f.sources.len() == 3 && galois == 1, || {
        format!("one-Galois family gave {:?}", f.verdict)
    })?;

    let mut seen = [0usize; 2];
    for w in random_models(4, 80, 128) {
        for mu in w.diagram.nodes.M.enumerate_characters().map_err(|e| e.to_string())? {
            let Ok(datum) = MonomialDatum::new(w.diagram.clone(), mu) else { continue };
            let r = RepDescriptor::Monomial(datum.clone());
            let x = distinguishing_set(&r).map_err(|e| e.to_string())?;
            if !x.distinguished() {
                continue;
            }
            let src = quadratic_sources(&datum).map_err(|e| e.to_string())?;
            let f = factorizability(&r, true).map_err(|e| e.to_string())?;
            let (slot, want) = match src.len() {
                1 => (0, Factorizability::NotFactorizable(2)),
                3 if src.iter().all(|s| s.galois_type != periodlab::fieldnet::GaloisKind::NonGalois) => {
                    (1, Factorizability::NotFactorizable(4))
                }
                _ => continue,
            };
            ensure(f.verdict == want, || format!("{} sources gave {:?}", src.len(), f.verdict))?;
            let Factorizability::NotFactorizable(d) = f.verdict else { unreachable!() };
            ensure(d == x.x.len(), || format!("d = {d} but |X| = {}", x.x.len()))?;
            seen[slot] += 1;
        }
    }
    ensure(seen.iter().all(|&n| n > 0), || format!("family counts {seen:?}"))?;
    Ok(format!("unique-source {} and all-Galois {} fixtures, plus one-Galois and non-monomial", seen[0], seen[1]))
}

fn c5_asai() -> Outcome {
    let mut models = vec![WeilModel::octic().map_err(|e| e.to_string())?];
    models.extend(random_models(5, 24, 192));
    let mut chars = 0;
    let mut pairs = 0;
    for w in &models {
        for node in [Node::E, Node::L, Node::Lp] {
            let g = Arc::new((*w.group).clone().with_subgroup(w.mask(node).to_vec()).map_err(|e| e.to_string())?);
            let (lin, two) = small_characters(&g);
            for v in lin.iter().chain(&two) {
                ensure(asai_identity_holds(v).map_err(|e| e.to_string())?, || {
                    format!("identity fails on a model of order {}", g.order())
                })?;
                chars += 1;
            }
            pairs += 1;
        }
    }

    // Ind(eta^2) + 1 + omega_E omega_L on the order-32 model
    let w = &models[0];
    let d = &w.diagram;
    let eta = construct_eta(d, 8).map_err(|e| e.to_string())?;
    let datum = MonomialDatum::from_origin(d.clone(), eta).map_err(|e| e.to_string())?;
    let all = vec![true; w.group.order()];
    let pi = w.induced(&datum.mu).map_err(|e| e.to_string())?;
    let oracle = asai_within(&pi, w.mask(Node::E), &all).map_err(|e| e.to_string())?;
    let dec = asai_decompose(&RepDescriptor::Monomial(datum)).map_err(|e| e.to_string())?;
    let mut acc = ClassFunction::zero(&w.group, &w.field);
    for s in &dec.summands {
        let f = match s {
            AsaiSummand::Induced { from, chi } => {
                induce_within(&w.class_function(*from, chi), w.mask(*from), &all).map_err(|e| e.to_string())?
            }
            AsaiSummand::Character { chi, .. } => w.class_function(Node::F, chi),
        };
        acc = acc.add(&f).map_err(|e| e.to_string())?;
    }
    ensure(acc.values == oracle.values, || "order-32 decomposition differs from the class function".into())?;
    let w_char = d.omega_EF.mul(&omega_lf(d).map_err(|e| e.to_string())?);
    ensure(!w_char.is_trivial() && dec.dimension() == 4, || "degenerate decomposition".into())?;
    Ok(format!("{chars} characters over {pairs} index-2 pairs, order-32 decomposition exact"))
}

fn c6_pseudo() -> Outcome {
    let mut models = vec![WeilModel::octic().map_err(|e| e.to_string())?];
    models.extend(random_models(77, 120, 128));
    let mut solved = 0;
    for w in &models {
        let d = &w.diagram;
        let conj_e = d.conj(Node::E).map_err(|e| e.to_string())?;
        let m = w.mask(Node::M);
        for chi in d.nodes.E.enumerate_characters().map_err(|e| e.to_string())? {
            if chi.div(&chi.pullback(&conj_e).unwrap()) != d.omega_ME {
                continue;
            }
            let sol = solve_mu_tilde(d, &chi).map_err(|e| e.to_string())?;
            let target = w.class_function(Node::E, &chi);
            let mut oracle: Vec<Character> = d
                .nodes
                .L
                .enumerate_characters()
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter(|l| {
                    let f = w.class_function(Node::L, l);
                    (0..w.group.order()).filter(|&x| m[x]).all(|x| f.values[x] == target.values[x])
                })
                .collect();
            oracle.sort();
            let mut got = vec![sol.mu_tilde.clone(), sol.partner.clone()];
            got.sort();
            ensure(got == oracle, || format!("solver {got:?} but search {oracle:?}"))?;
            ensure(got.len() == 2, || "solution set is not of size 2".into())?;
            ensure(sol.mu_tilde.div(&sol.partner) == omega_ml(d).map_err(|e| e.to_string())?, || {
                "solutions do not differ by omega_ML".into()
            })?;
            solved += 1;
        }
    }
    ensure(solved >= 20, || format!("only {solved} fixtures"))?;
    Ok(format!("{solved} fixtures"))
}

fn c7_example_257() -> Outcome {
    let start = Instant::now();
    let r = run_example_257();
    within(start, Duration::from_secs(10))?;
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    ensure(r.passed && failed.is_empty(), || format!("failing checks {failed:?}"))?;
    let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
    for id in ["a", "b", "c", "d", "e", "f", "g"] {
        ensure(ids.contains(&id), || format!("check ({id}) missing"))?;
    }
    ensure(r.checks.iter().all(|c| !c.anchor.is_empty()), || "a check lacks its anchor".into())?;
    ensure(r.verdict == VERDICT_257, || format!("verdict {:?}", r.verdict))?;
    let again = run_example_257();
    ensure(serde_json::to_string(&again).unwrap() == serde_json::to_string(&r).unwrap(), || {
        "report is not deterministic".into()
    })?;
    Ok(format!("checks a-g pass, verdict \"{}\"", r.verdict))
}

fn c8_local() -> Outcome {
    let start = Instant::now();
    let mut models = Vec::new();
    for q in 2..=8 {
        for n in [1, 2] {
            models.push(LocalPlaceModel::inert(q, n).map_err(|e| e.to_string())?);
        }
        models.push(LocalPlaceModel::split(q, 2).map_err(|e| e.to_string())?);
    }
    let mut pairs = 0usize;
    let mut count = 0;
    for p in &models {
        // unit group of the quadratic algebra
        let units = if p.spec.kind == periodlab::localrules::PlaceKind::Inert {
            p.spec.q * p.spec.q - 1
        } else {
            (p.spec.q - 1) * (p.spec.q - 1)
        };
        if units > 64 {
            continue;
        }
        count += 1;
        let ks = p.k_group.enumerate_characters().map_err(|e| e.to_string())?;
        let chars = p.big_group.enumerate_characters().map_err(|e| e.to_string())?;
        for a in &chars {
            let r1 = a.pullback(&p.inclusion).unwrap();
            let a_sigma = a.pullback(&p.sigma).unwrap();
            for b in &chars {
                let r2 = b.pullback(&p.inclusion).unwrap();
                let lhs = a_sigma.mul(b);
                let brute = ks.iter().any(|nu| (r1 == *nu && r2 == *nu) || nu.pullback(&p.norm).unwrap() == lhs);
                let v = ps_sl2_distinguished(a, b, p).map_err(|e| e.to_string())?;
                ensure(v.distinguished == brute, || format!("{:?}: rule {} brute {brute}", p.spec, v.distinguished))?;
                pairs += 1;
            }
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{pairs} character pairs over {count} place models"))
}

fn legendre(x: u64, p: u64) -> i64 {
    let (mut b, mut e, mut r) = (x % p, (p - 1) / 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

fn c9_scanner() -> Outcome {
    let curves = [(-1i64, 0i64), (0, 1), (-1, 1), (2, 3), (-7, 6)];
    let mut checked = 0;
    for (a, b) in curves {
        let e = EllipticCurve::new(0, 0, 0, a, b).map_err(|e| e.to_string())?;
        for p in primes_up_to(1000).into_iter().filter(|&p| p > 2 && e.good_at(p)) {
            let ap = trace(&e, p).map_err(|e| e.to_string())?;
            let (ar, br) = (a.rem_euclid(p as i64) as u64, b.rem_euclid(p as i64) as u64);
            let sum: i64 = (0..p).map(|x| legendre((x * x % p * x + ar * x + br) % p, p)).sum();
            ensure(ap == -sum, || format!("curve ({a}, {b}) at {p}: {ap} vs {}", -sum))?;
            ensure(hasse_ok(p, ap), || format!("Hasse fails at {p}"))?;
            checked += 1;
        }
    }
    let e = EllipticCurve::new(0, 0, 0, -1, 0).map_err(|e| e.to_string())?;
    let got: Vec<u64> = scan_supersingular(&e, 500, 4).map_err(|e| e.to_string())?.iter().map(|r| r.p).collect();
    let want: Vec<u64> = primes_up_to(500).into_iter().filter(|&p| p % 4 == 3 && e.good_at(p)).collect();
    ensure(got == want, || "supersingular set differs from primes 3 mod 4".into())?;
    Ok(format!("{checked} (curve, p) pairs, {} supersingular primes below 500", got.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("class-group ground truth", c1_class_groups),
        ("form-engine self-consistency", c2_form_engine),
        ("X/Y bijection", c3_bijection),
        ("factorizability verdicts", c4_factorizability),
        ("Asai identity", c5_asai),
        ("pseudo solver", c6_pseudo),
        ("Q(sqrt -257) end to end", c7_example_257),
        ("local rule equivalence", c8_local),
        ("scanner two-route agreement", c9_scanner),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{t:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
