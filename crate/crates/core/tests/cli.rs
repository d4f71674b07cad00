//! The dispatcher: exit codes and JSON shapes.

use std::path::PathBuf;

use periodlab::casestudy::{build_257_diagram, mu_257};
use periodlab::cli::run;
use periodlab::fieldnet::{construct_eta, Node};
use periodlab::monomial::{MonomialDatum, RepDescriptor};
use periodlab::weilmodel::WeilModel;
use serde_json::Value;
use tempfile::TempDir;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("periodlab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn call_json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn write(dir: &TempDir, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

#[test]
fn classgroup_shapes_and_codes() {
    let v = call_json(&["classgroup", "--disc", "-1028"]);
    assert_eq!(v["invariants"], serde_json::json!([16]));
    assert_eq!(v["h"], 16);
    assert_eq!(v["reduced_forms"].as_array().unwrap().len(), 16);
    let v = call_json(&["classgroup", "--disc", "257"]);
    assert_eq!(v["invariants"], serde_json::json!([3]));
    assert_eq!(call(&["classgroup", "--disc", "-7.5"]).0, 2);
    assert_eq!(call(&["classgroup", "--disc", "-8"]).0, 0);
    assert_eq!(call(&["classgroup", "--disc", "-9"]).0, 2);
    assert_eq!(call(&["nonsense"]).0, 2);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn reports() {
    let v = call_json(&["example-257", "--json"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["verdict"], "abstractly distinguished, not globally distinguished");
    let (code, text, _) = call(&["example-257", "--text"]);
    assert_eq!(code, 0);
    assert!(text.contains("verdict: abstractly distinguished"));
    let v = call_json(&["section5", "--order", "8"]);
    assert_eq!(v["passed"], true);
    assert_eq!(call(&["section5", "--order", "16"]).0, 2);
}

#[test]
fn diagram_commands() {
    let dir = TempDir::new().unwrap();
    let d = build_257_diagram().unwrap();
    let dp = write(&dir, "d257.json", &d);
    let om = write(&dir, "om.json", &d.omega_ME);
    let v = call_json(&["galois-type", "--diagram", dp.to_str().unwrap(), "--omega", om.to_str().unwrap()]);
    assert_eq!(v["galois_type"], "Biquadratic");

    // mu for the 257 datum is not distinguished: factorizability's hypothesis fails
    let datum = MonomialDatum::new(d.clone(), mu_257().unwrap()).unwrap();
    let rp = write(&dir, "r257.json", &RepDescriptor::Monomial(datum));
    assert_eq!(call(&["factorizable", "--input", rp.to_str().unwrap()]).0, 2);

    let w = WeilModel::octic().unwrap();
    let eta = construct_eta(&w.diagram, 8).unwrap();
    let datum = MonomialDatum::from_origin(w.diagram.clone(), eta).unwrap();
    let rp = write(&dir, "r8.json", &RepDescriptor::Monomial(datum));
    let v = call_json(&["factorizable", "--input", rp.to_str().unwrap()]);
    assert_eq!(v["verdict"], "Factorizable");
    assert_eq!(v["d"], v["X"].as_array().unwrap().len());
    let kinds: Vec<&str> = v["sources"].as_array().unwrap().iter().map(|s| s["galois_type"].as_str().unwrap()).collect();
    assert_eq!(kinds.iter().filter(|k| **k != "NonGalois").count(), 1);

    let nm = write(&dir, "nm.json", &RepDescriptor::non_monomial("sym2", Some(true)));
    let v = call_json(&["factorizable", "--input", nm.to_str().unwrap()]);
    assert_eq!(v["verdict"], "Factorizable");
    assert_eq!(v["d"], 1);

    let wp = write(&dir, "w.json", &w.diagram);
    let conj = w.diagram.conj(Node::E).unwrap();
    let chi = w
        .diagram
        .nodes
        .E
        .enumerate_characters()
        .unwrap()
        .into_iter()
        .find(|c| c.div(&c.pullback(&conj).unwrap()) == w.diagram.omega_ME)
        .unwrap();
    let cp = write(&dir, "chi.json", &chi);
    let v = call_json(&["pseudo", "--diagram", wp.to_str().unwrap(), "--chi", cp.to_str().unwrap()]);
    assert_eq!(v["orbit"].as_array().unwrap().len(), 2);
    assert!(v["mu_tilde"]["components"].is_array());
    assert!(v["extensions_count"].is_u64());
    let one = write(&dir, "one.json", &w.diagram.nodes.E.trivial_character());
    assert_eq!(call(&["pseudo", "--diagram", wp.to_str().unwrap(), "--chi", one.to_str().unwrap()]).0, 2);

    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(call(&["pseudo", "--diagram", bad.to_str().unwrap(), "--chi", cp.to_str().unwrap()]).0, 2);

    // a broken tau is an invariant violation
    let mut broken = w.diagram.clone();
    broken.tau = periodlab::abgroup::GroupHom::identity(&broken.nodes.M);
    let bp = write(&dir, "broken.json", &broken);
    assert_eq!(call(&["pseudo", "--diagram", bp.to_str().unwrap(), "--chi", cp.to_str().unwrap()]).0, 1);
}

#[test]
fn local_command() {
    let dir = TempDir::new().unwrap();
    let place = dir.path().join("p.json");
    std::fs::write(&place, r#"{"kind":"inert","q":5,"valuation_order":4}"#).unwrap();
    let c1 = dir.path().join("c1.json");
    let c2 = dir.path().join("c2.json");
    std::fs::write(&c1, r#"{"unramified":["1/4"],"ramified":["0"]}"#).unwrap();
    std::fs::write(&c2, r#"{"unramified":["1/2"],"ramified":["0"]}"#).unwrap();
    let args = |a: &PathBuf, b: &PathBuf| {
        vec![
            "local".to_string(),
            "--place".into(),
            place.to_str().unwrap().into(),
            "--chi1".into(),
            a.to_str().unwrap().into(),
            "--chi2".into(),
            b.to_str().unwrap().into(),
        ]
    };
    let a = args(&c1, &c2);
    let v = call_json(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(v["distinguished"], true);
    assert_eq!(v["reason"], "ratio-sigma-invariant");
    std::fs::write(&c2, r#"{"unramified":["1/3"],"ramified":["0"]}"#).unwrap();
    let a = args(&c1, &c2);
    assert_eq!(call(&a.iter().map(String::as_str).collect::<Vec<_>>()).0, 2);
}

#[test]
fn ssprimes_command() {
    let (code, out, _) = call(&["ssprimes", "--curve", "0,0,0,-1,0", "--bound", "30", "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(out, "p,ap,supersingular\n3,0,true\n7,0,true\n11,0,true\n19,0,true\n23,0,true\n");
    let v = call_json(&["ssprimes", "--curve", "0,0,0,-1,0", "--bound", "100", "--jobs", "4"]);
    assert_eq!(v["records"].as_array().unwrap().len(), 13);
    assert_eq!(call(&["ssprimes", "--curve", "0,0,0,0,0"]).0, 2);
    assert_eq!(call(&["ssprimes", "--curve", "1,2"]).0, 2);
}

#[test]
fn selftest_passes() {
    let (code, out, _) = call(&["selftest"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
}
