//! Command-line dispatcher. Results go to `out`, diagnostics to `err`.
//!
//! Exit codes: 0 a verdict was produced, 1 an invariant was violated,
//! 2 usage or malformed input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::abgroup::{AbError, Character};
use crate::casestudy::{run_example_257, run_section5_case, CaseError, CaseReport};
use crate::fieldnet::{classify_quadratic_extension, validate_diagram, FieldDiagram, FieldError, Node, ValidationOptions};
use crate::localrules::{ps_sl2_distinguished, LocalError, LocalPlaceModel, PlaceSpec, RawCharacter};
use crate::monomial::{distinguishing_set, factorizability, Factorizability, MonoError, MonomialDatum, RepDescriptor};
use crate::pseudo::{enumerate_pseudo_reps, PseudoError};
use crate::quadclass::{class_group, is_fundamental, real_class_group, reduced_forms, QuadError};
use crate::ssprimes::{primes_up_to, scan_supersingular, scan_traces, trace, EllipticCurve, SsError, SCAN_NOTE};
use crate::weilmodel::WeilModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "periodlab", version, about = "Exact verdicts for SL(2) period integrals over finite models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Class group of a quadratic discriminant
    Classgroup {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        /// Narrow class group (positive discriminants)
        #[arg(long)]
        narrow: bool,
    },
    /// Galois type over F of the quadratic extension of E cut out by omega
    GaloisType {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        omega: PathBuf,
    },
    /// Factorizability verdict for a representation descriptor
    Factorizable {
        #[arg(long)]
        input: PathBuf,
    },
    /// Solve for mu~ and enumerate pseudo-distinguished parameters
    Pseudo {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        chi: PathBuf,
    },
    /// Local SL(2) distinction of Ps(chi1, chi2)
    Local {
        #[arg(long)]
        place: PathBuf,
        #[arg(long)]
        chi1: PathBuf,
        #[arg(long)]
        chi2: PathBuf,
    },
    /// The Q(sqrt -257) counterexample
    #[command(name = "example-257")]
    Example257(ReportFormat),
    /// The order-8 construction on the order-32 model
    Section5 {
        #[arg(long, default_value_t = 8)]
        order: i64,
        #[command(flatten)]
        format: ReportFormat,
    },
    /// Primes with a_p = 0 for an elliptic curve
    Ssprimes {
        /// a1,a2,a3,a4,a6
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', num_args = 1)]
        curve: Vec<i64>,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Run every brute-force oracle suite
    Selftest,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ReportFormat {
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    #[arg(long)]
    pub text: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Violation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        usage(e)
    }
}

impl From<AbError> for CliError {
    fn from(e: AbError) -> Self {
        usage(e)
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::InvalidDiagram(_) => CliError::Violation(e.to_string()),
            _ => usage(e),
        }
    }
}

impl From<MonoError> for CliError {
    fn from(e: MonoError) -> Self {
        match e {
            MonoError::InvariantViolation(_) | MonoError::InvalidSourceCount(_) => CliError::Violation(e.to_string()),
            MonoError::Field(f) => f.into(),
            _ => usage(e),
        }
    }
}

impl From<PseudoError> for CliError {
    fn from(e: PseudoError) -> Self {
        match e {
            PseudoError::NoSolution(_) | PseudoError::InvariantViolation(_) => CliError::Violation(e.to_string()),
            PseudoError::Mono(m) => m.into(),
            PseudoError::Field(f) => f.into(),
            _ => usage(e),
        }
    }
}

impl From<LocalError> for CliError {
    fn from(e: LocalError) -> Self {
        usage(e)
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        match e {
            CaseError::ClassGroupMismatch { .. } | CaseError::Build(_) => CliError::Violation(e.to_string()),
            _ => usage(e),
        }
    }
}

impl From<SsError> for CliError {
    fn from(e: SsError) -> Self {
        usage(e)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let s = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_diagram(path: &Path) -> CliResult<FieldDiagram> {
    let d: FieldDiagram = read_json(path)?;
    d.check_shapes()?;
    let report = validate_diagram(&d, ValidationOptions::default());
    if !report.ok() {
        let names: Vec<String> = report.failures.iter().map(|f| format!("{} ({})", f.check, f.identity)).collect();
        return Err(CliError::Violation(format!("diagram fails: {}", names.join(", "))));
    }
    Ok(d)
}

/// Character files hold either canonical components or raw local values.
#[derive(Deserialize)]
#[serde(untagged)]
enum CharacterFile {
    Raw(RawCharacter),
    Canonical(Character),
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(
                err,
                "{}: {}",
                if e.code() == EXIT_USAGE { "error" } else { "invariant violated" },
                match &e {
                    CliError::Usage(m) | CliError::Violation(m) => m,
                }
            );
            e.code()
        }
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json")).map_err(usage)
}

fn emit_report(out: &mut dyn Write, r: &CaseReport, f: ReportFormat) -> CliResult<i32> {
    if f.text {
        write!(out, "{}", r.to_text()).map_err(usage)?;
    } else {
        emit(out, &serde_json::to_value(r).expect("json"))?;
    }
    Ok(if r.passed { EXIT_OK } else { EXIT_VIOLATION })
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Classgroup { disc, narrow } => {
            let g = if disc < 0 { class_group(disc)? } else { real_class_group(disc, narrow)? };
            let forms: Vec<[i64; 3]> = g.representatives.iter().map(|f| [f.a, f.b, f.c]).collect();
            emit(
                out,
                &json!({
                    "disc": disc,
                    "narrow": narrow,
                    "h": g.h(),
                    "invariants": g.group.invariants(),
                    "reduced_forms": forms,
                }),
            )?;
        }
        Command::GaloisType { diagram, omega } => {
            let d = read_diagram(&diagram)?;
            let om: Character = read_json(&omega)?;
            let t = classify_quadratic_extension(&om, &d)?;
            emit(out, &json!({ "galois_type": t.kind.to_string(), "restriction": t.restriction }))?;
        }
        Command::Factorizable { input } => {
            let r: RepDescriptor = read_json(&input)?;
            let dist = match &r {
                RepDescriptor::Monomial(d) => {
                    d.check()?;
                    distinguishing_set(&r)?.distinguished()
                }
                RepDescriptor::NonMonomial { distinguished, .. } => distinguished.unwrap_or(true),
            };
            let rep = factorizability(&r, dist)?;
            let (verdict, d) = match rep.verdict {
                Factorizability::Factorizable => ("Factorizable", rep.distinction.x.len()),
                Factorizability::NotFactorizable(k) => ("NotFactorizable", k),
            };
            let sources: Vec<Value> = rep
                .sources
                .iter()
                .map(|s| json!({ "galois_type": s.galois_type.to_string(), "omega": s.omega, "restriction": s.restriction }))
                .collect();
            emit(
                out,
                &json!({
                    "verdict": verdict,
                    "d": d,
                    "d_asserted": rep.d_asserted,
                    "X": rep.distinction.x,
                    "Y": rep.distinction.y,
                    "sources": sources,
                }),
            )?;
        }
        Command::Pseudo { diagram, chi } => {
            let d = read_diagram(&diagram)?;
            let c: Character = read_json(&chi)?;
            let reps = enumerate_pseudo_reps(&d, &c)?;
            let s = &reps.solution;
            emit(
                out,
                &json!({
                    "mu_tilde": s.mu_tilde,
                    "orbit": [&s.mu_tilde, &s.partner],
                    "extensions_count": s.extensions.len(),
                    "extensions": reps.extensions,
                    "irreducible": reps.data.len(),
                }),
            )?;
        }
        Command::Local { place, chi1, chi2 } => {
            let spec: PlaceSpec = read_json(&place)?;
            let p = LocalPlaceModel::new(spec)?;
            let load = |path: &Path| -> CliResult<Character> {
                match read_json::<CharacterFile>(path)? {
                    CharacterFile::Raw(r) => Ok(p.character(&r)?),
                    CharacterFile::Canonical(c) => Ok(c),
                }
            };
            let v = ps_sl2_distinguished(&load(&chi1)?, &load(&chi2)?, &p)?;
            emit(out, &json!({ "distinguished": v.distinguished, "reason": v.reason, "assumed": v.assumed }))?;
        }
        Command::Example257(f) => return emit_report(out, &run_example_257(), f),
        Command::Section5 { order, format } => return emit_report(out, &run_section5_case(order)?, format),
        Command::Ssprimes { curve, bound, jobs, format } => {
            if curve.len() != 5 {
                return Err(usage("--curve takes five coefficients a1,a2,a3,a4,a6"));
            }
            if bound < 2 {
                return Err(usage("--bound must be at least 2"));
            }
            let e = EllipticCurve::from_slice(&curve)?;
            let recs = scan_supersingular(&e, bound, jobs)?;
            match format {
                TableFormat::Csv => {
                    let mut s = String::from("p,ap,supersingular\n");
                    for r in &recs {
                        s += &format!("{},{},{}\n", r.p, r.ap, r.supersingular);
                    }
                    write!(out, "{s}").map_err(usage)?;
                }
                TableFormat::Json => emit(
                    out,
                    &json!({ "curve": e, "bound": bound, "records": recs, "note": SCAN_NOTE }),
                )?,
            }
        }
        Command::Selftest => {
            let results = selftest();
            let mut ok = true;
            for (name, pass, detail) in &results {
                ok &= *pass;
                writeln!(out, "{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" }).map_err(usage)?;
            }
            return Ok(if ok { EXIT_OK } else { EXIT_VIOLATION });
        }
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Self-test suites

type Outcome = (String, bool, String);

fn suite(name: &str, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    match f() {
        Ok(detail) => (name.into(), true, detail),
        Err(detail) => (name.into(), false, detail),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every oracle suite at reduced size.
pub fn selftest() -> Vec<Outcome> {
    vec![
        suite("classgroup", || {
            let mut n = 0;
            for d in (-600..0).filter(|&d| is_fundamental(d)) {
                let g = class_group(d).map_err(|e| e.to_string())?;
                let forms = reduced_forms(d).len() as u128;
                ensure(g.group.order() == forms, || format!("D = {d}: |G| = {} but {forms} forms", g.group.order()))?;
                n += 1;
            }
            let a = class_group(-1028).map_err(|e| e.to_string())?;
            let b = real_class_group(257, false).map_err(|e| e.to_string())?;
            ensure(a.group.invariants() == [16] && b.group.invariants() == [3], || "257 class groups".into())?;
            Ok(format!("{n} discriminants"))
        }),
        suite("weil-models", || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut n = 0;
            for _ in 0..12 {
                let w = WeilModel::random(&mut rng, 64);
                ensure(validate_diagram(&w.diagram, ValidationOptions::default()).ok(), || "diagram".into())?;
                for mu in w.diagram.nodes.M.enumerate_characters().map_err(|e| e.to_string())? {
                    let Ok(d) = MonomialDatum::new(w.diagram.clone(), mu.clone()) else { continue };
                    let r = RepDescriptor::Monomial(d);
                    let mut x = distinguishing_set(&r).map_err(|e| e.to_string())?.x;
                    let mut o = w.distinguishing_oracle(&mu).map_err(|e| e.to_string())?;
                    x.sort();
                    o.sort();
                    ensure(x == o, || format!("X differs for mu = {mu}"))?;
                    n += 1;
                }
            }
            Ok(format!("{n} data"))
        }),
        suite("local", || {
            let mut n = 0;
            for p in [LocalPlaceModel::inert(3, 2), LocalPlaceModel::inert(5, 1), LocalPlaceModel::split(3, 2)] {
                let p = p.map_err(|e| e.to_string())?;
                let chars = p.big_group.enumerate_characters().map_err(|e| e.to_string())?;
                for a in &chars {
                    for b in &chars {
                        let rule = ps_sl2_distinguished(a, b, &p).map_err(|e| e.to_string())?.distinguished;
                        let brute = !crate::localrules::nu_distinctions_brute(a, b, &p).map_err(|e| e.to_string())?.is_empty();
                        ensure(rule == brute, || format!("Ps({a}, {b})"))?;
                        n += 1;
                    }
                }
            }
            Ok(format!("{n} pairs"))
        }),
        suite("pseudo", || {
            let w = WeilModel::octic().map_err(|e| e.to_string())?;
            let d = &w.diagram;
            let conj = d.conj(Node::E).map_err(|e| e.to_string())?;
            let mut n = 0;
            for chi in d.nodes.E.enumerate_characters().map_err(|e| e.to_string())? {
                if chi.div(&chi.pullback(&conj).map_err(|e| e.to_string())?) != d.omega_ME {
                    continue;
                }
                let r = enumerate_pseudo_reps(d, &chi).map_err(|e| e.to_string())?;
                ensure(r.solution.mu_tilde != r.solution.partner, || "orbit size".into())?;
                n += 1;
            }
            Ok(format!("{n} characters"))
        }),
        suite("ssprimes", || {
            let e = EllipticCurve::new(0, 0, 0, -1, 0).map_err(|e| e.to_string())?;
            let recs = scan_traces(&e, 300, 2).map_err(|e| e.to_string())?;
            for r in &recs {
                let brute = -(0..r.p as i64).map(|x| legendre((x * x * x - x).rem_euclid(r.p as i64), r.p as i64)).sum::<i64>();
                ensure(brute == r.ap, || format!("p = {}", r.p))?;
            }
            let ss: Vec<u64> = recs.iter().filter(|r| r.supersingular).map(|r| r.p).collect();
            let cm: Vec<u64> = primes_up_to(300).into_iter().filter(|p| p % 4 == 3).collect();
            ensure(ss == cm, || "supersingular set".into())?;
            ensure(trace(&e, 5) == Ok(-2), || "a_5".into())?;
            Ok(format!("{} primes", recs.len()))
        }),
        suite("example-257", || {
            let r = run_example_257();
            ensure(r.passed, || r.to_text())?;
            Ok(r.verdict)
        }),
        suite("section5", || {
            let r = run_section5_case(8).map_err(|e| e.to_string())?;
            ensure(r.passed, || r.to_text())?;
            Ok(r.verdict)
        }),
    ]
}

fn legendre(a: i64, p: i64) -> i64 {
    if a % p == 0 {
        return 0;
    }
    let (mut r, mut b, mut e) = (1i64, a % p, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}
