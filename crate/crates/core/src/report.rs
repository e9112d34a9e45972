//! Machine-readable reports and the built-in fixture batteries.

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::chains::{
    chainprime_maximal, chainprime_member, detect_chains, finitely_many_chains, ideal_member, quadratic_test,
    verify_prime_chain, PrimeIdeal,
};
use crate::classify::{box_vectors, boundary_ord_check, gcd_classify, noetherian_probe, valuation_check_at, ClassifyParams, Localization};
use crate::fixtures;
use crate::lattice::ExponentVector;
use crate::program::{classify_m_i, in_inverted_hull, TransformProgram};
use crate::union::{gcd_trace, intersect_principal, member_s, sbid_check, GcdStatus, Intersection};
use crate::verdict::{Verdict, Witness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub parameters: Value,
    pub verdicts: Value,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(command: impl Into<String>, parameters: impl Serialize, verdicts: impl Serialize, timing_ms: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            parameters: serde_json::to_value(parameters).expect("serializable"),
            verdicts: serde_json::to_value(verdicts).expect("serializable"),
            timing_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureReport {
    pub fixture: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl FixtureReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown fixture {name:?}; expected one of {}", fixtures::NAMES.join(", "), name = .0)]
pub struct UnknownFixture(pub String);

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

fn ev(v: &[i64]) -> ExponentVector {
    ExponentVector::from_i64s(v)
}

fn status(v: &Verdict) -> String {
    v.status().to_string()
}

/// Runs the assertion battery of a built-in fixture.
pub fn run_fixture(name: &str, params: &ClassifyParams) -> Result<FixtureReport, UnknownFixture> {
    let program = fixtures::by_name(name).ok_or_else(|| UnknownFixture(name.to_string()))?;
    let checks = match name {
        "construction-3-4" => construction_checks(&program, params),
        "example-5-6" => example_checks(&program, params),
        "pure-quadratic" => pure_quadratic_checks(&program, params),
        _ => d4_checks(&program, params),
    };
    Ok(FixtureReport {
        fixture: name.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// `member_S(y / (x^i z^j))` with its witness stage, for `0 ≤ i, j ≤ 10`.
pub fn construction_membership(program: &TransformProgram, params: &ClassifyParams) -> Check {
    let mut bad = Vec::new();
    for i in 0..=10i64 {
        for j in 0..=10i64 {
            let v = member_s(program, &ev(&[-i, 1, -j]), params.limits);
            let ok = v.witness_stage().is_some_and(|s| s as i64 <= 2 * i.max(j));
            if !ok {
                bad.push(format!("({i},{j}): {}", status(&v)));
            }
        }
    }
    check("member_S(y/(x^i z^j)) within stage 2·max(i,j)", bad.is_empty(), bad.join("; "))
}

/// `member_S(w) ⟺ w ∈ T ∧ w ∈ S_{xS} ∧ w ∈ S_{zS}` over `|exp| ≤ radius`.
pub fn hull_identity(program: &TransformProgram, params: &ClassifyParams, radius: i64) -> Check {
    let det = detect_chains(program, params.periods);
    let locs: Vec<Localization> = det
        .chains
        .iter()
        .map(|q| Localization::new(program, PrimeIdeal::Chain(q.clone()), params.search_degree, params.limits))
        .collect();
    let mut bad = Vec::new();
    let mut unknown = 0;
    let vectors = box_vectors(program.dimension(), radius);
    for w in &vectors {
        let m = member_s(program, w, params.limits);
        let local: Vec<Verdict> = locs.iter().map(|l| l.member(w)).collect();
        if m.is_unknown() || local.iter().any(Verdict::is_unknown) {
            unknown += 1;
            continue;
        }
        let rhs = in_inverted_hull(program, w) && local.iter().all(Verdict::is_yes);
        if m.is_yes() != rhs {
            bad.push(w.to_string());
        }
    }
    check(
        "S = T ∩ S_{xS} ∩ S_{zS} on the box",
        locs.len() == 2 && bad.is_empty() && unknown == 0,
        format!("{} vectors, {} mismatches, {unknown} unknown {}", vectors.len(), bad.len(), bad.join(" ")),
    )
}

fn construction_checks(p: &TransformProgram, params: &ClassifyParams) -> Vec<Check> {
    let l = params.limits;
    let (x, y, z) = (ev(&[1, 0, 0]), ev(&[0, 1, 0]), ev(&[0, 0, 1]));
    let xz = ev(&[1, 0, -1]);
    let mut out = vec![check("validate", p.validate().is_empty(), "")];
    out.push(construction_membership(p, params));
    let m = member_s(p, &xz, l);
    let b = boundary_ord_check(p, &xz, l);
    out.push(check("x/z ∉ S, boundary order ≥ 0", m.is_no() && b.is_yes(), format!("member {}, ord {}", status(&m), status(&b))));
    let i = intersect_principal(p, &[x.clone(), z.clone()], l).expect("dimensions match");
    let t = gcd_trace(p, &x, &z, l).expect("dimensions match");
    out.push(check(
        "xS ∩ zS = xzS, gcd(x,z) stabilized at 0",
        matches!(&i, Intersection::Principal { generator, .. } if *generator == ev(&[1, 0, 1])) && t.stabilized_at() == Some(0),
        format!("{i:?}"),
    ));
    let det = detect_chains(p, params.periods);
    let nonmax = det.chains.iter().all(|q| chainprime_maximal(p, q, l).is_no());
    out.push(check("two chain-primes, neither maximal", det.count() == 2 && nonmax, format!("{} chains", det.count())));
    let probe = noetherian_probe(p, 0, l);
    let g_ok = matches!(&probe.verdict, Verdict::Yes { witness: Witness::Generators { monomials, .. } } if *monomials == vec![x.clone(), z.clone()]);
    out.push(check(
        "m_S = (x, z)S, 2 ≤ d - 1",
        g_ok && probe.within_bound == Some(true),
        format!("{:?}", probe.generators),
    ));
    let report = gcd_classify(p, "construction-3-4", params);
    out.push(check(
        "GCD domain by the chain theorem",
        report.gcd.is_yes() && report.chains.iter().all(|c| c.valuation.is_yes()) && report.cross_validation_failures == 0,
        format!("gcd {}, provenance {:?}", status(&report.gcd), report.provenance),
    ));
    out.push(hull_identity(p, params, 5));
    let even = det.chain_at(0).cloned().map(PrimeIdeal::Chain);
    let chain_ok = even.is_some_and(|q| {
        let chain = [(PrimeIdeal::PowerIntersection(x.clone()), y.clone()), (q, x.clone())];
        matches!(
            verify_prime_chain(p, &chain, l),
            Ok(Verdict::Yes { witness: Witness::PrimeChain { height_bound: 2 } })
        )
    });
    out.push(check("∩x^nS ⊊ xS gives ht(xS) ≥ 2", chain_ok, ""));
    out
}

fn example_checks(p: &TransformProgram, params: &ClassifyParams) -> Vec<Check> {
    let l = params.limits;
    let (x, y, z) = (ev(&[1, 0, 0]), ev(&[0, 1, 0]), ev(&[0, 0, 1]));
    let mut out = Vec::new();
    let probe = noetherian_probe(p, 0, l);
    let g_ok = matches!(&probe.verdict, Verdict::Yes { witness: Witness::Generators { monomials, .. } } if *monomials == vec![x.clone()]);
    out.push(check("m_S = xS", g_ok, format!("{:?}", probe.generators)));
    let fm = finitely_many_chains(p, params.periods);
    out.push(check("exactly two chain-primes", fm.verdict.is_yes() && fm.count == 2, format!("{}", fm.count)));
    let det = detect_chains(p, params.periods);
    let odd = det.chain_at(1).cloned();
    let y_in_p = odd.as_ref().is_some_and(|q| chainprime_member(p, q, &y, l).is_yes());
    let q_ideal = PrimeIdeal::PowerIntersection(y.clone());
    let z_in_q = ideal_member(p, &q_ideal, &z, l).is_yes();
    out.push(check("y ∈ P and z ∈ ∩y^nS", y_in_p && z_in_q, ""));
    let quad = odd.as_ref().map(|q| quadratic_test(p, &PrimeIdeal::Chain(q.clone()), l).verdict);
    out.push(check("infinitely many loci inside P", quad.as_ref().is_some_and(Verdict::is_no), ""));
    let val = valuation_check_at(p, &PrimeIdeal::Maximal, params.window, params.search_degree, l);
    out.push(check("S is a valuation ring on the window", val.is_yes(), status(&val)));
    let chain = [
        (q_ideal, z.clone()),
        (PrimeIdeal::PowerIntersection(x.clone()), y.clone()),
        (PrimeIdeal::Maximal, x.clone()),
    ];
    let bound = match verify_prime_chain(p, &chain, l) {
        Ok(Verdict::Yes { witness: Witness::PrimeChain { height_bound } }) => Some(height_bound),
        _ => None,
    };
    let i = p.dimension() - classify_m_i(p);
    out.push(check(
        "dim S ≥ 3 meets dim V ≤ i + 2",
        classify_m_i(p) == 2 && bound == Some(3) && bound == Some(i + 2),
        format!("height bound {bound:?}, i = {i}"),
    ));
    out
}

fn pure_quadratic_checks(p: &TransformProgram, params: &ClassifyParams) -> Vec<Check> {
    let l = params.limits;
    let (y, z) = (ev(&[0, 1, 0]), ev(&[0, 0, 1]));
    let mut out = Vec::new();
    let s = sbid_check(p, l);
    out.push(check("S is an SBID", s.is_yes(), status(&s)));
    let t = gcd_trace(p, &y, &z, l).expect("dimensions match");
    let diverges_by_x = matches!(&t.status, GcdStatus::Diverges { increment, .. } if *increment == ev(&[1, 0, 0]));
    out.push(check("gcd(y, z) grows by x each period", diverges_by_x, ""));
    let i = intersect_principal(p, &[y.clone(), z.clone()], l).expect("dimensions match");
    out.push(check(
        "yS ∩ zS is not finitely generated",
        matches!(i, Intersection::NotFinitelyGenerated { .. }),
        "",
    ));
    let report = gcd_classify(p, "pure-quadratic", params);
    out.push(check("not a GCD domain", report.gcd.is_no(), status(&report.gcd)));
    let probe = noetherian_probe(p, 0, l);
    out.push(check(
        "m_S is not finitely generated",
        probe.verdict.is_no(),
        format!("{} with {:?} generators", status(&probe.verdict), probe.generators),
    ));
    out
}

fn d4_checks(p: &TransformProgram, params: &ClassifyParams) -> Vec<Check> {
    let fm = finitely_many_chains(p, params.periods);
    vec![check("three chain-primes", fm.verdict.is_yes() && fm.count == 3, format!("{}", fm.count))]
}
