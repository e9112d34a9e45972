//! Decisions about the union ring `S`: membership, divisibility, gcd traces,
//! primitivity of residual ideals and principality of intersections.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{coords, ExponentVector, Frame, LatticeError};
use crate::program::{expand, step_coords, TransformProgram};
use crate::recurrence::{scan, PeriodMatrix, Probe, ScanOutcome};
use crate::verdict::{Certificate, Limits, Recurrence, Verdict, Witness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnionError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("at least one monomial is required")]
    Empty,
}

fn nonnegative(v: &[BigInt]) -> bool {
    v.iter().all(|c| !c.is_negative())
}

/// Whether the monomial `w` lies in some stage ring.
pub fn member_s(program: &TransformProgram, w: &ExponentVector, limits: Limits) -> Verdict {
    let hit = |_: usize, c: &[BigInt]| if nonnegative(c) { Probe::Hit } else { Probe::Miss };
    match scan(program, 0, w.entries().to_vec(), limits, hit, |_, _| false) {
        ScanOutcome::Hit { stage, coords } => Verdict::Yes {
            witness: Witness::Stage { stage, coords },
        },
        ScanOutcome::Escapes(r) => Verdict::No {
            certificate: Certificate::Recurrence(r),
        },
        ScanOutcome::Cutoff => Verdict::Unknown {
            cutoff: limits.cutoff,
        },
    }
}

/// `a | b` in `S`.
pub fn divides_s(program: &TransformProgram, a: &ExponentVector, b: &ExponentVector, limits: Limits) -> Verdict {
    member_s(program, &(b - a), limits)
}

/// `w ∈ ∩ uⁿS`, decided from the closed form of the period map.
pub fn power_intersection_member(
    program: &TransformProgram,
    w: &ExponentVector,
    u: &ExponentVector,
    limits: Limits,
) -> Verdict {
    let unknown = Verdict::Unknown {
        cutoff: limits.cutoff,
    };
    match PeriodMatrix::new(program).power_intersection(w, u) {
        None => unknown,
        Some(Ok(())) => Verdict::Yes {
            witness: Witness::Exact {
                reason: format!("every quotient {w} / {u}^n lies in S"),
            },
        },
        Some(Err(n)) => {
            let quotient = w - &u.scaled(&n);
            match member_s(program, &quotient, limits) {
                Verdict::No {
                    certificate: Certificate::Recurrence(recurrence),
                } => Verdict::No {
                    certificate: Certificate::Escape {
                        monomial: quotient,
                        recurrence,
                    },
                },
                _ => unknown,
            }
        }
    }
}

/// Shift making every vector nonnegative: `s_j = max(0, -v_j)` over all `v`.
pub fn normalizing_shift(vs: &[&ExponentVector]) -> ExponentVector {
    let d = vs[0].dim();
    ExponentVector::new(
        (0..d)
            .map(|j| {
                vs.iter()
                    .map(|v| -&v.entries()[j])
                    .fold(BigInt::zero(), |m, x| m.max(x))
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdEntry {
    pub stage: usize,
    /// `d_n` as an ambient exponent vector (undoing the normalizing shift).
    pub gcd: ExponentVector,
    /// Stage coordinates of `a / d_n` and `b / d_n`.
    pub residual_a: ExponentVector,
    pub residual_b: ExponentVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GcdStatus {
    /// `d_n = d_N` for every `n ≥ N`.
    Stabilized { stage: usize, certificate: Recurrence },
    /// `d_n` grows by `increment` every period.
    Diverges { certificate: Recurrence, increment: ExponentVector },
    Unknown { cutoff: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdTrace {
    pub a: ExponentVector,
    pub b: ExponentVector,
    pub shift: ExponentVector,
    pub entries: Vec<GcdEntry>,
    pub status: GcdStatus,
}

impl GcdTrace {
    pub fn stabilized_at(&self) -> Option<usize> {
        match self.status {
            GcdStatus::Stabilized { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn diverges(&self) -> bool {
        matches!(self.status, GcdStatus::Diverges { .. })
    }
}

fn check_pair(program: &TransformProgram, a: &ExponentVector, b: &ExponentVector) -> Result<(), UnionError> {
    a.check_dim(program.dimension())?;
    b.check_dim(program.dimension())?;
    Ok(())
}

type Support = (Vec<bool>, Vec<bool>);

fn support(state: &(Vec<BigInt>, Vec<BigInt>)) -> Support {
    (
        state.0.iter().map(Signed::is_positive).collect(),
        state.1.iter().map(Signed::is_positive).collect(),
    )
}

/// Follows the supports of a nonnegative residual pair from stage `start`
/// until they meet, returning the stage and a shared parameter, or `None`
/// once the supports repeat a full period later without meeting.
fn first_common_parameter(program: &TransformProgram, start: usize, mut sup: Support, cutoff: usize) -> Option<Option<(usize, usize)>> {
    let p = program.period();
    let floor = start.max(program.prefix_len());
    let mut history: Vec<Support> = Vec::new();
    for m in start..=start + cutoff {
        if let Some(j) = (0..sup.0.len()).find(|&j| sup.0[j] && sup.1[j]) {
            return Some(Some((m, j)));
        }
        if m >= floor + p && history[m - p - start] == sup {
            return Some(None);
        }
        history.push(sup.clone());
        let step = program.step(m);
        let x = step.divisor();
        for side in [&mut sup.0, &mut sup.1] {
            if step.locus().iter().any(|&j| j != x && side[j]) {
                side[x] = true;
            }
        }
    }
    None
}

/// Per-stage gcd of `a` and `b`, computed by carrying the residual pair
/// through the dual update and splitting off their common part at each stage.
pub fn gcd_trace(
    program: &TransformProgram,
    a: &ExponentVector,
    b: &ExponentVector,
    limits: Limits,
) -> Result<GcdTrace, UnionError> {
    check_pair(program, a, b)?;
    let shift = normalizing_shift(&[a, b]);
    let p = program.period();
    let confirm = limits.confirm_periods.max(1);
    let mut alpha = (a + &shift).into_entries();
    let mut beta = (b + &shift).into_entries();
    let mut gcd = -&shift;
    let mut entries = Vec::new();
    // residual states after splitting, and whether the split was nonzero
    let mut states: Vec<(Vec<BigInt>, Vec<BigInt>)> = Vec::new();
    let mut grew: Vec<bool> = Vec::new();
    let mut status = GcdStatus::Unknown {
        cutoff: limits.cutoff,
    };
    for (n, view) in program.stages().take(limits.cutoff + 1).enumerate() {
        if n > 0 {
            step_coords(&mut alpha, program.step(n - 1));
            step_coords(&mut beta, program.step(n - 1));
        }
        let e: Vec<BigInt> = alpha.iter().zip(&beta).map(|(x, y)| x.min(y).clone()).collect();
        for ((x, y), m) in alpha.iter_mut().zip(beta.iter_mut()).zip(&e) {
            *x -= m;
            *y -= m;
        }
        gcd = &gcd + &view.frame.combine(&e);
        entries.push(GcdEntry {
            stage: n,
            gcd: gcd.clone(),
            residual_a: ExponentVector::new(alpha.clone()),
            residual_b: ExponentVector::new(beta.clone()),
        });
        states.push((alpha.clone(), beta.clone()));
        grew.push(n > 0 && e.iter().any(|c| !c.is_zero()));
        if n < program.prefix_len() + confirm * p {
            continue;
        }
        let lo = n - confirm * p;
        let quiet = !grew[lo + 1..=n].iter().any(|&g| g);
        let exact = (1..=confirm).all(|i| states[n - i * p] == states[n]);
        let same_support = (1..=confirm).all(|i| support(&states[n - i * p]) == support(&states[n]));
        if !(exact || quiet && same_support) {
            continue;
        }
        let earlier = &states[n - p];
        let certificate = Recurrence {
            cycle_position: program.cycle_position(n).expect("past prefix"),
            stage: n,
            repeat_stage: n - p,
            periods: confirm,
            coordinates: (0..alpha.len()).collect(),
            state: vec![ExponentVector::new(alpha.clone()), ExponentVector::new(beta.clone())],
            increment: vec![
                ExponentVector::new(alpha.iter().zip(&earlier.0).map(|(x, y)| x - y).collect()),
                ExponentVector::new(beta.iter().zip(&earlier.1).map(|(x, y)| x - y).collect()),
            ],
        };
        // With no split during the last periods the residuals evolve by the
        // dual update alone, so repeating supports stay disjoint forever.
        status = if quiet {
            let stage = grew.iter().rposition(|&g| g).unwrap_or(0);
            GcdStatus::Stabilized { stage, certificate }
        } else if grew[n + 1 - p..=n].iter().any(|&g| g) {
            GcdStatus::Diverges {
                certificate,
                increment: &gcd - &entries[n - p].gcd,
            }
        } else {
            continue;
        };
        break;
    }
    Ok(GcdTrace {
        a: a.clone(),
        b: b.clone(),
        shift,
        entries,
        status,
    })
}

/// Whether the residual ideal `(a/d_n, b/d_n)` is primitive for some `n`,
/// decided from frames recomputed at every stage, without the gcd trace.
pub fn primitive_residual(
    program: &TransformProgram,
    a: &ExponentVector,
    b: &ExponentVector,
    limits: Limits,
) -> Result<Verdict, UnionError> {
    check_pair(program, a, b)?;
    let shift = normalizing_shift(&[a, b]);
    let (a, b) = (a + &shift, b + &shift);
    let p = program.period();
    let confirm = limits.confirm_periods.max(1);
    let mut states: Vec<(Vec<BigInt>, Vec<BigInt>)> = Vec::new();
    let mut divisor;
    for (n, view) in program.stages().take(limits.cutoff + 1).enumerate() {
        let ca = coords(&view.frame, &a)?.entries;
        let cb = coords(&view.frame, &b)?.entries;
        let common: Vec<BigInt> = ca.iter().zip(&cb).map(|(x, y)| x.min(y).clone()).collect();
        let ra: Vec<BigInt> = ca.iter().zip(&common).map(|(x, m)| x - m).collect();
        let rb: Vec<BigInt> = cb.iter().zip(&common).map(|(x, m)| x - m).collect();
        let state = (ra, rb);
        match first_common_parameter(program, n, support(&state), limits.cutoff) {
            Some(None) => {
                return Ok(Verdict::Yes {
                    witness: Witness::Periodic {
                        from_stage: n,
                        periods: 1,
                    },
                })
            }
            None => {
                return Ok(Verdict::Unknown {
                    cutoff: limits.cutoff,
                })
            }
            Some(Some(found)) => divisor = Some(found),
        }
        states.push(state);
        if n >= program.prefix_len() + confirm * p && (1..=confirm).all(|i| states[n - i * p] == states[n]) {
            let (stage, j) = divisor.expect("set on every non-primitive stage");
            return Ok(Verdict::No {
                certificate: Certificate::Divisor {
                    monomial: expand(program, stage).frame.column(j).clone(),
                    stage,
                },
            });
        }
    }
    Ok(Verdict::Unknown {
        cutoff: limits.cutoff,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Intersection {
    Principal { generator: ExponentVector, stage: usize },
    NotFinitelyGenerated { certificate: Certificate },
    Unknown { cutoff: usize },
}

/// `∩ a_i S`: principal when every pairwise gcd stabilizes, not finitely
/// generated when one of them diverges.
pub fn intersect_principal(
    program: &TransformProgram,
    monomials: &[ExponentVector],
    limits: Limits,
) -> Result<Intersection, UnionError> {
    let Some(first) = monomials.first() else {
        return Err(UnionError::Empty);
    };
    first.check_dim(program.dimension())?;
    let mut stage = 0;
    let mut unknown = false;
    for (i, a) in monomials.iter().enumerate() {
        for b in &monomials[i + 1..] {
            let trace = gcd_trace(program, a, b, limits)?;
            match trace.status {
                GcdStatus::Stabilized { stage: s, .. } => stage = stage.max(s),
                GcdStatus::Diverges { increment, .. } => {
                    return Ok(Intersection::NotFinitelyGenerated {
                        certificate: Certificate::Divergence {
                            a: a.clone(),
                            b: b.clone(),
                            increment,
                        },
                    })
                }
                GcdStatus::Unknown { .. } => unknown = true,
            }
        }
    }
    if unknown {
        return Ok(Intersection::Unknown {
            cutoff: limits.cutoff,
        });
    }
    let refs: Vec<&ExponentVector> = monomials.iter().collect();
    let shift = normalizing_shift(&refs);
    let frame = expand(program, stage).frame;
    let generator = &lcm_at(&frame, monomials, &shift)? - &shift;
    Ok(Intersection::Principal { generator, stage })
}

fn lcm_at(frame: &Frame, monomials: &[ExponentVector], shift: &ExponentVector) -> Result<ExponentVector, UnionError> {
    let mut join: Option<ExponentVector> = None;
    for a in monomials {
        let c = ExponentVector::new(coords(frame, &(a + shift))?.entries);
        join = Some(match join {
            None => c,
            Some(j) => j.join(&c),
        });
    }
    Ok(frame.combine(join.expect("nonempty").entries()))
}

/// `S` is an SBID exactly when its maximal ideal is a chain-prime.
pub fn sbid_check(program: &TransformProgram, limits: Limits) -> Verdict {
    let detection = crate::chains::detect_chains(program, limits.confirm_periods);
    let mut all_no = true;
    for q in &detection.chains {
        match crate::chains::chainprime_maximal(program, q, limits) {
            yes @ Verdict::Yes { .. } => return yes,
            Verdict::No { .. } => {}
            Verdict::Unknown { .. } => all_no = false,
        }
    }
    if all_no && detection.complete() {
        Verdict::No {
            certificate: Certificate::Exhausted {
                reason: format!("none of the {} chain-primes is maximal", detection.chains.len()),
            },
        }
    } else {
        Verdict::Unknown {
            cutoff: limits.cutoff,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::in_cone;

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::from_i64s(v)
    }

    #[test]
    fn membership_examples() {
        let p = fixtures::construction_3_4();
        let v = member_s(&p, &ev(&[-2, 1, -3]), Limits::default());
        assert_eq!(v.witness_stage(), Some(6));
        assert!(member_s(&p, &ev(&[1, 0, -1]), Limits::default()).is_no());
        assert_eq!(member_s(&p, &ev(&[0, 0, 0]), Limits::default()).witness_stage(), Some(0));
        assert_eq!(
            member_s(&p, &ev(&[-2, 1, -3]), Limits::with_cutoff(5)),
            Verdict::Unknown { cutoff: 5 }
        );
    }

    #[test]
    fn divisibility_examples() {
        let p = fixtures::construction_3_4();
        let l = Limits::default();
        assert_eq!(divides_s(&p, &ev(&[1, 0, 0]), &ev(&[0, 1, -1]), l).witness_stage(), Some(2));
        assert_eq!(divides_s(&p, &ev(&[3, 1, 0]), &ev(&[3, 1, 0]), l).witness_stage(), Some(0));
        assert!(divides_s(&p, &ev(&[0, 0, 1]), &ev(&[1, 0, 0]), l).is_no());
    }

    #[test]
    fn gcd_examples() {
        let l = Limits::default();
        let p = fixtures::construction_3_4();
        let t = gcd_trace(&p, &ev(&[1, 0, 0]), &ev(&[0, 0, 1]), l).unwrap();
        assert_eq!(t.stabilized_at(), Some(0));
        assert!(t.entries.iter().all(|e| e.gcd.is_zero()));

        let a = ev(&[2, -1, 3]);
        let t = gcd_trace(&p, &a, &a, l).unwrap();
        assert_eq!(t.stabilized_at(), Some(0));
        assert_eq!(t.entries.last().unwrap().gcd, a);

        let q = fixtures::pure_quadratic();
        let t = gcd_trace(&q, &ev(&[0, 1, 0]), &ev(&[0, 0, 1]), l).unwrap();
        match &t.status {
            GcdStatus::Diverges { increment, .. } => assert_eq!(increment, &ev(&[1, 0, 0])),
            other => panic!("{other:?}"),
        }
        for e in &t.entries {
            assert_eq!(e.gcd, ev(&[e.stage as i64, 0, 0]));
        }
    }

    #[test]
    fn gcd_is_monotone_in_s() {
        let l = Limits::default();
        for (_, p) in fixtures::all() {
            let d = p.dimension();
            let a = ExponentVector::from_i64s(&[2, 3, -1, 1][..d]);
            let b = ExponentVector::from_i64s(&[0, 1, 2, 2][..d]);
            let t = gcd_trace(&p, &a, &b, l).unwrap();
            for pair in t.entries.windows(2) {
                let frame = expand(&p, pair[1].stage).frame;
                assert!(in_cone(&frame, &(&pair[1].gcd - &pair[0].gcd)).unwrap());
            }
        }
    }

    #[test]
    fn primitive_examples() {
        let l = Limits::default();
        let p = fixtures::construction_3_4();
        assert!(primitive_residual(&p, &ev(&[1, 0, 0]), &ev(&[0, 0, 1]), l).unwrap().is_yes());
        assert!(primitive_residual(&p, &ev(&[0, 0, 0]), &ev(&[4, 1, 2]), l).unwrap().is_yes());
        let q = fixtures::pure_quadratic();
        match primitive_residual(&q, &ev(&[0, 1, 0]), &ev(&[0, 0, 1]), l).unwrap() {
            Verdict::No {
                certificate: Certificate::Divisor { monomial, .. },
            } => assert_eq!(monomial, ev(&[1, 0, 0])),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn intersection_examples() {
        let l = Limits::default();
        let p = fixtures::construction_3_4();
        let got = intersect_principal(&p, &[ev(&[1, 0, 0]), ev(&[0, 0, 1])], l).unwrap();
        assert_eq!(
            got,
            Intersection::Principal {
                generator: ev(&[1, 0, 1]),
                stage: 0
            }
        );
        let q = fixtures::pure_quadratic();
        let got = intersect_principal(&q, &[ev(&[0, 1, 0]), ev(&[0, 0, 1])], l).unwrap();
        assert!(matches!(got, Intersection::NotFinitelyGenerated { .. }));
        let a = ev(&[-1, 2, 0]);
        let got = intersect_principal(&q, std::slice::from_ref(&a), l).unwrap();
        assert_eq!(got, Intersection::Principal { generator: a, stage: 0 });
        assert_eq!(intersect_principal(&q, &[], l), Err(UnionError::Empty));
    }

    #[test]
    fn sbid_examples() {
        let l = Limits::default();
        assert!(sbid_check(&fixtures::pure_quadratic(), l).is_yes());
        assert!(sbid_check(&fixtures::construction_3_4(), l).is_no());
        assert!(sbid_check(&fixtures::example_5_6(), l).is_yes());
    }

    #[test]
    fn power_intersections() {
        let l = Limits::default();
        let p = fixtures::example_5_6();
        assert!(power_intersection_member(&p, &ev(&[0, 0, 1]), &ev(&[0, 1, 0]), l).is_yes());
        assert!(power_intersection_member(&p, &ev(&[0, 1, 0]), &ev(&[1, 0, 0]), l).is_yes());
        assert!(power_intersection_member(&p, &ev(&[1, 0, 0]), &ev(&[1, 0, 0]), l).is_no());
    }

    #[test]
    fn membership_agrees_with_closed_form() {
        let l = Limits::default();
        for (name, p) in fixtures::all() {
            let pm = PeriodMatrix::new(&p);
            let d = p.dimension();
            let r = if d == 3 { 3 } else { 2 };
            let mut w = vec![-r; d];
            loop {
                let v = ExponentVector::from_i64s(&w);
                let expected = pm.member(&v).unwrap();
                let got = member_s(&p, &v, l);
                assert!(!got.is_unknown(), "{name} {v}");
                assert_eq!(got.is_yes(), expected, "{name} {v}");
                if let Some(stage) = got.witness_stage() {
                    for later in [stage + 1, stage + 5] {
                        assert!(in_cone(&expand(&p, later).frame, &v).unwrap());
                    }
                }
                let Some(i) = w.iter().position(|&x| x < r) else { break };
                w[i] += 1;
                for x in &mut w[..i] {
                    *x = -r;
                }
            }
        }
    }
}
