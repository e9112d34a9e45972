//! Chains of locus ideals and the chain-prime ideals they generate.

use serde::Serialize;
use thiserror::Error;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::lattice::ExponentVector;
use crate::program::{frames_through, TransformProgram, TransformStep};
use crate::recurrence::{coords_at, scan, Probe, ScanOutcome};
use crate::union::{divides_s, member_s, power_intersection_member};
use crate::verdict::{Certificate, Limits, Verdict, Witness};

/// `w ∈ p_n R_n` for a parameter-generated locus: `w ∈ R_n` and one of the
/// locus coordinates is positive.
fn in_locus(c: &[BigInt], step: &TransformStep) -> bool {
    c.iter().all(|x| !x.is_negative()) && step.locus().iter().any(|&j| c[j].is_positive())
}

/// The union of the locus ideals at a set of cycle positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainPrime {
    pub label: String,
    /// Cycle positions feeding the chain; empty for the zero ideal.
    pub positions: Vec<usize>,
    /// Chain stages recorded during detection, ascending.
    pub stages: Vec<usize>,
    /// `x_n` for each recorded stage.
    pub divisor_monomials: Vec<ExponentVector>,
    /// Generators of `p_n` for each recorded stage.
    pub locus_generators: Vec<Vec<ExponentVector>>,
}

impl ChainPrime {
    pub fn zero() -> Self {
        Self {
            label: "0".to_string(),
            positions: Vec::new(),
            stages: Vec::new(),
            divisor_monomials: Vec::new(),
            locus_generators: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.positions.is_empty()
    }

    fn record(program: &TransformProgram, positions: Vec<usize>, periods: usize) -> Self {
        let horizon = program.horizon(periods + 1);
        let frames = frames_through(program, horizon);
        let mut stages: Vec<usize> = positions
            .iter()
            .flat_map(|&pos| (0..=periods).map(move |k| program.stage_at(pos, k)))
            .collect();
        stages.sort_unstable();
        let divisor_monomials = stages
            .iter()
            .map(|&n| frames[n].column(program.step(n).divisor()).clone())
            .collect();
        let locus_generators = stages
            .iter()
            .map(|&n| program.step(n).locus().iter().map(|&j| frames[n].column(j).clone()).collect())
            .collect();
        let label = format!(
            "Q[{}]",
            positions.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        );
        Self {
            label,
            positions,
            stages,
            divisor_monomials,
            locus_generators,
        }
    }

    fn is_chain_stage(&self, program: &TransformProgram, n: usize) -> bool {
        program.cycle_position(n).is_some_and(|pos| self.positions.contains(&pos))
    }
}

/// `w ∈ Q`: some chain stage has `w ∈ p_n R_n`. Since the loci ascend, a
/// membership `w ∈ x_{n_i} S` shows up at every sufficiently late chain stage.
pub fn chainprime_member(program: &TransformProgram, q: &ChainPrime, w: &ExponentVector, limits: Limits) -> Verdict {
    if q.is_zero() {
        return Verdict::No {
            certificate: Certificate::Exhausted {
                reason: "the zero ideal contains no monomial".to_string(),
            },
        };
    }
    let hit = |n: usize, c: &[BigInt]| {
        if q.is_chain_stage(program, n) && in_locus(c, program.step(n)) {
            Probe::Hit
        } else {
            Probe::Miss
        }
    };
    let outcome = scan(program, 0, w.entries().to_vec(), limits, hit, |_, _| false);
    match outcome {
        ScanOutcome::Hit { stage, .. } => Verdict::Yes {
            witness: Witness::Monomial {
                monomial: crate::program::expand(program, stage).divisor_monomial,
                stage,
            },
        },
        ScanOutcome::Escapes(r) => Verdict::No {
            certificate: Certificate::Recurrence(r),
        },
        ScanOutcome::Cutoff => Verdict::Unknown {
            cutoff: limits.cutoff,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionReport {
    pub position: usize,
    /// `p_{n_k} ⊆ p_{n_{k+1}}` held for every checked period.
    pub ascending: bool,
    /// Index into the chain list for ascending positions.
    pub chain: Option<usize>,
    /// For non-ascending positions: a chain containing all checked loci.
    pub absorbed_by: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainDetection {
    pub periods: usize,
    pub chains: Vec<ChainPrime>,
    pub positions: Vec<PositionReport>,
}

impl ChainDetection {
    /// Every cycle position either ascends or is absorbed by a chain.
    pub fn complete(&self) -> bool {
        self.positions.iter().all(|p| p.ascending || p.absorbed_by.is_some())
    }

    pub fn count(&self) -> usize {
        self.chains.len()
    }

    /// The chain fed by cycle position `pos`, if any.
    pub fn chain_at(&self, pos: usize) -> Option<&ChainPrime> {
        self.positions[pos].chain.map(|c| &self.chains[c])
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

/// Chains of locus ideals, one candidate per cycle position, checked over
/// `periods` periods and merged when two positions have the same union.
pub fn detect_chains(program: &TransformProgram, periods: usize) -> ChainDetection {
    let periods = periods.max(1);
    let limits = Limits::default();
    let p = program.period();
    let frames = frames_through(program, program.horizon(periods + 1));
    let ascending: Vec<bool> = (0..p)
        .map(|pos| {
            (0..periods).all(|k| {
                let (now, next) = (program.stage_at(pos, k), program.stage_at(pos, k + 1));
                program.step(now).locus().iter().all(|&j| {
                    let c = coords_at(program, next, frames[now].column(j).entries());
                    in_locus(&c, program.step(next))
                })
            })
        })
        .collect();
    let singles: Vec<Option<ChainPrime>> = (0..p)
        .map(|pos| ascending[pos].then(|| ChainPrime::record(program, vec![pos], periods)))
        .collect();
    let contains = |outer: &ChainPrime, inner: &ChainPrime| {
        inner
            .divisor_monomials
            .iter()
            .all(|x| chainprime_member(program, outer, x, limits).is_yes())
    };
    let mut parent: Vec<usize> = (0..p).collect();
    for a in 0..p {
        for b in a + 1..p {
            if let (Some(qa), Some(qb)) = (&singles[a], &singles[b]) {
                if contains(qa, qb) && contains(qb, qa) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut chains = Vec::new();
    let mut chain_of = vec![None; p];
    for pos in 0..p {
        if !ascending[pos] || find(&mut parent, pos) != pos {
            continue;
        }
        let members: Vec<usize> = (0..p)
            .filter(|&o| ascending[o] && find(&mut parent, o) == pos)
            .collect();
        for &m in &members {
            chain_of[m] = Some(chains.len());
        }
        chains.push(ChainPrime::record(program, members, periods));
    }
    let positions = (0..p)
        .map(|pos| {
            let absorbed_by = if ascending[pos] {
                None
            } else {
                chains.iter().position(|q| {
                    (0..=periods).all(|k| {
                        let n = program.stage_at(pos, k);
                        program
                            .step(n)
                            .locus()
                            .iter()
                            .all(|&j| chainprime_member(program, q, frames[n].column(j), limits).is_yes())
                    })
                })
            };
            PositionReport {
                position: pos,
                ascending: ascending[pos],
                chain: chain_of[pos],
                absorbed_by,
            }
        })
        .collect();
    ChainDetection {
        periods,
        chains,
        positions,
    }
}

/// `Q = m_S` iff every parameter of infinitely many chain stages lies in `Q`.
pub fn chainprime_maximal(program: &TransformProgram, q: &ChainPrime, limits: Limits) -> Verdict {
    if q.is_zero() {
        return Verdict::No {
            certificate: Certificate::Exhausted {
                reason: "the zero ideal is not maximal".to_string(),
            },
        };
    }
    let last = *q.stages.last().expect("nonzero chain has stages");
    let frames = frames_through(program, last);
    let mut undecided = false;
    for &n in &q.stages {
        for t in frames[n].columns() {
            match chainprime_member(program, q, t, limits) {
                Verdict::Yes { .. } => {}
                Verdict::No {
                    certificate: Certificate::Recurrence(recurrence),
                } => {
                    return Verdict::No {
                        certificate: Certificate::Escape {
                            monomial: t.clone(),
                            recurrence,
                        },
                    }
                }
                _ => undecided = true,
            }
        }
    }
    if undecided {
        return Verdict::Unknown {
            cutoff: limits.cutoff,
        };
    }
    Verdict::Yes {
        witness: Witness::Periodic {
            from_stage: q.stages[0],
            periods: q.stages.len() / q.positions.len(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCount {
    pub verdict: Verdict,
    pub count: usize,
}

/// Yes with the chain count when every cycle position's loci land in a chain.
pub fn finitely_many_chains(program: &TransformProgram, periods: usize) -> ChainCount {
    let detection = detect_chains(program, periods);
    let verdict = if detection.complete() {
        Verdict::Yes {
            witness: Witness::Periodic {
                from_stage: program.prefix_len(),
                periods: detection.periods,
            },
        }
    } else {
        Verdict::Unknown {
            cutoff: program.horizon(detection.periods + 1),
        }
    };
    ChainCount {
        verdict,
        count: detection.count(),
    }
}

/// Prime ideals that can appear in a certified chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PrimeIdeal {
    Chain(ChainPrime),
    /// `uS` for a monomial `u` generating a prime.
    Principal(ExponentVector),
    /// `∩ uⁿS`.
    PowerIntersection(ExponentVector),
    Maximal,
}

impl PrimeIdeal {
    pub fn label(&self) -> String {
        match self {
            PrimeIdeal::Chain(q) => q.label.clone(),
            PrimeIdeal::Principal(u) => format!("{u}S"),
            PrimeIdeal::PowerIntersection(u) => format!("∩{u}^nS"),
            PrimeIdeal::Maximal => "m_S".to_string(),
        }
    }
}

pub fn ideal_member(program: &TransformProgram, ideal: &PrimeIdeal, w: &ExponentVector, limits: Limits) -> Verdict {
    match ideal {
        PrimeIdeal::Chain(q) => chainprime_member(program, q, w, limits),
        PrimeIdeal::Principal(u) => divides_s(program, u, w, limits),
        PrimeIdeal::PowerIntersection(u) => power_intersection_member(program, w, u, limits),
        PrimeIdeal::Maximal if w.is_zero() => Verdict::No {
            certificate: Certificate::Exhausted {
                reason: "units lie outside the maximal ideal".to_string(),
            },
        },
        PrimeIdeal::Maximal => member_s(program, w, limits),
    }
}

/// Sufficient test for `small ⊆ large`.
fn contained(program: &TransformProgram, small: &PrimeIdeal, large: &PrimeIdeal, limits: Limits) -> bool {
    let all_in = |gens: Vec<&ExponentVector>| {
        gens.into_iter().all(|g| ideal_member(program, large, g, limits).is_yes())
    };
    match small {
        PrimeIdeal::Maximal => matches!(large, PrimeIdeal::Maximal),
        PrimeIdeal::Principal(u) | PrimeIdeal::PowerIntersection(u) => all_in(vec![u]),
        PrimeIdeal::Chain(q) => all_in(q.locus_generators.iter().flatten().collect()),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("a prime chain needs at least one ideal")]
    Empty,
    #[error("witness {index} has dimension {found}, expected {expected}")]
    Dimension { index: usize, expected: usize, found: usize },
}

/// Certifies `P_0 ⊊ P_1 ⊊ …` using one witness per ideal: `w_i ∈ P_i` and,
/// for `i > 0`, `w_i ∉ P_{i-1}`. The height bound is the number of ideals.
pub fn verify_prime_chain(
    program: &TransformProgram,
    chain: &[(PrimeIdeal, ExponentVector)],
    limits: Limits,
) -> Result<Verdict, ChainError> {
    if chain.is_empty() {
        return Err(ChainError::Empty);
    }
    for (index, (_, w)) in chain.iter().enumerate() {
        if w.dim() != program.dimension() {
            return Err(ChainError::Dimension {
                index,
                expected: program.dimension(),
                found: w.dim(),
            });
        }
    }
    let mut undecided = false;
    for (i, (ideal, w)) in chain.iter().enumerate() {
        match ideal_member(program, ideal, w, limits) {
            Verdict::Yes { .. } if !w.is_zero() => {}
            Verdict::Unknown { .. } => undecided = true,
            _ => {
                return Ok(Verdict::No {
                    certificate: Certificate::Exhausted {
                        reason: format!("witness {w} is not a nonzero member of {}", ideal.label()),
                    },
                })
            }
        }
        if i == 0 {
            continue;
        }
        let below = &chain[i - 1].0;
        match ideal_member(program, below, w, limits) {
            Verdict::No { .. } => {}
            Verdict::Unknown { .. } => undecided = true,
            Verdict::Yes { .. } => {
                return Ok(Verdict::No {
                    certificate: Certificate::Exhausted {
                        reason: format!("witness {w} also lies in {}", below.label()),
                    },
                })
            }
        }
        if !contained(program, below, ideal, limits) {
            undecided = true;
        }
    }
    Ok(if undecided {
        Verdict::Unknown {
            cutoff: limits.cutoff,
        }
    } else {
        Verdict::Yes {
            witness: Witness::PrimeChain {
                height_bound: chain.len(),
            },
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionContainment {
    pub position: usize,
    /// Yes: every checked locus at this position lies in `Q`; No: each
    /// checked period has a locus generator certified outside `Q`.
    pub contained: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticTest {
    pub verdict: Verdict,
    pub positions: Vec<PositionContainment>,
}

/// Whether only finitely many locus ideals lie in `Q`. Yes means no cycle
/// position's loci are inside `Q`; No names a position whose loci are inside
/// `Q` in every checked period.
pub fn quadratic_test(program: &TransformProgram, q: &PrimeIdeal, limits: Limits) -> QuadraticTest {
    let periods = limits.confirm_periods.max(1);
    let frames = frames_through(program, program.horizon(periods + 1));
    let positions: Vec<PositionContainment> = (0..program.period())
        .map(|pos| {
            let mut all_in = true;
            let mut all_out = true;
            let mut escape = None;
            for k in 0..=periods {
                let n = program.stage_at(pos, k);
                let mut period_out = false;
                for &j in program.step(n).locus() {
                    let g = frames[n].column(j);
                    match ideal_member(program, q, g, limits) {
                        Verdict::Yes { .. } => {}
                        Verdict::No { certificate } => {
                            all_in = false;
                            period_out = true;
                            escape.get_or_insert((g.clone(), certificate));
                        }
                        Verdict::Unknown { .. } => all_in = false,
                    }
                }
                all_out &= period_out;
            }
            let contained = if all_in {
                Verdict::Yes {
                    witness: Witness::Periodic {
                        from_stage: program.stage_at(pos, 0),
                        periods,
                    },
                }
            } else if all_out {
                let (monomial, certificate) = escape.expect("some generator escaped");
                match certificate {
                    Certificate::Recurrence(recurrence) => Verdict::No {
                        certificate: Certificate::Escape { monomial, recurrence },
                    },
                    other => Verdict::No { certificate: other },
                }
            } else {
                Verdict::Unknown {
                    cutoff: limits.cutoff,
                }
            };
            PositionContainment { position: pos, contained }
        })
        .collect();
    let verdict = if let Some(p) = positions.iter().find(|p| p.contained.is_yes()) {
        Verdict::No {
            certificate: Certificate::Contained {
                cycle_position: p.position,
                periods,
            },
        }
    } else if positions.iter().all(|p| p.contained.is_no()) {
        Verdict::Yes {
            witness: Witness::Periodic {
                from_stage: program.prefix_len(),
                periods,
            },
        }
    } else {
        Verdict::Unknown {
            cutoff: limits.cutoff,
        }
    };
    QuadraticTest { verdict, positions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::from_i64s(v)
    }

    #[test]
    fn construction_chains() {
        let p = fixtures::construction_3_4();
        let l = Limits::default();
        let det = detect_chains(&p, 3);
        assert_eq!(det.count(), 2);
        assert!(det.complete());
        let even = det.chain_at(0).unwrap();
        let odd = det.chain_at(1).unwrap();
        assert!(chainprime_member(&p, even, &ev(&[0, 1, 0]), l).is_yes());
        assert!(chainprime_member(&p, even, &ev(&[0, 0, 1]), l).is_no());
        assert!(chainprime_member(&p, odd, &ev(&[0, 0, 1]), l).is_yes());
        assert!(chainprime_member(&p, odd, &ev(&[1, 0, 0]), l).is_no());
        for q in [even, odd] {
            for x in &q.divisor_monomials {
                assert!(chainprime_member(&p, q, x, l).is_yes());
            }
            assert!(chainprime_maximal(&p, q, l).is_no());
        }
        match chainprime_maximal(&p, even, l) {
            Verdict::No {
                certificate: Certificate::Escape { monomial, .. },
            } => assert_eq!(monomial, ev(&[0, 0, 1])),
            other => panic!("{other:?}"),
        }
        assert_eq!(finitely_many_chains(&p, 3).count, 2);
    }

    #[test]
    fn example_chains() {
        let p = fixtures::example_5_6();
        let l = Limits::default();
        let det = detect_chains(&p, 3);
        assert_eq!(det.count(), 2);
        let even = det.chain_at(0).unwrap();
        let odd = det.chain_at(1).unwrap();
        assert!(chainprime_maximal(&p, even, l).is_yes());
        assert!(chainprime_maximal(&p, odd, l).is_no());
        assert!(chainprime_member(&p, odd, &ev(&[0, 1, 0]), l).is_yes());
        assert!(chainprime_member(&p, odd, &ev(&[1, 0, 0]), l).is_no());
        let fm = finitely_many_chains(&p, 3);
        assert!(fm.verdict.is_yes());
        assert_eq!(fm.count, 2);
    }

    #[test]
    fn other_fixture_chains() {
        let l = Limits::default();
        let q = fixtures::pure_quadratic();
        let det = detect_chains(&q, 3);
        assert_eq!(det.count(), 1);
        assert!(chainprime_maximal(&q, &det.chains[0], l).is_yes());
        let d4 = fixtures::quadratic_extended_d4();
        let fm = finitely_many_chains(&d4, 3);
        assert!(fm.verdict.is_yes());
        assert_eq!(fm.count, 3);
    }

    #[test]
    fn zero_ideal() {
        let p = fixtures::pure_quadratic();
        let l = Limits::default();
        let z = ChainPrime::zero();
        assert!(chainprime_member(&p, &z, &ev(&[1, 0, 0]), l).is_no());
        let t = quadratic_test(&p, &PrimeIdeal::Chain(z), l);
        assert!(t.verdict.is_yes());
    }

    #[test]
    fn parameters_outside_locus_escape_nonmaximal_chains() {
        let l = Limits::default();
        for p in [fixtures::construction_3_4(), fixtures::example_5_6()] {
            let det = detect_chains(&p, 3);
            for q in &det.chains {
                if chainprime_maximal(&p, q, l).is_yes() {
                    continue;
                }
                for &n in &q.stages {
                    let frame = crate::program::expand(&p, n).frame;
                    for j in 0..p.dimension() {
                        if !p.step(n).in_locus(j) {
                            assert!(chainprime_member(&p, q, frame.column(j), l).is_no());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_tests() {
        let l = Limits::default();
        let p = fixtures::example_5_6();
        let det = detect_chains(&p, 3);
        let odd = PrimeIdeal::Chain(det.chain_at(1).unwrap().clone());
        assert!(quadratic_test(&p, &odd, l).verdict.is_no());
        let c = fixtures::construction_3_4();
        let det = detect_chains(&c, 3);
        let even = PrimeIdeal::Chain(det.chain_at(0).unwrap().clone());
        let t = quadratic_test(&c, &even, l);
        assert!(t.positions[1].contained.is_no());
        assert!(t.positions[0].contained.is_yes());
    }

    #[test]
    fn prime_chains() {
        let l = Limits::default();
        let (x, y, z) = (ev(&[1, 0, 0]), ev(&[0, 1, 0]), ev(&[0, 0, 1]));
        let c = fixtures::construction_3_4();
        let even = detect_chains(&c, 3).chain_at(0).unwrap().clone();
        let chain = [
            (PrimeIdeal::PowerIntersection(x.clone()), y.clone()),
            (PrimeIdeal::Chain(even), x.clone()),
        ];
        assert_eq!(
            verify_prime_chain(&c, &chain, l).unwrap(),
            Verdict::Yes {
                witness: Witness::PrimeChain { height_bound: 2 }
            }
        );
        let e = fixtures::example_5_6();
        let chain = [
            (PrimeIdeal::PowerIntersection(y.clone()), z.clone()),
            (PrimeIdeal::PowerIntersection(x.clone()), y.clone()),
            (PrimeIdeal::Maximal, x.clone()),
        ];
        assert!(matches!(
            verify_prime_chain(&e, &chain, l).unwrap(),
            Verdict::Yes {
                witness: Witness::PrimeChain { height_bound: 3 }
            }
        ));
        let single = [(PrimeIdeal::Maximal, x.clone())];
        assert!(verify_prime_chain(&e, &single, l).unwrap().is_yes());
        assert_eq!(verify_prime_chain(&e, &[], l), Err(ChainError::Empty));
        let swapped = [(PrimeIdeal::PowerIntersection(x.clone()), y.clone()), (PrimeIdeal::PowerIntersection(y), z)];
        assert!(verify_prime_chain(&e, &swapped, l).unwrap().is_no());
    }
}
