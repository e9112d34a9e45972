//! Ring-level verdicts: valuation property at chain-primes, GCD
//! classification, finite generation of the maximal ideal, and boundary order.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{chainprime_maximal, detect_chains, ideal_member, PrimeIdeal};
use crate::lattice::ExponentVector;
use crate::program::{classify_m_i, frames_through, step_coords, TransformProgram};
use crate::recurrence::{scan_keyed, Probe, ScanOutcome};
use crate::union::{divides_s, gcd_trace, member_s, sbid_check, GcdStatus};
use crate::verdict::{Certificate, Limits, Verdict, Witness};

/// Membership in the localization `S_Q` for a prime `Q` of `S`.
///
/// `v ∈ S_Q` iff at some stage the negative coordinates of `v` sit only on
/// parameters outside `Q`; the denominator is then the product of those
/// parameters. A denominator of degree above `search_degree` is not accepted,
/// and such stages cannot serve in a certificate either.
pub struct Localization<'a> {
    program: &'a TransformProgram,
    ideal: PrimeIdeal,
    limits: Limits,
    search_degree: u64,
    /// `outside[n][j]`: whether parameter `j` of stage `n` lies outside `Q`.
    outside: Vec<Vec<Option<bool>>>,
}

impl<'a> Localization<'a> {
    pub fn new(program: &'a TransformProgram, ideal: PrimeIdeal, search_degree: u64, limits: Limits) -> Self {
        let outside = if ideal == PrimeIdeal::Maximal {
            Vec::new()
        } else {
            frames_through(program, limits.cutoff)
                .par_iter()
                .map(|frame| {
                    frame
                        .columns()
                        .iter()
                        .map(|t| match ideal_member(program, &ideal, t, limits) {
                            Verdict::Yes { .. } => Some(false),
                            Verdict::No { .. } => Some(true),
                            Verdict::Unknown { .. } => None,
                        })
                        .collect()
                })
                .collect()
        };
        Self {
            program,
            ideal,
            limits,
            search_degree,
            outside,
        }
    }

    pub fn ideal(&self) -> &PrimeIdeal {
        &self.ideal
    }

    pub fn member(&self, v: &ExponentVector) -> Verdict {
        if self.ideal == PrimeIdeal::Maximal {
            return member_s(self.program, v, self.limits);
        }
        let hit = |n: usize, coords: &[BigInt]| {
            let mut mass = BigInt::zero();
            for (c, out) in coords.iter().zip(&self.outside[n]) {
                if c.is_negative() {
                    if *out != Some(true) {
                        return Probe::Miss;
                    }
                    mass -= c;
                }
            }
            if mass <= BigInt::from(self.search_degree) {
                Probe::Hit
            } else {
                Probe::Block
            }
        };
        let key = |n: usize| {
            self.outside[n]
                .iter()
                .map(|o| o.map(u8::from))
                .collect::<Option<Vec<u8>>>()
        };
        let limits = Limits {
            cutoff: self.limits.cutoff.min(self.outside.len() - 1),
            ..self.limits
        };
        let negative_ok = |n: usize, j: usize| self.outside[n][j] == Some(true);
        match scan_keyed(self.program, 0, v.entries().to_vec(), limits, hit, key, negative_ok) {
            ScanOutcome::Hit { stage, coords } => Verdict::Yes {
                witness: Witness::Stage { stage, coords },
            },
            ScanOutcome::Escapes(r) => Verdict::No {
                certificate: Certificate::Recurrence(r),
            },
            ScanOutcome::Cutoff => Verdict::Unknown {
                cutoff: self.limits.cutoff,
            },
        }
    }
}

/// All integer vectors with entries in `[-r, r]`, in lexicographic order.
pub fn box_vectors(d: usize, r: i64) -> Vec<ExponentVector> {
    let side = (2 * r + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut i| {
            let mut v = vec![0i64; d];
            for e in v.iter_mut().rev() {
                *e = (i % side) as i64 - r;
                i /= side;
            }
            ExponentVector::from_i64s(&v)
        })
        .collect()
}

/// Splits `δ` with entries in `[-2B, 2B]` as `b - a` with `a, b` in `[-B, B]`.
fn split(delta: &ExponentVector) -> (ExponentVector, ExponentVector) {
    let two = BigInt::from(2);
    let a: Vec<BigInt> = delta.entries().iter().map(|x| -num_integer::Integer::div_floor(x, &two)).collect();
    let a = ExponentVector::new(a);
    let b = &a + delta;
    (a, b)
}

/// Comparability of monomials in `S_Q` over the box `|exp| ≤ window`.
///
/// `a | b` in `S_Q` depends only on `b - a`, so the box of pairs reduces to
/// quotients with entries in `[-2B, 2B]`.
pub fn valuation_check_at(
    program: &TransformProgram,
    ideal: &PrimeIdeal,
    window: i64,
    search_degree: u64,
    limits: Limits,
) -> Verdict {
    let loc = Localization::new(program, ideal.clone(), search_degree, limits);
    let deltas = box_vectors(program.dimension(), 2 * window);
    let results: Vec<(Verdict, Option<Verdict>)> = deltas
        .par_iter()
        .map(|delta| {
            let forward = loc.member(delta);
            if forward.is_yes() {
                (forward, None)
            } else {
                let backward = loc.member(&-delta);
                (forward, Some(backward))
            }
        })
        .collect();
    let mut undecided = false;
    for (delta, (forward, backward)) in deltas.iter().zip(results) {
        match (forward, backward) {
            (Verdict::Yes { .. }, _) | (_, Some(Verdict::Yes { .. })) => {}
            (
                Verdict::No {
                    certificate: Certificate::Recurrence(f),
                },
                Some(Verdict::No {
                    certificate: Certificate::Recurrence(b),
                }),
            ) => {
                let (a, bb) = split(delta);
                return Verdict::No {
                    certificate: Certificate::Incomparable {
                        a,
                        b: bb,
                        forward: f,
                        backward: b,
                    },
                };
            }
            _ => undecided = true,
        }
    }
    if undecided {
        Verdict::Unknown {
            cutoff: limits.cutoff,
        }
    } else {
        Verdict::Yes {
            witness: Witness::Window {
                radius: window,
                pairs: deltas.len(),
            },
        }
    }
}

/// Which branch produced the GCD verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Theorem,
    Counterexample,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifyParams {
    pub limits: Limits,
    pub periods: usize,
    pub window: i64,
    pub search_degree: u64,
    /// Pairs with entries in `[-sample_box, sample_box]` are all sampled.
    pub sample_box: i64,
    pub random_pairs: usize,
    pub random_bound: i64,
    pub seed: u64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            limits: Limits::default(),
            periods: 3,
            window: 4,
            search_degree: 8,
            sample_box: 4,
            random_pairs: 100,
            random_bound: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainVerdicts {
    pub label: String,
    pub positions: Vec<usize>,
    pub maximal: Verdict,
    pub valuation: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub program: String,
    pub m_i: usize,
    pub chain_count: usize,
    pub chains_complete: bool,
    pub chains: Vec<ChainVerdicts>,
    pub sbid: Verdict,
    pub gcd: Verdict,
    pub provenance: Provenance,
    /// Sampled pairs whose intersection was not certified principal.
    pub cross_validation_failures: usize,
    pub sampled_pairs: usize,
    pub noetherian: NoetherianProbe,
    pub parameters: ClassifyParams,
}

/// Sample pairs for the GCD battery: one pair `(1, δ)` per quotient in the
/// doubled sample box (a trace depends only on `b - a`), then seeded random
/// pairs.
pub fn sample_pairs(d: usize, params: &ClassifyParams) -> Vec<(ExponentVector, ExponentVector)> {
    let zero = ExponentVector::zero(d);
    let mut pairs: Vec<_> = box_vectors(d, 2 * params.sample_box)
        .into_iter()
        .map(|delta| (zero.clone(), delta))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let r = params.random_bound;
    for _ in 0..params.random_pairs {
        let mut draw = || ExponentVector::from_i64s(&(0..d).map(|_| rng.gen_range(-r..=r)).collect::<Vec<_>>());
        let a = draw();
        let b = draw();
        pairs.push((a, b));
    }
    pairs
}

pub fn gcd_classify(program: &TransformProgram, name: &str, params: &ClassifyParams) -> ClassificationReport {
    let limits = params.limits;
    let detection = detect_chains(program, params.periods);
    let chains: Vec<ChainVerdicts> = detection
        .chains
        .iter()
        .map(|q| ChainVerdicts {
            label: q.label.clone(),
            positions: q.positions.clone(),
            maximal: chainprime_maximal(program, q, limits),
            valuation: valuation_check_at(
                program,
                &PrimeIdeal::Chain(q.clone()),
                params.window,
                params.search_degree,
                limits,
            ),
        })
        .collect();
    let pairs = sample_pairs(program.dimension(), params);
    let statuses: Vec<GcdStatus> = pairs
        .par_iter()
        .map(|(a, b)| gcd_trace(program, a, b, limits).expect("dimensions match").status)
        .collect();
    let diverging = pairs.iter().zip(&statuses).find_map(|((a, b), s)| match s {
        GcdStatus::Diverges { increment, .. } => Some(Certificate::Divergence {
            a: a.clone(),
            b: b.clone(),
            increment: increment.clone(),
        }),
        _ => None,
    });
    let cross_validation_failures = statuses
        .iter()
        .filter(|s| !matches!(s, GcdStatus::Stabilized { .. }))
        .count();
    let chains_complete = detection.complete();
    let theorem = chains_complete && !chains.is_empty() && chains.iter().all(|c| c.valuation.is_yes());
    let (gcd, provenance) = if let Some(certificate) = diverging {
        (Verdict::No { certificate }, Provenance::Counterexample)
    } else if theorem && cross_validation_failures == 0 {
        (
            Verdict::Yes {
                witness: Witness::Window {
                    radius: params.window,
                    pairs: pairs.len(),
                },
            },
            Provenance::Theorem,
        )
    } else {
        (
            Verdict::Unknown {
                cutoff: limits.cutoff,
            },
            Provenance::Undecided,
        )
    };
    ClassificationReport {
        program: name.to_string(),
        m_i: classify_m_i(program),
        chain_count: detection.count(),
        chains_complete,
        chains,
        sbid: sbid_check(program, limits),
        gcd,
        provenance,
        cross_validation_failures,
        sampled_pairs: pairs.len(),
        noetherian: noetherian_probe(program, program.prefix_len(), limits),
        parameters: params.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoetherianProbe {
    pub stage: usize,
    pub verdict: Verdict,
    /// Size of the generating set found.
    pub generators: Option<usize>,
    /// `generators ≤ d - 1`, when a generating set was found.
    pub within_bound: Option<bool>,
}

/// Looks for a set `G` of stage-`N` parameters generating `m_S`: every
/// parameter of stages `N ..= N + K·p` must be divisible in `S` by some
/// element of `G`. Sets are tried by increasing size, lexicographically.
pub fn noetherian_probe(program: &TransformProgram, stage: usize, limits: Limits) -> NoetherianProbe {
    let d = program.dimension();
    let periods = limits.confirm_periods.max(1);
    let last = stage + periods * program.period();
    let frames = frames_through(program, last);
    let params: Vec<&ExponentVector> = frames[stage..].iter().flat_map(|f| f.columns()).collect();
    let candidates = frames[stage].columns();
    // divides[g][k]: candidate g divides later parameter k
    let divides: Vec<Vec<Verdict>> = candidates
        .par_iter()
        .map(|g| params.iter().map(|t| divides_s(program, g, t, limits)).collect())
        .collect();
    let mut all_certified = true;
    for size in 1..=d {
        for subset in subsets(d, size) {
            let mut works = true;
            let mut certified_escape = false;
            for k in 0..params.len() {
                let verdicts: Vec<&Verdict> = subset.iter().map(|&g| &divides[g][k]).collect();
                if verdicts.iter().any(|v| v.is_yes()) {
                    continue;
                }
                works = false;
                if verdicts.iter().all(|v| v.is_no()) {
                    certified_escape = true;
                    break;
                }
            }
            if works {
                return NoetherianProbe {
                    stage,
                    verdict: Verdict::Yes {
                        witness: Witness::Generators {
                            stage,
                            indices: subset.clone(),
                            monomials: subset.iter().map(|&g| candidates[g].clone()).collect(),
                        },
                    },
                    generators: Some(size),
                    within_bound: Some(size < d),
                };
            }
            all_certified &= certified_escape;
        }
    }
    let verdict = if all_certified {
        Verdict::No {
            certificate: Certificate::Exhausted {
                reason: format!("every set of stage-{stage} parameters misses a later parameter"),
            },
        }
    } else {
        Verdict::Unknown {
            cutoff: limits.cutoff,
        }
    };
    NoetherianProbe {
        stage,
        verdict,
        generators: None,
        within_bound: None,
    }
}

fn subsets(d: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, d: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(i + 1, d, size, cur, out);
            cur.pop();
        }
    }
    go(0, d, size, &mut cur, &mut out);
    out
}

/// Whether `ord_n(w) ≥ 0` for all large `n`.
///
/// Yes once `w` lies in a stage ring, or once the coordinates dominate their
/// value a period earlier while the order is nonnegative across the period.
/// No when they are dominated by it while the order is negative across the
/// period. Both use that the dual update is monotone and `ord_n` is the sum
/// of the coordinates.
pub fn boundary_ord_check(program: &TransformProgram, w: &ExponentVector, limits: Limits) -> Verdict {
    let p = program.period();
    let confirm = limits.confirm_periods.max(1);
    let mut c = w.entries().to_vec();
    let mut history: Vec<Vec<BigInt>> = Vec::new();
    for n in 0..=limits.cutoff {
        if c.iter().all(|x| !x.is_negative()) {
            return Verdict::Yes {
                witness: Witness::Stage { stage: n, coords: c },
            };
        }
        history.push(c.clone());
        if n >= program.prefix_len() + confirm * p {
            let lo = n - confirm * p;
            let ords: Vec<BigInt> = history[lo..=n].iter().map(|v| v.iter().sum()).collect();
            let cmp = |ge: bool| {
                (0..confirm).all(|i| {
                    let (later, earlier) = (&history[n - i * p], &history[n - (i + 1) * p]);
                    later.iter().zip(earlier).all(|(a, b)| if ge { a >= b } else { a <= b })
                })
            };
            if ords.iter().all(|o| !o.is_negative()) && cmp(true) {
                return Verdict::Yes {
                    witness: Witness::Periodic {
                        from_stage: lo,
                        periods: confirm,
                    },
                };
            }
            if ords.iter().all(|o| o.is_negative()) && cmp(false) {
                let earlier = &history[n - p];
                return Verdict::No {
                    certificate: Certificate::Recurrence(crate::verdict::Recurrence {
                        cycle_position: program.cycle_position(n).expect("past prefix"),
                        stage: n,
                        repeat_stage: n - p,
                        periods: confirm,
                        coordinates: (0..c.len()).collect(),
                        state: vec![ExponentVector::new(c.clone())],
                        increment: vec![ExponentVector::new(c.iter().zip(earlier).map(|(a, b)| a - b).collect())],
                    }),
                };
            }
        }
        step_coords(&mut c, program.step(n));
    }
    Verdict::Unknown {
        cutoff: limits.cutoff,
    }
}
