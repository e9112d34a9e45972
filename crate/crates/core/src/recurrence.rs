//! Stage scanning with dominance certificates, and the closed form of the
//! coordinate dynamics when the period map is unipotent.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::lattice::ExponentVector;
use crate::program::{step_coords, TransformProgram};
use crate::verdict::{Limits, Recurrence};

/// Result of testing a predicate against the scanned state at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Hit,
    Miss,
    /// Not a hit, but the stage may not serve inside a certificate window.
    Block,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanOutcome {
    Hit { stage: usize, coords: Vec<BigInt> },
    Escapes(Recurrence),
    Cutoff,
}

/// Coordinate sets `J` whose dual update only reads coordinates in `J`,
/// across the cycle; the full set comes first.
pub fn closed_sets(program: &TransformProgram) -> Vec<Vec<usize>> {
    let d = program.dimension();
    let mut out: Vec<Vec<usize>> = (1u32..1 << d)
        .rev()
        .map(|mask| (0..d).filter(|&j| mask & (1 << j) != 0).collect::<Vec<_>>())
        .filter(|set: &Vec<usize>| {
            program
                .cycle()
                .iter()
                .all(|s| !set.contains(&s.divisor()) || s.locus().iter().all(|j| set.contains(j)))
        })
        .collect();
    out.sort_by_key(|set| std::cmp::Reverse(set.len()));
    out
}

/// Scans stages `start..=start + limits.cutoff`, advancing the coordinates of
/// a monomial by the dual update, until `hit` reports a hit.
///
/// `hit` must be upward closed and must imply that every coordinate `j` is
/// nonnegative unless `negative_ok(n, j)`. That weaker condition is what the
/// certificates use: restricted to a closed coordinate set `J`, it fails at
/// every later stage once the `J`-coordinates are dominated by their value one
/// period earlier and it failed throughout that period.
///
/// `key(n)` summarizes whatever stage-dependent data the predicates read at
/// stage `n`; a certificate needs equal keys one period apart across the
/// confirmation window, and `None` forbids certification at that stage.
pub fn scan_keyed<H, K, N>(
    program: &TransformProgram,
    start: usize,
    mut coords: Vec<BigInt>,
    limits: Limits,
    mut hit: H,
    mut key: K,
    negative_ok: N,
) -> ScanOutcome
where
    H: FnMut(usize, &[BigInt]) -> Probe,
    K: FnMut(usize) -> Option<Vec<u8>>,
    N: Fn(usize, usize) -> bool,
{
    let p = program.period();
    let confirm = limits.confirm_periods.max(1);
    let floor = start.max(program.prefix_len());
    let sets = closed_sets(program);
    let mut history: Vec<(Vec<BigInt>, Probe, Option<Vec<u8>>)> = Vec::new();
    for n in start..=start + limits.cutoff {
        let probe = hit(n, &coords);
        if probe == Probe::Hit {
            return ScanOutcome::Hit { stage: n, coords };
        }
        history.push((coords.clone(), probe, key(n)));
        if n >= floor + confirm * p {
            let lo = n - confirm * p;
            let at = |s: usize| &history[s - start];
            let keys_repeat = (lo..=n).all(|s| at(s).2.is_some()) && (lo + p..=n).all(|s| at(s).2 == at(s - p).2);
            let dominated = |set: &[usize]| {
                (0..confirm).all(|i| {
                    let (later, earlier) = (&at(n - i * p).0, &at(n - (i + 1) * p).0);
                    set.iter().all(|&j| later[j] <= earlier[j])
                })
            };
            let blocked = |s: usize, set: &[usize]| {
                set.iter().any(|&j| at(s).0[j].is_negative() && !negative_ok(s, j))
            };
            let certified = keys_repeat.then(|| {
                if (lo..=n).all(|s| at(s).1 == Probe::Miss) && dominated(&sets[0]) {
                    return Some(sets[0].clone());
                }
                sets.iter()
                    .find(|set| (lo..=n).all(|s| blocked(s, set)) && dominated(set))
                    .cloned()
            });
            if let Some(Some(set)) = certified {
                let earlier = &at(n - p).0;
                return ScanOutcome::Escapes(Recurrence {
                    cycle_position: program.cycle_position(n).expect("past prefix"),
                    stage: n,
                    repeat_stage: n - p,
                    periods: confirm,
                    coordinates: set,
                    increment: vec![ExponentVector::new(coords.iter().zip(earlier).map(|(a, b)| a - b).collect())],
                    state: vec![ExponentVector::new(coords.clone())],
                });
            }
        }
        step_coords(&mut coords, program.step(n));
    }
    ScanOutcome::Cutoff
}

/// [`scan_keyed`] for predicates that do not depend on the stage.
pub fn scan<H, N>(program: &TransformProgram, start: usize, coords: Vec<BigInt>, limits: Limits, hit: H, negative_ok: N) -> ScanOutcome
where
    H: FnMut(usize, &[BigInt]) -> Probe,
    N: Fn(usize, usize) -> bool,
{
    scan_keyed(program, start, coords, limits, hit, |_| Some(Vec::new()), negative_ok)
}

/// Coordinates of `w` at stage `n`, by the dual update from the base frame.
pub fn coords_at(program: &TransformProgram, n: usize, w: &[BigInt]) -> Vec<BigInt> {
    let mut c = w.to_vec();
    for k in 0..n {
        step_coords(&mut c, program.step(k));
    }
    c
}

/// The linear map `C` taking coordinates at stage `prefix + k·p` to stage
/// `prefix + (k+1)·p`, together with the nilpotency index of `C - I` when
/// that map is unipotent.
#[derive(Clone, Debug)]
pub struct PeriodMatrix<'a> {
    program: &'a TransformProgram,
    nilpotency: Option<usize>,
}

impl<'a> PeriodMatrix<'a> {
    pub fn new(program: &'a TransformProgram) -> Self {
        let d = program.dimension();
        let mut nilpotency = None;
        let mut powers: Vec<Vec<BigInt>> = (0..d)
            .map(|j| ExponentVector::unit(d, j).into_entries())
            .collect();
        for r in 0..=d {
            if powers.iter().all(|v| v.iter().all(Zero::is_zero)) {
                nilpotency = Some(r);
                break;
            }
            for v in powers.iter_mut() {
                *v = Self::nilpotent_part(program, v);
            }
        }
        Self { program, nilpotency }
    }

    fn nilpotent_part(program: &TransformProgram, a: &[BigInt]) -> Vec<BigInt> {
        let mut c = a.to_vec();
        for step in program.cycle() {
            step_coords(&mut c, step);
        }
        c.iter().zip(a).map(|(x, y)| x - y).collect()
    }

    pub fn is_unipotent(&self) -> bool {
        self.nilpotency.is_some()
    }

    pub fn nilpotency(&self) -> Option<usize> {
        self.nilpotency
    }

    /// `[a, N a, N² a, …]` for the anchor coordinates `a` of `w`, so the
    /// coordinates after `k` periods are `Σ binom(k, i) Nⁱ a`.
    pub fn binomial_coefficients(&self, w: &ExponentVector) -> Option<Vec<Vec<BigInt>>> {
        let r = self.nilpotency?;
        let mut a = coords_at(self.program, self.program.prefix_len(), w.entries());
        let mut out = Vec::with_capacity(r);
        for _ in 0..r {
            let next = Self::nilpotent_part(self.program, &a);
            out.push(std::mem::replace(&mut a, next));
        }
        Some(out)
    }

    /// Whether `w` lies in the union ring, decided from the closed form.
    /// `None` when the period map is not unipotent.
    pub fn member(&self, w: &ExponentVector) -> Option<bool> {
        self.binomial_coefficients(w).map(|coeffs| eventually_nonnegative(&coeffs, |_, c| c.clone()))
    }

    /// Whether `w / uⁿ` lies in the union ring for every `n ≥ 0`. On failure
    /// returns the smallest failing `n` among the critical values checked.
    pub fn power_intersection(&self, w: &ExponentVector, u: &ExponentVector) -> Option<Result<(), BigInt>> {
        let aw = self.binomial_coefficients(w)?;
        let au = self.binomial_coefficients(u)?;
        let mut candidates = vec![BigInt::zero()];
        let mut largest = BigInt::zero();
        for (rw, ru) in aw.iter().zip(&au) {
            for (x, y) in rw.iter().zip(ru) {
                if y.is_zero() {
                    continue;
                }
                let root = BigRational::new(x.clone(), y.clone()).floor().to_integer();
                if !root.is_negative() {
                    candidates.push(root.clone());
                    candidates.push(&root + 1);
                    largest = largest.max(&root + 1);
                }
            }
        }
        candidates.push(largest + 1);
        candidates.sort();
        candidates.dedup();
        for n in candidates {
            let ok = eventually_nonnegative(&aw, |i, c| {
                c.iter().zip(&au[i]).map(|(x, y)| x - &n * y).collect()
            });
            if !ok {
                return Some(Err(n));
            }
        }
        Some(Ok(()))
    }
}

/// Each coordinate of `Σ binom(k, i) cᵢ` is eventually ≥ 0 iff its top nonzero
/// binomial-basis coefficient is positive, or all of them vanish.
fn eventually_nonnegative<F>(coeffs: &[Vec<BigInt>], mut term: F) -> bool
where
    F: FnMut(usize, &Vec<BigInt>) -> Vec<BigInt>,
{
    let rows: Vec<Vec<BigInt>> = coeffs.iter().enumerate().map(|(i, c)| term(i, c)).collect();
    let d = rows.first().map_or(0, Vec::len);
    (0..d).all(|j| {
        rows.iter()
            .rev()
            .map(|r| &r[j])
            .find(|c| !c.is_zero())
            .is_none_or(|c| c.is_positive())
    })
}

/// `binom(k, i)` as a big integer.
pub fn binomial(k: u64, i: u64) -> BigInt {
    if i > k {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for t in 0..i {
        acc = acc * BigInt::from(k - t) / BigInt::from(t + 1);
    }
    acc
}
