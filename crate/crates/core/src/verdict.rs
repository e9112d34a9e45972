//! Three-valued decision results with checkable evidence.

use num_bigint::BigInt;
use serde::Serialize;

use crate::lattice::ExponentVector;

/// Stage bound and recurrence confirmation length shared by every semi-decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    pub cutoff: usize,
    pub confirm_periods: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            cutoff: 256,
            confirm_periods: 3,
        }
    }
}

impl Limits {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }
}

/// A coordinate state compared with its value one period earlier, at the same
/// cycle position, for `periods` consecutive periods.
///
/// For escape certificates the state restricted to `coordinates` is
/// dominated by its earlier value. The dual update is monotone, so a state
/// that only shrinks from period to period never reaches an upward-closed
/// condition it missed during the last period. Gcd certificates compare
/// residual pairs exactly or by support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Recurrence {
    pub cycle_position: usize,
    /// Stage at which the dominance was confirmed.
    pub stage: usize,
    /// The stage one period earlier that it is compared with.
    pub repeat_stage: usize,
    pub periods: usize,
    /// Coordinates the comparison covers; closed under the dual update.
    pub coordinates: Vec<usize>,
    pub state: Vec<ExponentVector>,
    /// `state(stage) - state(repeat_stage)`.
    pub increment: Vec<ExponentVector>,
}

impl Recurrence {
    /// True when the state repeats exactly.
    pub fn is_exact(&self) -> bool {
        self.increment.iter().all(ExponentVector::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Nonnegative coordinates at a stage.
    Stage {
        stage: usize,
        #[serde(serialize_with = "crate::serde_big::serialize_ints")]
        coords: Vec<BigInt>,
    },
    /// A monomial with the stated property, found at `stage`.
    Monomial { monomial: ExponentVector, stage: usize },
    /// Generators of an ideal, as stage parameter indices and monomials.
    Generators {
        stage: usize,
        indices: Vec<usize>,
        monomials: Vec<ExponentVector>,
    },
    /// A property confirmed on every stage pattern of `periods` cycles.
    Periodic { from_stage: usize, periods: usize },
    /// All pairs of a finite box passed; claims nothing outside it.
    Window { radius: i64, pairs: usize },
    /// A strict chain of primes; the bound is its length.
    PrimeChain { height_bound: usize },
    /// Evidence that holds unconditionally.
    Exact { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Recurrence(Recurrence),
    /// A monomial certified to lie outside the set in question.
    Escape {
        monomial: ExponentVector,
        recurrence: Recurrence,
    },
    /// A monomial with a common divisor of both residuals.
    Divisor { monomial: ExponentVector, stage: usize },
    /// A gcd trace whose value grows by `increment` each period.
    Divergence {
        a: ExponentVector,
        b: ExponentVector,
        increment: ExponentVector,
    },
    /// Neither quotient of the pair lies in the ring.
    Incomparable {
        a: ExponentVector,
        b: ExponentVector,
        forward: Recurrence,
        backward: Recurrence,
    },
    /// A cycle position whose loci are contained in the ideal for every
    /// checked period.
    Contained { cycle_position: usize, periods: usize },
    /// Exhaustive search over a finite family failed.
    Exhausted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Yes { witness: Witness },
    No { certificate: Certificate },
    Unknown { cutoff: usize },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Yes { .. } => "yes",
            Verdict::No { .. } => "no",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    pub fn witness_stage(&self) -> Option<usize> {
        match self {
            Verdict::Yes {
                witness: Witness::Stage { stage, .. } | Witness::Monomial { stage, .. },
            } => Some(*stage),
            _ => None,
        }
    }
}
