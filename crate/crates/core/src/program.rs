//! Eventually-periodic sequences of monomial local monoidal transforms.
//!
//! A [`TransformStep`] blows up the prime generated by a subset of the current
//! parameters and divides by one of them. A [`TransformProgram`] is a finite
//! prefix of steps followed by a cycle repeated forever; stage `n` of the
//! program is the ring obtained after the first `n` steps. Stage and cycle
//! indices are 0-based throughout, so stage 0 is the base ring.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{ExponentVector, Frame};

/// Number of full cycles past the prefix used when a finite horizon is needed.
pub const DEFAULT_PERIODS: usize = 3;

/// One monomial local monoidal transform: the locus is a set of parameter
/// indices, the divisor one of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TransformStep {
    locus: Vec<usize>,
    divisor: usize,
}

impl TransformStep {
    /// Indices are 0-based. The locus is stored sorted; validity is checked by
    /// [`validate_parts`] / [`TransformProgram::new`].
    pub fn new(mut locus: Vec<usize>, divisor: usize) -> Self {
        locus.sort_unstable();
        Self { locus, divisor }
    }

    pub fn locus(&self) -> &[usize] {
        &self.locus
    }

    pub fn divisor(&self) -> usize {
        self.divisor
    }

    pub fn in_locus(&self, j: usize) -> bool {
        self.locus.binary_search(&j).is_ok()
    }

    fn violations(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.locus.len() < 2 {
            out.push("locus must have size ≥ 2".to_string());
        }
        if self.locus.windows(2).any(|w| w[0] == w[1]) {
            out.push("locus indices must be distinct".to_string());
        }
        if let Some(&j) = self.locus.iter().find(|&&j| j >= dim) {
            out.push(format!("locus index {} out of range 1..={dim}", j + 1));
        }
        if self.divisor >= dim {
            out.push(format!("divisor index {} out of range 1..={dim}", self.divisor + 1));
        } else if !self.in_locus(self.divisor) {
            out.push("divisor must belong to locus".to_string());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Header,
    Prefix,
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub section: Section,
    /// 0-based step index within the section (0 for header problems).
    pub index: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.section {
            Section::Header => write!(f, "{}", self.message),
            Section::Prefix => write!(f, "prefix step {}: {}", self.index, self.message),
            Section::Cycle => write!(f, "cycle step {}: {}", self.index, self.message),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("invalid program: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("step is not valid in dimension {dim}: {reason}")]
    InvalidStep { dim: usize, reason: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks the program invariants without constructing anything. Never panics.
pub fn validate_parts(
    dimension: usize,
    variable_names: &[String],
    prefix: &[TransformStep],
    cycle: &[TransformStep],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let header = |message: String| Violation {
        section: Section::Header,
        index: 0,
        message,
    };
    if dimension < 2 {
        out.push(header("dimension must be ≥ 2".to_string()));
    }
    if variable_names.len() != dimension {
        out.push(header(format!(
            "expected {dimension} variable names, found {}",
            variable_names.len()
        )));
    }
    for (i, name) in variable_names.iter().enumerate() {
        if !crate::syntax::is_identifier(name) {
            out.push(header(format!("variable name {name:?} is not an identifier")));
        }
        if variable_names[..i].contains(name) {
            out.push(header(format!("variable name {name:?} is repeated")));
        }
    }
    if cycle.is_empty() {
        out.push(header("cycle must be nonempty".to_string()));
    }
    for (section, steps) in [(Section::Prefix, prefix), (Section::Cycle, cycle)] {
        for (index, step) in steps.iter().enumerate() {
            out.extend(step.violations(dimension).into_iter().map(|message| Violation {
                section,
                index,
                message,
            }));
        }
    }
    out
}

/// A validated eventually-periodic transform program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransformProgram {
    dimension: usize,
    variable_names: Vec<String>,
    prefix: Vec<TransformStep>,
    cycle: Vec<TransformStep>,
}

impl TransformProgram {
    pub fn new(
        dimension: usize,
        variable_names: Vec<String>,
        prefix: Vec<TransformStep>,
        cycle: Vec<TransformStep>,
    ) -> Result<Self, ProgramError> {
        let violations = validate_parts(dimension, &variable_names, &prefix, &cycle);
        if !violations.is_empty() {
            return Err(ProgramError::Invalid(violations));
        }
        Ok(Self {
            dimension,
            variable_names,
            prefix,
            cycle,
        })
    }

    /// Re-runs the invariant checks; always empty for a constructed program.
    pub fn validate(&self) -> Vec<Violation> {
        validate_parts(self.dimension, &self.variable_names, &self.prefix, &self.cycle)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn prefix(&self) -> &[TransformStep] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[TransformStep] {
        &self.cycle
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// The step applied to go from stage `n` to stage `n + 1`.
    pub fn step(&self, n: usize) -> &TransformStep {
        match self.cycle_position(n) {
            None => &self.prefix[n],
            Some(pos) => &self.cycle[pos],
        }
    }

    /// Position of stage `n` in the cycle, or `None` inside the prefix.
    pub fn cycle_position(&self, n: usize) -> Option<usize> {
        n.checked_sub(self.prefix.len()).map(|k| k % self.cycle.len())
    }

    /// First stage at cycle position `pos` in period `k` (both 0-based).
    pub fn stage_at(&self, pos: usize, k: usize) -> usize {
        self.prefix.len() + k * self.cycle.len() + pos
    }

    /// Prefix plus `periods` full cycles.
    pub fn horizon(&self, periods: usize) -> usize {
        self.prefix.len() + periods * self.cycle.len()
    }

    pub fn steps(&self) -> impl Iterator<Item = &TransformStep> {
        self.prefix.iter().chain(&self.cycle)
    }

    pub fn stages(&self) -> Stages<'_> {
        Stages {
            program: self,
            frame: Frame::identity(self.dimension),
        }
    }
}

/// Dual coordinate update for one step: `c_x += Σ_{j ∈ L \ {x}} c_j`.
pub fn step_coords(coords: &mut [BigInt], step: &TransformStep) {
    let x = step.divisor;
    let mut add = BigInt::zero();
    for &j in &step.locus {
        if j != x {
            add += &coords[j];
        }
    }
    coords[x] += add;
}

/// Frame after one transform: every locus column other than the divisor is
/// divided by the divisor column.
pub fn apply_step(frame: &Frame, step: &TransformStep) -> Result<Frame, ProgramError> {
    let dim = frame.dim();
    let problems = step.violations(dim);
    if !problems.is_empty() {
        return Err(ProgramError::InvalidStep {
            dim,
            reason: problems.join("; "),
        });
    }
    let x = step.divisor;
    let div = frame.column(x).clone();
    let mut columns = frame.columns().to_vec();
    let mut inverse = frame.inverse_rows().to_vec();
    let mut row_add = vec![BigInt::zero(); dim];
    for &j in &step.locus {
        if j != x {
            columns[j] = &columns[j] - &div;
            for (acc, e) in row_add.iter_mut().zip(&frame.inverse_rows()[j]) {
                *acc += e;
            }
        }
    }
    for (r, a) in inverse[x].iter_mut().zip(row_add) {
        *r += a;
    }
    Ok(Frame::from_parts(frame.stage() + 1, columns, inverse))
}

/// Stage `n` of a program: its frame, and the locus and divisor of the step
/// applied at that stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageView {
    pub n: usize,
    pub frame: Frame,
    pub locus_monomials: Vec<ExponentVector>,
    pub divisor_monomial: ExponentVector,
}

impl StageView {
    fn new(program: &TransformProgram, frame: Frame) -> Self {
        let n = frame.stage();
        let step = program.step(n);
        Self {
            n,
            locus_monomials: step.locus.iter().map(|&j| frame.column(j).clone()).collect(),
            divisor_monomial: frame.column(step.divisor).clone(),
            frame,
        }
    }
}

/// Iterator over stage views 0, 1, 2, …
pub struct Stages<'a> {
    program: &'a TransformProgram,
    frame: Frame,
}

impl Iterator for Stages<'_> {
    type Item = StageView;

    fn next(&mut self) -> Option<StageView> {
        let n = self.frame.stage();
        let next = apply_step(&self.frame, self.program.step(n)).expect("validated program");
        let current = std::mem::replace(&mut self.frame, next);
        Some(StageView::new(self.program, current))
    }
}

pub fn expand(program: &TransformProgram, n: usize) -> StageView {
    program.stages().nth(n).expect("stage iterator is infinite")
}

/// Frames for stages `0..=last`.
pub fn frames_through(program: &TransformProgram, last: usize) -> Vec<Frame> {
    program.stages().take(last + 1).map(|v| v.frame).collect()
}

/// Smallest locus size over all steps: the extension lies in `M_i(R)`.
pub fn classify_m_i(program: &TransformProgram) -> usize {
    program
        .steps()
        .map(|s| s.locus.len())
        .min()
        .expect("cycle is nonempty")
}

/// Order function of stage `n`: the sum of the stage coordinates.
pub fn ord_n(program: &TransformProgram, n: usize, w: &ExponentVector) -> BigInt {
    let mut c = w.entries().to_vec();
    for k in 0..n {
        step_coords(&mut c, program.step(k));
    }
    c.iter().sum()
}

/// Membership in the base ring with the program's divisors inverted, using
/// [`DEFAULT_PERIODS`] cycles past the prefix.
pub fn in_inverted_hull(program: &TransformProgram, w: &ExponentVector) -> bool {
    in_inverted_hull_within(program, w, program.horizon(DEFAULT_PERIODS))
}

/// `R_N[1/x_0, …, 1/x_{N-1}] = R_0[1/x_0, …, 1/x_{N-1}]`, and every divisor
/// lies in `R_N`, so at stage `N` membership means the negative coordinates of
/// `w` sit on parameters that divide some earlier divisor.
pub fn in_inverted_hull_within(program: &TransformProgram, w: &ExponentVector, horizon: usize) -> bool {
    let d = program.dimension();
    let mut coords = w.entries().to_vec();
    // divisor coordinates at the current stage
    let mut divisors: Vec<Vec<BigInt>> = Vec::new();
    for n in 0..=horizon {
        let support: Vec<bool> = (0..d)
            .map(|j| divisors.iter().any(|c| c[j].is_positive()))
            .collect();
        if coords.iter().zip(&support).all(|(c, &s)| !c.is_negative() || s) {
            return true;
        }
        let step = program.step(n);
        let mut fresh = vec![BigInt::zero(); d];
        fresh[step.divisor] = BigInt::from(1);
        divisors.push(fresh);
        for c in divisors.iter_mut() {
            step_coords(c, step);
        }
        step_coords(&mut coords, step);
    }
    false
}
