//! TOML program files.
//!
//! ```toml
//! dimension = 3
//! variables = ["x", "y", "z"]
//! prefix = []
//! cycle = [
//!     { locus = [1, 2], divisor = 1 },
//!     { locus = [2, 3], divisor = 3 },
//! ]
//! ```
//!
//! Parameter indices in files are 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::program::{validate_parts, Section, TransformProgram, TransformStep, Violation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub locus: Vec<usize>,
    pub divisor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProgramFile {
    pub dimension: usize,
    pub variables: Vec<String>,
    pub prefix: Vec<StepSpec>,
    pub cycle: Vec<StepSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dimension: usize,
    variables: Vec<String>,
    #[serde(default)]
    prefix: Vec<Spanned<StepSpec>>,
    cycle: Vec<Spanned<StepSpec>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedViolation {
    pub line: Option<usize>,
    pub violation: Violation,
}

impl fmt::Display for LocatedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.violation),
            None => write!(f, "{}", self.violation),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<LocatedViolation>),
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

fn to_step(spec: &StepSpec) -> Result<TransformStep, String> {
    let shift = |i: usize| i.checked_sub(1).ok_or_else(|| "parameter indices are 1-based; found 0".to_string());
    let locus = spec.locus.iter().map(|&i| shift(i)).collect::<Result<Vec<_>, _>>()?;
    Ok(TransformStep::new(locus, shift(spec.divisor)?))
}

/// Parses and validates a program file.
pub fn parse_program(text: &str) -> Result<TransformProgram, ParseError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ParseError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut located = Vec::new();
    let mut convert = |section: Section, specs: &[Spanned<StepSpec>]| {
        let mut steps = Vec::new();
        for (index, spec) in specs.iter().enumerate() {
            let line = Some(line_col(text, spec.span().start).0);
            match to_step(spec.get_ref()) {
                Ok(step) => steps.push((step, line)),
                Err(message) => located.push(LocatedViolation {
                    line,
                    violation: Violation { section, index, message },
                }),
            }
        }
        steps
    };
    let prefix = convert(Section::Prefix, &raw.prefix);
    let cycle = convert(Section::Cycle, &raw.cycle);
    if !located.is_empty() {
        return Err(ParseError::Invalid(located));
    }
    let prefix_lines: Vec<_> = prefix.iter().map(|s| s.1).collect();
    let cycle_lines: Vec<_> = cycle.iter().map(|s| s.1).collect();
    let prefix: Vec<TransformStep> = prefix.into_iter().map(|s| s.0).collect();
    let cycle: Vec<TransformStep> = cycle.into_iter().map(|s| s.0).collect();
    let violations = validate_parts(raw.dimension, &raw.variables, &prefix, &cycle);
    if !violations.is_empty() {
        return Err(ParseError::Invalid(
            violations
                .into_iter()
                .map(|violation| LocatedViolation {
                    line: match violation.section {
                        Section::Header => None,
                        Section::Prefix => prefix_lines[violation.index],
                        Section::Cycle => cycle_lines[violation.index],
                    },
                    violation,
                })
                .collect(),
        ));
    }
    Ok(TransformProgram::new(raw.dimension, raw.variables, prefix, cycle).expect("validated above"))
}

impl From<&TransformProgram> for ProgramFile {
    fn from(p: &TransformProgram) -> Self {
        let spec = |s: &TransformStep| StepSpec {
            locus: s.locus().iter().map(|i| i + 1).collect(),
            divisor: s.divisor() + 1,
        };
        Self {
            dimension: p.dimension(),
            variables: p.variable_names().to_vec(),
            prefix: p.prefix().iter().map(spec).collect(),
            cycle: p.cycle().iter().map(spec).collect(),
        }
    }
}

/// Writes a program in the format read by [`parse_program`].
pub fn serialize_program(program: &TransformProgram) -> String {
    toml::to_string(&ProgramFile::from(program)).expect("program files always serialize")
}
