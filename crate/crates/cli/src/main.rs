use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use monoidal_core::chains::{chainprime_maximal, detect_chains, finitely_many_chains};
use monoidal_core::classify::{boundary_ord_check, gcd_classify, ClassifyParams};
use monoidal_core::program::{classify_m_i, expand, ord_n};
use monoidal_core::program_file::parse_program;
use monoidal_core::report::{run_fixture, Report};
use monoidal_core::syntax::{format_monomial, parse_monomial};
use monoidal_core::union::{divides_s, gcd_trace, intersect_principal, member_s, GcdStatus, Intersection};
use monoidal_core::{fixtures, ExponentVector, Limits, TransformProgram, Verdict};

/// Decide membership, divisibility, gcds and ring-theoretic properties of
/// monoidal transform sequences given as periodic programs.
#[derive(Parser, Debug)]
#[command(name = "monoidal-lab", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Program file (TOML).
    #[arg(long, global = true, conflicts_with = "builtin")]
    program: Option<PathBuf>,
    /// Built-in program name.
    #[arg(long, global = true)]
    builtin: Option<String>,
    /// Maximum number of stages any search walks.
    #[arg(long, global = true, default_value_t = 256)]
    cutoff: usize,
    /// Periods a recurrence must hold before it is trusted.
    #[arg(long, global = true, default_value_t = 3)]
    periods: usize,
    /// Box radius for valuation checks.
    #[arg(long, global = true, default_value_t = 4)]
    window: i64,
    /// Largest denominator allowed in localization searches.
    #[arg(long = "search-degree", global = true, default_value_t = 8)]
    search_degree: u64,
    /// Seed for the random pair battery.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a program file.
    Validate,
    /// Show the frame, locus and divisor of stage N.
    Stage { n: usize },
    /// Is w in S?
    Member { w: String },
    /// Does a divide b in S?
    Divides { a: String, b: String },
    /// Trace gcd_n(a, b) until it stabilizes or diverges.
    Gcd { a: String, b: String },
    /// Intersect the principal ideals a_1 S, ..., a_k S.
    Intersect {
        #[arg(required = true)]
        monomials: Vec<String>,
    },
    /// Order of w at a stage, or the boundary check without --stage.
    Ord {
        w: String,
        #[arg(long)]
        stage: Option<usize>,
    },
    /// Detect chain-prime ideals and decide their maximality.
    Chains,
    /// Run the full classification.
    Classify,
    /// Run the assertion battery of a built-in program.
    Fixture { name: String },
}

impl Opts {
    fn params(&self) -> ClassifyParams {
        ClassifyParams {
            limits: Limits {
                cutoff: self.cutoff,
                confirm_periods: self.periods,
            },
            periods: self.periods,
            window: self.window,
            search_degree: self.search_degree,
            seed: self.seed,
            ..ClassifyParams::default()
        }
    }

    fn load(&self) -> Result<(String, TransformProgram)> {
        match (&self.program, &self.builtin) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let program = parse_program(&text).map_err(|e| anyhow!("{}:\n{e}", path.display()))?;
                Ok((path.display().to_string(), program))
            }
            (None, Some(name)) => fixtures::by_name(name)
                .map(|p| (name.clone(), p))
                .ok_or_else(|| anyhow!("unknown built-in program {name:?}; expected one of {}", fixtures::NAMES.join(", "))),
            (None, None) => bail!("no program given; pass --program FILE or --builtin NAME"),
        }
    }
}

struct Output {
    verdicts: Value,
    text: Vec<String>,
    failed: bool,
}

impl Output {
    fn new(verdicts: Value, text: Vec<String>) -> Self {
        Self {
            verdicts,
            text,
            failed: false,
        }
    }
}

fn monomial(program: &TransformProgram, text: &str) -> Result<ExponentVector> {
    parse_monomial(text, program.variable_names()).map_err(|e| anyhow!("cannot parse monomial {text:?}: {e}"))
}

fn show(program: &TransformProgram, w: &ExponentVector) -> String {
    format_monomial(w, program.variable_names())
}

/// `wS`, parenthesizing compound monomials.
fn ideal(program: &TransformProgram, w: &ExponentVector) -> String {
    let m = show(program, w);
    if m.contains(['*', '/']) {
        format!("({m})S")
    } else {
        format!("{m}S")
    }
}

fn value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// `yes`, `no` or `unknown`, followed by the evidence in compact JSON.
fn describe(v: &Verdict) -> String {
    let evidence = match v {
        Verdict::Yes { witness } => value(witness),
        Verdict::No { certificate } => value(certificate),
        Verdict::Unknown { cutoff } => json!({ "cutoff": cutoff }),
    };
    format!("{} {evidence}", v.status())
}

fn run(command: &Command, opts: &Opts) -> Result<(Value, Output)> {
    let params = opts.params();
    let limits = params.limits;
    if let Command::Fixture { name } = command {
        let report = run_fixture(name, &params)?;
        let mut text = vec![format!("fixture {name}: {}", if report.passed { "pass" } else { "FAIL" })];
        for c in &report.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            text.push(format!("  {mark} {}{}", c.name, if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) }));
        }
        let mut out = Output::new(value(&report), text);
        out.failed = !report.passed;
        return Ok((json!({ "fixture": name }), out));
    }
    let (source, p) = opts.load()?;
    let program_value = value(&p);
    let mut args = json!({});
    let out = match command {
        Command::Validate => {
            let text = vec![format!(
                "valid: dimension {}, prefix {}, period {}, classify_M_i {}",
                p.dimension(),
                p.prefix_len(),
                p.period(),
                classify_m_i(&p)
            )];
            Output::new(json!({ "valid": true, "classify_m_i": classify_m_i(&p) }), text)
        }
        Command::Stage { n } => {
            args = json!({ "stage": n });
            let view = expand(&p, *n);
            let cols: Vec<String> = view.frame.columns().iter().map(|c| show(&p, c)).collect();
            let locus: Vec<String> = view.locus_monomials.iter().map(|c| show(&p, c)).collect();
            let text = vec![
                format!("stage {n}: parameters {}", cols.join(", ")),
                format!("locus ({}), divisor {}", locus.join(", "), show(&p, &view.divisor_monomial)),
                format!("determinant {}", view.frame.determinant()),
            ];
            Output::new(
                json!({
                    "stage": n,
                    "parameters": value(&view.frame.columns()),
                    "locus": value(&view.locus_monomials),
                    "divisor": value(&view.divisor_monomial),
                    "determinant": view.frame.determinant().to_string(),
                }),
                text,
            )
        }
        Command::Member { w } => {
            let v = monomial(&p, w)?;
            args = json!({ "w": value(&v) });
            let verdict = member_s(&p, &v, limits);
            Output::new(value(&verdict), vec![format!("{} ∈ S: {}", show(&p, &v), describe(&verdict))])
        }
        Command::Divides { a, b } => {
            let (a, b) = (monomial(&p, a)?, monomial(&p, b)?);
            args = json!({ "a": value(&a), "b": value(&b) });
            let verdict = divides_s(&p, &a, &b, limits);
            Output::new(
                value(&verdict),
                vec![format!("{} | {}: {}", show(&p, &a), show(&p, &b), describe(&verdict))],
            )
        }
        Command::Gcd { a, b } => {
            let (a, b) = (monomial(&p, a)?, monomial(&p, b)?);
            args = json!({ "a": value(&a), "b": value(&b) });
            let trace = gcd_trace(&p, &a, &b, limits)?;
            let head = format!("gcd({}, {})", show(&p, &a), show(&p, &b));
            let line = match &trace.status {
                GcdStatus::Stabilized { stage, .. } => {
                    format!("{head} stabilizes at stage {stage}: {}", show(&p, &trace.entries[*stage].gcd))
                }
                GcdStatus::Diverges { increment, .. } => format!("{head} diverges, growing by {} per period", show(&p, increment)),
                GcdStatus::Unknown { cutoff } => format!("{head} undecided within {cutoff} stages"),
            };
            Output::new(value(&trace), vec![line])
        }
        Command::Intersect { monomials } => {
            let ms = monomials.iter().map(|m| monomial(&p, m)).collect::<Result<Vec<_>>>()?;
            args = json!({ "monomials": value(&ms) });
            let result = intersect_principal(&p, &ms, limits)?;
            let shown: Vec<String> = ms.iter().map(|m| ideal(&p, m)).collect();
            let line = match &result {
                Intersection::Principal { generator, stage } => {
                    format!("{} = {} (stage {stage})", shown.join(" ∩ "), ideal(&p, generator))
                }
                Intersection::NotFinitelyGenerated { certificate } => {
                    format!("{} is not finitely generated {}", shown.join(" ∩ "), value(certificate))
                }
                Intersection::Unknown { cutoff } => format!("{} undecided within {cutoff} stages", shown.join(" ∩ ")),
            };
            Output::new(value(&result), vec![line])
        }
        Command::Ord { w, stage } => {
            let v = monomial(&p, w)?;
            args = json!({ "w": value(&v), "stage": stage });
            match stage {
                Some(n) => {
                    let ord = ord_n(&p, *n, &v);
                    Output::new(json!({ "ord": ord.to_string() }), vec![format!("ord_{n}({}) = {ord}", show(&p, &v))])
                }
                None => {
                    let verdict = boundary_ord_check(&p, &v, limits);
                    Output::new(
                        value(&verdict),
                        vec![format!("ord_n({}) ≥ 0 eventually: {}", show(&p, &v), describe(&verdict))],
                    )
                }
            }
        }
        Command::Chains => {
            let detection = detect_chains(&p, params.periods);
            let count = finitely_many_chains(&p, params.periods);
            let maximal: Vec<Verdict> = detection.chains.iter().map(|q| chainprime_maximal(&p, q, limits)).collect();
            let mut text = vec![format!("{} chain-primes: {}", detection.count(), describe(&count.verdict))];
            for (q, m) in detection.chains.iter().zip(&maximal) {
                text.push(format!("  {}: maximal {}", q.label, describe(m)));
            }
            Output::new(json!({ "detection": value(&detection), "count": value(&count), "maximal": value(&maximal) }), text)
        }
        Command::Classify => {
            let report = gcd_classify(&p, &source, &params);
            let mut text = vec![
                format!("classify_M_i: {}", report.m_i),
                format!("chain-primes: {} (complete: {})", report.chain_count, report.chains_complete),
            ];
            for c in &report.chains {
                text.push(format!("  {}: maximal {}, valuation {}", c.label, c.maximal.status(), c.valuation.status()));
            }
            text.push(format!("SBID: {}", describe(&report.sbid)));
            text.push(format!("GCD domain: {} via {:?}", report.gcd.status(), report.provenance));
            text.push(format!(
                "sampled pairs: {}, cross-validation failures: {}",
                report.sampled_pairs, report.cross_validation_failures
            ));
            text.push(format!("maximal ideal finitely generated: {}", describe(&report.noetherian.verdict)));
            Output::new(value(&report), text)
        }
        Command::Fixture { .. } => unreachable!("handled above"),
    };
    Ok((json!({ "program": program_value, "source": source, "arguments": args }), out))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Stage { .. } => "stage",
        Command::Member { .. } => "member",
        Command::Divides { .. } => "divides",
        Command::Gcd { .. } => "gcd",
        Command::Intersect { .. } => "intersect",
        Command::Ord { .. } => "ord",
        Command::Chains => "chains",
        Command::Classify => "classify",
        Command::Fixture { .. } => "fixture",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (input, out) = match run(&cli.command, &cli.opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if cli.opts.json {
        let mut parameters = input;
        parameters["settings"] = value(&cli.opts.params());
        let report = Report::new(command_name(&cli.command), parameters, out.verdicts, start.elapsed().as_millis() as u64);
        println!("{}", report.to_json());
    } else {
        for line in &out.text {
            println!("{line}");
        }
    }
    if out.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
