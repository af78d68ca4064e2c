//! Command-line front end.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cdiff::{green_check, lift_linearize, linearize, CDiffOperator, OperatorJson};
use crate::corpus;
use crate::error::Error;
use crate::idf::{liouville_lift, SlotSet};
use crate::jet::{parse_system, EquationSystem};
use crate::linalg::SystemDims;
use crate::selftest::{all_suites, SuiteReport};
use crate::solver::{cosymmetries, space_for, symmetries, AnsatzSpace, KernelBasis};
use crate::spectral::two_lines_report;

#[derive(Parser, Debug)]
#[command(
    name = "diffiety",
    version,
    about = "Jet calculus and bounded-order C-spectral computations for evolution systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a system and check that it is in evolution form.
    Check(Io),
    /// Print the universal linearization.
    Linearize(Io),
    /// Print the formal adjoint of the linearization.
    Adjoint(Io),
    /// Kernel of the restricted linearization within an ansatz.
    Symmetries(SolveArgs),
    /// Kernel of the restricted adjoint linearization within an ansatz.
    Cosymmetries(SolveArgs),
    /// Print the lifted family and the blocks of its linearization at level k.
    Lift(LiftArgs),
    /// First-term report for column p at level k.
    E1(E1Args),
    /// Verify the Green identity for the linearization.
    GreenCheck(Io),
    /// Run the randomized property suites.
    Selftest(SelftestArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct Output {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct Io {
    /// System file, or the name of a built-in system (heat, burgers, kdv, transport, wave2).
    pub input: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct Bounds {
    /// Jet order N of the unknowns.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Polynomial degree D of the unknowns.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Cartan word length c of the left factors.
    #[arg(long, default_value_t = 0)]
    pub cartan: usize,
    /// Use Cartan words of length exactly c.
    #[arg(long)]
    pub cartan_exact: bool,
    /// Allow explicit x, t dependence.
    #[arg(long)]
    pub xt: bool,
    /// Only unknowns in blocks (j, L) with |L| equal to this.
    #[arg(long)]
    pub slot_degree: Option<usize>,
    /// Report wall-clock time.
    #[arg(long)]
    pub timing: bool,
}

impl Bounds {
    fn ansatz(&self) -> AnsatzSpace {
        AnsatzSpace::new(self.order, self.degree)
            .with_xt(self.xt)
            .with_cartan(self.cartan, self.cartan_exact)
            .with_slot_degree(self.slot_degree)
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub io: Io,
    #[command(flatten)]
    pub bounds: Bounds,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct E1Args {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Keep only the cell of this row.
    #[arg(long)]
    pub q: Option<usize>,
    #[command(flatten)]
    pub bounds: Bounds,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cases per suite.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[command(flatten)]
    pub output: Output,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Computation(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Computation(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Computation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn load_source(input: &str) -> Run<String> {
    let path = Path::new(input);
    if path.exists() {
        return std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read `{input}`: {e}")));
    }
    let name = input.strip_suffix(".eq").unwrap_or(input);
    corpus::find(name)
        .map(|e| e.source.to_string())
        .ok_or_else(|| Failure::Usage(format!("no such file or built-in system: `{input}`")))
}

fn load_system(input: &str) -> Run<EquationSystem> {
    Ok(EquationSystem::from_raw(parse_system(&load_source(
        input,
    )?)?)?)
}

fn check_level(k: usize) -> Run<()> {
    if k == 0 || k > SlotSet::MAX_SLOT {
        return Err(Failure::Usage(format!(
            "--k {k}: level must be in 1..={}",
            SlotSet::MAX_SLOT
        )));
    }
    Ok(())
}

fn emit(output: &Output, text: String, json: impl Serialize) -> Run<()> {
    let body = match output.format {
        Format::Text => text,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json)
                .map_err(|e| Failure::Computation(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &output.out {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| Failure::Usage(format!("cannot write `{p}`: {e}")))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .map_err(|e| Failure::Computation(e.to_string()))
        }
    }
}

#[derive(Serialize)]
struct CheckJson {
    system: String,
    normal_form: bool,
    diagnostics: Vec<String>,
}

fn run_check(io: &Io) -> Run<()> {
    let raw = parse_system(&load_source(&io.input)?)?;
    let report = raw.is_normal_form();
    let mut text = if report.ok {
        format!(
            "{}: evolution form, {} equation(s)\n",
            raw.name,
            raw.equations.len()
        )
    } else {
        format!("{}: not in evolution form\n", raw.name)
    };
    for d in &report.diagnostics {
        text.push_str(&format!("  {d}\n"));
    }
    emit(
        &io.output,
        text,
        CheckJson {
            system: raw.name.clone(),
            normal_form: report.ok,
            diagnostics: report.diagnostics.clone(),
        },
    )?;
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Computation(
            "system is not in evolution form".into(),
        ))
    }
}

#[derive(Serialize)]
struct OperatorReport {
    system: String,
    operator: OperatorJson,
    restricted: OperatorJson,
}

fn run_operator(io: &Io, adjoint: bool) -> Run<()> {
    let sys = load_system(&io.input)?;
    let space = space_for(&sys, 1)?;
    let mut op = linearize(&sys);
    if adjoint {
        op = op.adjoint();
    }
    let restricted = op.restrict(&sys, &space)?;
    let text = format!(
        "{}\non the equation: {}\n",
        op.display(&space),
        restricted.display(&space)
    );
    emit(
        &io.output,
        text,
        OperatorReport {
            system: sys.name().to_string(),
            operator: op.to_json(&space),
            restricted: restricted.to_json(&space),
        },
    )
}

#[derive(Serialize)]
struct AnsatzJson {
    #[serde(rename = "N")]
    order: usize,
    #[serde(rename = "D")]
    degree: usize,
    c: usize,
    cartan_exact: bool,
    xt: bool,
    size: usize,
}

#[derive(Serialize)]
struct SolveJson {
    system: String,
    operator: String,
    ansatz: AnsatzJson,
    kernel: Vec<String>,
    dim: usize,
    dims: SystemDims,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

fn run_solve(args: &SolveArgs, cosym: bool) -> Run<()> {
    let sys = load_system(&args.io.input)?;
    let space = space_for(&sys, 1)?;
    let ansatz = args.bounds.ansatz();
    let start = Instant::now();
    let basis: KernelBasis = if cosym {
        cosymmetries(&sys, &ansatz)?
    } else {
        symmetries(&sys, &ansatz)?
    };
    let elapsed = start.elapsed().as_millis();
    let kernel = basis.display_all(&space);
    let name = if cosym {
        "adjoint linearization"
    } else {
        "linearization"
    };
    let mut text = format!(
        "{} of {}: kernel dim {} at N = {}, D = {}{} (system {}x{}, rank {})\n",
        name,
        sys.name(),
        kernel.len(),
        ansatz.order,
        ansatz.degree,
        if ansatz.xt { ", x/t allowed" } else { "" },
        basis.dims.rows,
        basis.dims.cols,
        basis.dims.rank
    );
    for k in &kernel {
        text.push_str(&format!("    {k}\n"));
    }
    if args.bounds.timing {
        text.push_str(&format!("time {elapsed} ms\n"));
    }
    emit(
        &args.io.output,
        text,
        SolveJson {
            system: sys.name().to_string(),
            operator: name.to_string(),
            ansatz: AnsatzJson {
                order: ansatz.order,
                degree: ansatz.degree,
                c: ansatz.cartan,
                cartan_exact: ansatz.cartan_exact,
                xt: ansatz.xt,
                size: basis.ansatz_size(),
            },
            dim: kernel.len(),
            kernel,
            dims: basis.dims.clone(),
            timing_ms: args.bounds.timing.then_some(elapsed),
        },
    )
}

#[derive(Serialize)]
struct LiftEntryJson {
    component: usize,
    slots: Vec<usize>,
    form: String,
}

#[derive(Serialize)]
struct BlockJson {
    row_slots: Vec<usize>,
    col_slots: Vec<usize>,
    operator: String,
}

#[derive(Serialize)]
struct LiftJson {
    system: String,
    k: usize,
    lift: Vec<LiftEntryJson>,
    blocks: Vec<BlockJson>,
    operator: OperatorJson,
}

fn run_lift(args: &LiftArgs) -> Run<()> {
    check_level(args.k)?;
    let sys = load_system(&args.io.input)?;
    let space = space_for(&sys, args.k)?;
    let lift = liouville_lift(&sys.defining_functions(), &space, args.k)?;
    let op = lift_linearize(&sys, args.k, &space)?;
    let mut text = format!("lift of {} at level {}\n", sys.name(), args.k);
    let mut entries = Vec::new();
    for c in &lift {
        let form = space.display(&c.form);
        text.push_str(&format!("  F[{}]{{{}}} = {}\n", c.component, c.slots, form));
        entries.push(LiftEntryJson {
            component: c.component,
            slots: c.slots.slots(),
            form,
        });
    }
    let mut blocks = Vec::new();
    let sets: Vec<SlotSet> = SlotSet::full(args.k - 1).subsets();
    for &r in &sets {
        for &c in &sets {
            let rows = CDiffOperator::indices_with_slots(op.row_labels(), r);
            let cols = CDiffOperator::indices_with_slots(op.col_labels(), c);
            let b = op.block(&rows, &cols);
            if b.is_zero() {
                continue;
            }
            let shown = b.display(&space);
            text.push_str(&format!("  block {{{r}}} x {{{c}}}: {shown}\n"));
            blocks.push(BlockJson {
                row_slots: r.slots(),
                col_slots: c.slots(),
                operator: shown,
            });
        }
    }
    emit(
        &args.io.output,
        text,
        LiftJson {
            system: sys.name().to_string(),
            k: args.k,
            lift: entries,
            blocks,
            operator: op.to_json(&space),
        },
    )
}

#[derive(Serialize)]
struct TimedReport<T: Serialize> {
    #[serde(flatten)]
    report: T,
    timing_ms: u128,
}

fn run_e1(args: &E1Args) -> Run<()> {
    check_level(args.k)?;
    if args.p == 0 {
        return Err(Failure::Usage(
            "--p 0: the p = 0 column is covered by the note in any p >= 1 report".into(),
        ));
    }
    let sys = load_system(&args.io.input)?;
    if let Some(q) = args.q {
        if q > sys.n() {
            return Err(Failure::Usage(format!(
                "--q {q}: rows run over 0..={}",
                sys.n()
            )));
        }
    }
    let start = Instant::now();
    let mut report = two_lines_report(&sys, args.k, args.p, &args.bounds.ansatz())?;
    let elapsed = start.elapsed().as_millis();
    if let Some(q) = args.q {
        report.cells.retain(|c| c.q == Some(q));
    }
    let mut text = report.to_text();
    if args.bounds.timing {
        text.push_str(&format!("time {elapsed} ms\n"));
        return emit(
            &args.io.output,
            text,
            TimedReport {
                report,
                timing_ms: elapsed,
            },
        );
    }
    emit(&args.io.output, text, report)
}

#[derive(Serialize)]
struct GreenJson {
    system: String,
    operator: String,
    adjoint: String,
    holds: bool,
}

fn run_green(io: &Io) -> Run<()> {
    let sys = load_system(&io.input)?;
    let space = space_for(&sys, 1)?;
    let op = linearize(&sys);
    let holds = green_check(&op, &space)?;
    let text = format!(
        "Green identity for the linearization of {}: {}\n",
        sys.name(),
        if holds { "holds" } else { "FAILS" }
    );
    emit(
        &io.output,
        text,
        GreenJson {
            system: sys.name().to_string(),
            operator: op.display(&space),
            adjoint: op.adjoint().display(&space),
            holds,
        },
    )?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Computation("Green identity fails".into()))
    }
}

fn run_selftest(args: &SelftestArgs) -> Run<()> {
    let reports: Vec<SuiteReport> = all_suites(args.cases, args.seed);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!(
            "{:<12} {:>5} cases  {} failures{}\n",
            r.name,
            r.cases,
            r.failures,
            if r.failed_cases.is_empty() {
                String::new()
            } else {
                format!("  (cases {:?})", r.failed_cases)
            }
        ));
    }
    emit(&args.output, text, &reports)?;
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        Err(Failure::Computation("property suite failures".into()))
    }
}

pub fn execute(cli: &Cli) -> Run<()> {
    match &cli.command {
        Command::Check(io) => run_check(io),
        Command::Linearize(io) => run_operator(io, false),
        Command::Adjoint(io) => run_operator(io, true),
        Command::Symmetries(a) => run_solve(a, false),
        Command::Cosymmetries(a) => run_solve(a, true),
        Command::Lift(a) => run_lift(a),
        Command::E1(a) => run_e1(a),
        Command::GreenCheck(io) => run_green(io),
        Command::Selftest(a) => run_selftest(a),
    }
}

/// Parses `argv` and runs it, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}
