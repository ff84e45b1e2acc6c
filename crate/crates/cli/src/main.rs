//! `parfwd`: command-line front end for protocol spec files.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use parfwd_core::{
    check_capacity, compare_protocols, cutset_bounds, decoding_window, generate_constraints,
    make_instance, random_source_stream, run_schedule, source_region, verify_counting_identities,
    ChannelInputs, MessageId, OptimizeOptions, Optimum, ProtocolSpec, ReduceOptions, SpecDocument,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "parfwd", version, about = "Rate regions and checks for parity-forwarding protocols")]
struct Cli {
    /// Output format; `json` prints one record per line.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the decoding sets against the protocol rules.
    Validate { spec: PathBuf },
    /// List every generated rate constraint, tautologies included.
    Constraints { spec: PathBuf },
    /// Project the constraints onto the source rate.
    Region { spec: PathBuf },
    /// Print the cut-set bound for the spec's channel inputs.
    Cutset { spec: PathBuf },
    /// Reduce each cut to an achievable constraint under the spec's assumptions.
    CapacityCheck {
        spec: PathBuf,
        /// Maximum number of rewrite steps per cut.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Optimize both two-relay Gaussian protocols on the spec's network.
    Gaussian {
        spec: PathBuf,
        /// Grid points per search dimension.
        #[arg(long, default_value_t = 16)]
        grid: usize,
    },
    /// Run the binning schedule and check the counting identities.
    Simulate {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        blocks: usize,
    },
}

/// Exit status 1: the run completed and the answer is negative, or the
/// engine gave up. Exit status 2: the input could not be used at all.
enum Failure {
    Negative,
    Engine(String),
    Input(String),
}

impl Failure {
    fn engine(e: impl Display) -> Self {
        Failure::Engine(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Out {
    format: Format,
}

impl Out {
    fn text(&self, line: impl Display) {
        if self.format == Format::Text {
            println!("{line}");
        }
    }

    fn record(&self, value: Value) {
        if self.format == Format::Json {
            println!("{value}");
        }
    }
}

fn ids(set: &BTreeSet<MessageId>) -> String {
    let v: Vec<String> = set.iter().map(MessageId::to_string).collect();
    format!("{{{}}}", v.join(", "))
}

fn load(path: &Path) -> Result<(SpecDocument, ProtocolSpec), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc = SpecDocument::parse(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec = doc
        .to_spec()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((doc, spec))
}

fn validate(out: &Out, spec: &ProtocolSpec) -> Outcome {
    let report = spec.validate_decoding_sets();
    out.text(format_args!("{report}"));
    for t in &report.terminals {
        out.record(json!({ "kind": "terminal", "passes": t.passes(), "check": t }));
    }
    out.record(json!({ "kind": "verdict", "valid": report.is_valid() }));
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn constraints(out: &Out, spec: &ProtocolSpec) -> Outcome {
    let generated = generate_constraints(spec).map_err(Failure::engine)?;
    for e in &generated.entries {
        let mark = if e.tautology { "  (tautology)" } else { "" };
        out.text(format_args!(
            "D[{}] I={}: {}{mark}",
            e.terminal,
            ids(&e.subset),
            e.inequality
        ));
        out.record(json!({
            "terminal": e.terminal,
            "subset": e.subset,
            "inequality": e.inequality.to_string(),
            "tautology": e.tautology,
        }));
    }
    let system = generated.system();
    out.text(format_args!(
        "{} constraints, {} distinct non-tautological",
        generated.entries.len(),
        system.len()
    ));
    Ok(())
}

fn region(out: &Out, spec: &ProtocolSpec) -> Outcome {
    let region = source_region(spec).map_err(Failure::engine)?;
    for q in region.inequalities() {
        out.text(q);
        out.record(json!({ "inequality": q.to_string() }));
    }
    Ok(())
}

fn cutset(out: &Out, spec: &ProtocolSpec) -> Outcome {
    for (i, q) in cutset_bounds(&ChannelInputs::of(spec)).iter().enumerate() {
        out.text(format_args!("cut {i}: {q}"));
        out.record(json!({ "cut": i, "inequality": q.to_string() }));
    }
    Ok(())
}

fn capacity(out: &Out, spec: &ProtocolSpec, doc: &SpecDocument, depth: usize) -> Outcome {
    let region = source_region(spec).map_err(Failure::engine)?;
    let options = ReduceOptions {
        max_depth: depth,
        ..Default::default()
    };
    let report = check_capacity(&region, &ChannelInputs::of(spec), &doc.assumptions, options)
        .map_err(Failure::engine)?;
    out.text(format_args!("{report}").to_string().trim_end());
    for (i, cut) in report.cuts.iter().enumerate() {
        let matched = cut.matched.as_ref().map(|(j, d)| {
            json!({ "achievable": report.achievable[*j].to_string(), "steps": d.len() })
        });
        out.record(json!({ "cut": i, "inequality": cut.cut.to_string(), "matched": matched }));
    }
    let unmatched: Vec<String> = report
        .unmatched_achievable
        .iter()
        .map(|&j| report.achievable[j].to_string())
        .collect();
    out.record(json!({
        "verified": report.verified(),
        "matched_cuts": report.matched_cuts(),
        "cuts": report.cuts.len(),
        "unmatched_achievable": unmatched,
    }));
    if report.verified() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn describe(name: &str, o: &Optimum) -> String {
    let p = &o.params;
    format!(
        "protocol {name}: rate {:.4} (Q = {:.4}, {:.4}, {:.4}; a11 {:.4}, a12 {:.4}, a22 {:.4})",
        o.rate, p.q[0], p.q[1], p.q[2], p.a11, p.a12, p.a22
    )
}

fn gaussian(out: &Out, spec: &ProtocolSpec, doc: &SpecDocument, grid: usize) -> Outcome {
    let Some(net) = doc.gaussian else {
        return Err(Failure::Input("spec has no gaussian section".into()));
    };
    if spec.relays() != 2 {
        return Err(Failure::Input(format!(
            "the Gaussian protocols need 2 relays, spec has {}",
            spec.relays()
        )));
    }
    if grid < 2 {
        return Err(Failure::Input("--grid must be at least 2".into()));
    }
    let options = OptimizeOptions {
        resolution: grid,
        ..Default::default()
    };
    let c = compare_protocols(&net, options);
    let margin = c.b.rate - c.a.rate;
    out.text(describe("A", &c.a));
    out.text(describe("B", &c.b));
    out.text(format_args!("margin B - A: {margin:.4}"));
    out.record(json!({ "protocol": "A", "optimum": c.a }));
    out.record(json!({ "protocol": "B", "optimum": c.b }));
    out.record(json!({ "margin": margin }));
    Ok(())
}

fn simulate(out: &Out, spec: &ProtocolSpec, doc: &SpecDocument, seed: u64, blocks: usize) -> Outcome {
    let Some(sizes) = &doc.sizes else {
        return Err(Failure::Input("spec has no sizes section".into()));
    };
    let depth = spec.tree().depth();
    if blocks <= depth {
        return Err(Failure::Input(format!(
            "--blocks must exceed the tree depth ({depth})"
        )));
    }
    let instance = make_instance(spec, sizes, seed).map_err(|e| Failure::Input(e.to_string()))?;
    let stream = random_source_stream(&instance, blocks, seed);
    let trace = run_schedule(&instance, spec, blocks, &stream).map_err(Failure::engine)?;
    let violations = trace.timing_violations(&instance);

    out.text(trace.to_table(spec).trim_end());
    for t in 1..=blocks {
        for m in spec.tree().nodes() {
            if let Some(v) = trace.value(t, m) {
                out.record(json!({ "block": t, "message": m, "value": v }));
            }
        }
    }
    out.text(format_args!("timing violations: {}", violations.len()));

    let mut ok = violations.is_empty();
    for k in 1..=spec.destination() {
        let window = decoding_window(spec, k, blocks as i64).map_err(Failure::engine)?;
        out.text(format_args!(
            "{} decodes blocks {}..={} at block {blocks}",
            doc.terminal_name(k),
            window.start(),
            window.end()
        ));
        out.record(json!({
            "terminal": k,
            "window": [window.start(), window.end()],
        }));
    }
    for k in 1..=spec.destination() {
        let report = verify_counting_identities(&instance, spec, k).map_err(Failure::engine)?;
        ok &= report.passes();
        out.text(&report);
        out.record(json!({ "counting": report, "passes": report.passes() }));
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn run(cli: &Cli) -> Outcome {
    let out = Out { format: cli.format };
    match &cli.command {
        Command::Validate { spec } => validate(&out, &load(spec)?.1),
        Command::Constraints { spec } => constraints(&out, &load(spec)?.1),
        Command::Region { spec } => region(&out, &load(spec)?.1),
        Command::Cutset { spec } => cutset(&out, &load(spec)?.1),
        Command::CapacityCheck { spec, depth } => {
            let (doc, spec) = load(spec)?;
            capacity(&out, &spec, &doc, *depth)
        }
        Command::Gaussian { spec, grid } => {
            let (doc, spec) = load(spec)?;
            gaussian(&out, &spec, &doc, *grid)
        }
        Command::Simulate { spec, seed, blocks } => {
            let (doc, spec) = load(spec)?;
            simulate(&out, &spec, &doc, *seed, *blocks)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Engine(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
