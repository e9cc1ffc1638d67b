use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use frel::classical::{enumerate_structures, AbelianGroupoid, ClassicalStructure};
use frel::cpm::{compose_cpm, CpmMap, MixedStateGraph};
use frel::decoherence::{decohere_fast, search_alternative_decoherence, SearchMode};
use frel::locality::{
    bell_example, build_local_map, construct_lhv, empirical_model, MeasurementScenario, DEFAULT_LOCAL_MAP_BUDGET,
};
use frel::measurement::{build_measurement, decompose_demolition, random_measurement, Measurement};
use frel::relcore::{FiniteSet, Rel};
use frel::selfcheck::{run_all, Level};

#[derive(Parser)]
#[command(name = "frel", version, about = "Finite relations as a toy quantum theory")]
struct Cli {
    /// Seed for randomised verbs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the machine-readable JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the artifact to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Inputs are file paths or inline JSON.
#[derive(Subcommand)]
enum Command {
    /// List every classical structure on an n-element set.
    EnumerateStructures {
        #[arg(long)]
        size: usize,
    },
    /// Compose two CPM maps, first then second.
    Compose {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Decohere a state in a classical structure.
    Decohere {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        state: String,
    },
    /// Look for a decoherence map other than the standard one.
    SearchAltDec {
        #[arg(long)]
        structure: String,
        /// Samples when the carrier is too large to search exhaustively.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Build a measurement from an isometry, or a random one on a set.
    Measure {
        #[arg(long, requires = "structure", conflicts_with = "random_size")]
        isometry: Option<String>,
        #[arg(long)]
        structure: Option<String>,
        #[arg(long)]
        random_size: Option<usize>,
    },
    /// Decompose a demolition measurement into decoherence and a function.
    DecomposeMeasurement {
        #[arg(long, conflicts_with = "random_size")]
        measurement: Option<String>,
        #[arg(long)]
        random_size: Option<usize>,
    },
    /// Tabulate the empirical model of a state in a scenario.
    Model {
        #[arg(long)]
        state: String,
        #[arg(long)]
        scenario: String,
    },
    /// Construct a local hidden variable; defaults to a bundled Bell-like example.
    CheckLocal {
        #[arg(long, requires = "scenario")]
        state: Option<String>,
        #[arg(long, requires = "state")]
        scenario: Option<String>,
    },
    /// Build the wiring of the local map for a scenario.
    LocalMap {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = DEFAULT_LOCAL_MAP_BUDGET)]
        budget: usize,
    },
    /// Render a state as a DOT graph.
    ExportDot {
        #[arg(long)]
        state: String,
        #[arg(long, default_value = "state")]
        name: String,
    },
    /// Run the acceptance checks.
    SelfTest {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

enum Failure {
    Domain(frel::Error),
    Input(String),
}

impl From<frel::Error> for Failure {
    fn from(e: frel::Error) -> Self {
        Failure::Domain(e)
    }
}

/// What a verb produced: a human summary and the artifact for `--json`
/// and `--output`.
struct Report {
    summary: String,
    artifact: Artifact,
    ok: bool,
}

enum Artifact {
    Json(Value),
    Text(String),
}

fn load<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T, Failure> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{arg}: {e}")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialise")
}

fn ok(summary: String, artifact: Value) -> Result<Report, Failure> {
    Ok(Report { summary, artifact: Artifact::Json(artifact), ok: true })
}

fn describe_state(rho: &MixedStateGraph) -> String {
    format!(
        "state on {} elements: nodes {:?}, edges {:?}",
        rho.carrier().size(),
        rho.nodes(),
        rho.edges()
    )
}

fn measurement_summary(m: &Measurement) -> String {
    let mut lines = vec![format!(
        "measurement on {} elements with {} outcomes in {}",
        m.system().size(),
        m.outcome_count(),
        m.outcome().groupoid
    )];
    for l in 0..m.outcome_count() {
        let r = m.outcome_relation(l).expect("outcome in range");
        lines.push(format!("  outcome {l}: R = {:?}", r.pairs().collect::<Vec<_>>()));
    }
    lines.join("\n")
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::EnumerateStructures { size } => {
            let all = enumerate_structures(*size)?;
            let lines: Vec<String> = all.iter().map(|g| g.to_string()).collect();
            ok(format!("{} structures on {size} elements\n{}", all.len(), lines.join("\n")), to_value(&all))
        }
        Command::Compose { first, second } => {
            let f: CpmMap = load(first)?;
            let g: CpmMap = load(second)?;
            let h = compose_cpm(&f, &g)?;
            let summary = format!(
                "map {} -> {} with Choi graph of {} nodes and {} edges",
                h.dom().size(),
                h.cod().size(),
                h.graph().nodes().len(),
                h.graph().edges().len()
            );
            ok(summary, to_value(&h))
        }
        Command::Decohere { structure, state } => {
            let g: AbelianGroupoid = load(structure)?;
            let rho: MixedStateGraph = load(state)?;
            let out = decohere_fast(&ClassicalStructure::new(g), &rho)?;
            ok(describe_state(&out), to_value(&out))
        }
        Command::SearchAltDec { structure, samples } => {
            let c = ClassicalStructure::new(load::<AbelianGroupoid>(structure)?);
            let mode = SearchMode::auto(&c, *samples, cli.seed);
            let report = search_alternative_decoherence(&c, mode)?;
            let kind = if mode == SearchMode::Exhaustive { "exhaustive" } else { "sampled" };
            let summary = match &report.witness {
                Some(w) => format!(
                    "{kind}: {} candidates, witness with {} Choi edges",
                    report.candidates,
                    w.graph().edges().len()
                ),
                None => format!("{kind}: {} candidates, no witness", report.candidates),
            };
            ok(summary, json!({ "mode": kind, "candidates": report.candidates, "witness": report.witness }))
        }
        Command::Measure { isometry, structure, random_size } => {
            let m = match (isometry, structure, random_size) {
                (Some(p), Some(s), None) => {
                    let p: Rel = load(p)?;
                    build_measurement(&p, &ClassicalStructure::new(load(s)?))?
                }
                (None, _, Some(n)) => random_measurement(&FiniteSet::new(*n), cli.seed)?,
                _ => return Err(Failure::Input("give --isometry with --structure, or --random-size".into())),
            };
            ok(measurement_summary(&m), to_value(&m))
        }
        Command::DecomposeMeasurement { measurement, random_size } => {
            let m = match (measurement, random_size) {
                (Some(path), None) => load::<Measurement>(path)?,
                (None, Some(n)) => random_measurement(&FiniteSet::new(*n), cli.seed)?,
                _ => return Err(Failure::Input("give --measurement or --random-size".into())),
            };
            let d = decompose_demolition(&m)?;
            let summary = format!(
                "{}\nstructure on X: {}\nf = {:?}",
                measurement_summary(&m),
                d.x_structure.groupoid,
                d.f
            );
            ok(summary, json!({ "measurement": m, "x_structure": d.x_structure.groupoid, "f": d.f }))
        }
        Command::Model { state, scenario } => {
            let rho: MixedStateGraph = load(state)?;
            let s: MeasurementScenario = load(scenario)?;
            let e = empirical_model(&rho, &s)?;
            let lines: Vec<String> = e
                .tables()
                .iter()
                .enumerate()
                .map(|(m, t)| format!("context {m}: {:?}", t.support()))
                .collect();
            ok(lines.join("\n"), to_value(&e))
        }
        Command::CheckLocal { state, scenario } => {
            let (rho, s) = match (state, scenario) {
                (Some(r), Some(s)) => (load(r)?, load(s)?),
                _ => bell_example(),
            };
            let lhv = construct_lhv(&rho, &s)?;
            let artifact = to_value(&lhv);
            let pretty = serde_json::to_string_pretty(&artifact).expect("json");
            ok(format!("LOCAL\n{pretty}"), artifact)
        }
        Command::LocalMap { scenario, budget } => {
            let s: MeasurementScenario = load(scenario)?;
            let lm = build_local_map(&s, *budget)?;
            let summary = format!(
                "local map {} -> {} elements, inputs (party, class) {:?}, outputs (context, party) {:?}",
                lm.map.dom().size(),
                lm.map.cod().size(),
                lm.inputs,
                lm.outputs
            );
            ok(summary, json!({ "inputs": lm.inputs, "outputs": lm.outputs, "map": lm.map }))
        }
        Command::ExportDot { state, name } => {
            let rho: MixedStateGraph = load(state)?;
            let dot = rho.to_dot(name);
            Ok(Report { summary: dot.clone(), artifact: Artifact::Text(dot), ok: true })
        }
        Command::SelfTest { level } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let outcomes = run_all(level);
            let passed = outcomes.iter().all(|o| o.passed);
            let lines: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
            Ok(Report { summary: lines.join("\n"), artifact: Artifact::Json(to_value(&outcomes)), ok: passed })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = match &report.artifact {
        Artifact::Json(v) => serde_json::to_string_pretty(v).expect("json"),
        Artifact::Text(t) => t.clone(),
    };
    let shown = if cli.json { &rendered } else { &report.summary };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{shown}");
    if let Some(path) = &cli.output {
        if let Err(e) = fs::write(path, format!("{rendered}\n")) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
