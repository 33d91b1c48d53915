use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crossdep::crossdep::DepGraph;
use crossdep::homesim::{run, train, History, Scenario, SimError, SimParams};
use crossdep::ontology::{ConceptId, Ontology};
use crossdep::rules::{parse_rules, Rule};
use crossdep::seed::{parse_requirements, Requirement, Stakeholder};
use crossdep::text::{parse_links, parse_ontology, ParseError};

/// Exit status classes.
enum Failure {
    /// Validation failures, unknown ids, invalid scenarios.
    Domain(String),
    /// Bad flags, unreadable or malformed input.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

type CmdResult = Result<String, Failure>;

#[derive(Parser)]
#[command(
    name = "crossdep",
    version,
    about = "Smart-home / ICT ontology queries and standby-shutdown simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Occupancy slot length in minutes; must divide 1440.
    #[arg(long, default_value_t = 30)]
    slot: u32,
    /// Prediction threshold in [0, 1].
    #[arg(long, default_value_t = 0.2, value_parser = parse_theta)]
    theta: f64,
    /// Default look-ahead for predicted_occupied, in minutes.
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u32).range(1..))]
    horizon: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Check .onto, .links and .rules files and report every diagnostic.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print an ontology as an indented tree.
    Tree {
        file: PathBuf,
        /// Print only the descendants of this concept.
        #[arg(long)]
        root: Option<String>,
        /// Number of levels to print.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: Option<u32>,
    },
    /// List dependency paths between two concepts.
    Paths {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        max_len: u32,
        /// Ontology files; defaults to the shipped seeds.
        #[arg(long = "onto")]
        ontos: Vec<PathBuf>,
        /// Link files; defaults to the shipped case-study links.
        #[arg(long = "links")]
        links: Vec<PathBuf>,
    },
    /// Query the stakeholder requirement table.
    Requirements {
        #[arg(long, conflicts_with = "concept", required_unless_present = "concept")]
        stakeholder: Option<String>,
        #[arg(long)]
        concept: Option<String>,
        /// With --concept, also match requirements mapped below the concept.
        #[arg(long, requires = "concept")]
        descendants: bool,
    },
    /// Ask the trained occupancy model about one room and time.
    Predict {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        room: String,
        /// Minute since the start of the run.
        #[arg(long)]
        at: u32,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the baseline and controlled passes of a scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Rule file; omitted means no rules.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn seeds_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os("CROSSDEP_SEEDS") {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::current_exe()
        .ok()
        .and_then(|exe| exe.parent().map(|p| p.join("seeds")))
        .filter(|d| d.is_dir())
    {
        return dir;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../seeds")
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn located(path: &Path, err: ParseError) -> String {
    err.with_file(path.display().to_string()).to_string()
}

fn load_onto(path: &Path) -> Result<Ontology, Failure> {
    parse_ontology(&read(path)?).map_err(|e| Failure::Usage(located(path, e)))
}

fn qid(s: &str) -> Result<ConceptId, Failure> {
    s.parse()
        .map_err(|e| Failure::Domain(format!("bad concept id `{s}`: {e}")))
}

fn load_graph(ontos: &[PathBuf], links: &[PathBuf]) -> Result<DepGraph, Failure> {
    let seeds = seeds_dir();
    let ontos: Vec<PathBuf> = if ontos.is_empty() {
        vec![seeds.join("smart_home.onto"), seeds.join("ict.onto")]
    } else {
        ontos.to_vec()
    };
    let links: Vec<PathBuf> = if links.is_empty() {
        vec![seeds.join("case_study.links")]
    } else {
        links.to_vec()
    };
    let ontologies = ontos.iter().map(|p| load_onto(p)).collect::<Result<Vec<_>, _>>()?;
    let mut all_links = Vec::new();
    for path in &links {
        all_links.extend(parse_links(&read(path)?, &ontologies).map_err(|e| Failure::Usage(located(path, e)))?);
    }
    DepGraph::new(ontologies, all_links).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let scenario = Scenario::from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    scenario
        .validate()
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    Ok(scenario)
}

fn load_rules(path: Option<&Path>) -> Result<Vec<Rule>, Failure> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_rules(&read(p)?).map_err(|e| Failure::Usage(located(p, e))),
    }
}

fn cmd_validate(files: &[PathBuf]) -> CmdResult {
    let seeds = seeds_dir();
    let texts = files.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;

    // Links resolve against the shipped seeds plus any ontologies given here.
    let mut ontologies: Vec<Ontology> = Vec::new();
    for (path, text) in files.iter().zip(&texts) {
        if path.extension().is_some_and(|e| e == "onto") {
            if let Ok(o) = parse_ontology(text) {
                ontologies.push(o);
            }
        }
    }
    for name in ["smart_home.onto", "ict.onto"] {
        if let Ok(Ok(o)) = fs::read_to_string(seeds.join(name)).map(|t| parse_ontology(&t)) {
            if !ontologies.iter().any(|x| x.slug() == o.slug()) {
                ontologies.push(o);
            }
        }
    }

    let mut out = String::new();
    for (path, text) in files.iter().zip(&texts) {
        let result = match path.extension().and_then(|e| e.to_str()) {
            Some("onto") => parse_ontology(text).map(drop),
            Some("links") => parse_links(text, &ontologies).map(drop),
            Some("rules") => parse_rules(text).map(drop),
            _ => {
                return Err(Failure::Usage(format!(
                    "{}: expected a .onto, .links or .rules file",
                    path.display()
                )))
            }
        };
        if let Err(e) = result {
            out.push_str(&located(path, e));
            out.push('\n');
        }
    }
    if out.is_empty() {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Domain(String::new()))
    }
}

fn cmd_tree(file: &Path, root: Option<&str>, depth: Option<u32>) -> CmdResult {
    let onto = load_onto(file)?;
    let rows: Vec<(usize, &crossdep::ontology::Concept)> = match root {
        None => onto.preorder(),
        Some(r) => {
            let id = qid(r)?;
            if !onto.contains(&id) {
                return Err(Failure::Domain(format!("unknown concept {id}")));
            }
            onto.preorder_from(&id)
                .into_iter()
                .skip(1)
                .map(|(d, c)| (d - 1, c))
                .collect()
        }
    };
    let limit = depth.map_or(usize::MAX, |d| d as usize);
    let mut out = String::new();
    for (d, c) in rows.into_iter().filter(|(d, _)| *d < limit) {
        out.push_str(&format!(
            "{}{} {} ({})\n",
            "  ".repeat(d),
            c.kind().keyword(),
            c.label(),
            c.id()
        ));
    }
    Ok(out)
}

fn cmd_paths(from: &str, to: &str, max_len: u32, ontos: &[PathBuf], links: &[PathBuf]) -> CmdResult {
    let graph = load_graph(ontos, links)?;
    let (from, to) = (qid(from)?, qid(to)?);
    let paths = graph
        .find_paths(&from, &to, max_len as usize)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    if paths.is_empty() {
        return Ok("no paths\n".to_owned());
    }
    Ok(paths.iter().map(|p| format!("{}\n", p.render())).collect())
}

fn cmd_requirements(stakeholder: Option<&str>, concept: Option<&str>, descendants: bool) -> CmdResult {
    let path = seeds_dir().join("requirements.tsv");
    let reqs: Vec<Requirement> = parse_requirements(&read(&path)?).map_err(|e| Failure::Usage(located(&path, e)))?;
    let rows: Vec<&Requirement> = match (stakeholder, concept) {
        (Some(s), _) => {
            let s: Stakeholder = s
                .parse()
                .map_err(|e: crossdep::seed::UnknownStakeholder| Failure::Domain(e.to_string()))?;
            reqs.iter().filter(|r| r.stakeholder == s).collect()
        }
        (None, Some(c)) => {
            let graph = load_graph(&[], &[])?;
            let hits = graph
                .requirements_for_concept(&reqs, &qid(c)?, descendants)
                .map_err(|e| Failure::Domain(e.to_string()))?;
            reqs.iter()
                .filter(|r| hits.contains(&(r.stakeholder, r.index)))
                .collect()
        }
        (None, None) => unreachable!("clap requires one selector"),
    };
    Ok(rows.iter().map(|r| format!("{}\n", r.tsv_row())).collect())
}

fn cmd_predict(scenario: &Path, room: &str, at: u32, model: &ModelArgs) -> CmdResult {
    let scenario = load_scenario(scenario)?;
    if !scenario.rooms.iter().any(|r| r == room) {
        return Err(Failure::Domain(format!("unknown room `{room}`")));
    }
    let m = train::<f64>(&History::from_scenario(&scenario), model.slot)
        .and_then(|m| m.with_threshold(model.theta))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(format!("{}\n", m.predicted_occupied(room, at, model.horizon)))
}

fn cmd_simulate(scenario: &Path, rules: Option<&Path>, model: &ModelArgs, out: OutFormat) -> CmdResult {
    let rules = load_rules(rules)?;
    let scenario = load_scenario(scenario)?;
    let params = SimParams {
        slot_minutes: model.slot,
        threshold: model.theta,
        horizon_min: model.horizon,
    };
    let report = run::<f64>(&scenario, &rules, &params).map_err(|e| match e {
        SimError::Scenario(_) => Failure::Domain(e.to_string()),
        SimError::Model(_) | SimError::Unrepresentable(_) => Failure::Usage(e.to_string()),
    })?;
    Ok(match out {
        OutFormat::Json => report.to_json(),
        OutFormat::Text => report.to_text(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { files } => cmd_validate(files),
        Command::Tree { file, root, depth } => cmd_tree(file, root.as_deref(), *depth),
        Command::Paths {
            from,
            to,
            max_len,
            ontos,
            links,
        } => cmd_paths(from, to, *max_len, ontos, links),
        Command::Requirements {
            stakeholder,
            concept,
            descendants,
        } => cmd_requirements(stakeholder.as_deref(), concept.as_deref(), *descendants),
        Command::Predict {
            scenario,
            room,
            at,
            model,
        } => cmd_predict(scenario, room, *at, model),
        Command::Simulate {
            scenario,
            rules,
            model,
            out,
        } => cmd_simulate(scenario, rules.as_deref(), model, *out),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (Failure::Domain(msg) | Failure::Usage(msg)) = &f;
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}
