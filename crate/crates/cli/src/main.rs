use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use graceful_transfer::classify::{classify_tree, recenter, ClassId};
use graceful_transfer::constructors::{
    dispatch_label, label_thm5a, label_thm5b, label_thm5c, label_thm5d, label_thm5e, trace_star, ConstructionTrace,
};
use graceful_transfer::oracle::{brute_force_graceful, enumerate_class, ClassFilter, SearchBudget, SearchOutcome};
use graceful_transfer::transfer::{replay_script, star_state, TransferScript};
use graceful_transfer::tree::{
    canonical_code, expr_to_tree, from_json, parse_tree_expr, to_dot, to_json, verify_graceful, RootedTree,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "graceful", version, about = "Graceful tree labelings by leaf transfers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a graceful labeling for a tree expression.
    Label {
        expr: String,
        #[arg(long, value_enum, default_value_t = ClassArg::Auto)]
        class: ClassArg,
        /// Write the transfer script with its vertex map.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the labeled tree here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check that a JSON labeled tree is graceful.
    Verify {
        #[arg(long)]
        json: PathBuf,
    },
    /// Replay a transfer script from the star K_{1,N} and print the result as JSON.
    Replay {
        /// Star size; read from the trace header when omitted.
        #[arg(long)]
        star: Option<usize>,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Report which construction classes a tree belongs to.
    Classify { expr: String },
    /// Search for a graceful labeling by brute force.
    Oracle {
        expr: String,
        #[arg(long)]
        root_label: Option<u32>,
        #[arg(long, default_value_t = 200_000_000)]
        max_nodes: u64,
        /// Time limit in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Label, verify and cross-check every tree of a class up to a size.
    Sweep {
        #[arg(long, value_enum)]
        class: SweepClass,
        #[arg(long)]
        max_n: usize,
        #[arg(long)]
        jobs: Option<usize>,
        /// Largest tree size also confirmed by the brute-force oracle.
        #[arg(long, default_value_t = 13)]
        oracle_max: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    A,
    B,
    C,
    D,
    E,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepClass {
    A,
    B,
    C,
    D,
    E,
}

impl From<SweepClass> for ClassId {
    fn from(c: SweepClass) -> Self {
        match c {
            SweepClass::A => ClassId::A,
            SweepClass::B => ClassId::B,
            SweepClass::C => ClassId::C,
            SweepClass::D => ClassId::D,
            SweepClass::E => ClassId::E,
        }
    }
}

enum Failure {
    /// The input was understood but the answer is negative.
    Domain(anyhow::Error),
    Usage(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn domain<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Domain(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Label { expr, class, trace, dot, json } => label(&expr, class, trace, dot, json),
        Command::Verify { json } => verify(&json),
        Command::Replay { star, script, json, dot } => replay(star, &script, json, dot),
        Command::Classify { expr } => classify(&expr),
        Command::Oracle { expr, root_label, max_nodes, timeout } => {
            oracle(&expr, root_label, SearchBudget { max_nodes, max_time: Duration::from_secs(timeout) })
        }
        Command::Sweep { class, max_n, jobs, oracle_max } => sweep(class.into(), max_n, jobs, oracle_max),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("graceful: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("graceful: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(usage)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Parses an expression and reroots it at its center.
fn parse_centered(expr: &str) -> Result<RootedTree, Failure> {
    let parsed = parse_tree_expr(expr).map_err(|e| usage(anyhow!("bad tree expression: {e}")))?;
    recenter(&expr_to_tree(&parsed)).map_err(domain)
}

/// JSON export of the tree a script builds, where vertex ids are the labels.
fn built_json(star: usize, script: &TransferScript) -> Result<(String, String), Failure> {
    let start = star_state(star).map_err(domain)?;
    let end = replay_script(&start, script).map_err(domain)?;
    Ok((to_json(end.tree(), end.labeling()), to_dot(end.tree(), end.labeling())))
}

fn construct(tree: &RootedTree, class: ClassArg) -> Result<ConstructionTrace, Failure> {
    let report = classify_tree(tree);
    if report.classes.is_empty() {
        return Err(domain(anyhow!("diameter {}: no construction class applies", report.diameter)));
    }
    let result = match class {
        ClassArg::A => label_thm5a(tree),
        ClassArg::B => label_thm5b(tree),
        ClassArg::C => label_thm5c(tree),
        ClassArg::D => label_thm5d(tree),
        ClassArg::E => label_thm5e(tree),
        ClassArg::Auto => dispatch_label(tree),
    };
    result.map_err(domain)
}

fn label(expr: &str, class: ClassArg, trace: Option<PathBuf>, dot: Option<PathBuf>, json: Option<PathBuf>) -> Outcome {
    let tree = parse_centered(expr)?;
    let built = construct(&tree, class)?;
    let (json_text, dot_text) = built_json(built.star, &built.script)?;
    let report = verify_graceful(&tree, &built.labeling);
    if !report.graceful {
        return Err(domain(anyhow!("construction produced a non-graceful labeling")));
    }
    eprintln!("class {}, star K_1,{}, {} transfers", built.class, built.star, built.script.steps.len());
    if let Some(p) = trace {
        write(&p, &built.to_trace_text())?;
    }
    if let Some(p) = dot {
        write(&p, &dot_text)?;
    }
    emit(json.as_deref(), &json_text)
}

fn verify(path: &Path) -> Outcome {
    let (tree, labeling) = from_json(&read(path)?).map_err(usage)?;
    let report = verify_graceful(&tree, &labeling);
    if report.graceful {
        println!("graceful: {} vertices, edge labels 1..{}", tree.len(), tree.len() - 1);
        return Ok(());
    }
    for v in &report.violations {
        eprintln!("{v}");
    }
    Err(domain(anyhow!("not graceful ({} violations)", report.violations.len())))
}

fn replay(star: Option<usize>, path: &Path, json: Option<PathBuf>, dot: Option<PathBuf>) -> Outcome {
    let text = read(path)?;
    let star = star
        .or_else(|| trace_star(&text))
        .ok_or_else(|| usage(anyhow!("no --star given and the script has no star header")))?;
    let script: TransferScript = text.parse().map_err(usage)?;
    let (json_text, dot_text) = built_json(star, &script)?;
    if let Some(p) = dot {
        write(&p, &dot_text)?;
    }
    emit(json.as_deref(), &json_text)
}

fn classify(expr: &str) -> Outcome {
    let tree = parse_centered(expr)?;
    let report = classify_tree(&tree);
    println!("vertices {}, diameter {}, depth {}", tree.len(), report.diameter, report.depth);
    for class in ClassId::ALL {
        match report.excluded.get(&class) {
            None if report.contains(class) => println!("{class}: yes ({})", class.describe()),
            Some(why) => println!("{class}: no, {why}"),
            None => println!("{class}: no"),
        }
    }
    Ok(())
}

fn oracle(expr: &str, root_label: Option<u32>, budget: SearchBudget) -> Outcome {
    let tree = expr_to_tree(&parse_tree_expr(expr).map_err(|e| usage(anyhow!("bad tree expression: {e}")))?);
    match brute_force_graceful(&tree, root_label, budget) {
        SearchOutcome::Found(labeling) => {
            println!("{}", to_json(&tree, &labeling));
            Ok(())
        }
        SearchOutcome::NoSolution => Err(domain(anyhow!("no graceful labeling with the requested root label"))),
        SearchOutcome::Exhausted => Err(domain(anyhow!("search budget exhausted without an answer"))),
    }
}

#[derive(Default)]
struct Tally {
    trees: usize,
    labeled: usize,
    oracle_checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.trees += other.trees;
        self.labeled += other.labeled;
        self.oracle_checked += other.oracle_checked;
        self.failures.extend(other.failures);
        self
    }
}

fn check_one(tree: &RootedTree, class: ClassId, oracle_max: usize) -> Tally {
    let mut tally = Tally { trees: 1, ..Tally::default() };
    let arg = match class {
        ClassId::A => ClassArg::A,
        ClassId::B => ClassArg::B,
        ClassId::C => ClassArg::C,
        ClassId::D => ClassArg::D,
        ClassId::E => ClassArg::E,
    };
    let code = canonical_code(tree);
    match construct(tree, arg) {
        Ok(trace) => {
            let graceful = verify_graceful(tree, &trace.labeling).graceful;
            let rooted = trace.labeling.get(tree.root()) == Some(0);
            let same = canonical_code(&trace.built) == code;
            if graceful && rooted && same {
                tally.labeled += 1;
            } else {
                tally.failures.push(format!("{code}: graceful {graceful}, root 0 {rooted}, shape {same}"));
            }
        }
        Err(Failure::Domain(e) | Failure::Usage(e)) => tally.failures.push(format!("{code}: {e}")),
    }
    if tree.len() <= oracle_max {
        tally.oracle_checked += 1;
        if !brute_force_graceful(tree, Some(0), SearchBudget::default()).is_found() {
            tally.failures.push(format!("{code}: oracle found no labeling"));
        }
    }
    tally
}

fn sweep(class: ClassId, max_n: usize, jobs: Option<usize>, oracle_max: usize) -> Outcome {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder.build().map_err(usage)?;
    let trees = enumerate_class(ClassFilter { class, n_max: max_n });
    let mut by_size = std::collections::BTreeMap::new();
    for t in &trees {
        *by_size.entry(t.len()).or_insert(0usize) += 1;
    }
    let tally = pool.install(|| {
        trees.par_iter().map(|t| check_one(t, class, oracle_max)).reduce(Tally::default, Tally::merge)
    });
    let sizes: Vec<String> = by_size.iter().map(|(n, k)| format!("{n}:{k}")).collect();
    println!("class {class} up to {max_n} vertices: {} trees [{}]", tally.trees, sizes.join(" "));
    println!("labeled {}/{}, oracle confirmed {}", tally.labeled, tally.trees, tally.oracle_checked);
    for f in &tally.failures {
        eprintln!("{f}");
    }
    if tally.failures.is_empty() {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(domain(anyhow!("{} failures", tally.failures.len())))
    }
}
