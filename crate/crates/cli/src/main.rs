mod aut;
mod error;
mod lex;
mod report;
mod specfile;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use traintrack_core::corpus::corpus;
use traintrack_core::driver::{certify_train_track, classify, has_back_tracking, Classification, ClassifyError, ClassifyOptions};
use traintrack_core::mapclass::{adjust_decompose, plan, MapClassElement};
use traintrack_core::spectra::{growth_estimate, perron, switch_check, transition_matrix, GrowthError};

use aut::AutDocument;
use error::{CliError, ErrorClass};
use report::*;
use specfile::SpecDocument;

#[derive(Parser, Debug)]
#[command(name = "traintrack", version, about = "Train-track classification of free group automorphisms and mapping classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify each automorphism as periodic, reducible or train-track generic.
    Classify {
        #[command(flatten)]
        input: AutInput,
        #[command(flatten)]
        run: RunOptions,
        #[command(flatten)]
        out: Output,
    },
    /// Perron-Frobenius data of the transition matrix of the tightened map.
    Perron {
        #[command(flatten)]
        input: AutInput,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        anchored: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Iterated edge lengths of the train-track representative and their growth slope.
    Growth {
        #[command(flatten)]
        input: AutInput,
        #[command(flatten)]
        run: RunOptions,
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 15)]
        n_max: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Classification plan for each manifold description.
    Plan {
        /// `.spec` files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Product `u1 u2 ... un` of mapping classes (the last one acts first).
    Compose {
        /// `.aut` files, all of the same rank.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Check the given map itself for back-tracking.
    Certify {
        #[command(flatten)]
        input: AutInput,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone)]
struct AutInput {
    /// `.aut` files.
    files: Vec<PathBuf>,
    /// Generate a random corpus from this seed instead of reading files.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    corpus_rank: usize,
    /// Longest Nielsen word in the corpus.
    #[arg(long, default_value_t = 12)]
    max_length: usize,
}

#[derive(Args, Debug, Clone)]
struct RunOptions {
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_moves: usize,
    /// Certificate depth.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Enable the approximate compression-body model for anchored graphs.
    #[arg(long)]
    anchored: bool,
}

impl RunOptions {
    fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions { max_moves: self.max_moves, tol: self.tol, certificate_depth: self.depth, anchored: self.anchored }
    }
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long)]
    json: bool,
    /// Include per-input wall-clock times; reports are then no longer reproducible.
    #[arg(long)]
    timing: bool,
    /// Worker threads for batch runs (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

struct Source {
    name: String,
    doc: Result<AutDocument, CliError>,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(ErrorClass::Io, "cli", format!("{}: {e}", path.display())))
}

fn aut_sources(input: &AutInput) -> Result<Vec<Source>, CliError> {
    if let Some(seed) = input.seed {
        if !input.files.is_empty() {
            return Err(CliError::new(ErrorClass::Parse, "cli", "--seed and input files are exclusive"));
        }
        if input.corpus_rank == 0 || input.max_length == 0 {
            return Err(CliError::new(ErrorClass::Parse, "cli", "--corpus-rank and --max-length must be positive"));
        }
        let maps = corpus(seed, input.count, input.corpus_rank, input.max_length);
        return Ok(maps
            .iter()
            .enumerate()
            .map(|(i, f)| Source { name: format!("corpus:{seed}:{i}"), doc: Ok(AutDocument::from_rose_map(f, None, None)) })
            .collect());
    }
    if input.files.is_empty() {
        return Err(CliError::new(ErrorClass::Parse, "cli", "no input files (or --seed) given"));
    }
    Ok(input
        .files
        .iter()
        .map(|p| {
            let name = p.display().to_string();
            let doc = read(p).and_then(|t| AutDocument::parse(&t).map_err(|e| CliError::parse(&name, e)));
            Source { name, doc }
        })
        .collect())
}

fn classify_error(e: ClassifyError) -> CliError {
    let class = match &e {
        ClassifyError::Precondition(_) | ClassifyError::Move(_) | ClassifyError::Spectra(_) => ErrorClass::Precondition,
        ClassifyError::Budget { .. } => ErrorClass::Budget,
        ClassifyError::Stuck { .. } => ErrorClass::Stuck,
    };
    let message = match &e {
        ClassifyError::Budget { move_log, .. } => format!("{e} after {} recorded moves", move_log.len()),
        _ => e.to_string(),
    };
    CliError::new(class, "traintrack-driver", message)
}

fn run_classify(doc: &AutDocument, opts: &ClassifyOptions) -> Result<Classification, CliError> {
    classify(&doc.to_map()?, opts).map_err(classify_error)
}

fn do_classify(doc: &AutDocument, run: &RunOptions) -> Result<ClassifyReport, CliError> {
    let c = run_classify(doc, &run.classify_options())?;
    let namer = Namer::for_map(&c.map, doc.rank(), &doc.generators);
    Ok(ClassifyReport::new(&c, &namer, doc.twists.clone()))
}

fn do_perron(doc: &AutDocument, tol: f64, anchored: bool) -> Result<PerronReport, CliError> {
    let f = doc.to_map()?.tightened();
    if f.graph().has_anchors() && !anchored {
        return Err(CliError::precondition("spectra", "graph has anchors; enable the anchored model"));
    }
    let m = transition_matrix(&f).map_err(|e| CliError::precondition("spectra", e))?;
    let d = perron(&m, tol).map_err(|e| CliError::precondition("spectra", e))?;
    let r = switch_check(&m, &d).map_err(|e| CliError::precondition("spectra", e))?;
    let namer = Namer::for_map(&f, doc.rank(), &doc.generators);
    Ok(PerronReport::new(&m, &d, r, &namer, anchored))
}

fn do_growth(doc: &AutDocument, run: &RunOptions, n_min: usize, n_max: usize) -> Result<GrowthReport, CliError> {
    let c = run_classify(doc, &run.classify_options())?;
    let g = growth_estimate(&c.map, n_min, n_max).map_err(|e| {
        let class = match e {
            GrowthError::Range { .. } => ErrorClass::Parse,
            _ => ErrorClass::Precondition,
        };
        CliError::new(class, "spectra", format!("{e}"))
    })?;
    let namer = Namer::for_map(&c.map, doc.rank(), &doc.generators);
    Ok(GrowthReport::new(&c, &g, &namer))
}

fn do_certify(doc: &AutDocument, depth: usize) -> Result<CertifyReport, CliError> {
    let f = doc.to_map()?.tightened();
    let cert = certify_train_track(&f, depth);
    let back = has_back_tracking(&f, depth);
    let namer = Namer::for_map(&f, doc.rank(), &doc.generators);
    Ok(CertifyReport {
        certificate: CertificateReport::new(&cert, back.as_ref(), &namer),
        flags: Flags {
            nonunique_eigenvector: false,
            anchored_model: f.graph().has_anchors().then_some("approximate"),
            twist_action: None,
        },
    })
}

fn do_plan(text: &str, name: &str) -> Result<PlanReport, CliError> {
    let doc = SpecDocument::parse(text).map_err(|e| CliError::parse(name, e))?;
    let spec = doc.to_spec()?;
    let p = plan(&spec).map_err(|e| CliError::precondition("mapclass", e))?;
    let adj = match doc.summand_perm() {
        Some(perm) => Some(adjust_decompose(&spec, &perm).map_err(|e| CliError::precondition("mapclass", e))?),
        None => None,
    };
    Ok(PlanReport::new(&p, adj.as_ref()))
}

fn do_compose(files: &[PathBuf]) -> Result<ComposeReport, CliError> {
    let mut docs = Vec::new();
    for p in files {
        let name = p.display().to_string();
        docs.push(AutDocument::parse(&read(p)?).map_err(|e| CliError::parse(&name, e))?);
    }
    let twisted = docs.iter().any(|d| d.twists.is_some());
    let mut acc: Option<MapClassElement> = None;
    for d in &docs {
        let t = d.twists.clone().unwrap_or_else(|| vec![0; d.rank()]);
        let u = MapClassElement::new(d.to_map()?, t).map_err(|e| CliError::precondition("mapclass", e))?;
        acc = Some(match acc {
            None => u,
            Some(a) => a.compose(&u).map_err(|e| CliError::precondition("mapclass", e))?,
        });
    }
    let u = acc.expect("at least one file");
    let out = AutDocument::from_rose_map(u.outer(), Some(&docs[0].generators), twisted.then(|| u.twists().to_vec()));
    Ok(ComposeReport { rank: out.rank(), images: out.image_lines(), twists: out.twists.clone(), document: out.to_string() })
}

/// Runs `f` over the inputs on a bounded pool, keeping input order.
fn batch<I: Sync, T: Send>(
    items: &[I],
    jobs: Option<usize>,
    timing: bool,
    f: impl Fn(&I) -> Result<T, CliError> + Sync,
) -> Vec<(Result<T, CliError>, Option<f64>)> {
    let work = || {
        items
            .par_iter()
            .map(|it| {
                let t0 = Instant::now();
                let r = f(it);
                (r, timing.then(|| t0.elapsed().as_secs_f64() * 1e3))
            })
            .collect()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool").install(work),
        None => work(),
    }
}

fn emit<T: Serialize>(
    command: &'static str,
    entries: Vec<Entry<T>>,
    out: &Output,
    text: impl Fn(&T, &mut String),
) -> ExitCode {
    let code = entries.iter().find_map(|e| e.error.as_ref().map(|e| e.exit_code())).unwrap_or(ExitCode::SUCCESS);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if out.json {
        let env = Envelope { format_version: FORMAT_VERSION, command, reports: entries };
        let s = serde_json::to_string_pretty(&env).expect("reports serialize");
        let _ = writeln!(lock, "{s}");
        return code;
    }
    let many = entries.len() > 1;
    for (i, e) in entries.iter().enumerate() {
        let mut s = String::new();
        if many {
            if i > 0 {
                s.push('\n');
            }
            s.push_str(&format!("== {} ==\n", e.source));
        }
        match (&e.result, &e.error) {
            (Some(r), _) => text(r, &mut s),
            (_, Some(err)) => {
                eprintln!("{}: error ({:?}): {err}", e.source, err.class);
                if many {
                    s.push_str(&format!("error: {err}\n"));
                }
            }
            _ => {}
        }
        if let Some(ms) = e.timing_ms {
            s.push_str(&format!("time: {ms:.3} ms\n"));
        }
        let _ = lock.write_all(s.as_bytes());
    }
    code
}

fn aut_command<T: Serialize + Send>(
    command: &'static str,
    input: &AutInput,
    out: &Output,
    f: impl Fn(&AutDocument) -> Result<T, CliError> + Sync,
    text: impl Fn(&T, &mut String),
) -> ExitCode {
    let sources = match aut_sources(input) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let results = batch(&sources, out.jobs, out.timing, |s| s.doc.clone().and_then(|d| f(&d)));
    let entries = sources.iter().zip(results).map(|(s, (r, t))| Entry::new(s.name.clone(), r, t)).collect();
    emit(command, entries, out, text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Classify { input, run, out } => {
            aut_command("classify", input, out, |d| do_classify(d, run), ClassifyReport::text)
        }
        Command::Perron { input, tol, anchored, out } => {
            aut_command("perron", input, out, |d| do_perron(d, *tol, *anchored), PerronReport::text)
        }
        Command::Growth { input, run, n_min, n_max, out } => {
            aut_command("growth", input, out, |d| do_growth(d, run, *n_min, *n_max), GrowthReport::text)
        }
        Command::Certify { input, depth, out } => aut_command(
            "certify",
            input,
            out,
            |d| do_certify(d, *depth),
            |r: &CertifyReport, s: &mut String| s.push_str(&format!("certificate: {}\n", r.certificate.text())),
        ),
        Command::Plan { files, out } => {
            let results = batch(files, out.jobs, out.timing, |p| {
                let name = p.display().to_string();
                read(p).and_then(|t| do_plan(&t, &name))
            });
            let entries =
                files.iter().zip(results).map(|(p, (r, t))| Entry::new(p.display().to_string(), r, t)).collect();
            emit("plan", entries, out, PlanReport::text)
        }
        Command::Compose { files, out } => {
            let t0 = Instant::now();
            let r = do_compose(files);
            let t = out.timing.then(|| t0.elapsed().as_secs_f64() * 1e3);
            let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
            emit("compose", vec![Entry::new(names.join(" * "), r, t)], out, |r: &ComposeReport, s: &mut String| {
                s.push_str(&r.document)
            })
        }
    }
}
