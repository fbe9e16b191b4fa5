use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use kaa::diagram::{
    bend_graph, digest, parse_kad, print_kad, render_dot, DiagramTerm, ObjectType, PortGraph,
};
use kaa::encode::{
    diagram_to_representation, emit_inequalities, nfa_to_diagram_graph, nfa_to_diagram_matrix,
    regex_to_diagram, Representation,
};
use kaa::nfa::Nfa;
use kaa::normalform::{denote, sem_equal, sem_leq, to_generalised_matrix};
use kaa::regex::{parse_regex, random_regex, Alphabet};
use kaa::rewrite::{
    atomise, check_axiom, co_determinise, decide_equiv, determinise, minimise, replay_trace,
    reverse, through_representation, trim_useless, AxiomId, RewriteTrace,
};
use kaa::Error;

#[derive(Parser)]
#[command(
    name = "kaa",
    version,
    about = "String diagrams for finite-state automata"
)]
struct Cli {
    /// Letters of the alphabet.
    #[arg(long, global = true, default_value = "ab")]
    alphabet: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Kad,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Matrix,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Regex,
    Nfa,
}

#[derive(Args)]
struct Input {
    /// Diagram file: .kad term text or .json graph/automaton/representation.
    file: PathBuf,

    /// Input and output format; defaults to the input file's extension.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Traced {
    #[command(flatten)]
    input: Input,

    /// Write the rewrite trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a regular expression and print it back.
    ParseRegex { expr: String },
    /// Encode a regex or an automaton file as a diagram.
    Encode {
        #[arg(value_enum)]
        source: Source,
        /// The regex text, or the automaton's JSON file.
        value: String,
        #[arg(long, value_enum, default_value = "matrix")]
        style: Style,
        #[arg(long, value_enum, default_value = "kad")]
        format: Format,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Print the matrix of regexes a left-to-right diagram denotes.
    Denote(Input),
    /// Rewrite red compounds until every action is on a letter.
    Atomise(Traced),
    /// Determinise the diagram's representation.
    Determinise(Traced),
    /// Co-determinise the diagram's representation.
    CoDeterminise(Traced),
    /// Remove loops that are unreachable or reach no output.
    Trim(Traced),
    /// Minimal deterministic representation.
    Minimise(Traced),
    /// Decide language equivalence of two diagrams.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Use the classical automata pipeline only.
        #[arg(long, conflicts_with = "both")]
        oracle: bool,
        /// Run both procedures and fail if they disagree.
        #[arg(long)]
        both: bool,
        /// Write the certificate here.
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Decide language inclusion of two diagrams.
    Leq {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Reverse the diagram's representation.
    Reverse(Input),
    /// List the axiom catalog.
    AxiomsList,
    /// Check every axiom on random substitutions.
    AxiomsCheck {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a diagram.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(short = 'f', value_enum, default_value = "dot")]
        to: Render,
    },
    /// Replay a rewrite trace on a diagram.
    TraceReplay { file: PathBuf, trace: PathBuf },
    /// Print the inclusion system a diagram solves.
    Inequalities(Input),
    /// Print a seeded random regex.
    RandomRegex {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

/// A failed command: exit 1 for negative verdicts, 2 for bad input.
enum Failure {
    Verdict(String),
    Usage(String),
    Disagreement(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn format_of(path: &Path, given: Option<Format>) -> Format {
    given.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Kad,
    })
}

fn load(
    path: &Path,
    format: Option<Format>,
    sigma: &Alphabet,
) -> std::result::Result<DiagramTerm, Failure> {
    let text = read(path)?;
    match format_of(path, format) {
        Format::Kad => Ok(parse_kad(&text, sigma)?),
        Format::Json => {
            let v: Value = serde_json::from_str(&text).map_err(Error::from)?;
            if v.get("nodes").is_some() {
                Ok(PortGraph::from_value(&v)?.to_term()?)
            } else if v.get("transitions").is_some() {
                let a = Nfa::from_json(&text)?;
                Ok(nfa_to_diagram_matrix(&a.with_single_initial())?)
            } else if v.get("entries").is_some() {
                Ok(Representation::from_value(&v)?.to_diagram()?)
            } else {
                Err(Failure::Usage(format!(
                    "{}: not a graph, automaton or representation",
                    path.display()
                )))
            }
        }
    }
}

/// Prints a line, ignoring a closed stdout (e.g. when piped into `head`).
fn say(line: &str) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn emit(text: &str, output: Option<&Path>) -> Out {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            say(text.trim_end_matches('\n'));
            Ok(())
        }
    }
}

fn diagram_text(t: &DiagramTerm, format: Format) -> std::result::Result<String, Failure> {
    Ok(match format {
        Format::Kad => print_kad(t),
        Format::Json => t.to_port_graph()?.to_json(),
    })
}

fn representation_text(r: &Representation, format: Format) -> std::result::Result<String, Failure> {
    Ok(match format {
        Format::Kad => print_kad(&r.to_diagram()?),
        Format::Json => serde_json::to_string_pretty(&r.to_value()).map_err(Error::from)?,
    })
}

fn save_trace(t: &RewriteTrace, path: Option<&Path>) -> Out {
    match path {
        Some(p) => {
            fs::write(p, t.to_json()).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
        }
        None => Ok(()),
    }
}

type Stage = fn(&Representation) -> kaa::Result<(Representation, RewriteTrace)>;

fn run_stage(t: &Traced, sigma: &Alphabet, stage: Stage) -> Out {
    let d = load(&t.input.file, t.input.format, sigma)?;
    let (r, trace) = through_representation(&d, sigma, stage)?;
    save_trace(&trace, t.trace.as_deref())?;
    emit(
        &representation_text(&r, format_of(&t.input.file, t.input.format))?,
        t.input.output.as_deref(),
    )
}

fn run(cli: Cli) -> Out {
    let sigma = Alphabet::parse(&cli.alphabet)?;
    match cli.command {
        Command::ParseRegex { expr } => emit(&parse_regex(&expr, &sigma)?.to_string(), None),
        Command::Encode {
            source,
            value,
            style,
            format,
            output,
        } => {
            let d = match source {
                Source::Regex => regex_to_diagram(&parse_regex(&value, &sigma)?),
                Source::Nfa => {
                    let a = Nfa::from_json(&read(Path::new(&value))?)?.with_single_initial();
                    match style {
                        Style::Matrix => nfa_to_diagram_matrix(&a)?,
                        Style::Graph => nfa_to_diagram_graph(&a)?,
                    }
                }
            };
            emit(&diagram_text(&d, format)?, output.as_deref())
        }
        Command::Denote(i) => {
            let d = load(&i.file, i.format, &sigma)?;
            let text = match format_of(&i.file, i.format) {
                Format::Kad => to_generalised_matrix(&d)?.to_string(),
                Format::Json => serde_json::to_string_pretty(&denote(&d, &sigma)?.to_value())
                    .map_err(Error::from)?,
            };
            emit(&text, i.output.as_deref())
        }
        Command::Atomise(t) => {
            let d = load(&t.input.file, t.input.format, &sigma)?;
            let (a, trace) = atomise(&d, &sigma)?;
            save_trace(&trace, t.trace.as_deref())?;
            emit(
                &diagram_text(&a, format_of(&t.input.file, t.input.format))?,
                t.input.output.as_deref(),
            )
        }
        Command::Determinise(t) => run_stage(&t, &sigma, determinise),
        Command::CoDeterminise(t) => run_stage(&t, &sigma, co_determinise),
        Command::Trim(t) => run_stage(&t, &sigma, trim_useless),
        Command::Minimise(t) => {
            let d = load(&t.input.file, t.input.format, &sigma)?;
            let (r, trace) = minimise(&d, &sigma)?;
            save_trace(&trace, t.trace.as_deref())?;
            emit(
                &representation_text(&r, format_of(&t.input.file, t.input.format))?,
                t.input.output.as_deref(),
            )
        }
        Command::Equiv {
            left,
            right,
            format,
            oracle,
            both,
            output,
        } => {
            let d = load(&left, format, &sigma)?;
            let e = load(&right, format, &sigma)?;
            let classical = || sem_equal(&d, &e, &sigma);
            let verdict = if oracle {
                classical()?
            } else {
                let cert = decide_equiv(&d, &e, &sigma)?;
                if let Some(p) = &output {
                    let text =
                        serde_json::to_string_pretty(&cert.to_value()).map_err(Error::from)?;
                    emit(&text, Some(p))?;
                }
                if both && classical()? != cert.equal {
                    return Err(Failure::Disagreement(format!(
                        "diagrammatic verdict {} disagrees with the oracle",
                        cert.equal
                    )));
                }
                cert.equal
            };
            if verdict {
                emit("equivalent", None)
            } else {
                say("not equivalent");
                Err(Failure::Verdict(String::new()))
            }
        }
        Command::Leq {
            left,
            right,
            format,
        } => {
            let d = load(&left, format, &sigma)?;
            let e = load(&right, format, &sigma)?;
            if sem_leq(&d, &e, &sigma)? {
                emit("leq", None)
            } else {
                say("not leq");
                Err(Failure::Verdict(String::new()))
            }
        }
        Command::Reverse(i) => {
            let d = load(&i.file, i.format, &sigma)?;
            let r = reverse(&diagram_to_representation(&d, &sigma)?);
            emit(
                &representation_text(&r, format_of(&i.file, i.format))?,
                i.output.as_deref(),
            )
        }
        Command::AxiomsList => {
            let mut text = String::new();
            for &a in AxiomId::all() {
                let kind = if a.is_macro() { "macro" } else { "axiom" };
                text.push_str(&format!("{:<8}{kind:<7}{}\n", a.name(), a.description()));
            }
            emit(&text, None)
        }
        Command::AxiomsCheck { samples, seed } => {
            let mut unsound = 0;
            for (k, id) in AxiomId::primitive().enumerate() {
                let report = check_axiom(id, samples, seed.wrapping_add(k as u64), &sigma)?;
                if report.sound() {
                    say(&format!("{id} sound ({} samples)", report.samples));
                } else {
                    unsound += 1;
                    say(&format!("{id} UNSOUND: {}", report.failures.join("; ")));
                }
            }
            if unsound == 0 {
                Ok(())
            } else {
                Err(Failure::Verdict(format!("{unsound} axioms unsound")))
            }
        }
        Command::Render {
            input,
            to: Render::Dot,
        } => {
            let d = load(&input.file, input.format, &sigma)?;
            emit(&render_dot(&d)?, input.output.as_deref())
        }
        Command::TraceReplay { file, trace } => {
            let t = RewriteTrace::from_json(&read(&trace)?)?;
            let g = load(&file, None, &t.alphabet)?.to_port_graph()?;
            // traces of bending commands start from the bent diagram
            let bent = g
                .dom
                .0
                .iter()
                .chain(&g.cod.0)
                .any(|&o| o != ObjectType::Right);
            let start = if bent && digest(&g) != t.initial {
                bend_graph(&g)?
            } else {
                g
            };
            match replay_trace(&start, &t) {
                Ok(h) => emit(
                    &format!("ok {} steps, final {}", t.steps.len(), digest(&h)),
                    None,
                ),
                Err(e) => Err(Failure::Verdict(e.to_string())),
            }
        }
        Command::Inequalities(i) => {
            let d = load(&i.file, i.format, &sigma)?;
            emit(&emit_inequalities(&d)?, i.output.as_deref())
        }
        Command::RandomRegex { seed, depth } => {
            emit(&random_regex(seed, depth, &sigma).to_string(), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Disagreement(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
