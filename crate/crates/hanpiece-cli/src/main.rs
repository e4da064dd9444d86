//! Command line front end for the decomposition toolkit.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 data consistency. Output files
//! are written through a temporary file and moved into place on success, so
//! a failing run leaves no partial output behind.

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use hanpiece::corpus::{transform_corpus, TransformConfig, TransformError, DEFAULT_BOUNDARY_MARKER};
use hanpiece::decompose::{build_table, DecompositionConfig, DecompositionTable};
use hanpiece::ids::{parse_ids_file, SourceTag};
use hanpiece::metrics::{
    bleu_with_smoothing, cluster_systems, da_aggregate, parse_da_csv, vocab_report, Smoothing,
    VocabCounter, DEFAULT_CLUSTER_ALPHA,
};
use hanpiece::mwe::{
    decompose_glossary, extract_bilingual, filter_pairs, inject_glossary, parse_pattern_file,
    parse_tagged_corpus, read_glossary, write_glossary, MweError, DEFAULT_PATTERNS_EN,
    DEFAULT_PATTERNS_ZH, DEFAULT_SCORE_THRESHOLD,
};

#[derive(Parser)]
#[command(
    name = "hanpiece",
    version,
    about = "Chinese character decomposition toolkit: IDS parsing, corpus transforms, MWE glossaries, MT evaluation"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// IDS dictionary file (also read from HANPIECE_IDS)
    #[arg(long, global = true, env = "HANPIECE_IDS", value_name = "FILE")]
    ids: Option<PathBuf>,

    /// Decomposition level; 0 leaves text unchanged
    #[arg(long, global = true, default_value_t = 1)]
    level: usize,

    /// Emit IDC operators as pieces (default)
    #[arg(long, global = true, action = ArgAction::SetTrue, overrides_with = "no_idc")]
    keep_idc: bool,

    /// Drop IDC operators from piece sequences
    #[arg(long, global = true, action = ArgAction::SetTrue, overrides_with = "keep_idc")]
    no_idc: bool,

    /// Variant preference: comma-separated region tags
    #[arg(long, global = true, default_value = "G,T,H,J,K,V", value_name = "TAGS")]
    prefer: String,

    /// Word boundary marker token
    #[arg(long, global = true, default_value = DEFAULT_BOUNDARY_MARKER)]
    marker: String,

    /// Worker threads
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Print dictionary statistics to stderr after loading
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    stats: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose characters into piece sequences
    Decompose(DecomposeArgs),
    /// Transform a word-segmented corpus into piece sequences
    Transform(TransformArgs),
    /// Multiword-expression glossary pipeline
    Mwe {
        #[command(subcommand)]
        action: MweAction,
    },
    /// Evaluation metrics
    Eval {
        #[command(subcommand)]
        action: EvalAction,
    },
}

#[derive(Args)]
struct DecomposeArgs {
    /// Characters to decompose; read from stdin when absent
    chars: Vec<String>,
    /// Iterate until the sequence stabilizes; prints the level count used
    #[arg(long, action = ArgAction::SetTrue)]
    fixpoint: bool,
}

#[derive(Args)]
struct TransformArgs {
    /// Input corpus (stdin when absent)
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output path (stdout when absent)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Suppress the transformation report on stderr
    #[arg(long, action = ArgAction::SetTrue)]
    quiet: bool,
}

#[derive(Subcommand)]
enum MweAction {
    /// Extract and score bilingual MWE pairs from tagged, aligned corpora
    Extract {
        /// Source-side tagged corpus (`surface<TAB>pos<TAB>lemma`)
        #[arg(long, value_name = "FILE")]
        src_tagged: PathBuf,
        /// Target-side tagged corpus
        #[arg(long, value_name = "FILE")]
        tgt_tagged: PathBuf,
        /// Source-side pattern file (built-in Chinese patterns when absent)
        #[arg(long, value_name = "FILE")]
        src_patterns: Option<PathBuf>,
        /// Target-side pattern file (built-in English patterns when absent)
        #[arg(long, value_name = "FILE")]
        tgt_patterns: Option<PathBuf>,
        /// Drop candidates occurring fewer times than this
        #[arg(long, default_value_t = 1)]
        min_frequency: u64,
        /// Glossary TSV output (stdout when absent)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Keep glossary pairs scoring at or above a threshold
    Filter {
        /// Glossary TSV input (stdin when absent)
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Filtered glossary output (stdout when absent)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD)]
        threshold: f64,
    },
    /// Decompose the source side of a glossary
    Decompose {
        /// Glossary TSV input (stdin when absent)
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Decomposed glossary output (stdout when absent)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Append glossary pairs to an aligned training corpus
    Inject {
        /// Source-side training corpus
        #[arg(long, value_name = "FILE")]
        src: PathBuf,
        /// Target-side training corpus
        #[arg(long, value_name = "FILE")]
        tgt: PathBuf,
        /// Glossary TSV to inject
        #[arg(long, value_name = "FILE")]
        glossary: PathBuf,
        /// Source-side output
        #[arg(long, value_name = "FILE")]
        out_src: PathBuf,
        /// Target-side output
        #[arg(long, value_name = "FILE")]
        out_tgt: PathBuf,
        /// Append the glossary this many times
        #[arg(long, default_value_t = 1)]
        repeat: u64,
    },
}

#[derive(Subcommand)]
enum EvalAction {
    /// Corpus BLEU of a hypothesis file against a reference file
    Bleu {
        hypothesis: PathBuf,
        reference: PathBuf,
        /// Add-one smoothing on higher-order precisions
        #[arg(long, action = ArgAction::SetTrue)]
        smooth: bool,
    },
    /// Vocabulary sizes and embedding-parameter estimates
    Vocab {
        /// Token corpora to compare
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Embedding dimension for the parameter estimate
        #[arg(long, default_value_t = 512)]
        dim: usize,
    },
    /// Direct Assessment aggregation table
    Da {
        /// CSV: system,translation_id,assessor_id,score
        csv: PathBuf,
    },
    /// DA table with significance clusters
    Cluster {
        /// CSV: system,translation_id,assessor_id,score
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_ALPHA)]
        alpha: f64,
    },
}

/// A failed run, mapped onto the documented exit codes.
enum Failure {
    Usage(String),
    Io(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Data(m) => m,
        }
    }
}

fn io_failure(context: &str, err: &io::Error) -> Failure {
    Failure::Io(format!("{context}: {err}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };

    let result = validate_globals(&cli.global).and_then(|()| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build()
            .map_err(|e| Failure::Usage(format!("cannot build thread pool: {e}")))?;
        pool.install(|| run(&cli))
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("hanpiece: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn validate_globals(global: &GlobalArgs) -> Result<(), Failure> {
    if global.threads == 0 {
        return Err(Failure::Usage("--threads must be positive".to_string()));
    }
    let cfg = decomposition_config(global);
    cfg.validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if global.marker.is_empty() || global.marker.chars().any(char::is_whitespace) {
        return Err(Failure::Usage(format!(
            "--marker {:?} must be a non-empty token without whitespace",
            global.marker
        )));
    }
    parse_preference(&global.prefer)?;
    Ok(())
}

fn decomposition_config(global: &GlobalArgs) -> DecompositionConfig {
    DecompositionConfig {
        level: global.level,
        keep_idc_operators: !global.no_idc,
        ..DecompositionConfig::default()
    }
}

fn transform_config(global: &GlobalArgs) -> TransformConfig {
    TransformConfig {
        decomposition: decomposition_config(global),
        word_boundary_marker: global.marker.clone(),
    }
}

fn parse_preference(text: &str) -> Result<Vec<SourceTag>, Failure> {
    let mut tags = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let mut chars = item.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                let tag = SourceTag::new(c)
                    .map_err(|_| Failure::Usage(format!("--prefer: {item:?} is not A-Z")))?;
                tags.push(tag);
            }
            _ => {
                return Err(Failure::Usage(format!(
                    "--prefer: {item:?} is not a single tag letter"
                )))
            }
        }
    }
    if tags.is_empty() {
        return Err(Failure::Usage("--prefer must list at least one tag".to_string()));
    }
    Ok(tags)
}

fn load_table(global: &GlobalArgs) -> Result<DecompositionTable, Failure> {
    let path = global.ids.as_ref().ok_or_else(|| {
        Failure::Usage("an IDS dictionary is required: pass --ids or set HANPIECE_IDS".to_string())
    })?;
    let text = fs::read_to_string(path)
        .map_err(|e| io_failure(&format!("cannot read IDS file {}", path.display()), &e))?;
    let entries =
        parse_ids_file(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if global.stats {
        let variants: usize = entries.iter().map(|e| e.variants.len()).sum();
        let atoms = entries.iter().filter(|e| e.is_atom()).count();
        eprintln!(
            "dictionary {}: {} entries, {} variants, {} atoms",
            path.display(),
            entries.len(),
            variants,
            atoms
        );
    }
    let preference = parse_preference(&global.prefer)?;
    build_table(&entries, &preference).map_err(|e| Failure::Data(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Decompose(args) => cmd_decompose(&cli.global, args),
        Command::Transform(args) => cmd_transform(&cli.global, args),
        Command::Mwe { action } => cmd_mwe(&cli.global, action),
        Command::Eval { action } => cmd_eval(action),
    }
}

// ---------------------------------------------------------------- helpers

fn read_input(path: Option<&Path>, what: &str) -> Result<String, Failure> {
    match path {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| io_failure(&format!("cannot read {what} {}", path.display()), &e)),
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| io_failure("cannot read stdin", &e))?;
            Ok(text)
        }
    }
}

fn read_lines(path: &Path, what: &str) -> Result<Vec<String>, Failure> {
    Ok(read_input(Some(path), what)?
        .lines()
        .map(str::to_string)
        .collect())
}

/// Runs `write` against a temporary file and moves it into place only on
/// success; with no path, writes to stdout.
fn with_output<F>(path: Option<&Path>, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush().map_err(|e| io_failure("stdout", &e))
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = match dir {
                Some(dir) => tempfile::NamedTempFile::new_in(dir),
                None => tempfile::NamedTempFile::new_in("."),
            }
            .map_err(|e| io_failure("cannot create temporary output", &e))?;
            write(tmp.as_file_mut())?;
            tmp.persist(path)
                .map_err(|e| io_failure(&format!("cannot write {}", path.display()), &e.error))?;
            Ok(())
        }
    }
}

fn write_line(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| io_failure("write failed", &e))
}

fn mwe_failure(err: MweError) -> Failure {
    Failure::Data(err.to_string())
}

// ------------------------------------------------------------- decompose

fn cmd_decompose(global: &GlobalArgs, args: &DecomposeArgs) -> Result<(), Failure> {
    let table = load_table(global)?;
    let cfg = decomposition_config(global);
    let chars: Vec<char> = if args.chars.is_empty() {
        read_input(None, "characters")?
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect()
    } else {
        args.chars
            .iter()
            .flat_map(|s| s.chars())
            .filter(|c| !c.is_whitespace())
            .collect()
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    for c in chars {
        if args.fixpoint {
            let result = table.decompose_to_fixpoint(c, &cfg);
            if !result.converged {
                eprintln!(
                    "hanpiece: {c} did not stabilize within {} iterations",
                    cfg.max_fixpoint_iterations
                );
            }
            write_line(
                &mut out,
                &format!(
                    "{c}\t{}\t{}\t{}",
                    result.levels_used, result.pieces, result.levels_used
                ),
            )?;
        } else {
            let pieces = table.decompose_char(c, &cfg);
            write_line(&mut out, &format!("{c}\t{}\t{pieces}", cfg.level))?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------- transform

fn cmd_transform(global: &GlobalArgs, args: &TransformArgs) -> Result<(), Failure> {
    let table = load_table(global)?;
    let cfg = transform_config(global);
    cfg.validate(&table).map_err(|e| match e {
        TransformError::MarkerCollision { .. } => Failure::Usage(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;

    // open the input before any output file is created
    let input: Box<dyn BufRead> = match &args.input {
        Some(path) => Box::new(BufReader::new(fs::File::open(path).map_err(|e| {
            io_failure(&format!("cannot open input {}", path.display()), &e)
        })?)),
        None => Box::new(BufReader::new(io::stdin())),
    };

    let mut report = None;
    with_output(args.output.as_deref(), |out| {
        let mut buffered = io::BufWriter::new(out);
        let r = transform_corpus(input, &mut buffered, &table, &cfg).map_err(|e| match e {
            TransformError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        })?;
        buffered.flush().map_err(|e| io_failure("flush failed", &e))?;
        report = Some(r);
        Ok(())
    })?;

    if let Some(report) = report {
        if !args.quiet {
            eprintln!("{report}");
        }
    }
    Ok(())
}

// ------------------------------------------------------------------- mwe

fn load_patterns(
    path: Option<&Path>,
    default_text: &str,
    what: &str,
) -> Result<Vec<hanpiece::mwe::PosPattern>, Failure> {
    let text = match path {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| io_failure(&format!("cannot read {what} {}", path.display()), &e))?,
        None => default_text.to_string(),
    };
    parse_pattern_file(&text).map_err(mwe_failure)
}

fn cmd_mwe(global: &GlobalArgs, action: &MweAction) -> Result<(), Failure> {
    match action {
        MweAction::Extract {
            src_tagged,
            tgt_tagged,
            src_patterns,
            tgt_patterns,
            min_frequency,
            output,
        } => {
            let src = parse_tagged_corpus(&read_input(Some(src_tagged), "tagged corpus")?)
                .map_err(mwe_failure)?;
            let tgt = parse_tagged_corpus(&read_input(Some(tgt_tagged), "tagged corpus")?)
                .map_err(mwe_failure)?;
            let src_patterns =
                load_patterns(src_patterns.as_deref(), DEFAULT_PATTERNS_ZH, "pattern file")?;
            let tgt_patterns =
                load_patterns(tgt_patterns.as_deref(), DEFAULT_PATTERNS_EN, "pattern file")?;
            let pairs = extract_bilingual(&src, &tgt, &src_patterns, &tgt_patterns, *min_frequency)
                .map_err(mwe_failure)?;
            with_output(output.as_deref(), |out| {
                write_glossary(out, &pairs).map_err(|e| io_failure("write failed", &e))
            })
        }
        MweAction::Filter {
            input,
            output,
            threshold,
        } => {
            if !(0.0..=1.0).contains(threshold) {
                return Err(Failure::Usage(format!(
                    "--threshold {threshold} outside [0, 1]"
                )));
            }
            let pairs = read_glossary(&read_input(input.as_deref(), "glossary")?)
                .map_err(mwe_failure)?;
            let kept = filter_pairs(pairs, *threshold);
            with_output(output.as_deref(), |out| {
                write_glossary(out, &kept).map_err(|e| io_failure("write failed", &e))
            })
        }
        MweAction::Decompose { input, output } => {
            let table = load_table(global)?;
            let cfg = transform_config(global);
            cfg.validate(&table)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let pairs = read_glossary(&read_input(input.as_deref(), "glossary")?)
                .map_err(mwe_failure)?;
            let decomposed = decompose_glossary(&pairs, &table, &cfg);
            with_output(output.as_deref(), |out| {
                write_glossary(out, &decomposed).map_err(|e| io_failure("write failed", &e))
            })
        }
        MweAction::Inject {
            src,
            tgt,
            glossary,
            out_src,
            out_tgt,
            repeat,
        } => {
            let src_lines = read_lines(src, "training corpus")?;
            let tgt_lines = read_lines(tgt, "training corpus")?;
            let pairs =
                read_glossary(&read_input(Some(glossary), "glossary")?).map_err(mwe_failure)?;
            let repeated: Vec<_> = std::iter::repeat_with(|| pairs.iter().cloned())
                .take(*repeat as usize)
                .flatten()
                .collect();
            let (src_out, tgt_out) =
                inject_glossary(src_lines, tgt_lines, &repeated).map_err(mwe_failure)?;
            with_output(Some(out_src), |out| {
                for line in &src_out {
                    write_line(out, line)?;
                }
                Ok(())
            })?;
            with_output(Some(out_tgt), |out| {
                for line in &tgt_out {
                    write_line(out, line)?;
                }
                Ok(())
            })
        }
    }
}

// ------------------------------------------------------------------ eval

fn cmd_eval(action: &EvalAction) -> Result<(), Failure> {
    match action {
        EvalAction::Bleu {
            hypothesis,
            reference,
            smooth,
        } => {
            let hyp = hanpiece::metrics::tokenize_lines(&read_input(Some(hypothesis), "hypotheses")?);
            let reference_tokens =
                hanpiece::metrics::tokenize_lines(&read_input(Some(reference), "references")?);
            let smoothing = if *smooth { Smoothing::AddOne } else { Smoothing::None };
            let result = bleu_with_smoothing(&hyp, &reference_tokens, smoothing)
                .map_err(|e| Failure::Data(e.to_string()))?;
            println!(
                "BLEU = {:.2}  {:.1}/{:.1}/{:.1}/{:.1}  (BP = {:.3}, hyp_len = {}, ref_len = {})",
                result.score,
                100.0 * result.precisions[0],
                100.0 * result.precisions[1],
                100.0 * result.precisions[2],
                100.0 * result.precisions[3],
                result.brevity_penalty,
                result.hypothesis_length,
                result.reference_length
            );
            Ok(())
        }
        EvalAction::Vocab { files, dim } => {
            let mut corpora = Vec::with_capacity(files.len());
            for path in files {
                let mut counter = VocabCounter::new();
                for line in read_input(Some(path), "corpus")?.lines() {
                    counter.add_line(line);
                }
                corpora.push(counter.finish(&path.display().to_string()));
            }
            print!("{}", vocab_report(corpora, *dim));
            Ok(())
        }
        EvalAction::Da { csv } => {
            let report = aggregate_csv(csv)?;
            print!("{}", report.format_table(None));
            Ok(())
        }
        EvalAction::Cluster { csv, alpha } => {
            if !(0.0..=1.0).contains(alpha) {
                return Err(Failure::Usage(format!("--alpha {alpha} outside [0, 1]")));
            }
            let mut report = aggregate_csv(csv)?;
            let clusters = cluster_systems(&report, *alpha);
            report.apply_clusters(&clusters);
            print!("{}", report.format_table(Some(&clusters)));
            Ok(())
        }
    }
}

fn aggregate_csv(path: &Path) -> Result<hanpiece::metrics::DaReport, Failure> {
    let file = fs::File::open(path)
        .map_err(|e| io_failure(&format!("cannot open {}", path.display()), &e))?;
    let assessments =
        parse_da_csv(BufReader::new(file)).map_err(|e| Failure::Data(e.to_string()))?;
    da_aggregate(&assessments).map_err(|e| Failure::Data(e.to_string()))
}
