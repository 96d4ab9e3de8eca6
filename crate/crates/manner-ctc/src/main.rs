//! Command-line front end: synthesize, decode, score and report.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};

use manner_ctc::{
    ctc_grad, ctc_log_forward, evaluate_manifest, greedy_decode, manner_guided_decode,
    map_text_to_manner, project_to_manner, read_manifest, read_posteriors, suppress_symbol,
    synth_posteriors, write_gradient, write_posteriors, write_report, Alphabet, EvalOptions,
    MannerMap, ReportFormat, SynthSpec, Transcript,
};

#[derive(Parser)]
#[command(
    name = "manner-ctc",
    version,
    about = "CTC posteriorgram decoding with manner-of-articulation guidance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic peaky posterior files from a transcript
    Synth(SynthArgs),
    /// Decode posterior files to a transcript on stdout
    #[command(subcommand)]
    Decode(DecodeCommand),
    /// Score a manifest with baseline and manner-guided decoding
    Eval(EvalArgs),
    /// CTC log-probability of a target transcript (optionally its gradient)
    Loss(LossArgs),
    /// Rewrite character text as manner-class text
    Map(MapArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Transcript text; spaces or '>' separate words
    #[arg(long, required_unless_present = "text_file", conflicts_with = "text_file")]
    text: Option<String>,
    /// Read the transcript from a file instead
    #[arg(long)]
    text_file: Option<PathBuf>,
    /// Alphabet file (one token per line); default is the built-in English set
    #[arg(long)]
    alphabet: Option<PathBuf>,
    /// Manner-map file (CHAR<TAB>CLASS); default is the built-in English table
    #[arg(long)]
    manner_map: Option<PathBuf>,
    /// Output path for the character posterior file
    #[arg(long)]
    out: PathBuf,
    /// Also write a manner posterior file projected from the clean character
    /// matrix (before any suppression)
    #[arg(long)]
    manner_out: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    frames_per_symbol: usize,
    #[arg(long, default_value_t = 2)]
    blank_gap: usize,
    #[arg(long, default_value_t = 0.9)]
    peak_prob: f64,
    #[arg(long, default_value_t = 0.02)]
    noise_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weaken peak IDX by FACTOR, e.g. --suppress 1,0.1
    #[arg(long, value_name = "IDX,FACTOR")]
    suppress: Option<String>,
}

#[derive(Subcommand)]
enum DecodeCommand {
    /// Collapse the per-frame argmax path
    Greedy {
        posteriors: PathBuf,
        /// Print spaces literally instead of '>'
        #[arg(long)]
        human: bool,
    },
    /// Manner-guided decoding over paired manner and character streams
    Manner {
        /// Character posterior file
        #[arg(long = "char")]
        char_posteriors: PathBuf,
        /// Manner posterior file
        #[arg(long = "manner", required_unless_present = "derive_manner")]
        manner_posteriors: Option<PathBuf>,
        /// Project the manner stream from the character stream instead
        #[arg(long, conflicts_with = "manner_posteriors")]
        derive_manner: bool,
        /// Manner-map file used with --derive-manner
        #[arg(long)]
        manner_map: Option<PathBuf>,
        /// Split manner segments where the argmax class changes
        #[arg(long)]
        split_on_class_change: bool,
        #[arg(long)]
        human: bool,
    },
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Manifest file: one JSON object per line
    #[arg(long)]
    manifest: PathBuf,
    /// Report encoding: text, json or csv
    #[arg(long, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write the full report here (summary always goes to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; the report is identical for every count
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    split_on_class_change: bool,
    /// Project manner streams for entries that carry none
    #[arg(long)]
    derive_manner: bool,
    /// Also score the manner stream itself (MER)
    #[arg(long)]
    mer: bool,
    #[arg(long)]
    manner_map: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LossArgs {
    posteriors: PathBuf,
    /// Target transcript over the file's alphabet
    #[arg(long)]
    target: String,
    /// Write d(-log P)/d(entry) here in the gradient file format
    #[arg(long)]
    grad: Option<PathBuf>,
}

#[derive(clap::Args)]
struct MapArgs {
    text: String,
    #[arg(long)]
    manner_map: Option<PathBuf>,
    /// Print spaces literally instead of '>'
    #[arg(long)]
    human: bool,
}

fn load_manner_map(path: &Option<PathBuf>) -> anyhow::Result<MannerMap> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(MannerMap::parse(&text)?)
        }
        None => Ok(MannerMap::default_english()),
    }
}

fn run_synth(args: SynthArgs) -> anyhow::Result<()> {
    let alphabet = match &args.alphabet {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Arc::new(Alphabet::parse(&text)?)
        }
        None => Arc::new(Alphabet::english_characters()),
    };
    let text = match (&args.text, &args.text_file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .trim_end_matches(['\n', '\r'])
            .to_string(),
        (None, None) => unreachable!("clap enforces one source"),
    };
    let transcript = Transcript::from_text(&alphabet, &text)?;
    let spec = SynthSpec {
        frames_per_symbol: args.frames_per_symbol,
        blank_gap: args.blank_gap,
        peak_prob: args.peak_prob,
        noise_scale: args.noise_scale,
        seed: args.seed,
    };
    let clean = synth_posteriors(&transcript, &spec)?;

    if let Some(manner_out) = &args.manner_out {
        let map = load_manner_map(&args.manner_map)?;
        let manner = project_to_manner(&clean, &map)?;
        write_posteriors(&manner, manner_out)?;
    }

    let chars = match &args.suppress {
        Some(spec_text) => {
            let (idx, factor) = spec_text
                .split_once(',')
                .and_then(|(i, f)| Some((i.trim().parse::<usize>().ok()?, f.trim().parse::<f64>().ok()?)))
                .with_context(|| format!("--suppress expects IDX,FACTOR, got {spec_text:?}"))?;
            suppress_symbol(&clean, idx, factor)?
        }
        None => clean,
    };
    write_posteriors(&chars, &args.out)?;
    Ok(())
}

fn run_decode(cmd: DecodeCommand) -> anyhow::Result<()> {
    match cmd {
        DecodeCommand::Greedy { posteriors, human } => {
            let m = read_posteriors(posteriors)?;
            println!("{}", greedy_decode(&m).to_text(human));
        }
        DecodeCommand::Manner {
            char_posteriors,
            manner_posteriors,
            derive_manner,
            manner_map,
            split_on_class_change,
            human,
        } => {
            let chars = read_posteriors(char_posteriors)?;
            let manner = match manner_posteriors {
                Some(p) => read_posteriors(p)?,
                None if derive_manner => {
                    let map = load_manner_map(&manner_map)?;
                    project_to_manner(&chars, &map)?
                }
                None => unreachable!("clap enforces a manner source"),
            };
            let trace = manner_guided_decode(&manner, &chars, split_on_class_change)?;
            println!("{}", trace.transcript.to_text(human));
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> anyhow::Result<()> {
    let entries = read_manifest(&args.manifest)?;
    let opts = EvalOptions {
        split_on_class_change: args.split_on_class_change,
        derive_manner: args.derive_manner,
        with_mer: args.mer,
        jobs: args.jobs.max(1),
        manner_map: load_manner_map(&args.manner_map)?,
    };
    let report = evaluate_manifest(&entries, &opts)?;
    if let Some(out) = &args.out {
        write_report(&report, args.format, out)?;
    } else if args.format != ReportFormat::Text {
        // no file requested: emit the chosen encoding in full on stdout
        print!("{}", report.render(args.format));
        return Ok(());
    }
    print!("{}", report.render_summary());
    Ok(())
}

fn run_loss(args: LossArgs) -> anyhow::Result<()> {
    let m = read_posteriors(&args.posteriors)?;
    let target = Transcript::from_text(m.alphabet(), &args.target)?;
    match &args.grad {
        None => {
            let r = ctc_log_forward(&m, &target)?;
            println!("{}", r.log_prob);
        }
        Some(path) => {
            let r = ctc_grad(&m, &target)?;
            let gradient = r.gradient.expect("gradient was requested");
            write_gradient(m.alphabet(), &gradient, path)?;
            println!("{}", r.log_prob);
        }
    }
    Ok(())
}

fn run_map(args: MapArgs) -> anyhow::Result<()> {
    let map = load_manner_map(&args.manner_map)?;
    let mapped = map_text_to_manner(&args.text, &map)?;
    if args.human {
        println!("{}", mapped.replace('>', " "));
    } else {
        println!("{mapped}");
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Decode(cmd) => run_decode(cmd),
        Command::Eval(args) => run_eval(args),
        Command::Loss(args) => run_loss(args),
        Command::Map(args) => run_map(args),
    }
}
