use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use groundgame::fixtures::random_relevance_game;
use groundgame::io::{
    read_dataset, read_jsonl, write_jsonl, DatasetRecord, PredictionRecord, SequenceRecord,
};
use groundgame::{
    convergence_sweep, eval_record, exact_values, generate, pairwise_interaction_grid, recall_at,
    sampled_value, self_modal_game, sentence_level_interaction, CrossModalGameSpec, EvalRecord,
    FeatureSource, GroundingCase, Interval, LocalizerConfig, LossWeights, Mode, Pipeline,
    SamplingPlan, SweepTarget, SyntheticConfig, TableGame, ValueKind, DEFAULT_SAMPLE_COUNT,
    DEFAULT_TEMPERATURE,
};

#[derive(Parser)]
#[command(
    name = "groundgame",
    version,
    about = "Game-theoretic attribution and moment localization over embeddings"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for generation and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Sample count; a comma-separated list for bench-sampling.
    #[arg(long, global = true, value_delimiter = ',')]
    samples: Vec<usize>,
    #[arg(long, global = true, value_enum, default_value_t = KindArg::Banzhaf)]
    kind: KindArg,
    /// Moment expansion ratio threshold in (0, 1].
    #[arg(long, global = true, default_value_t = 0.8)]
    threshold: f64,
    /// Contrastive loss temperature.
    #[arg(long, global = true, default_value_t = DEFAULT_TEMPERATURE)]
    tau: f64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Banzhaf,
    Shapley,
}

impl From<KindArg> for ValueKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Banzhaf => ValueKind::Banzhaf,
            KindArg::Shapley => ValueKind::Shapley,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Enhanced,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Word,
    Phrase,
    Sentence,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic planted-moment dataset as JSON lines.
    Generate {
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = 6)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        words: usize,
        #[arg(long, default_value_t = 1)]
        phrases: usize,
        #[arg(long, default_value_t = 512)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
    },
    /// Self-modal game values of every element of each sequence record, as CSV.
    Values { input: PathBuf },
    /// Frame-by-text interaction grids of each dataset case, as CSV.
    Interactions {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Word)]
        level: Level,
        #[arg(long, value_enum, default_value_t = FeaturesArg::Raw)]
        features: FeaturesArg,
    },
    /// Localize moments for every dataset case; writes prediction JSON lines.
    Ground {
        dataset: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_moments: usize,
        #[arg(long, value_enum, default_value_t = FeaturesArg::Enhanced)]
        features: FeaturesArg,
        /// Also write a JSON loss summary over the whole dataset to this file.
        #[arg(long)]
        losses: Option<PathBuf>,
    },
    /// Recall table of predictions against a dataset's planted moments.
    Eval {
        predictions: PathBuf,
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 5])]
        at: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.5, 0.7])]
        iou: Vec<f64>,
    },
    /// Sampling convergence sweep on seeded cosine relevance games, as CSV.
    BenchSampling {
        #[arg(long, default_value_t = 12)]
        players: usize,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        /// Number of games (and sampling seeds) averaged per row.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
}

impl Global {
    fn single_sample_count(&self) -> Result<usize> {
        match self.samples.as_slice() {
            [] => Ok(DEFAULT_SAMPLE_COUNT),
            [n] => Ok(*n),
            _ => bail!("--samples takes a single count except with bench-sampling"),
        }
    }

    fn value_mode(&self) -> Result<Mode> {
        let kind = self.kind.into();
        match self.mode {
            ModeArg::Exact => Ok(Mode::Exact(kind)),
            ModeArg::Sampled => Ok(Mode::Sampled(SamplingPlan::new(
                self.single_sample_count()?,
                self.seed,
                kind,
            )?)),
        }
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn load_dataset(path: &Path) -> Result<Vec<GroundingCase>> {
    read_dataset(open(path)?).with_context(|| format!("invalid dataset {}", path.display()))
}

fn features(f: FeaturesArg) -> FeatureSource {
    match f {
        FeaturesArg::Enhanced => FeatureSource::Enhanced,
        FeaturesArg::Raw => FeatureSource::Raw,
    }
}

fn cmd_generate(g: &Global, config: SyntheticConfig) -> Result<()> {
    let records: Vec<DatasetRecord> = generate(&config)?.iter().map(DatasetRecord::from).collect();
    write_jsonl(g.output()?, &records)?;
    Ok(())
}

fn cmd_values(g: &Global, input: &Path) -> Result<()> {
    let records: Vec<SequenceRecord> = read_jsonl(open(input)?)
        .with_context(|| format!("invalid sequence file {}", input.display()))?;
    let mode = g.value_mode()?;
    let mut out = g.output()?;
    writeln!(out, "id,index,value,standard_error")?;
    for (line, record) in records.iter().enumerate() {
        let context = || format!("record {} ({})", line + 1, record.id);
        let game =
            self_modal_game(&record.to_sequence().with_context(context)?).with_context(context)?;
        match mode {
            Mode::Exact(kind) => {
                for (k, v) in exact_values(&game, kind)
                    .with_context(context)?
                    .values
                    .iter()
                    .enumerate()
                {
                    writeln!(out, "{},{k},{v},0", record.id)?;
                }
            }
            Mode::Sampled(plan) => {
                for k in 0..record.vectors.len() {
                    let r = sampled_value(&game, k, &plan)?;
                    writeln!(out, "{},{k},{},{}", record.id, r.estimate, r.standard_error)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_interactions(g: &Global, dataset: &Path, level: Level, source: FeaturesArg) -> Result<()> {
    let mode = g.value_mode()?;
    let mut out = g.output()?;
    writeln!(out, "id,frame,text,value")?;
    for case in load_dataset(dataset)? {
        let visual = match source {
            FeaturesArg::Raw => case.visual.clone(),
            FeaturesArg::Enhanced => groundgame::enhance(&case.visual, mode)?.to_sequence()?,
        };
        let words = match source {
            FeaturesArg::Raw => case.words.clone(),
            FeaturesArg::Enhanced => groundgame::enhance(&case.words, mode)?.to_sequence()?,
        };
        let cells: Vec<(usize, usize, f64)> = match level {
            Level::Word | Level::Phrase => {
                let text = if matches!(level, Level::Word) {
                    words
                } else {
                    case.phrases.clone()
                };
                let grid =
                    pairwise_interaction_grid(&CrossModalGameSpec::new(visual, text)?, mode)?
                        .values;
                grid.indexed_iter().map(|((i, j), v)| (i, j, *v)).collect()
            }
            Level::Sentence => sentence_level_interaction(&visual, &case.sentence, mode)?
                .into_iter()
                .enumerate()
                .map(|(i, v)| (i, 0, v))
                .collect(),
        };
        for (i, j, v) in cells {
            writeln!(out, "{},{i},{j},{v}", case.id)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_ground(
    g: &Global,
    dataset: &Path,
    max_moments: usize,
    source: FeaturesArg,
    losses: Option<&Path>,
) -> Result<()> {
    let cases = load_dataset(dataset)?;
    let mut pipeline = Pipeline::new(
        g.value_mode()?,
        LocalizerConfig::new(g.threshold, max_moments)?,
    );
    pipeline.features = features(source);
    let mut records = Vec::with_capacity(cases.len());
    for (case, output) in cases.iter().zip(pipeline.run_batch(&cases)) {
        let output = output.with_context(|| format!("case {}", case.id))?;
        records.push(PredictionRecord {
            id: case.id.clone(),
            moments: output.timed,
        });
    }
    write_jsonl(g.output()?, &records)?;
    if let Some(path) = losses {
        let report = pipeline.batch_losses(&cases, g.tau, &LossWeights::default())?;
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        serde_json::to_writer(BufWriter::new(file), &report)?;
    }
    Ok(())
}

fn cmd_eval(
    g: &Global,
    predictions: &Path,
    dataset: &Path,
    at: &[usize],
    ious: &[f64],
) -> Result<()> {
    let preds: Vec<PredictionRecord> = read_jsonl(open(predictions)?)
        .with_context(|| format!("invalid predictions {}", predictions.display()))?;
    let cases = load_dataset(dataset)?;
    let records = cases
        .iter()
        .map(|case| {
            let pred = preds.iter().find(|p| p.id == case.id);
            match pred {
                Some(p) => Ok(eval_record(case, &p.moments)?),
                None => Ok(EvalRecord {
                    id: case.id.clone(),
                    predictions: Vec::<Interval>::new(),
                    ground_truth: case.truth_interval(),
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = serde_json::Map::new();
    for &n in at {
        for &m in ious {
            table.insert(format!("R@{n},IoU={m}"), recall_at(&records, n, m)?.into());
        }
    }
    let mut out = g.output()?;
    serde_json::to_writer(&mut out, &table)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_bench(g: &Global, players: usize, dim: usize, seeds: u64) -> Result<()> {
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let counts = if g.samples.is_empty() {
        vec![1000, 4500, 5500]
    } else {
        g.samples.clone()
    };
    let targets: Vec<SweepTarget> = (0..players).map(SweepTarget::Player).collect();
    let mut mean = vec![0.0; counts.len()];
    let mut std = vec![0.0; counts.len()];
    for k in 0..seeds {
        let seed = g.seed.wrapping_add(k);
        let game = TableGame::tabulate(&random_relevance_game(players, dim, seed))?;
        let rows = convergence_sweep(&game, g.kind.into(), &targets, &counts, &[seed])?;
        for (c, row) in rows.iter().enumerate() {
            mean[c] += row.mean_rel_error / seeds as f64;
            std[c] += row.std_rel_error / seeds as f64;
        }
    }
    let mut out = g.output()?;
    writeln!(out, "count,mean_rel_error,std_rel_error")?;
    for (c, count) in counts.iter().enumerate() {
        writeln!(out, "{count},{},{}", mean[c], std[c])?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if !matches!(cli.command, Command::BenchSampling { .. }) {
        g.single_sample_count()?;
    }
    match &cli.command {
        Command::Generate {
            pairs,
            frames,
            words,
            phrases,
            dim,
            sigma,
            duration,
        } => cmd_generate(
            g,
            SyntheticConfig {
                frames: *frames,
                words: *words,
                phrases: *phrases,
                dim: *dim,
                noise_sigma: *sigma,
                seed: g.seed,
                pairs: *pairs,
                duration_s: *duration,
                ..Default::default()
            },
        ),
        Command::Values { input } => cmd_values(g, input),
        Command::Interactions {
            dataset,
            level,
            features,
        } => cmd_interactions(g, dataset, *level, *features),
        Command::Ground {
            dataset,
            max_moments,
            features,
            losses,
        } => cmd_ground(g, dataset, *max_moments, *features, losses.as_deref()),
        Command::Eval {
            predictions,
            dataset,
            at,
            iou,
        } => cmd_eval(g, predictions, dataset, at, iou),
        Command::BenchSampling {
            players,
            dim,
            seeds,
        } => cmd_bench(g, *players, *dim, *seeds),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!(
                "{}",
                text.lines().next().unwrap_or("error: invalid arguments")
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
