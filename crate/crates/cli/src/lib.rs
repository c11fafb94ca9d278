//! Command implementations for the `phonotactic` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use phonotactic_core::corpus::synth::{site_parameters, synth_continuum, SynthConfig};
use phonotactic_core::corpus::{parse_wordlist, select_variant, serialize_wordlist, Dataset};
use phonotactic_core::geosurface::{default_lambda_grid, fit_summary, gcv_select, surface_grid, BBox};
use phonotactic_core::phoncore::{load_feature_table, tokenize};
use phonotactic_core::phonolm::{estimate_complexity, ComplexityRow, LmWord, ModelConfig, Weighting};
use phonotactic_core::stats::correlate_dialects;
use phonotactic_core::syllabify::{render_syllables, syllabify};
use phonotactic_core::{LanguageProfile, PhoneTable};

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or invocation (exit 2).
    Input(anyhow::Error),
    /// Anything that went wrong while computing (exit 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Input(e) | Self::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

fn input(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Input(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "phonotactic", version, about = "Phonotactic complexity of dialect wordlists")]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "generic")]
    pub profile: LanguageProfile,
    /// Phone feature table replacing the built-in one.
    #[arg(long, global = true)]
    pub feature_table: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for per-site training.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, tokenize and syllabify a corpus and report every problem.
    Validate { corpus: PathBuf },
    /// Write the syllabification of every word as TSV.
    Syllabify { corpus: PathBuf },
    /// Generate a synthetic dialect continuum.
    Synth(SynthArgs),
    /// Estimate bits per phoneme for every site.
    Complexity(ComplexityArgs),
    /// Correlate complexity with word length.
    Correlate {
        complexity: PathBuf,
        /// Label the report as coming from syllable-supervised models.
        #[arg(long)]
        multitask: bool,
    },
    /// Fit a thin plate spline over site coordinates.
    Surface(SurfaceArgs),
    /// Combine correlation and surface summaries into one JSON document.
    Report {
        /// Directory holding the outputs of `correlate` and `surface`.
        dir: PathBuf,
    },
    /// Print the built-in phone feature table.
    Features,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON configuration; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub words_per_site: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    pub corpus: PathBuf,
    /// Add syllable constituency supervision.
    #[arg(long)]
    pub multitask: bool,
    #[arg(long, value_enum, default_value = "uncertainty")]
    pub weighting: WeightingArg,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_phon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_syl: f64,
    #[arg(long, default_value_t = 32)]
    pub embedding_dim: usize,
    #[arg(long, default_value_t = 64)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.005)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 150)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 15)]
    pub patience: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 20)]
    pub min_words: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Uncertainty,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Response {
    Complexity,
    Length,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    pub complexity: PathBuf,
    /// Corpus supplying the site coordinates.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "complexity")]
    pub response: Response,
    /// Lattice size as `NXxNY`.
    #[arg(long, default_value = "50x50", value_parser = parse_resolution)]
    pub resolution: (usize, usize),
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((n(a)?, n(b)?))
}

/// Seed for one site, independent of scheduling order.
pub fn site_seed(seed: u64, site_id: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let hash = site_id
        .bytes()
        .fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME));
    seed ^ hash
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(input)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(runtime)?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(runtime)?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn json_string(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

impl Cli {
    fn table(&self) -> Result<PhoneTable> {
        match &self.feature_table {
            None => Ok(PhoneTable::builtin().clone()),
            Some(p) => {
                let table = load_feature_table(&read(p)?).map_err(input)?;
                for issue in table.validate() {
                    log::warn!("feature table: {issue:?}");
                }
                Ok(table)
            }
        }
    }

    fn seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| input(anyhow!("`{command}` needs --seed")))
    }

    fn corpus(&self, path: &Path) -> Result<Dataset> {
        let parsed = parse_wordlist(&read(path)?, self.profile)
            .with_context(|| path.display().to_string())
            .map_err(input)?;
        if !parsed.skipped_rows.is_empty() {
            log::warn!(
                "{}: skipped {} rows with empty transcriptions",
                path.display(),
                parsed.skipped_rows.len()
            );
        }
        Ok(parsed.dataset)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.jobs == 0 {
        return Err(input(anyhow!("--jobs must be at least 1")));
    }
    match &cli.command {
        Command::Validate { corpus } => validate(cli, corpus),
        Command::Syllabify { corpus } => cmd_syllabify(cli, corpus),
        Command::Synth(args) => synth(cli, args),
        Command::Complexity(args) => complexity(cli, args),
        Command::Correlate {
            complexity,
            multitask,
        } => correlate(cli, complexity, *multitask),
        Command::Surface(args) => surface(cli, args),
        Command::Report { dir } => report(cli, dir),
        Command::Features => {
            print!("{}", cli.table()?.to_tsv());
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct Issue {
    site_id: String,
    concept_id: String,
    transcription: String,
    error: String,
}

fn validate(cli: &Cli, path: &Path) -> Result<()> {
    let table = cli.table()?;
    let parsed = parse_wordlist(&read(path)?, cli.profile)
        .with_context(|| path.display().to_string())
        .map_err(input)?;
    let mut issues = Vec::new();
    let mut unmatched: BTreeMap<String, usize> = BTreeMap::new();
    let mut sites = Vec::new();
    for lex in &parsed.dataset.lexica {
        for entry in &lex.entries {
            let text = select_variant(entry);
            let outcome = tokenize(text, &table, cli.profile)
                .map_err(|e| {
                    if let phonotactic_core::phoncore::PhonError::Unmatched { grapheme, .. } = &e {
                        *unmatched.entry(grapheme.clone()).or_default() += 1;
                    }
                    e.to_string()
                })
                .and_then(|tokens| syllabify(&tokens, cli.profile).map(|_| ()).map_err(|e| e.to_string()));
            if let Err(error) = outcome {
                issues.push(Issue {
                    site_id: lex.site_id.clone(),
                    concept_id: entry.concept_id.clone(),
                    transcription: text.to_string(),
                    error,
                });
            }
        }
        sites.push(json!({"site_id": lex.site_id, "n_words": lex.entries.len()}));
    }
    let report = json!({
        "sites": sites,
        "skipped_rows": parsed.skipped_rows,
        "unmatched_symbols": unmatched,
        "issues": issues,
    });
    print!("{}", json_string(&report));
    if issues.is_empty() {
        Ok(())
    } else {
        Err(input(anyhow!("{} words failed to tokenize or syllabify", issues.len())))
    }
}

fn cmd_syllabify(cli: &Cli, path: &Path) -> Result<()> {
    let table = cli.table()?;
    let ds = cli.corpus(path)?;
    let mut out = String::from("site_id\tconcept_id\tsyllables\n");
    for lex in &ds.lexica {
        for entry in &lex.entries {
            let text = select_variant(entry);
            let tokens = tokenize(text, &table, cli.profile)
                .with_context(|| format!("{} {}", lex.site_id, entry.concept_id))
                .map_err(input)?;
            let syllables = syllabify(&tokens, cli.profile)
                .with_context(|| format!("{} {} `{text}`", lex.site_id, entry.concept_id))
                .map_err(input)?;
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                lex.site_id,
                entry.concept_id,
                render_syllables(&tokens, &syllables)
            ));
        }
    }
    write(&cli.out, "syllables.tsv", &out)?;
    Ok(())
}

fn synth(cli: &Cli, args: &SynthArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => serde_json::from_str::<SynthConfig>(&read(p)?)
            .with_context(|| format!("synth config {}", p.display()))
            .map_err(input)?,
        None => SynthConfig::default(),
    };
    cfg.seed = cli.seed("synth")?;
    if let Some(n) = args.n_sites {
        cfg.n_sites = n;
    }
    if let Some(n) = args.words_per_site {
        cfg.words_per_site = n;
    }
    let ds = synth_continuum(&cfg).map_err(input)?;
    let params = site_parameters(&cfg).map_err(input)?;
    let mut sites = String::from("site_id\tlongitude\tlatitude\tdistance\tharmony\tmean_syllables\n");
    for p in &params {
        sites.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            p.site_id, p.longitude, p.latitude, p.distance, p.harmony, p.mean_syllables
        ));
    }
    write(&cli.out, "corpus.tsv", &serialize_wordlist(&ds))?;
    write(&cli.out, "sites.tsv", &sites)?;
    write(&cli.out, "synth.json", &json_string(&cfg))?;
    Ok(())
}

const COMPLEXITY_HEADER: &str = "site_id\tbits_per_phoneme\tavg_word_length\tn_words";

pub fn complexity_tsv(rows: &[ComplexityRow]) -> String {
    let mut s = format!("{COMPLEXITY_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.site_id, r.bits_per_phoneme, r.avg_word_length, r.n_words
        ));
    }
    s
}

pub fn parse_complexity_tsv(text: &str) -> anyhow::Result<Vec<ComplexityRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == COMPLEXITY_HEADER => {}
        _ => bail!("expected header `{COMPLEXITY_HEADER}`"),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.trim_end_matches('\r').split('\t').collect();
            if f.len() != 4 {
                bail!("line {}: expected 4 columns, found {}", i + 1, f.len());
            }
            let num = |s: &str| s.parse::<f64>().with_context(|| format!("line {}: `{s}`", i + 1));
            Ok(ComplexityRow {
                site_id: f[0].to_string(),
                bits_per_phoneme: num(f[1])?,
                avg_word_length: num(f[2])?,
                n_words: f[3].parse().with_context(|| format!("line {}: `{}`", i + 1, f[3]))?,
            })
        })
        .collect()
}

fn complexity(cli: &Cli, args: &ComplexityArgs) -> Result<()> {
    let seed = cli.seed("complexity")?;
    let table = cli.table()?;
    let ds = cli.corpus(&args.corpus)?;
    let base = ModelConfig::<f64> {
        embedding_dim: args.embedding_dim,
        hidden_dim: args.hidden_dim,
        layers: args.layers,
        learning_rate: args.learning_rate,
        max_epochs: args.max_epochs,
        patience: args.patience,
        batch_size: args.batch_size,
        seed,
        multitask: args.multitask,
        weighting: match args.weighting {
            WeightingArg::Uncertainty => Weighting::Uncertainty,
            WeightingArg::Static => Weighting::Static,
        },
        lambda_phon: args.lambda_phon,
        lambda_syl: args.lambda_syl,
        folds: args.folds,
        min_words: args.min_words,
    };
    base.validate().map_err(input)?;

    // Tokenize everything up front so input errors surface before training.
    let mut sites = Vec::with_capacity(ds.lexica.len());
    for lex in &ds.lexica {
        let words = lex
            .entries
            .iter()
            .map(|e| {
                LmWord::from_transcription(select_variant(e), &table, cli.profile, args.multitask)
                    .with_context(|| format!("site {} concept {}", lex.site_id, e.concept_id))
            })
            .collect::<anyhow::Result<Vec<_>>>()
            .map_err(input)?;
        if words.len() < base.min_words {
            return Err(input(anyhow!(
                "site {} has {} words, below the training floor of {}",
                lex.site_id,
                words.len(),
                base.min_words
            )));
        }
        sites.push((lex.site_id.clone(), words));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(runtime)?;
    let mut rows = pool.install(|| {
        sites
            .par_iter()
            .map(|(site_id, words)| {
                let cfg = ModelConfig {
                    seed: site_seed(seed, site_id),
                    ..base.clone()
                };
                log::info!("training {site_id} ({} words)", words.len());
                estimate_complexity(site_id, words, &cfg).with_context(|| format!("site {site_id}"))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })
    .map_err(runtime)?;
    rows.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    let name = if args.multitask {
        "complexity_multitask.tsv"
    } else {
        "complexity.tsv"
    };
    write(&cli.out, name, &complexity_tsv(&rows))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorrelationJson {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
    pub multitask: bool,
}

fn correlate(cli: &Cli, path: &Path, multitask: bool) -> Result<()> {
    let rows = parse_complexity_tsv(&read(path)?)
        .with_context(|| path.display().to_string())
        .map_err(input)?;
    let r = correlate_dialects(&rows).map_err(input)?;
    let out = CorrelationJson {
        pearson: r.pearson_r,
        spearman: r.spearman_rho,
        n: r.n_sites,
        multitask,
    };
    let name = if multitask {
        "correlation_multitask.json"
    } else {
        "correlation.json"
    };
    write(&cli.out, name, &json_string(&out))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub response: String,
    pub intercept: f64,
    pub edf: f64,
    pub adj_r2: f64,
    pub lambda: f64,
    pub n: usize,
    pub gcv: f64,
    pub rss: f64,
    pub plane: [f64; 3],
    /// Lowest lattice value inside the site hull, as `[lon, lat, value]`.
    pub minimum: Option<[f64; 3]>,
    pub resolution: [usize; 2],
    pub cell: [f64; 2],
}

fn surface(cli: &Cli, args: &SurfaceArgs) -> Result<()> {
    let rows = parse_complexity_tsv(&read(&args.complexity)?)
        .with_context(|| args.complexity.display().to_string())
        .map_err(input)?;
    let ds = cli.corpus(&args.corpus)?;
    let mut points = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for r in &rows {
        let lex = ds
            .site(&r.site_id)
            .ok_or_else(|| input(anyhow!("site {} is not in {}", r.site_id, args.corpus.display())))?;
        points.push([lex.longitude, lex.latitude]);
        values.push(match args.response {
            Response::Complexity => r.bits_per_phoneme,
            Response::Length => r.avg_word_length,
        });
    }
    let sel = gcv_select(&points, &values, &default_lambda_grid()).map_err(input)?;
    let bbox = BBox::of_points(&points).expect("at least four sites");
    let grid = surface_grid(&sel.fit, bbox, args.resolution).map_err(input)?;
    let s = fit_summary(&sel.fit);
    let (nx, ny) = args.resolution;
    let summary = SurfaceJson {
        response: format!("{:?}", args.response).to_lowercase(),
        intercept: s.intercept,
        edf: s.edf,
        adj_r2: s.adj_r2,
        lambda: s.lambda,
        n: s.n,
        gcv: s.gcv,
        rss: s.rss,
        plane: [s.plane_origin, s.plane_longitude, s.plane_latitude],
        minimum: grid.argmin(true).map(|p| [p.longitude, p.latitude, p.value]),
        resolution: [nx, ny],
        cell: [
            (bbox.max[0] - bbox.min[0]) / (nx - 1) as f64,
            (bbox.max[1] - bbox.min[1]) / (ny - 1) as f64,
        ],
    };
    let stem = format!("surface_{}", summary.response);
    write(&cli.out, &format!("{stem}.csv"), &grid.to_csv())?;
    write(&cli.out, &format!("{stem}.json"), &json_string(&summary))?;
    Ok(())
}

fn report(cli: &Cli, dir: &Path) -> Result<()> {
    let load = |name: &str, required: bool| -> Result<Option<serde_json::Value>> {
        let path = dir.join(name);
        if !path.exists() {
            return if required {
                Err(input(anyhow!("missing {}", path.display())))
            } else {
                Ok(None)
            };
        }
        serde_json::from_str(&read(&path)?)
            .with_context(|| path.display().to_string())
            .map(Some)
            .map_err(input)
    };
    let mut correlations = Vec::new();
    for (name, required) in [("correlation.json", false), ("correlation_multitask.json", false)] {
        if let Some(v) = load(name, required)? {
            correlations.push(v);
        }
    }
    if correlations.is_empty() {
        return Err(input(anyhow!("no correlation report in {}", dir.display())));
    }
    let report = json!({
        "correlations": correlations,
        "surfaces": {
            "complexity": load("surface_complexity.json", true)?,
            "length": load("surface_length.json", true)?,
        },
    });
    write(&cli.out, "report.json", &json_string(&report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_seeds_differ_and_are_stable() {
        assert_eq!(site_seed(0, ""), 0xcbf2_9ce4_8422_2325);
        // FNV-1a of "a"
        assert_eq!(site_seed(0, "a"), 0xaf63_dc4c_8601_ec8c);
        assert_ne!(site_seed(1, "S01"), site_seed(1, "S02"));
        assert_eq!(site_seed(5, "S01") ^ 5, site_seed(0, "S01"));
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("11x9"), Ok((11, 9)));
        assert!(parse_resolution("11").is_err());
        assert!(parse_resolution("ax2").is_err());
    }

    #[test]
    fn complexity_tsv_round_trips() {
        let rows = vec![ComplexityRow {
            site_id: "S01".into(),
            bits_per_phoneme: 2.123456789012345,
            avg_word_length: 4.5,
            n_words: 200,
        }];
        assert_eq!(parse_complexity_tsv(&complexity_tsv(&rows)).unwrap(), rows);
        assert!(parse_complexity_tsv("bad\n").is_err());
    }
}
