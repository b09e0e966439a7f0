//! Command-line front end: configuration, the train / generate / evaluate
//! stages and the on-disk layout they share.
//!
//! ```text
//! <out>/fields/<class>.json            trained network + standardization
//! <out>/fields/<class>_error.csv       iteration,error
//! <out>/synthetic/<class>/<id>.bvh     generated clips
//! <out>/synthetic/manifest.csv         file,class,reference,seed
//! <out>/eval/population.txt            real-vs-synthetic scores
//! <out>/eval/report_<arm>.txt          one per arm
//! <out>/eval/runs.csv                  arm,run,metric,value
//! <out>/eval/importance.csv            arm,feature,importance
//! <out>/eval/pairs.csv                 synthetic,real,dtw,mpjpe
//! <out>/eval/trajectory.csv            clip,label,provenance,frame,x,z
//! <out>/eval/features.csv              one row per clip
//! <out>/eval/correlation.csv           feature × feature
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{self, Label, MotionClip, Provenance, Skeleton};
use crate::classify::{ClassificationScores, ForestConfig, ARM_NAMES};
use crate::experiment::{self, EvalInputs, ExperimentConfig};
use crate::features;
use crate::motion;
use crate::ngn::{self, ClassModel, TrainConfig};
use crate::seed::{derive_seed, hash_str};
use crate::toy::{self, ToySpec};

const STAGE_TRAIN: u64 = 1;
const STAGE_GENERATE: u64 = 2;
const STAGE_EVALUATE: u64 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    fn in_stage(self, stage: &'static str) -> CliError {
        CliError::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn io_out(path: &Path, e: io::Error) -> CliError {
    CliError::Internal(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// One subdirectory of BVH files per class.
    pub input_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Class directory names to use; empty means every subdirectory.
    pub classes: Vec<String>,
    /// Resample every real clip to this many frames.
    pub target_frames: Option<usize>,
    /// Generation references as `class/stem`. Empty means the first
    /// `held_out_per_class` files of each class in name order.
    pub held_out: Vec<String>,
    pub held_out_per_class: usize,
    pub ngn: TrainConfig,
    pub forest: ForestConfig,
    pub experiment: ExperimentConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            seed: 0,
            classes: Vec::new(),
            target_frames: None,
            held_out: Vec::new(),
            held_out_per_class: 2,
            ngn: TrainConfig::default(),
            forest: ForestConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    fn fields_dir(&self) -> PathBuf {
        self.out_dir.join("fields")
    }

    fn synthetic_dir(&self) -> PathBuf {
        self.out_dir.join("synthetic")
    }

    fn eval_dir(&self) -> PathBuf {
        self.out_dir.join("eval")
    }

    fn class_seed(&self, label: &Label) -> u64 {
        derive_seed(self.seed, &[STAGE_TRAIN, hash_str(label.as_str())])
    }
}

/// Write through a sibling temp file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_out(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_out(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_out(path, e))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(buf)
}

fn is_bvh(path: &Path) -> bool {
    path.extension().map_or(false, |e| e.eq_ignore_ascii_case("bvh"))
}

/// BVH files under `dir`, recursively, in path order.
fn bvh_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| data(format!("{}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()
        .map_err(data)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            out.extend(bvh_files(&p)?);
        } else if is_bvh(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn read_bvh(path: &Path) -> Result<(Skeleton, MotionClip)> {
    let text = fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    bvh::parse_bvh(&text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// One summary line per BVH file. Every file is attempted; any failure makes
/// the whole command fail after the others are reported.
pub fn cmd_inspect<W: Write>(path: &Path, out: &mut W) -> Result<()> {
    let files = if path.is_dir() { bvh_files(path)? } else { vec![path.to_path_buf()] };
    let mut failures = Vec::new();
    for f in &files {
        match read_bvh(f) {
            Ok((sk, clip)) => {
                writeln!(
                    out,
                    "{}: joints={} channels={} frames={} frame_time={} duration={:.3}s",
                    f.display(),
                    sk.joint_count(),
                    sk.total_channels,
                    clip.frame_count(),
                    clip.frame_time,
                    clip.duration()
                )
                .map_err(|e| CliError::Internal(e.to_string()))?;
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(failures.join("\n")))
    }
}

/// The real clips of a run, all on one skeleton.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub skeleton: Skeleton,
    /// Grouped by class in class order, then by file name.
    pub clips: Vec<MotionClip>,
    pub held_out: Vec<bool>,
}

impl Corpus {
    pub fn classes(&self) -> Vec<Label> {
        let mut l: Vec<Label> = self.clips.iter().map(|c| c.label.clone()).collect();
        l.dedup();
        l
    }

    fn select(&self, label: &Label, held_out: bool) -> Vec<MotionClip> {
        self.clips
            .iter()
            .zip(&self.held_out)
            .filter(|(c, h)| c.label == *label && **h == held_out)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

pub fn load_corpus(config: &PipelineConfig) -> Result<Corpus> {
    let root = &config.input_dir;
    let mut dirs: Vec<PathBuf> = if config.classes.is_empty() {
        let mut d: Vec<PathBuf> = fs::read_dir(root)
            .map_err(|e| data(format!("{}: {e}", root.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        d.sort();
        d
    } else {
        config.classes.iter().map(|c| root.join(c)).collect()
    };
    // Class order is label order, so it does not depend on directory spelling.
    dirs.sort_by_key(|d| Label::from(stem(d)));

    let mut skeleton: Option<(Skeleton, PathBuf)> = None;
    let mut clips = Vec::new();
    for dir in &dirs {
        let label = Label::from(
            dir.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        let files = bvh_files(dir)?;
        if files.is_empty() {
            return Err(data(format!("{}: no BVH files", dir.display())));
        }
        for f in files {
            let (sk, clip) = read_bvh(&f)?;
            match &skeleton {
                None => skeleton = Some((sk, f.clone())),
                Some((first, first_path)) if first.columns() != sk.columns() => {
                    return Err(data(format!(
                        "{}: channel layout differs from {}",
                        f.display(),
                        first_path.display()
                    )))
                }
                Some(_) => {}
            }
            let clip = match config.target_frames {
                Some(n) => motion::resample(&clip, n).map_err(|e| data(format!("{}: {e}", f.display())))?,
                None => clip,
            };
            clips.push(clip.with_label(label.clone()).with_source(format!("{label}/{}", stem(&f))));
        }
    }
    let (skeleton, _) = skeleton.ok_or_else(|| data(format!("{}: no class directories", root.display())))?;
    let held_out = held_out_mask(&clips, config)?;
    Ok(Corpus { skeleton, clips, held_out })
}

fn held_out_mask(clips: &[MotionClip], config: &PipelineConfig) -> Result<Vec<bool>> {
    if !config.held_out.is_empty() {
        for id in &config.held_out {
            if !clips.iter().any(|c| &c.source_id == id) {
                return Err(CliError::Usage(format!("held_out entry {id} matches no input file")));
            }
        }
        return Ok(clips.iter().map(|c| config.held_out.contains(&c.source_id)).collect());
    }
    let mut seen: BTreeMap<&Label, usize> = BTreeMap::new();
    Ok(clips
        .iter()
        .map(|c| {
            let n = seen.entry(&c.label).or_default();
            *n += 1;
            *n <= config.held_out_per_class
        })
        .collect())
}

fn field_path(config: &PipelineConfig, label: &Label) -> PathBuf {
    config.fields_dir().join(format!("{label}.json"))
}

/// Train one network per class on its non-held-out clips.
pub fn cmd_train(config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let corpus = load_corpus(config)?;
    let classes = corpus.classes();
    let models = classes
        .par_iter()
        .map(|label| {
            let clips = corpus.select(label, false);
            if clips.is_empty() {
                return Err(data(format!("class {label}: every clip is held out")));
            }
            let cfg = TrainConfig { seed: config.class_seed(label), ..config.ngn.clone() };
            ClassModel::train(&clips, &cfg).map_err(|e| data(format!("class {label}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut written = Vec::new();
    for (label, model) in classes.iter().zip(&models) {
        let path = field_path(config, label);
        write_atomic(&path, model.to_json().as_bytes())?;
        let errors = csv_bytes(|b| model.field.write_error_csv(b))?;
        write_atomic(&config.fields_dir().join(format!("{label}_error.csv")), &errors)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub class: String,
    pub reference: String,
    pub seed: u64,
}

/// Generate `ngn.samples_per_class` clips per class from the held-out
/// references. Replaces any earlier synthetic output.
pub fn cmd_generate(config: &PipelineConfig) -> Result<Vec<ManifestRow>> {
    let corpus = load_corpus(config)?;
    let mut models = BTreeMap::new();
    let mut references = BTreeMap::new();
    for label in corpus.classes() {
        let path = field_path(config, &label);
        let text = fs::read_to_string(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
        let model = ClassModel::from_json(&text).map_err(|e| data(format!("{}: {e}", path.display())))?;
        let refs = corpus.select(&label, true);
        if refs.is_empty() {
            return Err(data(format!("class {label}: no held-out reference clips")));
        }
        models.insert(label.clone(), model);
        references.insert(label, refs);
    }
    let generated = ngn::generate_dataset(
        &models,
        &references,
        config.ngn.samples_per_class,
        derive_seed(config.seed, &[STAGE_GENERATE]),
    )
    .map_err(data)?;

    let dir = config.synthetic_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| io_out(&dir, e))?;
    }
    fs::create_dir_all(&dir).map_err(|e| io_out(&dir, e))?;
    let mut rows = Vec::with_capacity(generated.len());
    for g in &generated {
        let label = g.clip.label.as_str();
        let file = format!("{label}/{}.bvh", g.clip.source_id);
        let text = bvh::write_bvh(&corpus.skeleton, &g.clip).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(&dir.join(&file), text.as_bytes())?;
        rows.push(ManifestRow {
            file,
            class: label.to_owned(),
            reference: g.reference_id.clone(),
            seed: g.seed,
        });
    }
    let manifest = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        if rows.is_empty() {
            w.write_record(["file", "class", "reference", "seed"])?;
        }
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    })?;
    write_atomic(&dir.join("manifest.csv"), &manifest)?;
    Ok(rows)
}

fn read_manifest(config: &PipelineConfig) -> Result<Vec<ManifestRow>> {
    let path = config.synthetic_dir().join("manifest.csv");
    let mut r = csv::Reader::from_path(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<csv::Result<Vec<ManifestRow>>>()
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

fn arm_slug(arm: &str) -> String {
    arm.to_ascii_lowercase().replace('+', "_")
}

/// Features, population metrics and the classification arms, with every
/// plot table.
pub fn cmd_evaluate(config: &PipelineConfig) -> Result<()> {
    let corpus = load_corpus(config)?;
    let manifest = read_manifest(config)?;
    let dir = config.synthetic_dir();
    let synthetic = manifest
        .par_iter()
        .map(|row| {
            let (_, clip) = read_bvh(&dir.join(&row.file))?;
            let mut clip = clip.with_label(Label::from(row.class.as_str())).with_source(stem(Path::new(&row.file)));
            clip.provenance = Provenance::Synthetic;
            Ok(clip)
        })
        .collect::<Result<Vec<_>>>()?;
    let references: Vec<Option<usize>> = manifest
        .iter()
        .map(|row| corpus.clips.iter().position(|c| c.source_id == row.reference))
        .collect();

    let inputs = EvalInputs {
        skeleton: &corpus.skeleton,
        real: &corpus.clips,
        held_out: &corpus.held_out,
        synthetic: &synthetic,
        references: &references,
    };
    let ev = experiment::evaluate(&inputs, &config.experiment, &config.forest, derive_seed(config.seed, &[STAGE_EVALUATE]))
        .map_err(data)?;

    let out = config.eval_dir();
    let p = &ev.population;
    let mut population = String::new();
    for (k, v) in [
        ("fid_k", p.fid_k),
        ("diversity_real", p.diversity_real),
        ("diversity_synth", p.diversity_synth),
        ("fidelity", p.fidelity),
        ("dtw_mean", p.dtw_mean),
        ("mpjpe_mean", p.mpjpe_mean),
    ] {
        let _ = writeln!(population, "{k} = {v}");
    }
    write_atomic(&out.join("population.txt"), population.as_bytes())?;

    for arm in &ev.arms {
        let name = format!("report_{}.txt", arm_slug(&arm.report.arm));
        write_atomic(&out.join(name), arm.report.to_kv_text().as_bytes())?;
    }
    let runs = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["arm", "run", "metric", "value"])?;
        for arm in &ev.arms {
            for (i, run) in arm.report.classification.runs.iter().enumerate() {
                for (m, v) in ClassificationScores::NAMES.iter().zip(run.scores.values()) {
                    w.write_record([arm.report.arm.as_str(), &i.to_string(), m, &v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })?;
    write_atomic(&out.join("runs.csv"), &runs)?;
    write_atomic(&out.join("importance.csv"), &csv_bytes(|b| crate::classify::write_importance_csv(&ev.arms, b))?)?;
    write_atomic(&out.join("pairs.csv"), &csv_bytes(|b| experiment::write_pairs_csv(&ev.pairs, b))?)?;

    let all: Vec<&MotionClip> = corpus.clips.iter().chain(&synthetic).collect();
    let mut traj = Vec::new();
    experiment::write_trajectory_csv(&corpus.skeleton, &all, &mut traj).map_err(data)?;
    write_atomic(&out.join("trajectory.csv"), &traj)?;

    let feats: Vec<features::FeatureVector> =
        ev.real_features.iter().chain(&ev.synthetic_features).cloned().collect();
    write_atomic(&out.join("features.csv"), &csv_bytes(|b| features::write_feature_csv(&feats, b))?)?;
    let corr = experiment::feature_correlation(&feats);
    write_atomic(&out.join("correlation.csv"), &csv_bytes(|b| experiment::write_correlation_csv(&corr, b))?)?;
    Ok(())
}

/// train, generate, evaluate; the first failing stage is named in the error.
pub fn cmd_pipeline(config: &PipelineConfig) -> Result<()> {
    cmd_train(config).map_err(|e| e.in_stage("train"))?;
    cmd_generate(config).map_err(|e| e.in_stage("generate"))?;
    cmd_evaluate(config).map_err(|e| e.in_stage("evaluate"))?;
    Ok(())
}

/// Write the toy corpus as `<out>/<class>/<class>_NN.bvh`.
pub fn cmd_toy(out: &Path, seed: u64, spec: &ToySpec) -> Result<usize> {
    let sk = toy::toy_skeleton();
    let clips = toy::toy_corpus(seed, spec);
    for c in &clips {
        let text = bvh::write_bvh(&sk, c).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(&out.join(c.label.as_str()).join(format!("{}.bvh", c.source_id)), text.as_bytes())?;
    }
    Ok(clips.len())
}

#[derive(Debug, Parser)]
#[command(name = "ngn-motion", version, about = "Neural gas synthesis and evaluation of BVH motion clips")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a BVH file or every BVH file under a directory.
    Inspect { path: PathBuf },
    /// Train one network per class.
    Train(Overrides),
    /// Generate synthetic clips from trained networks.
    Generate(Overrides),
    /// Score synthetic clips and run the classification arms.
    Evaluate(Overrides),
    /// train, generate and evaluate in sequence.
    Pipeline(Overrides),
    /// Write the built-in toy corpus.
    Toy {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        clips_per_class: usize,
        #[arg(long, default_value_t = 300)]
        frames: usize,
    },
    /// Print the effective configuration as TOML.
    Config(Overrides),
}

/// Every flag overrides the matching config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated class directory names.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub target_frames: Option<usize>,
    #[arg(long)]
    pub held_out_per_class: Option<usize>,
    #[arg(long)]
    pub neurons: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub epsilon_initial: Option<f64>,
    #[arg(long)]
    pub epsilon_final: Option<f64>,
    #[arg(long)]
    pub lambda_initial: Option<f64>,
    #[arg(long)]
    pub lambda_final: Option<f64>,
    #[arg(long)]
    pub noise_std: Option<f64>,
    #[arg(long)]
    pub smoothing_sigma: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set! {
            input => input_dir,
            out => out_dir,
            seed => seed,
            classes => classes,
            n_per_class => ngn.samples_per_class,
            held_out_per_class => held_out_per_class,
            neurons => ngn.neuron_count,
            iterations => ngn.iterations,
            epsilon_initial => ngn.epsilon_initial,
            epsilon_final => ngn.epsilon_final,
            lambda_initial => ngn.lambda_initial,
            lambda_final => ngn.lambda_final,
            noise_std => ngn.noise_std,
            smoothing_sigma => ngn.smoothing_sigma,
            trees => forest.tree_count,
            runs => experiment.cv.runs,
            train_fraction => experiment.cv.train_fraction,
        }
        if self.target_frames.is_some() {
            c.target_frames = self.target_frames;
        }
        c.ngn.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if c.forest.tree_count == 0 || c.experiment.cv.runs == 0 {
            return Err(CliError::Usage("trees and runs must be at least 1".into()));
        }
        if !(c.experiment.cv.train_fraction > 0.0 && c.experiment.cv.train_fraction < 1.0) {
            return Err(CliError::Usage("train_fraction must lie strictly between 0 and 1".into()));
        }
        Ok(c)
    }
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<()> {
    let say = |out: &mut W, s: String| writeln!(out, "{s}").map_err(|e| CliError::Internal(e.to_string()));
    match cli.command {
        Command::Inspect { path } => cmd_inspect(&path, out),
        Command::Train(o) => {
            let paths = cmd_train(&o.resolve()?)?;
            say(out, format!("trained {} class networks", paths.len()))
        }
        Command::Generate(o) => {
            let rows = cmd_generate(&o.resolve()?)?;
            say(out, format!("generated {} clips", rows.len()))
        }
        Command::Evaluate(o) => {
            let c = o.resolve()?;
            cmd_evaluate(&c)?;
            say(out, format!("wrote {}", c.eval_dir().display()))
        }
        Command::Pipeline(o) => {
            let c = o.resolve()?;
            cmd_pipeline(&c)?;
            say(out, format!("wrote {}", c.out_dir.display()))
        }
        Command::Toy { out: dir, seed, clips_per_class, frames } => {
            let spec = ToySpec { clips_per_class, frames, ..ToySpec::default() };
            let n = cmd_toy(&dir, seed, &spec)?;
            say(out, format!("wrote {n} clips to {}", dir.display()))
        }
        Command::Config(o) => say(out, o.resolve()?.to_toml()),
    }
}

/// Names used for arm report files, in arm order.
pub fn arm_report_files() -> Vec<String> {
    ARM_NAMES.iter().map(|a| format!("report_{}.txt", arm_slug(a))).collect()
}
