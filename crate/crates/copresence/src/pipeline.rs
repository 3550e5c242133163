//! Stage orchestration over plain-file artifacts.
//!
//! Every command reads its inputs from disk, writes its outputs under one
//! output directory, and records both sides with sha256 content hashes in
//! `manifest.json`. Re-running a stage whose params, input hashes, and
//! output hashes all still match is a no-op. Artifacts carry the feature
//! schema hash, and stages refuse to combine artifacts whose hashes
//! disagree.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::StudyConfig;
use crate::dyads::{build_dyad_series, eligible_dyads, pooled_distances, Dyad};
use crate::error::{Error, Result};
use crate::eval::{assign_folds, evaluate_predictions, CvSchema, MetricsBundle};
use crate::features::{extract_matrix, FeatureMatrix, FeatureSchema};
use crate::ingest::{build_grid, coverage_survival, parse_inputs, read_grid_csv, write_grid_csv, SurveyTie, TieType, TimelineGrid};
use crate::learn::{assemble, boost, cfs, forest, tree, ModelFile, ModelKind, TrainedModel};
use crate::networks::{build_label_table, build_networks, LabelTable, Target};
use crate::synth::{generate, leakage_fixture, SynthConfig};
use crate::thresholds::{cluster_1d, eccdf, ThresholdSet};
use crate::{derive_seed, report, substream};

const THRESHOLD_COUNT: usize = 10;
const CFS_MAX_STALE: usize = 5;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub params: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Stage ledger persisted as `manifest.json` in the output directory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl PipelineManifest {
    pub fn load_or_default(dir: &Path) -> Result<PipelineManifest> {
        let path = dir.join("manifest.json");
        if !path.exists() {
            return Ok(PipelineManifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Manifest keys: paths inside the output directory are stored relative so
/// the manifest does not depend on where the directory lives.
fn manifest_key(dir: &Path, path: &Path) -> String {
    match path.strip_prefix(dir) {
        Ok(rel) => rel.to_string_lossy().replace('\\', "/"),
        Err(_) => path.to_string_lossy().into_owned(),
    }
}

/// Run one stage unless the manifest shows its params, inputs, and outputs
/// all unchanged. Returns whether the body actually ran.
fn run_stage(
    dir: &Path,
    name: &str,
    params: BTreeMap<String, String>,
    inputs: &[PathBuf],
    body: impl FnOnce() -> Result<Vec<PathBuf>>,
) -> Result<bool> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = PipelineManifest::load_or_default(dir)?;
    let mut input_hashes = BTreeMap::new();
    for p in inputs {
        if !p.exists() {
            return Err(Error::missing_artifact(format!(
                "stage {name}: missing input {}",
                p.display()
            )));
        }
        input_hashes.insert(manifest_key(dir, p), file_sha256(p)?);
    }
    if let Some(rec) = manifest.stages.get(name) {
        if rec.params == params && rec.inputs == input_hashes && !rec.outputs.is_empty() {
            let fresh = rec.outputs.iter().all(|(p, h)| {
                let path = dir.join(p);
                path.exists() && file_sha256(&path).map(|cur| cur == *h).unwrap_or(false)
            });
            if fresh {
                return Ok(false);
            }
        }
    }
    let produced = body()?;
    let mut outputs = BTreeMap::new();
    for p in &produced {
        outputs.insert(manifest_key(dir, p), file_sha256(p)?);
    }
    manifest.stages.insert(
        name.to_string(),
        StageRecord {
            params,
            inputs: input_hashes,
            outputs,
        },
    );
    manifest.save(dir)?;
    Ok(true)
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("artifact serializes");
    write_bytes(path, (text + "\n").as_bytes())
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::missing_artifact(format!("{} not found", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
}

fn require(path: PathBuf, producer: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::missing_artifact(format!(
            "{} not found; run `{producer}` first",
            path.display()
        )))
    }
}

fn grid_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let grids = dir.join("grids");
    if !grids.is_dir() {
        return Err(Error::missing_artifact(format!(
            "{} not found; run `ingest` first",
            grids.display()
        )));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&grids)
        .map_err(|e| Error::io(&grids, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::missing_artifact(format!(
            "no grid files under {}; run `ingest` first",
            grids.display()
        )));
    }
    Ok(files)
}

fn load_grids(dir: &Path, config: &StudyConfig) -> Result<Vec<TimelineGrid>> {
    grid_files(dir)?
        .iter()
        .map(|p| {
            let device_id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| Error::contract(format!("bad grid file name {}", p.display())))?;
            let file = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            read_grid_csv(&device_id, config.bin_width_ms, std::io::BufReader::new(file))
        })
        .collect()
}

fn load_ties(dir: &Path) -> Result<Vec<SurveyTie>> {
    load_json(&require(dir.join("ties.json"), "ingest")?)
}

fn load_config(dir: &Path) -> Result<StudyConfig> {
    StudyConfig::load(&require(dir.join("config.json"), "ingest")?)
}

/// Load the feature matrix and verify it matches the saved schema; refuses
/// to mix artifacts from different extractions.
fn load_matrix_checked(dir: &Path) -> Result<FeatureMatrix> {
    let matrix = FeatureMatrix::load(&require(dir.join("features.csv"), "extract")?)?;
    let schema = FeatureSchema::load(&require(dir.join("schema.json"), "extract")?)?;
    if schema.hash() != matrix.schema.hash() {
        return Err(Error::contract(format!(
            "features.csv has schema {} but schema.json says {}; artifacts are mixed",
            matrix.schema.hash(),
            schema.hash()
        )));
    }
    Ok(matrix)
}

/// Generate a synthetic cohort into `<out>/data/`.
pub fn cmd_simulate(out: &Path, synth: &SynthConfig, leakage: bool) -> Result<bool> {
    let stage_params = params(&[
        ("synth", serde_json::to_string(synth).expect("config serializes")),
        ("leakage", leakage.to_string()),
    ]);
    run_stage(out, "simulate", stage_params, &[], || {
        let dataset = if leakage {
            leakage_fixture(synth)?
        } else {
            generate(synth)?
        };
        let data = out.join("data");
        dataset.write(&data)?;
        Ok(vec![
            data.join("locations.csv"),
            data.join("wifi.csv"),
            data.join("surveys.csv"),
            data.join("config.json"),
            data.join("truth.json"),
        ])
    })
}

/// Parse raw logs, build per-device grids, and emit the coverage curve.
pub fn cmd_ingest(
    out: &Path,
    config_path: &Path,
    locations: &Path,
    wifi: &Path,
    surveys: &Path,
) -> Result<bool> {
    let inputs = vec![
        config_path.to_path_buf(),
        locations.to_path_buf(),
        wifi.to_path_buf(),
        surveys.to_path_buf(),
    ];
    run_stage(out, "ingest", params(&[]), &inputs, || {
        let config = StudyConfig::load(config_path)?;
        let (samples, wifi_obs, ties, report) = parse_inputs(locations, wifi, surveys, &config)?;
        let grids = build_grid(&samples, &wifi_obs, &config);
        if grids.is_empty() {
            return Err(Error::contract("no device produced any usable observation"));
        }
        let grids_dir = out.join("grids");
        if grids_dir.exists() {
            std::fs::remove_dir_all(&grids_dir).map_err(|e| Error::io(&grids_dir, e))?;
        }
        std::fs::create_dir_all(&grids_dir).map_err(|e| Error::io(&grids_dir, e))?;
        let mut produced = Vec::new();
        for grid in &grids {
            let path = grids_dir.join(format!("{}.csv", grid.device_id));
            let mut buf = Vec::new();
            write_grid_csv(grid, &mut buf).map_err(|e| Error::io(&path, e))?;
            write_bytes(&path, &buf)?;
            produced.push(path);
        }
        let report_path = out.join("ingest_report.json");
        save_json(&report_path, &report)?;
        produced.push(report_path);
        let coverage_path = out.join("coverage.csv");
        let mut buf = Vec::new();
        writeln!(buf, "gap_ms,fraction_exceeding").expect("vec write");
        for p in coverage_survival(&grids)? {
            writeln!(buf, "{},{}", p.gap_ms, p.fraction_exceeding).expect("vec write");
        }
        write_bytes(&coverage_path, &buf)?;
        produced.push(coverage_path);
        let ties_path = out.join("ties.json");
        save_json(&ties_path, &ties)?;
        produced.push(ties_path);
        let config_copy = out.join("config.json");
        config.save(&config_copy)?;
        produced.push(config_copy);
        Ok(produced)
    })
}

/// Pool pairwise distances and derive the distance thresholds.
pub fn cmd_thresholds(out: &Path) -> Result<bool> {
    let mut inputs = vec![require(out.join("config.json"), "ingest")?];
    inputs.extend(grid_files(out)?);
    run_stage(out, "thresholds", params(&[]), &inputs, || {
        let config = load_config(out)?;
        let grids = load_grids(out, &config)?;
        let pooled = pooled_distances(&grids, config.distance_elbow_m);
        if pooled.is_empty() {
            return Err(Error::contract(
                "no co-observed pair distance below the elbow; nothing to cluster",
            ));
        }
        let curve = eccdf(&pooled)?;
        let eccdf_path = out.join("eccdf.csv");
        let mut buf = Vec::new();
        writeln!(buf, "distance_m,fraction_exceeding").expect("vec write");
        for &(value, survival) in &curve.points {
            writeln!(buf, "{value},{survival}").expect("vec write");
        }
        write_bytes(&eccdf_path, &buf)?;
        let set = match config.threshold_mode {
            crate::config::ThresholdMode::Static => ThresholdSet::new(config.static_thresholds_m.clone())?,
            crate::config::ThresholdMode::Cluster => {
                cluster_1d(&pooled, THRESHOLD_COUNT, config.distance_elbow_m)?
            }
        };
        let thresholds_path = out.join("thresholds.json");
        set.save(&thresholds_path)?;
        Ok(vec![eccdf_path, thresholds_path])
    })
}

/// Build dyad series and extract the feature matrix.
pub fn cmd_extract(out: &Path, include_wifi: bool) -> Result<bool> {
    let mut inputs = vec![
        require(out.join("config.json"), "ingest")?,
        require(out.join("ties.json"), "ingest")?,
        require(out.join("thresholds.json"), "thresholds")?,
    ];
    inputs.extend(grid_files(out)?);
    let stage_params = params(&[("include_wifi", include_wifi.to_string())]);
    run_stage(out, "extract", stage_params, &inputs, || {
        let config = load_config(out)?;
        let grids = load_grids(out, &config)?;
        let ties = load_ties(out)?;
        let thresholds = ThresholdSet::load(&out.join("thresholds.json"))?;
        let nodes: BTreeSet<String> = ties
            .iter()
            .flat_map(|t| [t.ego.clone(), t.alter.clone()])
            .collect();
        let (dyads, eligibility) = eligible_dyads(&grids, &nodes);
        if dyads.is_empty() {
            return Err(Error::contract(
                "no survey pair has overlapping sensor coverage; nothing to extract",
            ));
        }
        let matrix = extract_matrix(&grids, &dyads, &thresholds, &config, include_wifi)?;
        let features_path = out.join("features.csv");
        matrix.save(&features_path)?;
        let schema_path = out.join("schema.json");
        matrix.schema.save(&schema_path)?;
        let eligibility_path = out.join("eligibility.json");
        save_json(&eligibility_path, &eligibility)?;
        Ok(vec![features_path, schema_path, eligibility_path])
    })
}

fn build_labels(out: &Path, target: Target, matrix: &FeatureMatrix) -> Result<(LabelTable, PathBuf)> {
    let ties = load_ties(out)?;
    let networks = build_networks(&ties);
    let available: BTreeSet<_> = matrix
        .rows
        .iter()
        .map(|r| (r.dyad.clone(), r.period))
        .collect();
    let table = build_label_table(target, &networks, &available)?;
    let path = out.join(format!("labels_{}.csv", target.label()));
    let mut buf = Vec::new();
    table.write_csv(&mut buf).map_err(|e| Error::io(&path, e))?;
    write_bytes(&path, &buf)?;
    Ok((table, path))
}

/// Stability feature selection for one target.
pub fn cmd_select(out: &Path, target: Target, folds: usize, threshold: usize, seed: u64) -> Result<bool> {
    let inputs = vec![
        require(out.join("features.csv"), "extract")?,
        require(out.join("schema.json"), "extract")?,
        require(out.join("ties.json"), "ingest")?,
    ];
    let stage_params = params(&[
        ("target", target.label().to_string()),
        ("folds", folds.to_string()),
        ("threshold", threshold.to_string()),
        ("seed", seed.to_string()),
    ]);
    run_stage(out, &format!("select/{}", target.label()), stage_params, &inputs, || {
        let matrix = load_matrix_checked(out)?;
        let (table, labels_path) = build_labels(out, target, &matrix)?;
        let ds = assemble(&matrix, &table)?;
        let candidates: Vec<usize> = (0..ds.width).collect();
        let mut rng = substream(seed, &format!("select/{}", target.label()));
        let stability = cfs::stability_select(
            &ds.x,
            &ds.y,
            &candidates,
            folds,
            threshold,
            CFS_MAX_STALE,
            &mut rng,
        )?;
        let name_of = |i: &usize| matrix.schema.columns[*i].clone();
        let selected = cfs::SelectedFeatures {
            schema_hash: matrix.schema.hash(),
            target: target.label().to_string(),
            folds,
            threshold,
            counts: stability.counts.iter().map(|(i, c)| (name_of(i), *c)).collect(),
            columns: stability.selected.iter().map(name_of).collect(),
        };
        let selected_path = out.join(format!("selected_{}.json", target.label()));
        selected.save(&selected_path)?;
        Ok(vec![labels_path, selected_path])
    })
}

/// Which columns a model may split on.
#[derive(Clone, Debug, PartialEq)]
pub enum FeatureMode {
    All,
    Selected(PathBuf),
}

impl FeatureMode {
    pub fn parse(s: &str) -> Result<FeatureMode> {
        if s == "all" {
            return Ok(FeatureMode::All);
        }
        if let Some(path) = s.strip_prefix("selected:") {
            if path.is_empty() {
                return Err(Error::contract("selected: needs a file path"));
            }
            return Ok(FeatureMode::Selected(PathBuf::from(path)));
        }
        Err(Error::contract(format!(
            "feature mode {s:?} is not `all` or `selected:<path>`"
        )))
    }

    pub fn label(&self) -> String {
        match self {
            FeatureMode::All => "all".to_string(),
            FeatureMode::Selected(p) => format!("selected:{}", p.display()),
        }
    }

    /// Short tag for file names.
    fn tag(&self) -> &'static str {
        match self {
            FeatureMode::All => "all",
            FeatureMode::Selected(_) => "sel",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalSpec {
    pub target: Target,
    pub cv: CvSchema,
    pub folds: usize,
    pub model: ModelKind,
    pub features: FeatureMode,
    pub seed: u64,
}

/// One evaluation run: fold plan, pooled out-of-fold metrics, a final model
/// fit on all rows, and the report JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: String,
    pub cv: String,
    pub model: String,
    pub features: String,
    pub folds: usize,
    pub fold_sizes: Vec<usize>,
    pub seed: u64,
    pub schema_hash: String,
    pub rows: usize,
    pub label_positives: usize,
    pub predicted_positives: usize,
    pub feature_count: usize,
    pub notes: Vec<String>,
    pub metrics: MetricsBundle,
}

pub fn fit_model(kind: ModelKind, x: &[&[f64]], y: &[bool], allowed: &[usize], seed: u64) -> TrainedModel {
    match kind {
        ModelKind::Forest => {
            TrainedModel::Forest(forest::fit(x, y, allowed, &forest::ForestConfig::default(), seed))
        }
        ModelKind::Adaboost => {
            TrainedModel::Adaboost(boost::fit(x, y, allowed, &boost::BoostConfig::default(), seed))
        }
        ModelKind::Tree => {
            let w = vec![1.0; x.len()];
            let mut rng = substream(seed, "tree");
            TrainedModel::Tree(tree::fit(x, y, &w, allowed, &tree::TreeConfig::default(), &mut rng))
        }
    }
}

/// Resolve the allowed feature indices for a mode against a schema.
fn allowed_features(mode: &FeatureMode, matrix: &FeatureMatrix) -> Result<Vec<usize>> {
    match mode {
        FeatureMode::All => Ok((0..matrix.schema.width()).collect()),
        FeatureMode::Selected(path) => {
            let selected = cfs::SelectedFeatures::load(path)?;
            if selected.schema_hash != matrix.schema.hash() {
                return Err(Error::contract(format!(
                    "{} was selected on schema {} but the matrix has schema {}; artifacts are mixed",
                    path.display(),
                    selected.schema_hash,
                    matrix.schema.hash()
                )));
            }
            let index: BTreeMap<&str, usize> = matrix
                .schema
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| (c.as_str(), i))
                .collect();
            selected
                .columns
                .iter()
                .map(|c| {
                    index.get(c.as_str()).copied().ok_or_else(|| {
                        Error::contract(format!("selected column {c:?} not in the schema"))
                    })
                })
                .collect()
        }
    }
}

/// Cross-validated evaluation. Test predictions are pooled over all fold
/// rotations before metrics are computed, so every label row is scored
/// exactly once (the temporal schema scores only the later period).
pub fn cmd_evaluate(out: &Path, spec: &EvalSpec) -> Result<(bool, PathBuf)> {
    let mut inputs = vec![
        require(out.join("features.csv"), "extract")?,
        require(out.join("schema.json"), "extract")?,
        require(out.join("ties.json"), "ingest")?,
    ];
    if let FeatureMode::Selected(path) = &spec.features {
        inputs.push(require(path.clone(), "select")?);
    }
    let tag = format!(
        "{}_{}_{}_{}",
        spec.target.label(),
        spec.cv.label(),
        spec.model.label(),
        spec.features.tag()
    );
    let report_path = out.join(format!("eval_{tag}.json"));
    let stage_params = params(&[
        ("target", spec.target.label().to_string()),
        ("cv", spec.cv.label().to_string()),
        ("folds", spec.folds.to_string()),
        ("model", spec.model.label().to_string()),
        ("features", spec.features.label()),
        ("seed", spec.seed.to_string()),
    ]);
    let report_out = report_path.clone();
    let ran = run_stage(out, &format!("evaluate/{tag}"), stage_params, &inputs, || {
        let matrix = load_matrix_checked(out)?;
        let (table, labels_path) = build_labels(out, spec.target, &matrix)?;
        let ds = assemble(&matrix, &table)?;
        let allowed = allowed_features(&spec.features, &matrix)?;
        let mut notes = Vec::new();
        if allowed.is_empty() {
            notes.push("empty feature set; models fall back to the class prior".to_string());
        }
        let mut rng = substream(
            spec.seed,
            &format!("folds/{}/{}", spec.target.label(), spec.cv.label()),
        );
        let plan = assign_folds(spec.cv, &table.rows, spec.folds, &mut rng)?;
        let plan_path = out.join(format!("fold_plan_{}_{}.json", spec.target.label(), spec.cv.label()));
        save_json(&plan_path, &plan)?;
        let mut fold_sizes = vec![0usize; plan.folds];
        for &f in &plan.assignment {
            fold_sizes[f] += 1;
        }
        let mut pooled: Vec<(bool, f64)> = Vec::new();
        for (split_index, (train, test)) in plan.splits().into_iter().enumerate() {
            if train.is_empty() || test.is_empty() {
                notes.push(format!("fold rotation {split_index} degenerate; skipped"));
                continue;
            }
            let tx: Vec<&[f64]> = train.iter().map(|&i| ds.x[i]).collect();
            let ty: Vec<bool> = train.iter().map(|&i| ds.y[i]).collect();
            let model = fit_model(
                spec.model,
                &tx,
                &ty,
                &allowed,
                derive_seed(spec.seed, &format!("model/{tag}/fold{split_index}")),
            );
            pooled.extend(test.iter().map(|&i| (ds.y[i], model.predict(ds.x[i]))));
        }
        if pooled.is_empty() {
            return Err(Error::contract("every fold rotation was degenerate"));
        }
        let metrics = evaluate_predictions(&pooled);
        let predicted_positives = (metrics.confusion.tp + metrics.confusion.fp) as usize;
        if metrics.positives == 0 {
            notes.push("no positive labels in the table".to_string());
        }
        if predicted_positives == 0 {
            notes.push("no positive predictions; positive-class metrics are undefined".to_string());
        }
        let final_model = fit_model(
            spec.model,
            &ds.x,
            &ds.y,
            &allowed,
            derive_seed(spec.seed, &format!("model/{tag}/final")),
        );
        let model_path = out.join(format!("model_{tag}.json"));
        ModelFile {
            schema_hash: matrix.schema.hash(),
            target: spec.target.label().to_string(),
            model: final_model,
        }
        .save(&model_path)?;
        let report = EvalReport {
            target: spec.target.label().to_string(),
            cv: spec.cv.label().to_string(),
            model: spec.model.label().to_string(),
            features: spec.features.label(),
            folds: plan.folds,
            fold_sizes,
            seed: spec.seed,
            schema_hash: matrix.schema.hash(),
            rows: ds.x.len(),
            label_positives: metrics.positives,
            predicted_positives,
            feature_count: allowed.len(),
            notes,
            metrics,
        };
        save_json(&report_path, &report)?;
        Ok(vec![labels_path, plan_path, model_path, report_path])
    })?;
    Ok((ran, report_out))
}

fn read_two_column_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut it = line.splitn(2, ',');
            let x = it.next().unwrap_or("").trim().parse::<f64>();
            let y = it.next().unwrap_or("").trim().parse::<f64>();
            match (x, y) {
                (Ok(x), Ok(y)) => Ok((x, y)),
                _ => Err(Error::contract(format!("{}: bad row {line:?}", path.display()))),
            }
        })
        .collect()
}

/// Render the survey-similarity grids, distance ECCDF, coverage survival,
/// and tie-category weekly distance profile as CSV plus SVG under
/// `<out>/report/`.
pub fn cmd_report(out: &Path) -> Result<bool> {
    let mut inputs = vec![
        require(out.join("config.json"), "ingest")?,
        require(out.join("ties.json"), "ingest")?,
        require(out.join("thresholds.json"), "thresholds")?,
        require(out.join("eccdf.csv"), "thresholds")?,
        require(out.join("coverage.csv"), "ingest")?,
    ];
    inputs.extend(grid_files(out)?);
    run_stage(out, "report", params(&[]), &inputs, || {
        let config = load_config(out)?;
        let ties = load_ties(out)?;
        let networks = build_networks(&ties);
        let report_dir = out.join("report");
        std::fs::create_dir_all(&report_dir).map_err(|e| Error::io(&report_dir, e))?;
        let mut produced = Vec::new();

        for (mode, name) in [
            (crate::networks::SimilarityMode::PairNormalized, "similarity_pair"),
            (crate::networks::SimilarityMode::Jaccard, "similarity_jaccard"),
        ] {
            let (labels, matrix) = report::similarity_grid(&networks, mode);
            let csv_path = report_dir.join(format!("{name}.csv"));
            write_bytes(&csv_path, report::similarity_csv(&labels, &matrix).as_bytes())?;
            produced.push(csv_path);
            let svg_path = report_dir.join(format!("{name}.svg"));
            let title = match mode {
                crate::networks::SimilarityMode::PairNormalized => "Shared ties per ordered pair",
                crate::networks::SimilarityMode::Jaccard => "Jaccard similarity of tie sets",
            };
            write_bytes(&svg_path, report::heatmap_svg(title, &labels, &matrix).as_bytes())?;
            produced.push(svg_path);
        }

        let eccdf_points = read_two_column_csv(&out.join("eccdf.csv"))?;
        let csv_path = report_dir.join("eccdf.csv");
        std::fs::copy(out.join("eccdf.csv"), &csv_path).map_err(|e| Error::io(&csv_path, e))?;
        produced.push(csv_path);
        let svg_path = report_dir.join("eccdf.svg");
        let series = [report::ChartSeries {
            name: "pooled pair distances".to_string(),
            points: eccdf_points,
        }];
        write_bytes(
            &svg_path,
            report::line_chart_svg(
                "Fraction of pair distances exceeding x",
                "distance (m, log scale)",
                "fraction exceeding",
                &series,
                true,
            )
            .as_bytes(),
        )?;
        produced.push(svg_path);

        let coverage_points: Vec<(f64, f64)> = read_two_column_csv(&out.join("coverage.csv"))?
            .into_iter()
            .map(|(ms, f)| (ms / 3_600_000.0, f))
            .collect();
        let csv_path = report_dir.join("coverage.csv");
        std::fs::copy(out.join("coverage.csv"), &csv_path).map_err(|e| Error::io(&csv_path, e))?;
        produced.push(csv_path);
        let svg_path = report_dir.join("coverage.svg");
        let series = [report::ChartSeries {
            name: "all devices".to_string(),
            points: coverage_points,
        }];
        write_bytes(
            &svg_path,
            report::line_chart_svg(
                "Fraction of time in coverage gaps longer than x",
                "gap length (hours)",
                "fraction of total time",
                &series,
                false,
            )
            .as_bytes(),
        )?;
        produced.push(svg_path);

        let friend_net = networks
            .get(&(2, TieType::Friend))
            .ok_or_else(|| Error::contract("survey has no wave 2 friend rows"))?;
        let grids = load_grids(out, &config)?;
        let thresholds = ThresholdSet::load(&out.join("thresholds.json"))?;
        let nodes: BTreeSet<String> = ties
            .iter()
            .flat_map(|t| [t.ego.clone(), t.alter.clone()])
            .collect();
        let (dyads, _) = eligible_dyads(&grids, &nodes);
        let by_id: BTreeMap<&str, &TimelineGrid> =
            grids.iter().map(|g| (g.device_id.as_str(), g)).collect();
        let series_iter = dyads.iter().filter_map(|dyad: &Dyad| {
            let ga = by_id.get(dyad.a.as_str())?;
            let gb = by_id.get(dyad.b.as_str())?;
            build_dyad_series(ga, gb, &thresholds, &config).ok()
        });
        let profile = crate::networks::tie_distance_profile(series_iter, friend_net, &config);
        let csv_path = report_dir.join("tie_profile.csv");
        write_bytes(&csv_path, report::profile_csv(&profile).as_bytes())?;
        produced.push(csv_path);
        let svg_path = report_dir.join("tie_profile.svg");
        write_bytes(&svg_path, report::profile_svg(&profile).as_bytes())?;
        produced.push(svg_path);
        Ok(produced)
    })
}
