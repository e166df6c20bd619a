//! Dataset splitting, training, evaluation and multi-feature prediction.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{align_feature, AlignmentTransform};
use crate::datagen::{add_normal_noise, load_dataset, NoiseSpec};
use crate::error::{Error, Result};
use crate::extraction::{extract_features, FeatureSubmesh};
use crate::forest::{argmax, fit_forest, splitmix64, ForestModel, HyperParams, LabeledSample};
use crate::mesh::io::{load_mesh, save_mesh, save_obj_groups, save_obj_sidecar, GroupLabel, MeshFormat, ObjGroup};
use crate::mesh::TriangleMesh;
use crate::signature::{compute_signature, signature_csv_string, GaussSignature, SphereSampling};

/// Version stamped into every JSON report.
pub const REPORT_VERSION: u32 = 1;

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &to_json(value))
}

/// `dir/stem.json` -> `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Labelled signatures with their class names.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub classes: Vec<String>,
    pub nv: usize,
    pub samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(classes: Vec<String>, samples: Vec<LabeledSample>) -> Result<Self> {
        let nv = samples
            .first()
            .map(|s| s.signature.nv)
            .ok_or_else(|| Error::Dataset("no samples".into()))?;
        if let Some(s) = samples.iter().find(|s| s.signature.nv != nv || s.signature.values.len() != nv) {
            return Err(Error::Dataset(format!("signature with nv={} in an nv={nv} dataset", s.signature.nv)));
        }
        if let Some(s) = samples.iter().find(|s| s.label >= classes.len()) {
            return Err(Error::Dataset(format!("label {} outside 0..{}", s.label, classes.len())));
        }
        Ok(Self { classes, nv, samples })
    }

    /// Reads a directory produced by [`crate::datagen::gen_dataset`].
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let (manifest, table) = load_dataset(dir)?;
        let samples = table
            .rows
            .into_iter()
            .map(|(label, signature)| LabeledSample { signature, label: label as usize })
            .collect();
        Self::new(manifest.class_names(), samples)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Vec<LabeledSample> {
        indices.iter().map(|&i| self.samples[i].clone()).collect()
    }
}

/// SHA-256 of the canonical signature table of `samples`.
pub fn samples_fingerprint(samples: &[LabeledSample]) -> String {
    let nv = samples.first().map_or(0, |s| s.signature.nv);
    let rows: Vec<(i64, &GaussSignature)> = samples.iter().map(|s| (s.label as i64, &s.signature)).collect();
    sha256_hex(signature_csv_string(nv, &rows).as_bytes())
}

pub fn model_fingerprint(model: &ForestModel) -> String {
    sha256_hex(model.to_json().as_bytes())
}

/// Train, validation and test indices into a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub ratios: [u32; 3],
    pub seed: u64,
}

/// Parses `A:B:C` percentages.
pub fn parse_ratios(text: &str) -> Result<[u32; 3]> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("split {text:?} is not A:B:C with integer percentages"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0u32; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.trim().parse().map_err(|_| bad())?;
    }
    Ok(out)
}

/// Stratified split: each class is shuffled with its own seed and cut at
/// `floor(n * a / 100)` and `floor(n * (a + b) / 100)`.
pub fn split_dataset(labels: &[usize], classes: &[String], ratios: [u32; 3], seed: u64) -> Result<DatasetSplit> {
    if ratios.iter().sum::<u32>() != 100 {
        return Err(Error::Config(format!("split ratios {ratios:?} do not sum to 100")));
    }
    let mut split = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        ratios,
        seed,
    };
    for (c, name) in classes.iter().enumerate() {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if idx.len() < 3 {
            return Err(Error::Split { class: name.clone(), count: idx.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(c as u64)));
        idx.shuffle(&mut rng);
        let n = idx.len();
        let a = n * ratios[0] as usize / 100;
        let b = n * (ratios[0] + ratios[1]) as usize / 100;
        split.train.extend_from_slice(&idx[..a]);
        split.validation.extend_from_slice(&idx[a..b]);
        split.test.extend_from_slice(&idx[b..]);
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= classes.len()) {
        return Err(Error::Dataset(format!("label {l} outside 0..{}", classes.len())));
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Wall-clock compute time in seconds. Kept out of report JSON so reports
/// stay byte-identical across runs; written to a sibling file instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub train_seconds: f64,
    pub test_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: usize,
    /// Zero when the class was never predicted.
    pub precision: f64,
    /// Zero when the class has no test samples.
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusedPair {
    pub actual: String,
    pub predicted: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub accuracy: f64,
    pub total: usize,
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    /// Rows are actual classes, columns predicted ones.
    pub confusion: Vec<Vec<usize>>,
    /// Largest off-diagonal cell; first in row-major order on ties.
    pub most_confused: Option<ConfusedPair>,
    pub model_fingerprint: String,
    pub dataset_fingerprint: String,
    #[serde(skip)]
    pub timing: Timing,
}

impl EvalReport {
    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("actual\\predicted");
        for c in &self.classes {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            s.push_str(c);
            for v in row {
                s.push(',');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }

    /// Writes the report JSON to `path`, plus `<stem>.confusion.csv` and
    /// `<stem>.timing.json` next to it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_text(path, &to_json(self))?;
        write_text(&sibling(path, ".confusion.csv"), &self.confusion_csv())?;
        write_text(&sibling(path, ".timing.json"), &to_json(&self.timing))
    }
}

/// Scores `model` on labelled samples.
pub fn evaluate(model: &ForestModel, samples: &[LabeledSample]) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::Evaluation("empty test set".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.signature.values.len() != model.nv) {
        return Err(Error::Mismatch(format!(
            "test signatures have nv={}, model expects nv={}",
            s.signature.values.len(),
            model.nv
        )));
    }
    let n = model.classes.len();
    if let Some(s) = samples.iter().find(|s| s.label >= n) {
        return Err(Error::Mismatch(format!("label {} outside the model's {n} classes", s.label)));
    }
    let start = Instant::now();
    let predicted: Vec<usize> = samples
        .par_iter()
        .map(|s| model.predict_label(&s.signature))
        .collect::<Result<_>>()?;
    let test_seconds = start.elapsed().as_secs_f64();

    let mut confusion = vec![vec![0usize; n]; n];
    for (s, &p) in samples.iter().zip(&predicted) {
        confusion[s.label][p] += 1;
    }
    let correct: usize = (0..n).map(|i| confusion[i][i]).sum();
    let per_class = (0..n)
        .map(|c| {
            let support: usize = confusion[c].iter().sum();
            let predicted_c: usize = (0..n).map(|r| confusion[r][c]).sum();
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            ClassMetrics {
                class: model.classes[c].clone(),
                support,
                precision: ratio(confusion[c][c], predicted_c),
                recall: ratio(confusion[c][c], support),
            }
        })
        .collect();
    let mut most_confused: Option<ConfusedPair> = None;
    for (a, row) in confusion.iter().enumerate() {
        for (p, &count) in row.iter().enumerate() {
            if a != p && count > 0 && most_confused.as_ref().is_none_or(|m| count > m.count) {
                most_confused = Some(ConfusedPair {
                    actual: model.classes[a].clone(),
                    predicted: model.classes[p].clone(),
                    count,
                });
            }
        }
    }
    Ok(EvalReport {
        format_version: REPORT_VERSION,
        accuracy: correct as f64 / samples.len() as f64,
        total: samples.len(),
        classes: model.classes.clone(),
        per_class,
        confusion,
        most_confused,
        model_fingerprint: model_fingerprint(model),
        dataset_fingerprint: samples_fingerprint(samples),
        timing: Timing { train_seconds: 0.0, test_seconds },
    })
}

/// Result of [`train_pipeline`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ForestModel,
    pub train_accuracy: f64,
    /// `None` when the validation split is empty.
    pub validation: Option<EvalReport>,
    pub train_seconds: f64,
}

/// Summary written next to a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub format_version: u32,
    pub nv: usize,
    pub params: HyperParams,
    pub split: DatasetSplit,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub model_fingerprint: String,
    pub dataset_fingerprint: String,
}

impl TrainOutcome {
    pub fn report(&self, dataset: &Dataset, split: &DatasetSplit) -> TrainReport {
        TrainReport {
            format_version: REPORT_VERSION,
            nv: self.model.nv,
            params: self.model.params,
            split: split.clone(),
            train_accuracy: self.train_accuracy,
            validation_accuracy: self.validation.as_ref().map(|v| v.accuracy),
            model_fingerprint: model_fingerprint(&self.model),
            dataset_fingerprint: samples_fingerprint(&dataset.samples),
        }
    }
}

/// Fits a forest on the training split and scores the validation split.
/// `expected_nv`, when given, must match the dataset's resolution.
pub fn train_pipeline(
    dataset: &Dataset,
    params: &HyperParams,
    split: &DatasetSplit,
    expected_nv: Option<usize>,
) -> Result<TrainOutcome> {
    if let Some(nv) = expected_nv {
        if nv != dataset.nv {
            return Err(Error::Mismatch(format!("requested nv={nv} but the dataset has nv={}", dataset.nv)));
        }
    }
    let train = dataset.select(&split.train);
    let start = Instant::now();
    let model = fit_forest(&train, &dataset.classes, params)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let correct = train
        .par_iter()
        .map(|s| model.predict_label(&s.signature).map(|p| usize::from(p == s.label)))
        .sum::<Result<usize>>()?;
    let validation = if split.validation.is_empty() {
        None
    } else {
        let mut r = evaluate(&model, &dataset.select(&split.validation))?;
        r.timing.train_seconds = train_seconds;
        Some(r)
    };
    Ok(TrainOutcome {
        train_accuracy: correct as f64 / train.len() as f64,
        model,
        validation,
        train_seconds,
    })
}

/// Aligned signature of one feature.
pub fn feature_signature(feature: &FeatureSubmesh, sampling: &SphereSampling) -> Result<GaussSignature> {
    let (aligned, _) = align_feature(feature);
    compute_signature(&aligned, sampling)
}

/// Predicted class and its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recognition {
    pub label: usize,
    pub probability: f64,
}

/// Aligns, signs and classifies each feature.
pub fn recognize(model: &ForestModel, features: &[FeatureSubmesh]) -> Result<Vec<Recognition>> {
    let sampling = SphereSampling::new(model.nv)?;
    features
        .par_iter()
        .map(|f| {
            let p = model.predict_proba(&feature_signature(f, &sampling)?)?;
            let label = argmax(&p);
            Ok(Recognition { label, probability: p[label] })
        })
        .collect()
}

/// Display color of a class: evenly spaced hues at fixed saturation/value.
pub fn class_color(class: usize, n_classes: usize) -> [u8; 3] {
    let h = 6.0 * class as f64 / n_classes.max(1) as f64;
    let (s, v) = (0.65, 0.92);
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as usize {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|t| ((t + m) * 255.0).round() as u8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureResult {
    pub feature_index: usize,
    pub class_id: usize,
    pub class_name: String,
    pub probability: f64,
    pub face_count: usize,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub format_version: u32,
    pub source: String,
    /// `"ok"`, or `"featureless"` when extraction found nothing.
    pub status: String,
    pub features: Vec<FeatureResult>,
}

/// Output files written by [`predict_model`].
#[derive(Debug, Clone)]
pub struct PredictionFiles {
    pub obj: PathBuf,
    pub sidecar: PathBuf,
    pub result: PathBuf,
    pub colors: PathBuf,
}

/// Extracts and labels every feature of the mesh at `mesh_path`. Writes a
/// grouped OBJ (`<stem>_labeled.obj`) with a group-label sidecar, the
/// result JSON (`<stem>_result.json`) and the class color table
/// (`colors.json`) into `out_dir`.
pub fn predict_model(
    model: &ForestModel,
    mesh_path: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<(PredictionReport, PredictionFiles)> {
    let mesh_path = mesh_path.as_ref();
    let mesh = load_mesh(mesh_path, None)?.mesh;
    let stem = file_stem(mesh_path);
    let report = predict_mesh(model, &mesh, &stem)?;
    let out = out_dir.as_ref();
    ensure_dir(out)?;
    let files = PredictionFiles {
        obj: out.join(format!("{stem}_labeled.obj")),
        sidecar: out.join(format!("{stem}_labeled.json")),
        result: out.join(format!("{stem}_result.json")),
        colors: out.join("colors.json"),
    };
    let features = extract_features(&mesh);
    let n = model.classes.len();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for (f, r) in features.iter().zip(&report.features) {
        let name = format!("feature{}_{}", r.feature_index, r.class_name.replace(' ', "_"));
        groups.push(ObjGroup { name: name.clone(), faces: f.faces().to_vec() });
        labels.push(GroupLabel { group: name, label: r.class_name.clone(), color: class_color(r.class_id, n) });
    }
    save_obj_groups(&mesh, &groups, &files.obj)?;
    save_obj_sidecar(&labels, &files.sidecar)?;
    write_text(&files.result, &to_json(&report))?;
    let table: Vec<GroupLabel> = model
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| GroupLabel { group: c.replace(' ', "_"), label: c.clone(), color: class_color(i, n) })
        .collect();
    save_obj_sidecar(&table, &files.colors)?;
    Ok((report, files))
}

/// In-memory part of [`predict_model`].
pub fn predict_mesh(model: &ForestModel, mesh: &TriangleMesh, source: &str) -> Result<PredictionReport> {
    let features = extract_features(mesh);
    let rec = recognize(model, &features)?;
    let results: Vec<FeatureResult> = features
        .iter()
        .zip(&rec)
        .enumerate()
        .map(|(k, (f, r))| FeatureResult {
            feature_index: k,
            class_id: r.label,
            class_name: model.classes[r.label].clone(),
            probability: r.probability,
            face_count: f.faces().len(),
            provenance: f.provenance().as_str().to_string(),
        })
        .collect();
    Ok(PredictionReport {
        format_version: REPORT_VERSION,
        source: source.to_string(),
        status: if results.is_empty() { "featureless" } else { "ok" }.to_string(),
        features: results,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// One line of an extraction manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub index: usize,
    pub provenance: String,
    pub face_count: usize,
    pub area: f64,
    pub obj: String,
}

/// Extracts the features of a mesh file into `<stem>_feat<k>.obj` files
/// and a `<stem>_features.json` manifest.
pub fn extract_to_dir(mesh_path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<Vec<FeatureRecord>> {
    let mesh_path = mesh_path.as_ref();
    let out = out_dir.as_ref();
    let mesh = load_mesh(mesh_path, None)?.mesh;
    let stem = file_stem(mesh_path);
    ensure_dir(out)?;
    let records = extract_features(&mesh)
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let obj = format!("{stem}_feat{k}.obj");
            save_mesh(f.mesh(), out.join(&obj), MeshFormat::Obj)?;
            Ok(FeatureRecord {
                index: k,
                provenance: f.provenance().as_str().to_string(),
                face_count: f.faces().len(),
                area: f.area(),
                obj,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&records, out.join(format!("{stem}_features.json")))?;
    Ok(records)
}

/// Aligns a feature surface file; writes `<stem>_aligned.obj` and
/// `<stem>_transform.json`.
pub fn align_to_dir(mesh_path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<AlignmentTransform> {
    let mesh_path = mesh_path.as_ref();
    let out = out_dir.as_ref();
    let feature = FeatureSubmesh::external(load_mesh(mesh_path, None)?.mesh)?;
    let (aligned, transform) = align_feature(&feature);
    let stem = file_stem(mesh_path);
    ensure_dir(out)?;
    save_mesh(aligned.mesh(), out.join(format!("{stem}_aligned.obj")), MeshFormat::Obj)?;
    write_text(&out.join(format!("{stem}_transform.json")), &(transform.to_json() + "\n"))?;
    Ok(transform)
}

/// Aligned signatures of feature surface files, in argument order.
pub fn sign_files(paths: &[PathBuf], nv: usize) -> Result<Vec<GaussSignature>> {
    let sampling = SphereSampling::new(nv)?;
    paths
        .par_iter()
        .map(|p| feature_signature(&FeatureSubmesh::external(load_mesh(p, None)?.mesh)?, &sampling))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub format_version: u32,
    pub fraction: f64,
    pub trials: usize,
    pub features: usize,
    /// Labels of the noiseless run, per feature.
    pub baseline: Vec<String>,
    /// Fraction of (trial, feature) pairs whose label matches the baseline.
    pub agreement: f64,
    pub per_trial: Vec<f64>,
}

/// Perturbs `mesh` `trials` times and compares each feature's label with
/// the noiseless one. Features are extracted once from the clean mesh and
/// re-read from each noisy copy by face index, since noise moves stock
/// faces off their planes.
pub fn noise_agreement(model: &ForestModel, mesh: &TriangleMesh, fraction: f64, trials: usize, seed: u64) -> Result<NoiseReport> {
    NoiseSpec::new(fraction, seed)?;
    let features = extract_features(mesh);
    let baseline = recognize(model, &features)?;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let noisy = add_normal_noise(mesh, &NoiseSpec::new(fraction, splitmix64(seed ^ t as u64))?);
            let moved: Vec<FeatureSubmesh> = features
                .iter()
                .map(|f| FeatureSubmesh::from_faces(&noisy, f.faces().to_vec(), f.provenance()))
                .collect::<Result<_>>()?;
            let rec = recognize(model, &moved)?;
            let same = rec.iter().zip(&baseline).filter(|(a, b)| a.label == b.label).count();
            Ok(if features.is_empty() { 1.0 } else { same as f64 / features.len() as f64 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let agreement = if per_trial.is_empty() { 1.0 } else { per_trial.iter().sum::<f64>() / per_trial.len() as f64 };
    Ok(NoiseReport {
        format_version: REPORT_VERSION,
        fraction,
        trials,
        features: features.len(),
        baseline: baseline.iter().map(|r| model.classes[r.label].clone()).collect(),
        agreement,
        per_trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    fn sample(label: usize, x: f64) -> LabeledSample {
        LabeledSample { signature: GaussSignature { nv: 2, values: vec![x, 1.0 - x] }, label }
    }

    #[test]
    fn split_counts_and_determinism() {
        let labels: Vec<usize> = (0..600).map(|i| i % 3).collect();
        let s = split_dataset(&labels, &names(3), [70, 15, 15], 42).unwrap();
        for c in 0..3 {
            let count = |v: &[usize]| v.iter().filter(|&&i| labels[i] == c).count();
            assert_eq!((count(&s.train), count(&s.validation), count(&s.test)), (140, 30, 30));
        }
        assert_eq!(s, split_dataset(&labels, &names(3), [70, 15, 15], 42).unwrap());
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..600).collect::<Vec<_>>());
        let z = split_dataset(&labels, &names(3), [80, 0, 20], 1).unwrap();
        assert!(z.validation.is_empty());
    }

    #[test]
    fn split_errors() {
        let labels = vec![0, 0, 0, 1, 1];
        match split_dataset(&labels, &names(2), [70, 15, 15], 0) {
            Err(Error::Split { class, count }) => assert_eq!((class.as_str(), count), ("c1", 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(split_dataset(&labels, &names(2), [70, 15, 10], 0), Err(Error::Config(_))));
        assert_eq!(parse_ratios("80:0:20").unwrap(), [80, 0, 20]);
        assert!(parse_ratios("80:20").is_err());
    }

    #[test]
    fn perfect_classifier_report() {
        let train = vec![sample(0, 0.1), sample(0, 0.2), sample(1, 0.8), sample(1, 0.9)];
        let params = HyperParams { n_estimators: 3, ..HyperParams::default() };
        let model = fit_forest(&train, &names(2), &params).unwrap();
        let test = vec![sample(0, 0.05), sample(1, 0.95), sample(1, 0.85)];
        let r = evaluate(&model, &test).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0], vec![0, 2]]);
        assert!(r.most_confused.is_none());
        assert_eq!(r.per_class[1].support, 2);
        assert!(matches!(evaluate(&model, &[]), Err(Error::Evaluation(_))));
        let wrong_nv = LabeledSample { signature: GaussSignature { nv: 3, values: vec![0.0; 3] }, label: 0 };
        assert!(matches!(evaluate(&model, &[wrong_nv]), Err(Error::Mismatch(_))));
    }

    #[test]
    fn report_accuracy_is_trace_over_total() {
        let train: Vec<LabeledSample> = (0..30).map(|i| sample(i % 3, (i % 3) as f64 / 3.0 + 0.01 * (i / 3) as f64)).collect();
        let model = fit_forest(&train, &names(3), &HyperParams { n_estimators: 5, ..HyperParams::default() }).unwrap();
        let test: Vec<LabeledSample> = (0..40).map(|i| sample(i % 3, (i * 7 % 40) as f64 / 40.0)).collect();
        let r = evaluate(&model, &test).unwrap();
        let trace: usize = (0..3).map(|i| r.confusion[i][i]).sum();
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!(r.accuracy, trace as f64 / total as f64);
        for (c, row) in r.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), test.iter().filter(|s| s.label == c).count());
        }
    }

    #[test]
    fn report_files_and_timing_sibling() {
        let train = vec![sample(0, 0.1), sample(0, 0.2), sample(1, 0.8), sample(1, 0.9)];
        let model = fit_forest(&train, &names(2), &HyperParams { n_estimators: 2, ..HyperParams::default() }).unwrap();
        let r = evaluate(&model, &train).unwrap();
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("eval.json");
        r.write(&p).unwrap();
        let csv = std::fs::read_to_string(d.path().join("eval.confusion.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(d.path().join("eval.timing.json").exists());
        let back: EvalReport = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back.confusion, r.confusion);
    }

    #[test]
    fn colors_are_distinct() {
        let mut seen: Vec<[u8; 3]> = (0..24).map(|i| class_color(i, 24)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 24);
    }
}
