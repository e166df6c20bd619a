//! On-disk labelled corpus: one OBJ per sample, one signature table, and a
//! manifest that records everything needed to regenerate it.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_sample, sample_seed, ClassRegistry, GenSpec, ParamKind};
use crate::alignment::align_feature;
use crate::error::{Error, Result};
use crate::mesh::io::{save_mesh, MeshFormat};
use crate::signature::{compute_signature, read_signature_csv, write_signature_csv, SignatureTable, SphereSampling};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SIGNATURE_FILE: &str = "signatures.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub kind: ParamKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub id: usize,
    pub name: String,
    pub params: Vec<ParamRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub class: usize,
    pub index: usize,
    pub seed: u64,
    /// Path relative to the dataset directory.
    pub obj: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub per_class: usize,
    pub nv: usize,
    pub classes: Vec<ClassEntry>,
    pub generator: GenSpec,
    pub signatures: String,
    /// One entry per signature row, in row order.
    pub files: Vec<FileEntry>,
}

impl DatasetManifest {
    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }
}

/// Generates `per_class` samples of every registered class into `out_dir`.
/// Signatures are taken after alignment, at resolution `nv`.
pub fn gen_dataset(
    registry: &ClassRegistry,
    per_class: usize,
    spec: &GenSpec,
    seed: u64,
    nv: usize,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    spec.validate()?;
    let sampling = SphereSampling::new(nv)?;
    let out = out_dir.as_ref();
    let n = registry.len();
    for c in 0..n {
        let dir = out.join(class_dir(c));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let rows: Vec<(FileEntry, crate::signature::GaussSignature)> = (0..n * per_class)
        .into_par_iter()
        .map(|k| {
            let (class, index) = (k / per_class, k % per_class);
            let feature = gen_sample(class, index, seed, spec)?;
            let rel = format!("{}/{index:04}.obj", class_dir(class));
            save_mesh(feature.mesh(), out.join(&rel), MeshFormat::Obj)?;
            let (aligned, _) = align_feature(&feature);
            let sig = compute_signature(&aligned, &sampling)?;
            let entry = FileEntry {
                class,
                index,
                seed: sample_seed(seed, class, index),
                obj: rel,
            };
            Ok((entry, sig))
        })
        .collect::<Result<_>>()?;

    let table: Vec<(i64, &crate::signature::GaussSignature)> = rows.iter().map(|(e, s)| (e.class as i64, s)).collect();
    write_signature_csv(out.join(SIGNATURE_FILE), nv, &table)?;
    let manifest = DatasetManifest {
        seed,
        per_class,
        nv,
        classes: registry
            .iter()
            .map(|c| ClassEntry {
                id: c.id,
                name: c.name.to_string(),
                params: c
                    .params
                    .iter()
                    .map(|p| ParamRange { name: p.name.to_string(), kind: p.kind, lo: p.lo, hi: p.hi })
                    .collect(),
            })
            .collect(),
        generator: spec.clone(),
        signatures: SIGNATURE_FILE.to_string(),
        files: rows.into_iter().map(|(e, _)| e).collect(),
    };
    let path = out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Reads a dataset directory written by [`gen_dataset`].
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<(DatasetManifest, SignatureTable)> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    let table = read_signature_csv(dir.join(&manifest.signatures))?;
    if table.nv != manifest.nv {
        return Err(Error::Dataset(format!(
            "signature table has nv={} but the manifest says {}",
            table.nv, manifest.nv
        )));
    }
    let n = manifest.classes.len() as i64;
    if let Some((label, _)) = table.rows.iter().find(|(l, _)| *l < 0 || *l >= n) {
        return Err(Error::Dataset(format!("label {label} outside 0..{n}")));
    }
    Ok((manifest, table))
}

fn class_dir(class: usize) -> String {
    format!("class_{class:02}")
}
