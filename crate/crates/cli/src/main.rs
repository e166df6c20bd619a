//! `featrec`: generate, extract, align, sign, train, evaluate, predict and
//! stress-test machining feature recognition from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use featrec_core::datagen::{
    gen_block_with_features, gen_dataset, gen_single_feature_block, seeded_rng, through_hole_grid, ClassRegistry,
    GenSpec,
};
use featrec_core::forest::{load_model, save_model, HyperParams};
use featrec_core::mesh::io::{load_mesh, save_mesh, MeshFormat};
use featrec_core::pipeline::{
    align_to_dir, evaluate, extract_to_dir, noise_agreement, parse_ratios, predict_model, sign_files, split_dataset,
    train_pipeline, write_json, Dataset,
};
use featrec_core::signature::{write_signature_csv, GaussSignature};
use featrec_core::Error;

const THREADS_ENV: &str = "FEATREC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "featrec", version, about = "Machining feature recognition on triangle meshes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed for generation, splitting and training.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Sphere sampling resolution. Checked against models and datasets when given.
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(["27", "102", "227"]))]
    nv: Option<String>,
    /// Number of trees.
    #[arg(long, global = true, default_value_t = 130)]
    trees: usize,
    /// Maximum tree depth.
    #[arg(long = "max-depth", global = true, default_value_t = 100)]
    max_depth: usize,
    /// Train:validation:test percentages.
    #[arg(long, global = true, default_value = "70:15:15")]
    split: String,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

impl Global {
    fn nv(&self) -> Option<usize> {
        self.nv.as_deref().map(|s| s.parse().expect("restricted to known values"))
    }

    fn params(&self) -> HyperParams {
        HyperParams {
            n_estimators: self.trees,
            max_depth: self.max_depth,
            seed: self.seed,
            ..HyperParams::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled dataset, or test blocks.
    Gen {
        /// Samples per class.
        #[arg(long = "per-class", default_value_t = 200)]
        per_class: usize,
        /// Write a single-feature block of this class (name or id) instead of a dataset.
        #[arg(long, conflicts_with = "hole_grid")]
        block: Option<String>,
        /// Write an n x n through-hole grid block instead of a dataset.
        #[arg(long = "hole-grid")]
        hole_grid: Option<usize>,
    },
    /// Split a mesh into candidate feature surfaces.
    Extract { mesh: PathBuf },
    /// Move a feature surface into its canonical pose.
    Align { mesh: PathBuf },
    /// Write the signatures of feature surfaces to `signatures.csv`.
    Sign {
        #[arg(required = true)]
        meshes: Vec<PathBuf>,
        /// Class id written in the label column.
        #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
        label: i64,
    },
    /// Train a forest on a generated dataset.
    Train { dataset: PathBuf },
    /// Score a model on the test split of a dataset.
    Eval { model: PathBuf, dataset: PathBuf },
    /// Label every feature of a mesh.
    Predict { model: PathBuf, mesh: PathBuf },
    /// Measure label stability under Gaussian normal noise.
    Noise {
        model: PathBuf,
        mesh: PathBuf,
        /// Noise amplitude as a fraction of the bounding-ball radius.
        #[arg(long, default_value_t = 0.002)]
        fraction: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Mismatch(_) => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn check_nv(requested: Option<usize>, actual: usize, what: &str) -> Result<(), Error> {
    match requested {
        Some(nv) if nv != actual => Err(Error::Mismatch(format!("--nv {nv} but the {what} has nv={actual}"))),
        _ => Ok(()),
    }
}

fn ensure_out(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn run(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    let g = &cli.global;
    match &cli.command {
        Command::Gen { per_class, block, hole_grid } => {
            let spec = GenSpec::default();
            let mut rng = seeded_rng(g.seed);
            if let Some(name) = block {
                let reg = ClassRegistry::standard();
                let class = name
                    .parse::<usize>()
                    .ok()
                    .or_else(|| reg.id_of(name))
                    .ok_or_else(|| Error::Registry(name.clone()))?;
                reg.get(class)?;
                ensure_out(&g.out)?;
                let b = gen_single_feature_block(class, &spec, &mut rng)?;
                let path = g.out.join(format!("block_{class:02}.obj"));
                save_mesh(&b.mesh, &path, MeshFormat::Obj)?;
                println!("wrote {}", path.display());
            } else if let Some(n) = hole_grid {
                ensure_out(&g.out)?;
                let b = gen_block_with_features(&through_hole_grid(*n), &mut rng)?;
                let path = g.out.join(format!("hole_grid_{n}.obj"));
                save_mesh(&b.mesh, &path, MeshFormat::Obj)?;
                println!("wrote {}", path.display());
            } else {
                let nv = g.nv().unwrap_or(102);
                let m = gen_dataset(&ClassRegistry::standard(), *per_class, &spec, g.seed, nv, &g.out)?;
                println!("wrote {} samples of {} classes to {}", m.files.len(), m.classes.len(), g.out.display());
            }
        }
        Command::Extract { mesh } => {
            let records = extract_to_dir(mesh, &g.out)?;
            println!("{} feature(s)", records.len());
            for r in &records {
                println!("  {}: {} faces, {} ({})", r.index, r.face_count, r.provenance, r.obj);
            }
        }
        Command::Align { mesh } => {
            let t = align_to_dir(mesh, &g.out)?;
            println!("aligned (flip applied: {})", t.flip_applied);
        }
        Command::Sign { meshes, label } => {
            let nv = g.nv().unwrap_or(102);
            let sigs = sign_files(meshes, nv)?;
            let rows: Vec<(i64, &GaussSignature)> = sigs.iter().map(|s| (*label, s)).collect();
            ensure_out(&g.out)?;
            let path = g.out.join("signatures.csv");
            write_signature_csv(&path, nv, &rows)?;
            println!("wrote {} signature(s) to {}", rows.len(), path.display());
        }
        Command::Train { dataset } => {
            let ds = Dataset::load(dataset)?;
            let split = split_dataset(&ds.labels(), &ds.classes, parse_ratios(&g.split)?, g.seed)?;
            let out = train_pipeline(&ds, &g.params(), &split, g.nv())?;
            ensure_out(&g.out)?;
            save_model(&out.model, g.out.join("model.json"))?;
            write_json(&out.report(&ds, &split), g.out.join("train.json"))?;
            if let Some(v) = &out.validation {
                v.write(g.out.join("validation.json"))?;
            }
            print!("train accuracy {:.4}", out.train_accuracy);
            if let Some(v) = &out.validation {
                print!(", validation accuracy {:.4}", v.accuracy);
            }
            println!(", {:.2}s", out.train_seconds);
        }
        Command::Eval { model, dataset } => {
            let model = load_model(model)?;
            check_nv(g.nv(), model.nv, "model")?;
            let ds = Dataset::load(dataset)?;
            if ds.nv != model.nv {
                return Err(Error::Mismatch(format!("model nv={} but dataset nv={}", model.nv, ds.nv)));
            }
            if ds.classes != model.classes {
                return Err(Error::Mismatch("model and dataset class lists differ".into()));
            }
            let split = split_dataset(&ds.labels(), &ds.classes, parse_ratios(&g.split)?, g.seed)?;
            let report = evaluate(&model, &ds.select(&split.test))?;
            ensure_out(&g.out)?;
            report.write(g.out.join("eval.json"))?;
            println!("test accuracy {:.4} on {} samples", report.accuracy, report.total);
            if let Some(p) = &report.most_confused {
                println!("most confused: {} -> {} ({})", p.actual, p.predicted, p.count);
            }
        }
        Command::Predict { model, mesh } => {
            let model = load_model(model)?;
            check_nv(g.nv(), model.nv, "model")?;
            let (report, files) = predict_model(&model, mesh, &g.out)?;
            println!("{}: {} feature(s)", report.status, report.features.len());
            for f in &report.features {
                println!("  {}: {} (p={:.3}, {} faces)", f.feature_index, f.class_name, f.probability, f.face_count);
            }
            println!("wrote {}", files.result.display());
        }
        Command::Noise { model, mesh, fraction, trials } => {
            let model = load_model(model)?;
            check_nv(g.nv(), model.nv, "model")?;
            let loaded = load_mesh(mesh, None)?.mesh;
            let report = noise_agreement(&model, &loaded, *fraction, *trials, g.seed)?;
            ensure_out(&g.out)?;
            let stem = mesh.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            write_json(&report, g.out.join(format!("{stem}_noise.json")))?;
            println!(
                "agreement {:.3} over {} trial(s) of {} feature(s) at f={}",
                report.agreement, report.trials, report.features, report.fraction
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code(&Error::Mismatch("nv".into())), 3);
        assert_eq!(exit_code(&Error::Invariant("open block".into())), 4);
        assert_eq!(exit_code(&Error::Config("split".into())), 2);
        assert_eq!(exit_code(&Error::Split { class: "round".into(), count: 1 }), 2);
    }

    #[test]
    fn global_flags_parse_after_the_verb() {
        let cli = Cli::try_parse_from(["featrec", "train", "data", "--trees", "7", "--nv", "27"]).unwrap();
        assert_eq!(cli.global.trees, 7);
        assert_eq!(cli.global.nv(), Some(27));
        assert!(Cli::try_parse_from(["featrec", "train", "data", "--nv", "64"]).is_err());
    }
}
