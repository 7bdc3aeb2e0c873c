//! Command implementations. Each returns the files to write; nothing touches
//! the output directory until the whole command has succeeded.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use lfpclass::basis::{forward_coefficients, forward_transform, max_harmonics, reconstruct, CoefficientVector};
use lfpclass::classify::{
    bjs_coefficient_count, contiguous_bands, grid_search, CvScheme, FeatureShrinkage, GridSpec, MaskPattern,
    PipelineConfig, PriorMode, Ridge,
};
use lfpclass::experiments::{
    adaptivity_ratio_bjs, benchmark_classifiers, consistency_experiment, phase_ablation, risk_curve_pinsker,
    BenchmarkReport,
};
use lfpclass::io::{read_dataset_csv, read_meta, read_signal_csv, write_dataset_csv, write_meta};
use lfpclass::shrinkage::{bjs_estimate, cutoff_for_samples, dyadic_blocks, pinsker_mu, pinsker_shrink, EllipsoidSpec};
use lfpclass::synth::{generate_dataset, make_structured_class_model, ClassModel, LabeledDataset, NoiseModel, PrototypeLayout};

use crate::config::RunConfig;
use crate::report;
use crate::{CliError, Method, Scheme};

pub const EXPERIMENTS: [&str; 4] = ["rates", "adaptivity", "consistency", "phase"];

pub const MODEL_KEYS: [&str; 8] = [
    "model.classes",
    "model.alpha",
    "model.radius",
    "model.harmonics",
    "model.separation",
    "model.within_spread",
    "model.layout",
    "model.seed",
];
pub const DATA_KEYS: [&str; 4] = ["data.trials_per_class", "data.channels", "data.samples", "data.sessions"];
pub const NOISE_KEYS: [&str; 2] = ["noise.sigma", "noise.seed"];
pub const PIPELINE_KEYS: [&str; 8] = [
    "pipeline.samples",
    "pipeline.harmonics",
    "pipeline.mask",
    "pipeline.pass_through",
    "pipeline.pca_dim",
    "pipeline.ridge",
    "pipeline.priors",
    "pipeline.magnitude_only",
];
pub const GRID_KEYS: [&str; 5] = [
    "grid.harmonics",
    "grid.patterns",
    "grid.pinsker_alpha",
    "grid.pinsker_mus",
    "grid.pca_dims",
];
pub const CV_KEYS: [&str; 2] = ["cv.scheme", "cv.folds"];

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Output {
    fn text(name: &str, text: String) -> Self {
        Self {
            name: name.to_string(),
            bytes: text.into_bytes(),
        }
    }
}

/// Writes every output via a temporary file renamed into place.
pub fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    outputs
        .iter()
        .map(|o| {
            let target = dir.join(&o.name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| CliError::Runtime(format!("cannot create temporary file in {}: {e}", dir.display())))?;
            tmp.write_all(&o.bytes)
                .and_then(|_| tmp.flush())
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", target.display())))?;
            tmp.persist(&target)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", target.display())))?;
            Ok(target)
        })
        .collect()
}

fn keys<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn parse_layout(text: &str) -> Result<PrototypeLayout, CliError> {
    text.parse::<PrototypeLayout>().map_err(|e| CliError::Validation(e.to_string()))
}

/// Class model from `model.*` keys; the seed defaults to the run seed.
pub fn class_model(cfg: &RunConfig, seed: u64, default_layout: PrototypeLayout) -> Result<ClassModel, CliError> {
    let spec = EllipsoidSpec::new(cfg.get("model.alpha", 2.0)?, cfg.get("model.radius", 10.0)?)?;
    let layout = match cfg.raw("model.layout") {
        Some(v) => parse_layout(v)?,
        None => default_layout,
    };
    make_structured_class_model(
        layout,
        cfg.get("model.classes", 8)?,
        &spec,
        cfg.get("model.harmonics", 5)?,
        cfg.get("model.separation", 0.5)?,
        cfg.get("model.within_spread", 0.1)?,
        cfg.get("model.seed", seed)?,
    )
    .map_err(CliError::from)
}

pub fn noise_model(cfg: &RunConfig, seed: u64) -> Result<NoiseModel, CliError> {
    Ok(NoiseModel::new(cfg.get("noise.sigma", 1.0)?, cfg.get("noise.seed", seed)?)?)
}

/// Dataset from `model.*`, `data.*` and `noise.*` keys.
pub fn dataset(cfg: &RunConfig, seed: u64, default_layout: PrototypeLayout) -> Result<LabeledDataset, CliError> {
    let model = class_model(cfg, seed, default_layout)?;
    let noise = noise_model(cfg, seed)?;
    Ok(generate_dataset(
        &model,
        cfg.get("data.trials_per_class", 10)?,
        cfg.get("data.channels", 32)?,
        cfg.get("data.samples", 500)?,
        cfg.get("data.sessions", 9)?,
        &noise,
        seed,
    )?)
}

pub fn synth(cfg: &RunConfig, seed: u64) -> Result<Vec<Output>, CliError> {
    let mut allowed = keys(&[&MODEL_KEYS, &DATA_KEYS, &NOISE_KEYS]);
    allowed.push("data.name");
    cfg.check_keys("synth", &allowed)?;
    let name = cfg.raw("data.name").unwrap_or("dataset").to_string();
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::Validation(format!("data.name must be a plain file stem, got `{name}`")));
    }
    let ds = dataset(cfg, seed, PrototypeLayout::Independent)?;
    let mut csv = Vec::new();
    write_dataset_csv(&ds, &mut csv).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut meta = Vec::new();
    write_meta(ds.meta(), &mut meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(vec![
        Output {
            name: format!("{name}.csv"),
            bytes: csv,
        },
        Output {
            name: format!("{name}.meta"),
            bytes: meta,
        },
    ])
}

pub fn estimate(cfg: &RunConfig, input: &Path, method: Method) -> Result<Vec<Output>, CliError> {
    let allowed: &[&str] = match method {
        Method::Pinsker => &["estimate.harmonics", "estimate.alpha", "estimate.radius", "estimate.sigma"],
        Method::Bjs => &["estimate.pass_through", "estimate.sigma"],
    };
    cfg.check_keys(&format!("estimate --method {}", method_name(method)), allowed)?;
    let file = File::open(input).map_err(|e| CliError::Validation(format!("cannot open {}: {e}", input.display())))?;
    let signal = read_signal_csv(BufReader::new(file))?;
    let n = signal.len();
    let sigma: f64 = cfg.get("estimate.sigma", 1.0)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(CliError::Validation(format!("estimate.sigma must be positive, got {sigma}")));
    }
    let epsilon = sigma / (n as f64).sqrt();
    let shrunk: CoefficientVector = match method {
        Method::Pinsker => {
            let spec = EllipsoidSpec::new(cfg.get("estimate.alpha", 2.0)?, cfg.get("estimate.radius", 10.0)?)?;
            let harmonics = cfg.get("estimate.harmonics", max_harmonics(n))?;
            let y = forward_transform(&signal, harmonics)?.with_epsilon(epsilon)?;
            let mu = pinsker_mu(&spec, epsilon)?;
            pinsker_shrink(&y, &spec, mu)?
        }
        Method::Bjs => {
            let partition = dyadic_blocks(cfg.get("estimate.pass_through", 2)?, cutoff_for_samples(n)?)?;
            let y = forward_coefficients(&signal, bjs_coefficient_count(n))?.with_epsilon(epsilon)?;
            bjs_estimate(&y, &partition)?
        }
    };
    let fitted = reconstruct(&shrunk, n)?;
    Ok(vec![
        Output::text("coefficients.csv", report::coefficients_csv(shrunk.coeffs())),
        Output::text("reconstruction.csv", report::signal_csv(fitted.samples())),
    ])
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Pinsker => "pinsker",
        Method::Bjs => "bjs",
    }
}

/// `band:LO-HI` or `pinsker:ALPHA:MU`.
pub fn parse_pattern(text: &str) -> Result<MaskPattern, CliError> {
    let bad = || CliError::Validation(format!("mask `{text}`: expected band:LO-HI or pinsker:ALPHA:MU"));
    let parts: Vec<&str> = text.trim().split(':').collect();
    match parts.as_slice() {
        ["band", range] => {
            let (lo, hi) = range.split_once('-').ok_or_else(bad)?;
            Ok(MaskPattern::Band {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            })
        }
        ["pinsker", alpha, mu] => Ok(MaskPattern::Pinsker {
            alpha: alpha.trim().parse().map_err(|_| bad())?,
            mu: mu.trim().parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn parse_ridge(text: &str) -> Result<Ridge, CliError> {
    if text == "auto" {
        return Ok(Ridge::Auto);
    }
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(Ridge::Fixed(v)),
        _ => Err(CliError::Validation(format!(
            "pipeline.ridge must be `auto` or a nonnegative number, got `{text}`"
        ))),
    }
}

fn parse_priors(text: &str) -> Result<PriorMode, CliError> {
    match text {
        "empirical" => Ok(PriorMode::Empirical),
        "uniform" => Ok(PriorMode::Uniform),
        _ => Err(CliError::Validation(format!(
            "pipeline.priors must be `empirical` or `uniform`, got `{text}`"
        ))),
    }
}

/// Pipeline settings from `pipeline.*` keys on top of the published
/// defaults. `N` defaults to `min(500, dataset N)`.
pub fn pipeline_config(cfg: &RunConfig, method: Method, dataset_samples: usize, seed: u64) -> Result<PipelineConfig, CliError> {
    let base = match method {
        Method::Pinsker => {
            if cfg.contains("pipeline.pass_through") {
                return Err(CliError::Validation(
                    "pipeline.pass_through only applies to the bjs pipeline".into(),
                ));
            }
            let harmonics: usize = cfg.get("pipeline.harmonics", 5)?;
            let pattern = parse_pattern(cfg.raw("pipeline.mask").unwrap_or("band:1-5"))?;
            PipelineConfig {
                shrinkage: FeatureShrinkage::Profile(pattern.profile(2 * harmonics + 1)?),
                ..PipelineConfig::pinsker_default()
            }
        }
        Method::Bjs => {
            for k in ["pipeline.harmonics", "pipeline.mask"] {
                if cfg.contains(k) {
                    return Err(CliError::Validation(format!(
                        "{k} does not apply to the bjs pipeline, which has no shrinkage parameters"
                    )));
                }
            }
            PipelineConfig {
                shrinkage: FeatureShrinkage::Bjs {
                    pass_through: cfg.get("pipeline.pass_through", 2)?,
                },
                ..PipelineConfig::bjs_default()
            }
        }
    };
    let config = PipelineConfig {
        samples: cfg.get("pipeline.samples", dataset_samples.min(500))?,
        pca_dim: cfg.get("pipeline.pca_dim", base.pca_dim)?,
        ridge: parse_ridge(cfg.raw("pipeline.ridge").unwrap_or("auto"))?,
        priors: parse_priors(cfg.raw("pipeline.priors").unwrap_or("empirical"))?,
        magnitude_only: cfg.get("pipeline.magnitude_only", false)?,
        seed,
        ..base
    };
    config.validate()?;
    if config.samples > dataset_samples {
        return Err(CliError::Validation(format!(
            "pipeline.samples = {} exceeds the {dataset_samples} samples per channel in the dataset",
            config.samples
        )));
    }
    Ok(config)
}

pub fn cv_scheme(cfg: &RunConfig, flag: Option<Scheme>) -> Result<(CvScheme, &'static str), CliError> {
    let scheme = match flag {
        Some(s) => s,
        None => match cfg.raw("cv.scheme").unwrap_or("loso") {
            "loso" => Scheme::Loso,
            "kfold" => Scheme::Kfold,
            other => {
                return Err(CliError::Validation(format!(
                    "cv.scheme must be `loso` or `kfold`, got `{other}`"
                )))
            }
        },
    };
    Ok(match scheme {
        Scheme::Loso => (CvScheme::LeaveOneSessionOut, "leave-one-session-out"),
        Scheme::Kfold => {
            let k: usize = cfg.get("cv.folds", 10)?;
            (CvScheme::KFold(k), "k-fold")
        }
    })
}

pub fn read_dataset(input: &Path) -> Result<LabeledDataset, CliError> {
    let meta_path = input.with_extension("meta");
    let meta_file = File::open(&meta_path)
        .map_err(|e| CliError::Validation(format!("cannot open metadata {}: {e}", meta_path.display())))?;
    let meta = read_meta(BufReader::new(meta_file))?;
    let file = File::open(input).map_err(|e| CliError::Validation(format!("cannot open {}: {e}", input.display())))?;
    Ok(read_dataset_csv(BufReader::new(file), meta)?)
}

/// Grid from `grid.*` keys. Patterns: `bands` (every contiguous band of the
/// largest `2T + 1`) or a `;`-separated list of masks; Pinsker profiles for
/// each `grid.pinsker_mus` value are appended.
pub fn grid_spec(cfg: &RunConfig, base: &PipelineConfig) -> Result<GridSpec, CliError> {
    let harmonics: Vec<usize> = cfg.get_list("grid.harmonics", &[cfg.get("pipeline.harmonics", 5)?])?;
    let widest = 2 * harmonics.iter().copied().max().unwrap_or(0) + 1;
    let mut patterns = match cfg.raw("grid.patterns").unwrap_or("bands") {
        "bands" => contiguous_bands(widest),
        list => list
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(parse_pattern)
            .collect::<Result<Vec<_>, _>>()?,
    };
    let alpha: f64 = cfg.get("grid.pinsker_alpha", 2.0)?;
    for mu in cfg.get_list::<f64>("grid.pinsker_mus", &[20.0, 40.0, 70.0, 110.0])? {
        patterns.push(MaskPattern::Pinsker { alpha, mu });
    }
    Ok(GridSpec {
        harmonics,
        patterns,
        pca_dims: cfg.get_list("grid.pca_dims", &[base.pca_dim])?,
    })
}

pub fn benchmark(
    cfg: &RunConfig,
    input: &Path,
    method: Method,
    scheme: Option<Scheme>,
    grid: bool,
    seed: u64,
) -> Result<Vec<Output>, CliError> {
    let wants_grid = grid || cfg.keys().any(|k| k.starts_with("grid."));
    if wants_grid && method == Method::Bjs {
        return Err(CliError::Validation(
            "the bjs pipeline is parameter-free and has no shrinkage grid; drop --grid and grid.* keys".into(),
        ));
    }
    cfg.check_keys("benchmark", &keys(&[&PIPELINE_KEYS, &GRID_KEYS, &CV_KEYS]))?;
    let ds = read_dataset(input)?;
    let config = pipeline_config(cfg, method, ds.meta().samples, seed)?;
    let (cv, scheme_name) = cv_scheme(cfg, scheme)?;
    let mut outputs = Vec::new();
    let report = if wants_grid {
        let spec = grid_spec(cfg, &config)?;
        let result = grid_search(&ds, &config, &spec, cv)?;
        outputs.push(Output::text("grid.csv", report::grid_csv(&result)));
        BenchmarkReport::from_cv(&result.best, seed, result.best_report)
    } else {
        benchmark_classifiers(&ds, std::slice::from_ref(&config), cv, seed)?.remove(0)
    };
    outputs.push(Output::text("report.csv", report::benchmark_csv(&report)));
    outputs.push(Output::text("confusion.csv", report::confusion_csv(&report.confusion)));
    outputs.push(Output::text("summary.txt", report::benchmark_summary(&report, scheme_name)));
    Ok(outputs)
}

pub fn experiment(cfg: &RunConfig, name: &str, seed: u64) -> Result<Vec<Output>, CliError> {
    match name {
        "rates" => rates(cfg, seed),
        "adaptivity" => adaptivity(cfg, seed),
        "consistency" => consistency(cfg, seed),
        "phase" => phase(cfg, seed),
        other => Err(CliError::Validation(format!(
            "unknown experiment `{other}`; valid names: {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

fn rates(cfg: &RunConfig, seed: u64) -> Result<Vec<Output>, CliError> {
    cfg.check_keys("experiment rates", &["rates.alpha", "rates.radius", "rates.epsilons", "rates.trials"])?;
    let spec = EllipsoidSpec::new(cfg.get("rates.alpha", 2.0)?, cfg.get("rates.radius", 10.0)?)?;
    let epsilons = cfg.get_list("rates.epsilons", &[0.5, 0.2, 0.1, 0.05])?;
    let curve = risk_curve_pinsker(&spec, &epsilons, cfg.get("rates.trials", 200)?, seed)?;
    Ok(vec![
        Output::text("rates.csv", report::rates_csv(&curve)),
        Output::text("rates_summary.txt", report::rates_summary(&curve)),
    ])
}

fn adaptivity(cfg: &RunConfig, seed: u64) -> Result<Vec<Output>, CliError> {
    cfg.check_keys(
        "experiment adaptivity",
        &["adaptivity.alphas", "adaptivity.radii", "adaptivity.epsilon", "adaptivity.trials"],
    )?;
    let alphas: Vec<f64> = cfg.get_list("adaptivity.alphas", &[1.0, 2.0, 3.0])?;
    let radii: Vec<f64> = cfg.get_list("adaptivity.radii", &[5.0, 10.0])?;
    let epsilon: f64 = cfg.get("adaptivity.epsilon", 0.02)?;
    let mut specs = Vec::new();
    for &a in &alphas {
        for &c in &radii {
            specs.push(EllipsoidSpec::new(a, c)?);
        }
    }
    let rows = adaptivity_ratio_bjs(&specs, epsilon, cfg.get("adaptivity.trials", 200)?, seed)?;
    Ok(vec![Output::text("adaptivity.csv", report::adaptivity_csv(&rows, epsilon))])
}

fn consistency(cfg: &RunConfig, seed: u64) -> Result<Vec<Output>, CliError> {
    let mut allowed = keys(&[&MODEL_KEYS, &NOISE_KEYS]);
    allowed.extend(["consistency.samples", "consistency.trials_per_class"]);
    cfg.check_keys("experiment consistency", &allowed)?;
    let model = class_model(cfg, seed, PrototypeLayout::Independent)?;
    let noise = noise_model(cfg, seed)?;
    let rows = consistency_experiment(
        &model,
        &cfg.get_list("consistency.samples", &[64, 256, 1024])?,
        cfg.get("consistency.trials_per_class", 500)?,
        &noise,
        seed,
    )?;
    Ok(vec![Output::text("consistency.csv", report::consistency_csv(&rows))])
}

fn phase(cfg: &RunConfig, seed: u64) -> Result<Vec<Output>, CliError> {
    let allowed = keys(&[&MODEL_KEYS, &DATA_KEYS, &NOISE_KEYS, &PIPELINE_KEYS, &CV_KEYS]);
    cfg.check_keys("experiment phase", &allowed)?;
    let ds = dataset(cfg, seed, PrototypeLayout::PhaseCoded)?;
    let config = pipeline_config(cfg, Method::Pinsker, ds.meta().samples, seed)?;
    let (cv, _) = cv_scheme(cfg, None)?;
    let ablation = phase_ablation(&ds, &config, cv, seed)?;
    Ok(vec![
        Output::text("phase.csv", report::phase_csv(&ablation)),
        Output::text("phase_summary.txt", report::phase_summary(&ablation)),
    ])
}
