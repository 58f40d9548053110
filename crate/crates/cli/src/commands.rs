use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mmlab_core::concentration::{
    alpha_lower_bound, cube_alpha_exact, gaussian_fit, levy_check, lower_bound_curve, median, tail_check,
    uniform_cube_dimension, LevyConfig, LipschitzFunction, SearchConfig,
};
use mmlab_core::dynamics::{
    concentration_property_check, is_essential, leader_certificate, leader_empirical, ramsey_verify_with_cap,
    Cover, IsometricAction, DEFAULT_RAMSEY_CAP,
};
use mmlab_core::generators::GeneratorDescriptor;
use mmlab_core::io::{parse_action, parse_function, parse_space, parse_subset, parse_vector, space_to_json_with_metadata};
use mmlab_core::observable::{obs_distance_with, Normalization};
use mmlab_core::space::{alpha_exact_with_cap, DEFAULT_EXHAUSTIVE_CAP};
use mmlab_core::transport::{emd, MeasurePair};
use mmlab_core::{validate_space, ConcentrationCurve, CurveKind, FiniteMMSpace, SphereGeometry, SubsetMask};

use crate::output::{cached, read, CliError, Produced};

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "snake_case")]
pub enum Command {
    /// Generate a canonical mm-space.
    Generate(GenerateArgs),
    /// Check the axioms of an mm-space file.
    Validate(ValidateArgs),
    /// Concentration function at one radius (JSON) or over a grid (CSV curve).
    Alpha(AlphaArgs),
    /// Fit `alpha ~ c1 exp(-c2 n eps^2)` to a family of curves.
    Fit(FitArgs),
    /// Lévy-trend check over an ordered family of curves.
    Levy(LevyArgs),
    /// Transportation distance between two measures on one space.
    Emd(EmdArgs),
    /// Upper estimate of the observable distance between two spaces.
    Obsdist(ObsdistArgs),
    /// Median of a Lipschitz function.
    Median(MedianArgs),
    /// Median tail inequality for a 1-Lipschitz function.
    Tail(TailArgs),
    /// Essential-set or concentration-property certificate for an action.
    Essential(EssentialArgs),
    /// Three-block sphere construction: threshold certificate and sampling check.
    Leader(LeaderArgs),
    /// Exhaustive finite Ramsey check.
    Ramsey(RamseyArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn out(&self) -> Option<&Path> {
        let out = match self {
            Command::Generate(a) => &a.out,
            Command::Validate(a) => &a.out,
            Command::Alpha(a) => &a.out,
            Command::Fit(a) => &a.out,
            Command::Levy(a) => &a.out,
            Command::Emd(a) => &a.out,
            Command::Obsdist(a) => &a.out,
            Command::Median(a) => &a.out,
            Command::Tail(a) => &a.out,
            Command::Essential(a) => &a.out,
            Command::Leader(a) => &a.out,
            Command::Ramsey(a) => &a.out,
            Command::Replay(a) => &a.out,
        };
        out.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    HammingCube,
    SymmetricGroup,
    Sphere,
    SoN,
    Sl2,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Geodesic,
    Euclidean,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// Generator family (or give a JSON descriptor with --descriptor).
    #[arg(long, required_unless_present = "descriptor")]
    pub family: Option<Family>,
    /// JSON descriptor tagged by "family".
    #[arg(long, conflicts_with = "family")]
    pub descriptor: Option<PathBuf>,
    /// Cube dimension, permutation degree, SO(n) degree or product length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Sphere dimension (the sphere lives in dimension + 1 coordinates).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value = "geodesic")]
    pub metric: Geometry,
    /// Prime for SL(2, p).
    #[arg(long)]
    pub p: Option<u64>,
    /// Atom weights of the product factor, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub base_weights: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Subset enumeration (small spaces).
    Exact,
    /// Extremal sets of the uniform Hamming cube.
    Cube,
    /// Heuristic search over half-measure sets; never exceeds the exact value.
    LowerBound,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AlphaArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Single radius; output is JSON.
    #[arg(long, required_unless_present = "grid")]
    pub eps: Option<f64>,
    /// Radii, comma separated; output is a CSV curve.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: AlphaMode,
    /// Largest space enumerated in exact mode.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random Lipschitz restarts in lower-bound mode.
    #[arg(long, default_value_t = SearchConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Curve for index n, as `n=path.csv`; repeat for each curve.
    #[arg(long = "curve", required = true)]
    pub curves: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LevyArgs {
    /// Curve files in sequence order; repeat the flag.
    #[arg(long = "curve", required = true)]
    pub curves: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = LevyConfig::default().threshold)]
    pub threshold: f64,
    #[arg(long, default_value_t = LevyConfig::default().slack)]
    pub slack: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmdArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub mu1: PathBuf,
    #[arg(long)]
    pub mu2: PathBuf,
    /// Include the optimal coupling (quadratic in the space size).
    #[arg(long)]
    pub coupling: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NormalizationArg {
    ModuloConstants,
    Anchored,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ObsdistArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Candidate couplings to evaluate.
    #[arg(long, default_value_t = SearchConfig::default().budget)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "modulo_constants")]
    pub normalization: NormalizationArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MedianArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Values per point, bare or as {"values": [...], "constant": L}.
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TailArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EssentialArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// {"permutations": [[...], ...]}
    #[arg(long)]
    pub action: PathBuf,
    /// Subset to test; omit when --cover is given.
    #[arg(long, required_unless_present = "cover")]
    pub set: Option<PathBuf>,
    /// Cover as part labels per point, or {"parts": [[indices], ...]}.
    #[arg(long, conflicts_with = "set")]
    pub cover: Option<PathBuf>,
    #[arg(long)]
    pub eps: f64,
    /// Element indices, comma separated (default: all elements).
    #[arg(long, value_delimiter = ',')]
    pub family: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LeaderArgs {
    #[arg(long)]
    pub eps: f64,
    /// Half the ambient dimension; enables the sampling check.
    #[arg(long)]
    pub dim_half: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RamseyArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub n: usize,
    /// Largest number of colorings to enumerate.
    #[arg(long, default_value_t = DEFAULT_RAMSEY_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn execute(command: &Command) -> Result<Produced, CliError> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Validate(a) => validate(a),
        Command::Alpha(a) => alpha(a),
        Command::Fit(a) => fit(a),
        Command::Levy(a) => levy(a),
        Command::Emd(a) => transport(a),
        Command::Obsdist(a) => obsdist(a),
        Command::Median(a) => median_cmd(a),
        Command::Tail(a) => tail(a),
        Command::Essential(a) => essential(a),
        Command::Leader(a) => leader(a),
        Command::Ramsey(a) => ramsey(a),
        Command::Replay(_) => Err(CliError::internal("replay must be resolved before execution")),
    }
}

fn load_space(path: &Path) -> Result<FiniteMMSpace, CliError> {
    Ok(parse_space(&read(path)?)?)
}

fn required<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::input(format!("--{flag} is required for family {family}")))
}

fn descriptor_of(a: &GenerateArgs) -> Result<GeneratorDescriptor, CliError> {
    if let Some(path) = &a.descriptor {
        return serde_json::from_str(&read(path)?).map_err(|e| CliError::input(format!("malformed descriptor: {e}")));
    }
    let family = a.family.ok_or_else(|| CliError::input("--family or --descriptor is required"))?;
    Ok(match family {
        Family::HammingCube => GeneratorDescriptor::HammingCube {
            n: required(a.n, "n", "hamming_cube")?,
        },
        Family::SymmetricGroup => GeneratorDescriptor::SymmetricGroup {
            n: required(a.n, "n", "symmetric_group")?,
        },
        Family::Sphere => GeneratorDescriptor::Sphere {
            dim: required(a.dim, "dim", "sphere")?,
            seed: a.seed,
            sample_count: required(a.samples, "samples", "sphere")?,
            metric: match a.metric {
                Geometry::Geodesic => SphereGeometry::Geodesic,
                Geometry::Euclidean => SphereGeometry::Euclidean,
            },
        },
        Family::SoN => GeneratorDescriptor::SoN {
            n: required(a.n, "n", "so_n")?,
            seed: a.seed,
            sample_count: required(a.samples, "samples", "so_n")?,
        },
        Family::Sl2 => GeneratorDescriptor::Sl2 {
            p: required(a.p, "p", "sl2")?,
        },
        Family::Product => GeneratorDescriptor::Product {
            base_weights: a
                .base_weights
                .clone()
                .ok_or_else(|| CliError::input("--base-weights is required for family product"))?,
            n: required(a.n, "n", "product")?,
        },
    })
}

fn generate(a: &GenerateArgs) -> Result<Produced, CliError> {
    let descriptor = descriptor_of(a)?;
    let key = serde_json::to_string(&descriptor).map_err(|e| CliError::internal(e.to_string()))?;
    let body = cached(&key, || Ok(space_to_json_with_metadata(&descriptor.generate()?, descriptor.metadata()) + "\n"))?;
    let mut produced = Produced::text(body).seed(a.seed);
    if let Some(path) = &a.descriptor {
        produced = produced.inputs(&[path]);
    }
    Ok(produced)
}

fn validate(a: &ValidateArgs) -> Result<Produced, CliError> {
    let doc: mmlab_core::io::SpaceDocument = serde_json::from_str(&read(&a.space)?)
        .map_err(|e| CliError::input(format!("malformed space document: {e}")))?;
    let violations = match doc.to_space_unchecked() {
        Ok(space) => validate_space(&space),
        Err(e) => vec![e.to_string()],
    };
    let mut produced = Produced::json(&serde_json::json!({
        "valid": violations.is_empty(),
        "violations": violations,
    }))?
    .inputs(&[&a.space]);
    if !violations.is_empty() {
        produced.failure = Some(CliError::input(format!("{} violation(s): {}", violations.len(), violations[0])));
    }
    Ok(produced)
}

fn alpha(a: &AlphaArgs) -> Result<Produced, CliError> {
    let space = load_space(&a.space)?;
    let cfg = SearchConfig {
        seed: a.seed,
        restarts: a.restarts,
        ..SearchConfig::default()
    };
    let cube_n = || {
        uniform_cube_dimension(&space).ok_or_else(|| CliError::input("cube mode needs a uniform Hamming cube in generator order"))
    };
    let one = |eps: f64| -> Result<f64, CliError> {
        Ok(match a.mode {
            AlphaMode::Exact => alpha_exact_with_cap(&space, eps, a.cap)?,
            AlphaMode::Cube => cube_alpha_exact(cube_n()?, eps)?,
            AlphaMode::LowerBound => alpha_lower_bound(&space, eps, &cfg)?,
        })
    };
    let kind = match a.mode {
        AlphaMode::Exact | AlphaMode::Cube => CurveKind::Exact,
        AlphaMode::LowerBound => CurveKind::LowerBoundSearch,
    };
    let produced = match (&a.grid, a.eps) {
        (Some(grid), _) => {
            let curve = match a.mode {
                AlphaMode::LowerBound => lower_bound_curve(&space, grid, &cfg)?,
                _ => ConcentrationCurve::new(grid.clone(), grid.iter().map(|&e| one(e)).collect::<Result<_, _>>()?, kind)?,
            };
            Produced::text(curve.to_csv())
        }
        (None, Some(eps)) => Produced::json(&serde_json::json!({
            "alpha": one(eps)?,
            "eps": eps,
            "kind": kind.to_string(),
        }))?,
        (None, None) => return Err(CliError::input("give --eps or --grid")),
    };
    Ok(produced.inputs(&[&a.space]).seed(a.seed))
}

fn fit(a: &FitArgs) -> Result<Produced, CliError> {
    let mut curves = Vec::new();
    let mut inputs = Vec::new();
    for spec in &a.curves {
        let (n, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("expected n=path, got {spec}")))?;
        let n: usize = n.trim().parse().map_err(|_| CliError::input(format!("bad index in {spec}")))?;
        let path = PathBuf::from(path);
        curves.push((n, ConcentrationCurve::from_csv(&read(&path)?)?));
        inputs.push(path);
    }
    let refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    Ok(Produced::json(&gaussian_fit(&curves)?)?.inputs(&refs))
}

fn levy(a: &LevyArgs) -> Result<Produced, CliError> {
    let curves = a
        .curves
        .iter()
        .map(|p| Ok(ConcentrationCurve::from_csv(&read(p)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let cfg = LevyConfig {
        threshold: a.threshold,
        slack: a.slack,
    };
    let refs: Vec<&Path> = a.curves.iter().map(PathBuf::as_path).collect();
    Ok(Produced::json(&levy_check(&curves, &a.eps_grid, cfg))?.inputs(&refs))
}

fn transport(a: &EmdArgs) -> Result<Produced, CliError> {
    let space = load_space(&a.space)?;
    let pair = MeasurePair::new(&space, parse_vector(&read(&a.mu1)?)?, parse_vector(&read(&a.mu2)?)?)?;
    let result = emd(&space, &pair)?;
    let mut body = serde_json::json!({ "distance": result.distance });
    if a.coupling {
        let rows: Vec<&[f64]> = result.witness.joint.chunks(space.len()).collect();
        body["coupling"] = serde_json::json!(rows);
    }
    Ok(Produced::json(&body)?.inputs(&[&a.space, &a.mu1, &a.mu2]))
}

fn obsdist(a: &ObsdistArgs) -> Result<Produced, CliError> {
    let x = load_space(&a.x)?;
    let y = load_space(&a.y)?;
    let cfg = SearchConfig {
        seed: a.seed,
        budget: a.budget,
        ..SearchConfig::default()
    };
    let norm = match a.normalization {
        NormalizationArg::ModuloConstants => Normalization::ModuloConstants,
        NormalizationArg::Anchored => Normalization::Anchored,
    };
    let d = obs_distance_with(&x, &y, &cfg, norm)?;
    Ok(Produced::json(&serde_json::json!({
        "upper": d.upper,
        "normalization": d.normalization,
        "anchors": [d.anchors.0, d.anchors.1],
        "coupling": d.coupling,
        "candidates_evaluated": d.candidates_evaluated,
    }))?
    .inputs(&[&a.x, &a.y])
    .seed(a.seed))
}

fn load_function(space: &FiniteMMSpace, path: &Path) -> Result<LipschitzFunction, CliError> {
    let doc = parse_function(&read(path)?)?;
    Ok(LipschitzFunction::new(space, doc.values, doc.constant)?)
}

fn median_cmd(a: &MedianArgs) -> Result<Produced, CliError> {
    let space = load_space(&a.space)?;
    let f = load_function(&space, &a.function)?;
    Ok(Produced::json(&serde_json::json!({ "median": median(&space, &f) }))?.inputs(&[&a.space, &a.function]))
}

fn tail(a: &TailArgs) -> Result<Produced, CliError> {
    let space = load_space(&a.space)?;
    let f = load_function(&space, &a.function)?;
    Ok(Produced::json(&tail_check(&space, &f, a.eps)?)?.inputs(&[&a.space, &a.function]))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoverDoc {
    Labels(Vec<usize>),
    Parts { parts: Vec<Vec<usize>> },
}

fn essential(a: &EssentialArgs) -> Result<Produced, CliError> {
    let space = load_space(&a.space)?;
    let n = space.len();
    let doc = parse_action(&read(&a.action)?)?;
    let action = IsometricAction::new(space, doc.permutations, doc.names)?;
    let family = a
        .family
        .clone()
        .unwrap_or_else(|| (0..action.elements().len()).collect());
    let produced = if let Some(cover_path) = &a.cover {
        let doc: CoverDoc = serde_json::from_str(&read(cover_path)?)
            .map_err(|e| CliError::input(format!("malformed cover: {e}")))?;
        let cover = match doc {
            CoverDoc::Labels(labels) => Cover::from_labels(&labels)?,
            CoverDoc::Parts { parts } => {
                if let Some(bad) = parts.iter().flatten().find(|&&i| i >= n) {
                    return Err(CliError::input(format!("cover point {bad} out of range")));
                }
                Cover::new(n, parts.into_iter().map(|p| SubsetMask::from_indices(n, p)).collect())?
            }
        };
        Produced::json(&concentration_property_check(&action, &cover, a.eps, &family)?)?
            .inputs(&[&a.space, &a.action, cover_path])
    } else {
        let set_path = a.set.as_ref().ok_or_else(|| CliError::input("--set or --cover is required"))?;
        let set = parse_subset(&read(set_path)?, n)?;
        Produced::json(&is_essential(&action, &set, a.eps, &family)?)?.inputs(&[&a.space, &a.action, set_path])
    };
    Ok(produced)
}

fn leader(a: &LeaderArgs) -> Result<Produced, CliError> {
    let certificate = leader_certificate(a.eps)?;
    let empirical = a
        .dim_half
        .map(|d| leader_empirical(d, a.samples, a.eps, a.seed))
        .transpose()?;
    Ok(Produced::json(&serde_json::json!({
        "certificate": certificate,
        "empirical": empirical,
    }))?
    .seed(a.seed))
}

fn ramsey(a: &RamseyArgs) -> Result<Produced, CliError> {
    Produced::json(&ramsey_verify_with_cap(a.k, a.l, a.r, a.n, a.cap)?)
}
