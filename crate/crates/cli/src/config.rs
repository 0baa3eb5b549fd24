//! Flat key-value experiment configuration, TOML syntax, one experiment per
//! file. Loss magnitudes are given either in dB (`gamma_total_db`) or as a
//! fraction (`gamma_total`), never both.

use std::collections::BTreeSet;
use std::fmt;

use catlab_core::cat::PauliLabel;
use catlab_core::loss::LossSpec;
use catlab_core::Tolerances;
use toml::Table;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    OutcomeHist,
    LosslessRepeat,
    LossSweepAlpha,
    LossSweepGamma,
    WignerCompare,
    CavityScan,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "outcome_hist" => Some(Self::OutcomeHist),
            "lossless_repeat" => Some(Self::LosslessRepeat),
            "loss_sweep_alpha" => Some(Self::LossSweepAlpha),
            "loss_sweep_gamma" => Some(Self::LossSweepGamma),
            "wigner_compare" => Some(Self::WignerCompare),
            "cavity_scan" => Some(Self::CavityScan),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::OutcomeHist => "outcome_hist",
            Self::LosslessRepeat => "lossless_repeat",
            Self::LossSweepAlpha => "loss_sweep_alpha",
            Self::LossSweepGamma => "loss_sweep_gamma",
            Self::WignerCompare => "wigner_compare",
            Self::CavityScan => "cavity_scan",
        }
    }
}

/// Scan grid for amplitude optimization.
#[derive(Debug, Clone, Copy)]
pub struct AlphaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AlphaGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }

    pub fn describe(&self) -> String {
        format!("{}:{}:{}", self.min, self.max, self.step)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub alpha_list: Vec<f64>,
    pub optimize_alpha: bool,
    pub alpha_grid: AlphaGrid,
    pub n_list: Vec<usize>,
    pub gamma_total: Vec<LossSpec>,
    /// Alternative way to pick N for gamma sweeps: loss between corrections.
    pub gamma_segment_db: Vec<f64>,
    pub input: PauliLabel,
    pub wigner_inputs: Vec<PauliLabel>,
    pub cutoff: Option<usize>,
    pub tol: Tolerances,
    pub wigner_half_width: Option<f64>,
    pub wigner_step: f64,
    pub delta_over_kappa: Vec<f64>,
    pub g2_ratio: Vec<f64>,
    pub gamma_at_over_kappa: f64,
    pub kappa_r_over_kappa: f64,
    pub output_stem: String,
}

fn get_f64(t: &Table, key: &str) -> Result<Option<f64>, ConfigError> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .map(Some)
            .ok_or_else(|| ConfigError(format!("key `{key}` must be a number"))),
    }
}

fn get_f64_list(t: &Table, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Array(arr)) => {
            let mut out = Vec::with_capacity(arr.len());
            for v in arr {
                let x = v
                    .as_float()
                    .or_else(|| v.as_integer().map(|i| i as f64))
                    .ok_or_else(|| ConfigError(format!("key `{key}` has a non-numeric entry")))?;
                out.push(x);
            }
            if out.is_empty() {
                return err(format!("key `{key}` is an empty grid"));
            }
            Ok(Some(out))
        }
        Some(v) => {
            let x = v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| ConfigError(format!("key `{key}` must be a number or array")))?;
            Ok(Some(vec![x]))
        }
    }
}

fn get_usize_list(t: &Table, key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
    match get_f64_list(t, key)? {
        None => Ok(None),
        Some(v) => {
            let mut out = Vec::with_capacity(v.len());
            for x in v {
                if x < 0.0 || x.fract() != 0.0 {
                    return err(format!("key `{key}` must hold non-negative integers"));
                }
                out.push(x as usize);
            }
            Ok(Some(out))
        }
    }
}

fn get_bool(t: &Table, key: &str) -> Result<Option<bool>, ConfigError> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_bool()
            .map(Some)
            .ok_or_else(|| ConfigError(format!("key `{key}` must be a boolean"))),
    }
}

fn get_string(t: &Table, key: &str) -> Result<Option<String>, ConfigError> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_str()
            .map(|s| Some(s.to_string()))
            .ok_or_else(|| ConfigError(format!("key `{key}` must be a string"))),
    }
}

fn get_label(t: &Table, key: &str) -> Result<Option<PauliLabel>, ConfigError> {
    match get_string(t, key)? {
        None => Ok(None),
        Some(s) => PauliLabel::parse(&s)
            .map(Some)
            .ok_or_else(|| ConfigError(format!("key `{key}`: unknown logical state `{s}`"))),
    }
}

fn get_label_list(t: &Table, key: &str) -> Result<Option<Vec<PauliLabel>>, ConfigError> {
    match t.get(key) {
        None => Ok(None),
        Some(toml::Value::Array(arr)) => {
            let mut out = Vec::new();
            for v in arr {
                let s = v
                    .as_str()
                    .ok_or_else(|| ConfigError(format!("key `{key}` must hold strings")))?;
                out.push(
                    PauliLabel::parse(s)
                        .ok_or_else(|| ConfigError(format!("unknown logical state `{s}`")))?,
                );
            }
            if out.is_empty() {
                return err(format!("key `{key}` is an empty grid"));
            }
            Ok(Some(out))
        }
        Some(_) => err(format!("key `{key}` must be an array of strings")),
    }
}

/// Total loss from `gamma_total_db` xor `gamma_total`.
fn get_gamma_total(t: &Table, default_db: f64) -> Result<Vec<LossSpec>, ConfigError> {
    let db = get_f64_list(t, "gamma_total_db")?;
    let frac = get_f64_list(t, "gamma_total")?;
    if db.is_some() && frac.is_some() {
        return err("specify gamma_total_db or gamma_total, not both");
    }
    let specs: Result<Vec<LossSpec>, _> = match (db, frac) {
        (Some(dbs), None) => dbs.into_iter().map(LossSpec::from_db).collect(),
        (None, Some(fr)) => fr.into_iter().map(LossSpec::from_fraction).collect(),
        (None, None) => vec![default_db]
            .into_iter()
            .map(LossSpec::from_db)
            .collect(),
        (Some(_), Some(_)) => unreachable!(),
    };
    specs.map_err(|e| ConfigError(e.to_string()))
}

fn check_keys(t: &Table, allowed: &[&str]) -> Result<(), ConfigError> {
    let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
    for key in t.keys() {
        if !allowed.contains(key.as_str()) {
            return err(format!("unknown key `{key}` for this experiment"));
        }
    }
    Ok(())
}

fn grid_points(min: f64, max: f64, step: f64) -> Result<Vec<f64>, ConfigError> {
    if step <= 0.0 || max < min {
        return err("grid bounds must satisfy min <= max with step > 0");
    }
    Ok(AlphaGrid { min, max, step }.points())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text
            .parse()
            .map_err(|e| ConfigError(format!("TOML syntax: {e}")))?;
        let kind_str = get_string(&table, "experiment")?
            .ok_or_else(|| ConfigError("missing key `experiment`".into()))?;
        let kind = ExperimentKind::parse(&kind_str)
            .ok_or_else(|| ConfigError(format!("unknown experiment `{kind_str}`")))?;

        let mut tol = Tolerances::default();
        if let Some(x) = get_f64(&table, "enumeration_tail")? {
            if x <= 0.0 || x >= 1.0 {
                return err("enumeration_tail must be in (0, 1)");
            }
            tol.enumeration_tail = x;
        }
        if let Some(x) = get_f64(&table, "kraus_tail")? {
            if x <= 0.0 || x >= 1.0 {
                return err("kraus_tail must be in (0, 1)");
            }
            tol.kraus_tail = x;
        }
        let cutoff = match get_f64(&table, "cutoff")? {
            None => None,
            Some(x) if x >= 4.0 && x.fract() == 0.0 => Some(x as usize),
            Some(_) => return err("cutoff must be an integer >= 4"),
        };
        let output_stem = get_string(&table, "output")?.unwrap_or_else(|| kind.name().to_string());

        let common = [
            "experiment",
            "cutoff",
            "output",
            "enumeration_tail",
            "kraus_tail",
        ];
        fn with<'a>(common: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
            let mut v = common.to_vec();
            v.extend_from_slice(extra);
            v
        }

        let mut cfg = ExperimentConfig {
            kind,
            alpha_list: vec![],
            optimize_alpha: false,
            alpha_grid: AlphaGrid {
                min: 0.5,
                max: 5.0,
                step: 0.05,
            },
            n_list: vec![],
            gamma_total: vec![],
            gamma_segment_db: vec![],
            input: PauliLabel::Zero,
            wigner_inputs: vec![PauliLabel::Zero, PauliLabel::Plus],
            cutoff,
            tol,
            wigner_half_width: None,
            wigner_step: 0.1,
            delta_over_kappa: vec![],
            g2_ratio: vec![],
            gamma_at_over_kappa: 0.01,
            kappa_r_over_kappa: 1.0,
            output_stem,
        };

        match kind {
            ExperimentKind::OutcomeHist => {
                check_keys(&table, &with(&common, &["alpha", "input"]))?;
                cfg.alpha_list = get_f64_list(&table, "alpha")?.unwrap_or_else(|| vec![2.5]);
                if cfg.alpha_list.len() != 1 {
                    return err("outcome_hist takes a single alpha");
                }
                cfg.input = get_label(&table, "input")?.unwrap_or(PauliLabel::Zero);
            }
            ExperimentKind::LosslessRepeat => {
                check_keys(
                    &table,
                    &with(
                        &common,
                        &["alpha", "alpha_min", "alpha_max", "alpha_step", "n_steps"],
                    ),
                )?;
                cfg.alpha_list = match get_f64_list(&table, "alpha")? {
                    Some(v) => v,
                    None => {
                        let min = get_f64(&table, "alpha_min")?.unwrap_or(0.2);
                        let max = get_f64(&table, "alpha_max")?.unwrap_or(5.0);
                        let step = get_f64(&table, "alpha_step")?.unwrap_or(0.2);
                        grid_points(min, max, step)?
                    }
                };
                cfg.n_list = get_usize_list(&table, "n_steps")?.unwrap_or(vec![0, 1, 10, 100]);
            }
            ExperimentKind::LossSweepAlpha => {
                check_keys(
                    &table,
                    &with(
                        &common,
                        &[
                            "alpha",
                            "alpha_min",
                            "alpha_max",
                            "alpha_step",
                            "n_steps",
                            "gamma_total_db",
                            "gamma_total",
                        ],
                    ),
                )?;
                cfg.alpha_list = match get_f64_list(&table, "alpha")? {
                    Some(v) => v,
                    None => {
                        let min = get_f64(&table, "alpha_min")?.unwrap_or(0.5);
                        let max = get_f64(&table, "alpha_max")?.unwrap_or(5.0);
                        let step = get_f64(&table, "alpha_step")?.unwrap_or(0.1);
                        grid_points(min, max, step)?
                    }
                };
                cfg.n_list = get_usize_list(&table, "n_steps")?.unwrap_or(vec![0, 1, 10, 100]);
                cfg.gamma_total = get_gamma_total(&table, 1.0)?;
            }
            ExperimentKind::LossSweepGamma => {
                check_keys(
                    &table,
                    &with(
                        &common,
                        &[
                            "alpha",
                            "alpha_min",
                            "alpha_max",
                            "alpha_step",
                            "optimize_alpha",
                            "n_steps",
                            "gamma_segment_db",
                            "gamma_total_db",
                            "gamma_total",
                        ],
                    ),
                )?;
                cfg.gamma_total = get_gamma_total(&table, 1.0)?;
                cfg.gamma_segment_db =
                    get_f64_list(&table, "gamma_segment_db")?.unwrap_or_default();
                cfg.n_list = get_usize_list(&table, "n_steps")?.unwrap_or_else(|| {
                    if cfg.gamma_segment_db.is_empty() {
                        vec![9, 31, 99, 316, 999]
                    } else {
                        vec![]
                    }
                });
                if cfg.n_list.is_empty() && cfg.gamma_segment_db.is_empty() {
                    return err("loss_sweep_gamma needs n_steps or gamma_segment_db");
                }
                cfg.optimize_alpha = get_bool(&table, "optimize_alpha")?.unwrap_or(true);
                if cfg.optimize_alpha {
                    let min = get_f64(&table, "alpha_min")?.unwrap_or(0.5);
                    let max = get_f64(&table, "alpha_max")?.unwrap_or(5.0);
                    let step = get_f64(&table, "alpha_step")?.unwrap_or(0.05);
                    if step <= 0.0 || max < min {
                        return err("grid bounds must satisfy min <= max with step > 0");
                    }
                    cfg.alpha_grid = AlphaGrid { min, max, step };
                } else {
                    cfg.alpha_list = get_f64_list(&table, "alpha")?.ok_or_else(|| {
                        ConfigError("explicit alpha needed with optimize_alpha = false".into())
                    })?;
                }
            }
            ExperimentKind::WignerCompare => {
                check_keys(
                    &table,
                    &with(
                        &common,
                        &[
                            "alpha",
                            "gamma_total_db",
                            "gamma_total",
                            "n_steps",
                            "inputs",
                            "wigner_half_width",
                            "wigner_step",
                        ],
                    ),
                )?;
                cfg.alpha_list = get_f64_list(&table, "alpha")?.unwrap_or_else(|| vec![3.0]);
                if cfg.alpha_list.len() != 1 {
                    return err("wigner_compare takes a single alpha");
                }
                cfg.gamma_total = get_gamma_total(&table, 1.0)?;
                if cfg.gamma_total.len() != 1 {
                    return err("wigner_compare takes a single total loss");
                }
                cfg.n_list = get_usize_list(&table, "n_steps")?.unwrap_or(vec![100]);
                if cfg.n_list.len() != 1 {
                    return err("wigner_compare takes a single n_steps");
                }
                cfg.wigner_inputs = get_label_list(&table, "inputs")?
                    .unwrap_or_else(|| vec![PauliLabel::Zero, PauliLabel::Plus]);
                cfg.wigner_half_width = get_f64(&table, "wigner_half_width")?;
                cfg.wigner_step = get_f64(&table, "wigner_step")?.unwrap_or(0.1);
                if cfg.wigner_step <= 0.0 {
                    return err("wigner_step must be positive");
                }
            }
            ExperimentKind::CavityScan => {
                check_keys(
                    &table,
                    &with(
                        &common,
                        &[
                            "alpha",
                            "delta_over_kappa",
                            "g2_ratio",
                            "gamma_at_over_kappa",
                            "kappa_r_over_kappa",
                        ],
                    ),
                )?;
                cfg.alpha_list = get_f64_list(&table, "alpha")?.unwrap_or_else(|| vec![2.0]);
                if cfg.alpha_list.len() != 1 {
                    return err("cavity_scan takes a single alpha");
                }
                cfg.delta_over_kappa = get_f64_list(&table, "delta_over_kappa")?
                    .unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0]);
                cfg.g2_ratio =
                    get_f64_list(&table, "g2_ratio")?.unwrap_or_else(|| vec![1e2, 1e4, 1e6, 1e8]);
                cfg.gamma_at_over_kappa = get_f64(&table, "gamma_at_over_kappa")?.unwrap_or(0.01);
                cfg.kappa_r_over_kappa = get_f64(&table, "kappa_r_over_kappa")?.unwrap_or(1.0);
                if cfg.gamma_at_over_kappa <= 0.0 {
                    return err("gamma_at_over_kappa must be positive");
                }
                if !(0.0..=1.0).contains(&cfg.kappa_r_over_kappa) {
                    return err("kappa_r_over_kappa must lie in [0, 1]");
                }
            }
        }

        for &a in &cfg.alpha_list {
            if a < 0.0 {
                return err("alpha must be non-negative");
            }
        }
        Ok(cfg)
    }
}
