//! Experiment implementations. Each returns its output files as strings so
//! runs are deterministic and directly testable; the binary only writes them
//! to disk.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use catlab_core::cat::{bell_state, pauli_eigenstate, LogicalFrame, PauliLabel};
use catlab_core::cavity::{bell_from_cavity_with_pair, reflection, CavityParams, ReflectionMode};
use catlab_core::fock::{choose_cutoff, DensityMatrix};
use catlab_core::loss::{apply_loss, plan_segments, LossSpec, SegmentPlan};
use catlab_core::metrics::{avg_perr, wigner, PerrReport, WignerGridSpec};
use catlab_core::teleport::{ChainEngine, EcCircuit};
use catlab_core::{CatError, Tolerances};

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::output::{fmt_f64, fmt_sci, CsvBuilder};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(CatError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<CatError> for RunError {
    fn from(e: CatError) -> Self {
        RunError::Numeric(e)
    }
}

/// One sweep row; the CSV schema is
/// `alpha,N,gamma_total_db,gamma_segment_db,p_x,p_y,p_z,p_avg,runtime_ms`.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub alpha: f64,
    pub n_steps: usize,
    pub gamma_total_db: f64,
    pub gamma_segment_db: f64,
    pub p: PerrReport,
    pub runtime_ms: u128,
}

impl SweepRecord {
    pub fn csv_header() -> &'static str {
        "alpha,N,gamma_total_db,gamma_segment_db,p_x,p_y,p_z,p_avg,runtime_ms"
    }

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.alpha),
            self.n_steps.to_string(),
            fmt_f64(self.gamma_total_db),
            fmt_f64(self.gamma_segment_db),
            fmt_sci(self.p.p_x),
            fmt_sci(self.p.p_y),
            fmt_sci(self.p.p_z),
            fmt_sci(self.p.p_avg()),
            self.runtime_ms.to_string(),
        ]
    }
}

/// Output files of one experiment run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<(String, String)>,
}

pub fn label_name(label: PauliLabel) -> &'static str {
    match label {
        PauliLabel::Zero => "0",
        PauliLabel::One => "1",
        PauliLabel::Plus => "plus",
        PauliLabel::Minus => "minus",
        PauliLabel::PlusI => "plus_i",
        PauliLabel::MinusI => "minus_i",
    }
}

fn cutoff_for(alpha: f64, explicit: Option<usize>) -> usize {
    explicit.unwrap_or_else(|| choose_cutoff(std::f64::consts::SQRT_2 * alpha))
}

/// Helstrom error report for direct transmission through a total loss.
pub fn uncorrected_perr(
    alpha: f64,
    total: LossSpec,
    cutoff: Option<usize>,
    tol: &Tolerances,
) -> Result<PerrReport, CatError> {
    let d = cutoff_for(alpha, cutoff);
    let frame = LogicalFrame::new(alpha, d)?;
    avg_perr(|label| {
        let st = pauli_eigenstate(label, &frame)?;
        apply_loss(
            &DensityMatrix::from_pure(&st.embedded()),
            total.fraction(),
            tol,
        )
    })
}

/// Helstrom error report after the segmented channel with `steps` correction
/// circuits; `steps = 0` is direct transmission.
pub fn chain_perr(
    alpha: f64,
    total: LossSpec,
    steps: usize,
    cutoff: Option<usize>,
    tol: &Tolerances,
) -> Result<(PerrReport, SegmentPlan), CatError> {
    let plan = plan_segments(total, steps);
    if steps == 0 {
        return Ok((uncorrected_perr(alpha, total, cutoff, tol)?, plan));
    }
    let d = cutoff_for(alpha, cutoff);
    let engine = ChainEngine::new(alpha, plan.segment, d, *tol)?;
    let frame = engine.frame_out().clone();
    let report = avg_perr(|label| {
        let input = pauli_eigenstate(label, &frame)?;
        engine.run(&input, steps)?.final_density()
    })?;
    Ok((report, plan))
}

/// Scans a grid and returns the point minimizing the averaged error
/// probability; ties break toward the smaller amplitude.
pub fn optimize_alpha<F>(grid: &[f64], eval: F) -> Result<(f64, PerrReport, u128), CatError>
where
    F: Fn(f64) -> Result<PerrReport, CatError> + Sync,
{
    let results: Result<Vec<(f64, PerrReport, u128)>, CatError> = grid
        .par_iter()
        .map(|&a| {
            let start = Instant::now();
            let p = eval(a)?;
            Ok((a, p, start.elapsed().as_millis()))
        })
        .collect();
    let results = results?;
    let total_ms: u128 = results.iter().map(|r| r.2).sum();
    let best = results
        .into_iter()
        .min_by(|x, y| {
            x.1.p_avg()
                .partial_cmp(&y.1.p_avg())
                .unwrap()
                .then(x.0.partial_cmp(&y.0).unwrap())
        })
        .expect("non-empty grid");
    Ok((best.0, best.1, total_ms))
}

fn base_metadata(builder: &mut CsvBuilder, cfg: &ExperimentConfig, cutoff: usize) {
    builder.meta("experiment", cfg.kind.name());
    builder.meta("cutoff", cutoff);
    builder.meta("enumeration_tail", fmt_sci(cfg.tol.enumeration_tail));
    builder.meta("enumeration_cap", 2 * (cutoff - 1));
    builder.meta("kraus_tail", fmt_sci(cfg.tol.kraus_tail));
    builder.meta("leak_tol", fmt_sci(cfg.tol.leak_tol));
}

/// Joint PNRD outcome distribution of the lossless circuit (one file,
/// `n1,n2,probability`).
pub fn run_outcome_hist(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    let alpha = cfg.alpha_list[0];
    let d = cutoff_for(alpha, cfg.cutoff);
    let frame = LogicalFrame::new(alpha, d)?;
    let bell = bell_state(alpha, alpha, d)?;
    let circuit = EcCircuit::new(bell, cfg.tol);
    let input = pauli_eigenstate(cfg.input, &frame)?;
    let rho = DensityMatrix::from_pure(&input.embedded());
    let records = circuit.enumerate_outcomes(&rho)?;
    let total: f64 = records.iter().map(|r| r.probability).sum();

    let mut b = CsvBuilder::new("n1,n2,probability");
    base_metadata(&mut b, cfg, d);
    b.meta("alpha", fmt_f64(alpha));
    b.meta("input", label_name(cfg.input));
    b.meta("total_probability", fmt_sci(total));
    b.meta("probability_floor", fmt_sci(1e-12));
    for rec in &records {
        if rec.probability > 1e-12 {
            b.row(&[
                rec.n1.to_string(),
                rec.n2.to_string(),
                fmt_sci(rec.probability),
            ]);
        }
    }
    Ok(RunArtifacts {
        files: vec![(format!("{}.csv", cfg.output_stem), b.finish())],
    })
}

/// Repeated corrections without loss over an amplitude grid.
pub fn run_lossless_repeat(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    let no_loss = LossSpec::from_fraction(0.0).expect("zero loss");
    let jobs: Vec<f64> = cfg.alpha_list.clone();
    let results: Result<Vec<Vec<SweepRecord>>, CatError> = jobs
        .par_iter()
        .map(|&alpha| {
            let mut rows = Vec::new();
            let d = cutoff_for(alpha, cfg.cutoff);
            let mut engine: Option<ChainEngine> = None;
            for &n in &cfg.n_list {
                let start = Instant::now();
                let p = if n == 0 {
                    uncorrected_perr(alpha, no_loss, cfg.cutoff, &cfg.tol)?
                } else {
                    if engine.is_none() {
                        engine = Some(ChainEngine::new(alpha, no_loss, d, cfg.tol)?);
                    }
                    let eng = engine.as_ref().unwrap();
                    let frame = eng.frame_out().clone();
                    avg_perr(|label| {
                        let input = pauli_eigenstate(label, &frame)?;
                        eng.run(&input, n)?.final_density()
                    })?
                };
                rows.push(SweepRecord {
                    alpha,
                    n_steps: n,
                    gamma_total_db: 0.0,
                    gamma_segment_db: 0.0,
                    p,
                    runtime_ms: start.elapsed().as_millis(),
                });
            }
            Ok(rows)
        })
        .collect();

    let mut b = CsvBuilder::new(SweepRecord::csv_header());
    let d_meta = cutoff_for(
        cfg.alpha_list.iter().cloned().fold(0.0, f64::max),
        cfg.cutoff,
    );
    base_metadata(&mut b, cfg, d_meta);
    b.meta("n_list", format!("{:?}", cfg.n_list));
    for rows in results? {
        for r in rows {
            b.row(&r.csv_fields());
        }
    }
    Ok(RunArtifacts {
        files: vec![(format!("{}.csv", cfg.output_stem), b.finish())],
    })
}

/// Loss sweeps: either explicit amplitude grids per (total, N) or
/// grid-optimized amplitude per point.
pub fn run_loss_sweeps(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    let mut b = CsvBuilder::new(SweepRecord::csv_header());
    let d_meta = cutoff_for(
        if cfg.optimize_alpha {
            cfg.alpha_grid.max
        } else {
            cfg.alpha_list.iter().cloned().fold(0.0, f64::max)
        },
        cfg.cutoff,
    );
    base_metadata(&mut b, cfg, d_meta);

    // (total, N) points, either from the explicit N list or from a target
    // loss between corrections
    let mut points: Vec<(LossSpec, usize)> = Vec::new();
    for &total in &cfg.gamma_total {
        if cfg.kind == ExperimentKind::LossSweepGamma && !cfg.gamma_segment_db.is_empty() {
            for &seg_db in &cfg.gamma_segment_db {
                let n_plus_1 = (total.db() / seg_db).round().max(1.0) as usize;
                points.push((total, n_plus_1 - 1));
            }
        } else {
            for &n in &cfg.n_list {
                points.push((total, n));
            }
        }
    }
    b.meta(
        "n_points",
        points
            .iter()
            .map(|(g, n)| format!("({} dB, N={})", fmt_f64(g.db()), n))
            .collect::<Vec<_>>()
            .join(" "),
    );

    let rows: Vec<SweepRecord> = if cfg.optimize_alpha {
        b.meta("alpha_grid", cfg.alpha_grid.describe());
        let grid = cfg.alpha_grid.points();
        let mut rows = Vec::new();
        for &(total, n) in &points {
            let (alpha, p, ms) = optimize_alpha(&grid, |a| {
                Ok(chain_perr(a, total, n, cfg.cutoff, &cfg.tol)?.0)
            })?;
            let plan = plan_segments(total, n);
            rows.push(SweepRecord {
                alpha,
                n_steps: n,
                gamma_total_db: total.db(),
                gamma_segment_db: plan.segment.db(),
                p,
                runtime_ms: ms,
            });
        }
        rows
    } else {
        let jobs: Vec<(LossSpec, usize, f64)> = points
            .iter()
            .flat_map(|&(g, n)| cfg.alpha_list.iter().map(move |&a| (g, n, a)))
            .collect();
        let results: Result<Vec<SweepRecord>, CatError> = jobs
            .par_iter()
            .map(|&(total, n, alpha)| {
                let start = Instant::now();
                let (p, plan) = chain_perr(alpha, total, n, cfg.cutoff, &cfg.tol)?;
                Ok(SweepRecord {
                    alpha,
                    n_steps: n,
                    gamma_total_db: total.db(),
                    gamma_segment_db: plan.segment.db(),
                    p,
                    runtime_ms: start.elapsed().as_millis(),
                })
            })
            .collect();
        results?
    };

    for r in &rows {
        b.row(&r.csv_fields());
    }
    Ok(RunArtifacts {
        files: vec![(format!("{}.csv", cfg.output_stem), b.finish())],
    })
}

/// Wigner grids for the input state, the uncorrected lossy state and the
/// identity-frame post-selected corrected state; one `x,p,W` file per stage
/// and input.
pub fn run_wigner_compare(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    let alpha = cfg.alpha_list[0];
    let total = cfg.gamma_total[0];
    let n = cfg.n_list[0];
    let d = cutoff_for(alpha, cfg.cutoff);
    let plan = plan_segments(total, n);
    let engine = ChainEngine::new(alpha, plan.segment, d, cfg.tol)?;
    let frame = engine.frame_out().clone();
    let half = cfg.wigner_half_width.unwrap_or(alpha + 4.0);
    let spec = WignerGridSpec::centered(half, cfg.wigner_step);

    // states first, grids in parallel afterwards
    let mut jobs: Vec<(PauliLabel, &str, DensityMatrix, Option<f64>)> = Vec::new();
    for &label in &cfg.wigner_inputs {
        let input = pauli_eigenstate(label, &frame)?;
        let pure = DensityMatrix::from_pure(&input.embedded());
        let lossy = apply_loss(&pure, total.fraction(), &cfg.tol)?;
        let run = engine.run(&input, n)?;
        let (corrected, retained) = run.postselect_identity_frame()?;
        jobs.push((label, "input", pure, None));
        jobs.push((label, "uncorrected", lossy, None));
        jobs.push((label, "corrected", corrected, Some(retained)));
    }

    let grids: Result<Vec<_>, CatError> = jobs
        .par_iter()
        .map(|(label, stage, rho, retained)| {
            let grid = wigner(rho, &spec)?;
            Ok((*label, *stage, grid, *retained))
        })
        .collect();

    let mut files = Vec::new();
    for (label, stage, grid, retained) in grids? {
        let mut b = CsvBuilder::new("x,p,W");
        base_metadata(&mut b, cfg, d);
        b.meta("alpha", fmt_f64(alpha));
        b.meta("gamma_total_db", fmt_f64(total.db()));
        b.meta("n_steps", n);
        b.meta("input", label_name(label));
        b.meta("stage", stage);
        if let Some(p) = retained {
            b.meta("retained_probability", fmt_sci(p));
        }
        b.meta("grid_integral", fmt_sci(grid.grid_integral()));
        b.meta("min_w", fmt_sci(grid.min_value()));
        for (ix, &x) in grid.xs.iter().enumerate() {
            for (ip, &p) in grid.ps.iter().enumerate() {
                b.row(&[fmt_f64(x), fmt_f64(p), fmt_sci(grid.values[[ix, ip]])]);
            }
        }
        files.push((
            format!("{}_{}_{}.csv", cfg.output_stem, label_name(label), stage),
            b.finish(),
        ));
    }
    Ok(RunArtifacts { files })
}

/// Reflection-coefficient table over cavity parameter grids, with the Bell
/// fidelity the measured phases would give under unit-modulus reflection.
pub fn run_cavity_scan(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    let alpha = cfg.alpha_list[0];
    let d = cutoff_for(alpha, cfg.cutoff);
    let target = bell_state(alpha, alpha, d)?.two_mode_vector();

    let mut b = CsvBuilder::new(
        "delta_over_kappa,g2_over_kappa_gamma_at,r_up_re,r_up_im,r_down_re,r_down_im,phase,bell_fidelity",
    );
    base_metadata(&mut b, cfg, d);
    b.meta("alpha", fmt_f64(alpha));
    b.meta("kappa_r_over_kappa", fmt_f64(cfg.kappa_r_over_kappa));
    b.meta("gamma_at_over_kappa", fmt_f64(cfg.gamma_at_over_kappa));

    for &dk in &cfg.delta_over_kappa {
        for &g2 in &cfg.g2_ratio {
            let kappa = 1.0;
            let gamma_at = cfg.gamma_at_over_kappa * kappa;
            let params = CavityParams {
                kappa_r: cfg.kappa_r_over_kappa * kappa,
                kappa,
                delta: dk * kappa,
                gamma_at,
                g: (g2 * kappa * gamma_at).sqrt(),
            };
            let pair = reflection(&params)?;
            let (state, _success) = bell_from_cavity_with_pair(
                alpha,
                &pair.phases_only(),
                d,
                ReflectionMode::IdealOnly,
            )?;
            let fid = state.fidelity_with(&target)?;
            b.row(&[
                fmt_f64(dk),
                fmt_f64(g2),
                fmt_sci(pair.r_up.re),
                fmt_sci(pair.r_up.im),
                fmt_sci(pair.r_down.re),
                fmt_sci(pair.r_down.im),
                fmt_sci(pair.phase_difference()),
                fmt_sci(fid),
            ]);
        }
    }
    Ok(RunArtifacts {
        files: vec![(format!("{}.csv", cfg.output_stem), b.finish())],
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    match cfg.kind {
        ExperimentKind::OutcomeHist => run_outcome_hist(cfg),
        ExperimentKind::LosslessRepeat => run_lossless_repeat(cfg),
        ExperimentKind::LossSweepAlpha | ExperimentKind::LossSweepGamma => run_loss_sweeps(cfg),
        ExperimentKind::WignerCompare => run_wigner_compare(cfg),
        ExperimentKind::CavityScan => run_cavity_scan(cfg),
    }
}
