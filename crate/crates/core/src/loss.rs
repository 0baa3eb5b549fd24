//! Pure-loss channel in Kraus form, dB conversions and channel segmentation.
//!
//! The l-photon-loss Kraus operator is
//! `K_l = sqrt(Gamma/(1-Gamma))^l (a^l / sqrt(l!)) sqrt(1-Gamma)^n`,
//! a single band `K_l[i, i+l] = sqrt(C(i+l, l) Gamma^l (1-Gamma)^i)`. On the
//! truncated space the set `l = 0..D-1` is exactly complete, so the series is
//! summed until the residual weight drops below the configured tail.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CatError, Result};
use crate::fock::{DensityMatrix, FockVector, ModeOperator};
use crate::Tolerances;

/// Loss magnitude as the lost fraction `Gamma` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    gamma: f64,
}

impl LossSpec {
    pub fn from_fraction(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(CatError::InvalidParameter(format!(
                "loss fraction {gamma} outside [0, 1)"
            )));
        }
        Ok(LossSpec { gamma })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if db < 0.0 {
            return Err(CatError::InvalidParameter(format!(
                "loss {db} dB is negative"
            )));
        }
        Ok(LossSpec {
            gamma: db_to_fraction(db),
        })
    }

    pub fn fraction(&self) -> f64 {
        self.gamma
    }

    pub fn db(&self) -> f64 {
        fraction_to_db(self.gamma)
    }

    pub fn is_zero(&self) -> bool {
        self.gamma == 0.0
    }
}

/// `Gamma = 1 - 10^(-db/10)`.
pub fn db_to_fraction(db: f64) -> f64 {
    1.0 - 10f64.powf(-db / 10.0)
}

/// `db = -10 log10(1 - Gamma)`.
pub fn fraction_to_db(gamma: f64) -> f64 {
    -10.0 * (1.0 - gamma).log10()
}

/// Division of a total loss into `steps + 1` equal segments with `steps`
/// correction circuits in between.
#[derive(Debug, Clone, Copy)]
pub struct SegmentPlan {
    pub total: LossSpec,
    pub steps: usize,
    pub segment: LossSpec,
}

/// Segment loss from `(1 - gamma)^(steps+1) = 1 - Gamma`.
pub fn plan_segments(total: LossSpec, steps: usize) -> SegmentPlan {
    let keep = 1.0 - total.fraction();
    let gamma = 1.0 - keep.powf(1.0 / (steps as f64 + 1.0));
    SegmentPlan {
        total,
        steps,
        segment: LossSpec { gamma },
    }
}

/// Band of the l-photon-loss Kraus operator: `band[i] = K_l[i, i+l]` for
/// `i + l < cutoff`.
pub(crate) fn kraus_band(l: usize, gamma: f64, cutoff: usize) -> Array1<f64> {
    if l >= cutoff {
        return Array1::zeros(0);
    }
    let keep = 1.0 - gamma;
    let len = cutoff - l;
    let mut band = Array1::zeros(len);
    // w(i) = C(i+l, l) Gamma^l (1-Gamma)^i, built multiplicatively
    let mut w = gamma.powi(l as i32);
    for i in 0..len {
        if i > 0 {
            w *= keep * (i + l) as f64 / i as f64;
        }
        band[i] = w.sqrt();
    }
    band
}

/// Dense matrix of the l-photon-loss Kraus operator.
pub fn kraus(l: usize, gamma: f64, cutoff: usize) -> ModeOperator {
    let mut mat = Array2::zeros((cutoff, cutoff));
    let band = kraus_band(l, gamma, cutoff);
    for i in 0..band.len() {
        mat[[i, i + l]] = C64::new(band[i], 0.0);
    }
    ModeOperator::from_mat(mat)
}

/// Applies the pure-loss channel, summing Kraus branches until the residual
/// weight drops below `tol.kraus_tail`.
pub fn apply_loss(rho: &DensityMatrix, gamma: f64, tol: &Tolerances) -> Result<DensityMatrix> {
    let d = rho.cutoff();
    let trace_in = rho.trace();
    let mut out = Array2::<C64>::zeros((d, d));
    let mut cumulative = 0.0;
    let mut terms = 0;
    for l in 0..d {
        let band = kraus_band(l, gamma, d);
        let mut branch_weight = 0.0;
        for i in 0..band.len() {
            branch_weight += band[i] * band[i] * rho.mat()[[i + l, i + l]].re;
            for j in 0..band.len() {
                out[[i, j]] += band[i] * band[j] * rho.mat()[[i + l, j + l]];
            }
        }
        cumulative += branch_weight;
        terms += 1;
        if trace_in - cumulative < tol.kraus_tail {
            return Ok(DensityMatrix::from_mat(out));
        }
    }
    let residual = trace_in - cumulative;
    if residual > 1e3 * tol.kraus_tail {
        return Err(CatError::NonConvergentKrausTail { residual, terms });
    }
    Ok(DensityMatrix::from_mat(out))
}

/// Unnormalized Kraus branches `K_l v` of a pure state, in increasing `l`,
/// truncated once the residual weight drops below `tail_tol * |v|^2`.
pub fn loss_branches(v: &FockVector, gamma: f64, tail_tol: f64) -> Result<Vec<FockVector>> {
    let d = v.cutoff();
    let total = v.norm_sq();
    let mut out = Vec::new();
    let mut cumulative = 0.0;
    for l in 0..d {
        let band = kraus_band(l, gamma, d);
        let mut amps = Array1::zeros(d);
        for i in 0..band.len() {
            amps[i] = band[i] * v.amp(i + l);
        }
        let branch = FockVector::from_amps(amps);
        cumulative += branch.norm_sq();
        out.push(branch);
        if total - cumulative < tail_tol * total.max(1e-300) {
            return Ok(out);
        }
    }
    let residual = total - cumulative;
    if residual > 1e3 * tail_tol * total.max(1e-300) {
        return Err(CatError::NonConvergentKrausTail {
            residual,
            terms: out.len(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::logical_zero;
    use crate::fock::{choose_cutoff, coherent};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn db_conversions() {
        assert_eq!(db_to_fraction(0.0), 0.0);
        assert_abs_diff_eq!(db_to_fraction(1.0), 0.2056717652757185, epsilon = 1e-15);
        // "0.1 dB (2.3%)"
        assert_abs_diff_eq!(db_to_fraction(0.1), 0.02276277904418928, epsilon = 1e-15);
        for &db in &[0.0, 0.01, 0.3, 1.0, 5.0] {
            assert_abs_diff_eq!(fraction_to_db(db_to_fraction(db)), db, epsilon = 1e-12);
        }
    }

    #[test]
    fn segment_plans() {
        let total = LossSpec::from_fraction(0.5).unwrap();
        let p0 = plan_segments(total, 0);
        assert_eq!(p0.segment.fraction(), 0.5);
        let p1 = plan_segments(total, 1);
        assert_abs_diff_eq!(p1.segment.fraction(), 0.2928932188134524, epsilon = 1e-15);
        for steps in [0usize, 1, 3, 10, 99] {
            let p = plan_segments(total, steps);
            let keep = (1.0 - p.segment.fraction()).powi(steps as i32 + 1);
            assert_abs_diff_eq!(keep, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn kraus_l0_is_diagonal_damping() {
        let gamma = 0.3;
        let k0 = kraus(0, gamma, 12);
        for n in 0..12 {
            let want = (1.0 - gamma).powf(n as f64 / 2.0);
            assert_abs_diff_eq!(k0.mat()[[n, n]].re, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn kraus_no_loss() {
        let k0 = kraus(0, 0.0, 8);
        for n in 0..8 {
            assert_eq!(k0.mat()[[n, n]], c(1.0, 0.0));
        }
        let k1 = kraus(1, 0.0, 8);
        assert!(k1.mat().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn kraus_completeness() {
        let d = 40;
        for &gamma in &[0.05, 0.2056717652757185, 0.7] {
            let mut sum = Array2::<C64>::zeros((d, d));
            for l in 0..d {
                let band = kraus_band(l, gamma, d);
                for i in 0..band.len() {
                    sum[[i + l, i + l]] += band[i] * band[i];
                }
            }
            for n in 0..d {
                assert!(
                    (sum[[n, n]].re - 1.0).abs() < 1e-10,
                    "diagonal {n}: {}",
                    sum[[n, n]].re
                );
            }
        }
    }

    #[test]
    fn loss_keeps_coherent_states_coherent() {
        let beta = c(1.8, 0.6);
        let gamma = 0.25;
        let d = choose_cutoff(2.5);
        let tol = Tolerances::default();
        let rho = DensityMatrix::from_pure(&coherent(beta, d).unwrap());
        let lossy = apply_loss(&rho, gamma, &tol).unwrap();
        let target = DensityMatrix::from_pure(&coherent(beta * (1.0 - gamma).sqrt(), d).unwrap());
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((lossy.mat()[[i, j]] - target.mat()[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-9, "coherent fixed-line defect {worst:e}");
        assert_abs_diff_eq!(lossy.trace(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn vacuum_is_fixed_point() {
        let d = 10;
        let rho = DensityMatrix::from_pure(&FockVector::basis(0, d));
        let out = apply_loss(&rho, 0.6, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(out.mat()[[0, 0]].re, 1.0, epsilon = 1e-14);
        let off: f64 = out.mat().iter().map(|z| z.norm()).sum::<f64>() - 1.0;
        assert!(off.abs() < 1e-14);
    }

    #[test]
    fn single_loss_branch_is_odd_reduced_cat() {
        let alpha = 2.0;
        let gamma = 0.2;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let zero = logical_zero(alpha, d).unwrap();
        let branches = loss_branches(&zero, gamma, 1e-12).unwrap();
        let b1 = &branches[1];
        // odd parity exactly
        for n in (0..d).step_by(2) {
            assert_eq!(b1.amp(n), c(0.0, 0.0));
        }
        // proportional to a(|abar> + |-abar>) with abar = alpha sqrt(1-Gamma)
        let abar = alpha * (1.0 - gamma).sqrt();
        let reduced = coherent(c(abar, 0.0), d)
            .unwrap()
            .add(&coherent(c(-abar, 0.0), d).unwrap())
            .unwrap();
        let odd = crate::fock::annihilate(&reduced).normalized();
        let b1n = b1.normalized();
        let ip = b1n.inner(&odd).unwrap().norm();
        assert!((ip - 1.0).abs() < 1e-10, "overlap {ip}");
    }

    #[test]
    fn loss_semigroup_composition() {
        let alpha = 2.5;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let tol = Tolerances::default();
        let total = 0.35;
        let steps = 3usize;
        let seg = 1.0 - (1.0f64 - total).powf(1.0 / (steps as f64 + 1.0));
        let rho0 = DensityMatrix::from_pure(&logical_zero(alpha, d).unwrap());
        let mut chained = rho0.clone();
        for _ in 0..=steps {
            chained = apply_loss(&chained, seg, &tol).unwrap();
        }
        let direct = apply_loss(&rho0, total, &tol).unwrap();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((chained.mat()[[i, j]] - direct.mat()[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-8, "semigroup defect {worst:e}");
    }
}
