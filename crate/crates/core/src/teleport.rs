//! The teleportation-based error-correction circuit: conditional PNRD outcome
//! maps, correction rules, outcome enumeration, the averaged channel and
//! composed loss-correction chains.
//!
//! The input mode is mixed with the reduced-amplitude half of a logical Bell
//! state on a 50:50 beamsplitter and both outputs are counted. Conditioned on
//! a result `(n1, n2)` the fresh mode collapses inside the two-dimensional
//! logical span, so every outcome is represented by a 2 x D map from the input
//! mode to unnormalized logical coefficients. Corrections are applied to the
//! coefficients right after the measurement (classical Pauli-frame tracking),
//! each branch is renormalized against the output Gram matrix and averaged in
//! with its measurement probability.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::cat::{bell_state, BellState, LogicalBlock, LogicalCoeffState, LogicalFrame, Pauli};
use crate::error::{CatError, Result};
use crate::fock::{bs_table, DensityMatrix, FockVector};
use crate::loss::{apply_loss, kraus_band, LossSpec, SegmentPlan};
use crate::Tolerances;

/// Outcomes with reference probability below this floor are dropped from the
/// precomputed chain data; the discarded mass stays far below `prob_tol` even
/// over thousands of steps.
const ENGINE_PROB_FLOOR: f64 = 1e-17;

/// Pauli correction implied by a PNRD result, plus the parity flag announcing
/// a detected loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionRule {
    pub pauli: Pauli,
    pub loss_detected: bool,
}

/// X whenever both detectors fire; Z whenever the total count is 1 or 2
/// (mod 4); odd totals flag a detected loss.
pub fn correction_rule(n1: usize, n2: usize) -> CorrectionRule {
    let x = n1 > 0 && n2 > 0;
    let z = matches!((n1 + n2) % 4, 1 | 2);
    let pauli = match (x, z) {
        (false, false) => Pauli::I,
        (true, false) => Pauli::X,
        (false, true) => Pauli::Z,
        (true, true) => Pauli::XZ,
    };
    CorrectionRule {
        pauli,
        loss_detected: (n1 + n2) % 2 == 1,
    }
}

/// Linear map sending an input-mode Fock vector to the unnormalized logical
/// coefficients of the teleported mode, conditioned on the PNRD result.
#[derive(Debug, Clone)]
pub struct ConditionalMap {
    pub n1: usize,
    pub n2: usize,
    offset: usize,
    rows: [Array1<C64>; 2],
}

impl ConditionalMap {
    /// Unnormalized output coefficients for a pure input.
    pub fn apply(&self, v: &FockVector) -> [C64; 2] {
        let mut out = [C64::new(0.0, 0.0); 2];
        for (k, slot) in out.iter_mut().enumerate() {
            let row = &self.rows[k];
            let mut acc = C64::new(0.0, 0.0);
            for (i, c) in row.iter().enumerate() {
                acc += c * v.amp(self.offset + i);
            }
            *slot = acc;
        }
        out
    }

    /// Conditional 2x2 logical block `M rho M†`.
    pub fn conditional_block(&self, rho: &DensityMatrix) -> LogicalBlock {
        let w = self.rows[0].len();
        let mut y = [vec![C64::new(0.0, 0.0); w], vec![C64::new(0.0, 0.0); w]];
        for k in 0..2 {
            let row = &self.rows[k];
            for j in 0..w {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..w {
                    acc += row[i] * rho.mat()[[self.offset + i, self.offset + j]];
                }
                y[k][j] = acc;
            }
        }
        let mut t = LogicalBlock::zero();
        for k in 0..2 {
            for l in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..w {
                    acc += y[k][j] * self.rows[l][j].conj();
                }
                t.0[k][l] = acc;
            }
        }
        t
    }

    /// Dense 2 x cutoff matrix of the map.
    pub fn to_matrix(&self, cutoff: usize) -> Array2<C64> {
        let mut mat = Array2::zeros((2, cutoff));
        for k in 0..2 {
            for (i, c) in self.rows[k].iter().enumerate() {
                mat[[k, self.offset + i]] = *c;
            }
        }
        mat
    }
}

/// One enumerated PNRD outcome: its probability, the correction it implies
/// and the unnormalized conditional logical block before correction.
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub n1: usize,
    pub n2: usize,
    pub probability: f64,
    pub correction: CorrectionRule,
    pub block: LogicalBlock,
}

/// The error-correction circuit for a fixed Bell resource.
#[derive(Debug, Clone)]
pub struct EcCircuit {
    bell: BellState,
    tol: Tolerances,
    t_cap: usize,
}

impl EcCircuit {
    pub fn new(bell: BellState, tol: Tolerances) -> Self {
        let t_cap = 2 * (bell.cutoff() - 1);
        EcCircuit { bell, tol, t_cap }
    }

    pub fn bell(&self) -> &BellState {
        &self.bell
    }

    pub fn t_cap(&self) -> usize {
        self.t_cap
    }

    /// Conditional map for the result `(n1, n2)`, assembled from the cached
    /// beamsplitter block at total photon number `n1 + n2` and the Bell
    /// state's input-side components.
    pub fn conditional_map(&self, n1: usize, n2: usize) -> ConditionalMap {
        let d = self.bell.cutoff();
        let t = n1 + n2;
        if t > self.t_cap {
            return ConditionalMap {
                n1,
                n2,
                offset: 0,
                rows: [Array1::zeros(0), Array1::zeros(0)],
            };
        }
        let lo = t.saturating_sub(d - 1);
        let hi = t.min(d - 1);
        let block = bs_table().block(t);
        let comps = [self.bell.input_component(0), self.bell.input_component(1)];
        let rows = [0, 1]
            .map(|k| Array1::from_iter((lo..=hi).map(|n| block[[n1, n]] * comps[k].amp(t - n))));
        ConditionalMap {
            n1,
            n2,
            offset: lo,
            rows,
        }
    }

    /// Enumerates outcomes in increasing total photon number until the
    /// cumulative probability reaches the input trace up to
    /// `tol.enumeration_tail`.
    pub fn enumerate_outcomes(&self, rho: &DensityMatrix) -> Result<Vec<OutcomeRecord>> {
        if rho.cutoff() != self.bell.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: rho.cutoff(),
                right: self.bell.cutoff(),
            });
        }
        let frame_out = self.bell.frame_out();
        let target = rho.trace() * (1.0 - self.tol.enumeration_tail);
        let mut records = Vec::new();
        let mut cumulative = 0.0;
        for t in 0..=self.t_cap {
            for n1 in 0..=t {
                let map = self.conditional_map(n1, t - n1);
                let block = map.conditional_block(rho);
                let probability = frame_out.gram_trace(&block);
                cumulative += probability;
                records.push(OutcomeRecord {
                    n1,
                    n2: t - n1,
                    probability,
                    correction: correction_rule(n1, t - n1),
                    block,
                });
            }
            if cumulative >= target {
                return Ok(records);
            }
        }
        Err(CatError::EnumerationCapReached {
            cap: self.t_cap,
            cumulative,
        })
    }

    /// The averaged channel: every outcome is corrected on the coefficient
    /// level, renormalized against the output Gram matrix, weighted with its
    /// measurement probability and re-embedded in the restored-amplitude
    /// frame.
    pub fn ec_channel(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let records = self.enumerate_outcomes(rho)?;
        let frame_out = self.bell.frame_out();
        let mut w = LogicalBlock::zero();
        for rec in &records {
            if rec.probability <= 0.0 {
                continue;
            }
            let corrected = rec.correction.pauli.apply_block(&rec.block);
            let q = frame_out.gram_trace(&corrected);
            if q <= 0.0 {
                continue;
            }
            w.add_scaled(&corrected, rec.probability / q);
        }
        Ok(frame_out.embed_block(&w).hermitized())
    }
}

/// One application of the error-correction circuit to an arbitrary input,
/// with the Bell resource built from the given amplitudes.
pub fn ec_channel(
    rho_in: &DensityMatrix,
    alpha_out: f64,
    alpha_in_bell: f64,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    let bell = bell_state(alpha_in_bell, alpha_out, rho_in.cutoff())?;
    EcCircuit::new(bell, *tol).ec_channel(rho_in)
}

/// Per-outcome conditional data for one loss-plus-correction step, reduced to
/// the logical span: `h[a][b]` is the conditional output block produced by the
/// input basis block `|a_L><b_L|` after segment loss and the beamsplitter
/// projection.
struct OutcomeTensor {
    correction: Pauli,
    h: [[LogicalBlock; 2]; 2],
}

/// Chain state resolved by the accumulated Pauli frame, indexed by
/// [`Pauli::index`]. The sum of the four blocks is the unconditioned state.
pub type FrameSectors = [LogicalBlock; 4];

/// Precomputed engine for repeated `(loss then correction)` steps at fixed
/// amplitude and segment loss. Construction enumerates the outcome set once
/// against a reference input (the average of the six Pauli eigenstates after
/// segment loss); each step is then a small contraction per outcome, exactly
/// equal to running the full channel because every map involved is linear on
/// the logical span.
pub struct ChainEngine {
    circuit: EcCircuit,
    segment: LossSpec,
    tol: Tolerances,
    outcomes: Vec<OutcomeTensor>,
    reference_completeness: f64,
}

impl ChainEngine {
    pub fn new(alpha: f64, segment: LossSpec, cutoff: usize, tol: Tolerances) -> Result<Self> {
        let gamma = segment.fraction();
        let frame_out = LogicalFrame::new(alpha, cutoff)?;
        let frame_in = LogicalFrame::new(alpha * (1.0 - gamma).sqrt(), cutoff)?;
        let bell = BellState::new(frame_in, frame_out.clone())?;
        let circuit = EcCircuit::new(bell, tol);

        // Kraus branches of the two embedded basis states, shared j grid.
        let branches = basis_loss_branches(&frame_out, gamma, tol.kraus_tail)?;

        // Reference block: average of the six Pauli eigenstates.
        let mut w_ref = LogicalBlock::zero();
        for label in crate::cat::PauliLabel::ALL {
            let st = crate::cat::pauli_eigenstate(label, &frame_out)?;
            w_ref.add_scaled(&st.block(), 1.0 / 6.0);
        }

        let target = 1.0 - 0.1 * tol.enumeration_tail;
        let mut outcomes = Vec::new();
        let mut cumulative = 0.0;
        let mut reached = false;
        for t in 0..=circuit.t_cap() {
            for n1 in 0..=t {
                let map = circuit.conditional_map(n1, t - n1);
                let mut h = [[LogicalBlock::zero(); 2]; 2];
                let ms: Vec<[[C64; 2]; 2]> = branches
                    .iter()
                    .map(|pair| [map.apply(&pair[0]), map.apply(&pair[1])])
                    .collect();
                for m in &ms {
                    for a in 0..2 {
                        for b in 0..2 {
                            for k in 0..2 {
                                for l in 0..2 {
                                    h[a][b].0[k][l] += m[a][k] * m[b][l].conj();
                                }
                            }
                        }
                    }
                }
                let tensor = OutcomeTensor {
                    correction: correction_rule(n1, t - n1).pauli,
                    h,
                };
                let p_ref = frame_out.gram_trace(&apply_tensor(&tensor.h, &w_ref));
                cumulative += p_ref;
                if p_ref > ENGINE_PROB_FLOOR {
                    outcomes.push(tensor);
                }
            }
            if cumulative >= target {
                reached = true;
                break;
            }
        }
        if !reached {
            return Err(CatError::EnumerationCapReached {
                cap: circuit.t_cap(),
                cumulative,
            });
        }
        Ok(ChainEngine {
            circuit,
            segment,
            tol,
            outcomes,
            reference_completeness: cumulative,
        })
    }

    pub fn frame_out(&self) -> &LogicalFrame {
        self.circuit.bell().frame_out()
    }

    pub fn segment(&self) -> LossSpec {
        self.segment
    }

    pub fn circuit(&self) -> &EcCircuit {
        &self.circuit
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn reference_completeness(&self) -> f64 {
        self.reference_completeness
    }

    /// One `(segment loss, then correction circuit)` step on frame-resolved
    /// sectors. Corrections route each outcome's branch into the sector of
    /// the composed frame.
    pub fn step(&self, sectors: &FrameSectors) -> FrameSectors {
        let frame_out = self.frame_out();
        let mut out = [LogicalBlock::zero(); 4];
        for (s, w) in sectors.iter().enumerate() {
            if w.frobenius_norm() == 0.0 {
                continue;
            }
            let pauli_s = Pauli::ALL[s];
            for oc in &self.outcomes {
                let t = apply_tensor(&oc.h, w);
                let p = frame_out.gram_trace(&t);
                if p <= 0.0 {
                    continue;
                }
                let corrected = oc.correction.apply_block(&t);
                let q = frame_out.gram_trace(&corrected);
                if q <= 0.0 {
                    continue;
                }
                out[pauli_s.then(oc.correction).index()].add_scaled(&corrected, p / q);
            }
        }
        out
    }

    /// Runs `n_steps` corrections from a logical input, tracking the
    /// accumulated Pauli frame. The trailing segment loss is applied when the
    /// result is materialized.
    pub fn run(&self, input: &LogicalCoeffState, n_steps: usize) -> Result<ChainRun> {
        let frame_out = self.frame_out();
        if (input.frame.alpha() - frame_out.alpha()).abs() > 1e-12
            || input.frame.cutoff() != frame_out.cutoff()
        {
            return Err(CatError::InvalidParameter(
                "chain input frame does not match the engine frame".into(),
            ));
        }
        let mut sectors = [LogicalBlock::zero(); 4];
        sectors[0] = input.block();
        for _ in 0..n_steps {
            sectors = self.step(&sectors);
        }
        Ok(ChainRun {
            sectors,
            frame: frame_out.clone(),
            segment: self.segment,
            tol: self.tol,
        })
    }
}

fn apply_tensor(h: &[[LogicalBlock; 2]; 2], w: &LogicalBlock) -> LogicalBlock {
    let mut t = LogicalBlock::zero();
    for a in 0..2 {
        for b in 0..2 {
            let c = w.0[a][b];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..2 {
                for l in 0..2 {
                    t.0[k][l] += c * h[a][b].0[k][l];
                }
            }
        }
    }
    t
}

/// Kraus branches `K_j v_a` of the two embedded basis states on a shared `j`
/// grid, truncated once both residuals drop below `tail`.
fn basis_loss_branches(
    frame: &LogicalFrame,
    gamma: f64,
    tail: f64,
) -> Result<Vec<[FockVector; 2]>> {
    let d = frame.cutoff();
    let mut out = Vec::new();
    let mut cum = [0.0f64; 2];
    for j in 0..d {
        let band = kraus_band(j, gamma, d);
        let pair = [0, 1].map(|a| {
            let v = frame.basis(a);
            let mut amps = Array1::zeros(d);
            for i in 0..band.len() {
                amps[i] = band[i] * v.amp(i + j);
            }
            FockVector::from_amps(amps)
        });
        cum[0] += pair[0].norm_sq();
        cum[1] += pair[1].norm_sq();
        out.push(pair);
        if 1.0 - cum[0] < tail && 1.0 - cum[1] < tail {
            return Ok(out);
        }
    }
    let residual = (1.0 - cum[0]).max(1.0 - cum[1]);
    if residual > 1e3 * tail {
        return Err(CatError::NonConvergentKrausTail {
            residual,
            terms: out.len(),
        });
    }
    Ok(out)
}

/// Result of a frame-tracked chain before the trailing segment loss.
#[derive(Debug, Clone)]
pub struct ChainRun {
    /// Logical blocks per accumulated Pauli frame, indexed by [`Pauli::index`].
    pub sectors: FrameSectors,
    frame: LogicalFrame,
    segment: LossSpec,
    tol: Tolerances,
}

impl ChainRun {
    pub fn frame(&self) -> &LogicalFrame {
        &self.frame
    }

    /// Unconditioned output: trailing segment loss applied to the embedded sum
    /// of all frame sectors.
    pub fn final_density(&self) -> Result<DensityMatrix> {
        let mut w = LogicalBlock::zero();
        for b in &self.sectors {
            w.add_scaled(b, 1.0);
        }
        let rho = self.frame.embed_block(&w);
        Ok(apply_loss(&rho, self.segment.fraction(), &self.tol)?.hermitized())
    }

    /// Probability that the accumulated correction is the identity.
    pub fn retained_identity_probability(&self) -> f64 {
        self.frame.gram_trace(&self.sectors[Pauli::I.index()])
    }

    /// Keeps only trajectories whose corrections compose to the identity;
    /// returns the normalized output and the retained probability.
    pub fn postselect_identity_frame(&self) -> Result<(DensityMatrix, f64)> {
        let retained = self.retained_identity_probability();
        if retained <= 0.0 {
            return Err(CatError::ZeroRetainedProbability);
        }
        let block = self.sectors[Pauli::I.index()].scaled(1.0 / retained);
        let rho = self.frame.embed_block(&block);
        let out = apply_loss(&rho, self.segment.fraction(), &self.tol)?.hermitized();
        Ok((out, retained))
    }
}

/// Runs `(loss ∘ correction)^N ∘ loss` on a logical input with frame tracking.
pub fn simulate_chain_tracked(
    input: &LogicalCoeffState,
    plan: &SegmentPlan,
    alpha: f64,
    tol: &Tolerances,
) -> Result<ChainRun> {
    let engine = ChainEngine::new(alpha, plan.segment, input.frame.cutoff(), *tol)?;
    engine.run(input, plan.steps)
}

/// Unconditioned final density matrix of the chain.
pub fn simulate_chain(
    input: &LogicalCoeffState,
    plan: &SegmentPlan,
    alpha: f64,
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    simulate_chain_tracked(input, plan, alpha, tol)?.final_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::{pauli_eigenstate, PauliLabel};
    use crate::fock::{annihilate, choose_cutoff};
    use crate::loss::plan_segments;
    use crate::metrics::fidelity;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn frame(alpha: f64) -> LogicalFrame {
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        LogicalFrame::new(alpha, d).unwrap()
    }

    #[test]
    fn correction_rule_table() {
        let r = correction_rule(6, 6);
        assert_eq!(r.pauli, Pauli::X);
        assert!(!r.loss_detected);
        let r = correction_rule(13, 0);
        assert_eq!(r.pauli, Pauli::Z);
        assert!(r.loss_detected);
        let r = correction_rule(0, 0);
        assert_eq!(r.pauli, Pauli::I);
        assert!(!r.loss_detected);
        let r = correction_rule(3, 2);
        assert_eq!(r.pauli, Pauli::XZ);
        assert!(r.loss_detected);
    }

    #[test]
    fn conditional_map_both_zero_projects_onto_plus() {
        let f = frame(2.0);
        let bell = BellState::new(f.clone(), f.clone()).unwrap();
        let circuit = EcCircuit::new(bell, Tolerances::default());
        let map = circuit.conditional_map(0, 0);
        let out0 = map.apply(f.zero_l());
        let out1 = map.apply(f.one_l());
        // output is proportional to (mu + nu)(|0_L> + |1_L>): equal columns,
        // equal components
        assert!((out0[0] - out0[1]).norm() < 1e-14 * out0[0].norm());
        assert!((out1[0] - out1[1]).norm() < 1e-14 * out1[0].norm());
        assert!((out0[0] - out1[0]).norm() < 1e-12 * out0[0].norm());
        // the (1, -1) input has zero outcome amplitude
        let minus = f.embed(c(1.0, 0.0), c(-1.0, 0.0));
        let outm = map.apply(&minus);
        assert!(outm[0].norm() < 1e-16 && outm[1].norm() < 1e-16);
    }

    #[test]
    fn lossless_selection_rules_on_maps() {
        let f = frame(1.5);
        let bell = BellState::new(f.clone(), f.clone()).unwrap();
        let circuit = EcCircuit::new(bell, Tolerances::default());
        let probe = f.embed(c(0.8, 0.1), c(0.4, -0.2));
        // odd totals vanish
        for (n1, n2) in [(1, 0), (0, 3), (2, 1), (4, 3)] {
            let out = circuit.conditional_map(n1, n2).apply(&probe);
            assert!(
                out[0].norm() < 1e-13 && out[1].norm() < 1e-13,
                "({n1},{n2})"
            );
        }
        // both detectors firing with n1 != n2 (mod 4) vanish
        for (n1, n2) in [(1, 3), (2, 4), (3, 5), (2, 8)] {
            let out = circuit.conditional_map(n1, n2).apply(&probe);
            assert!(
                out[0].norm() < 1e-13 && out[1].norm() < 1e-13,
                "({n1},{n2})"
            );
        }
        // an allowed outcome does not vanish
        let out = circuit.conditional_map(2, 2).apply(&probe);
        assert!(out[0].norm() > 1e-6);
    }

    #[test]
    fn single_loss_parity_flips_selection() {
        let f = frame(1.5);
        let bell = BellState::new(f.clone(), f.clone()).unwrap();
        let circuit = EcCircuit::new(bell, Tolerances::default());
        let lost = annihilate(&f.embed(c(0.7, 0.0), c(0.5, 0.3)));
        for (n1, n2) in [(0, 0), (2, 0), (1, 1), (2, 4)] {
            let out = circuit.conditional_map(n1, n2).apply(&lost);
            assert!(
                out[0].norm() < 1e-13 && out[1].norm() < 1e-13,
                "({n1},{n2})"
            );
        }
        let out = circuit.conditional_map(1, 0).apply(&lost);
        assert!(out[0].norm() > 1e-6);
    }

    #[test]
    fn enumeration_completeness_lossless() {
        let f = frame(2.5);
        let bell = BellState::new(f.clone(), f.clone()).unwrap();
        let circuit = EcCircuit::new(bell, Tolerances::default());
        let st = pauli_eigenstate(PauliLabel::PlusI, &f).unwrap();
        let rho = DensityMatrix::from_pure(&st.embedded());
        let records = circuit.enumerate_outcomes(&rho).unwrap();
        let total: f64 = records.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-8, "total = {total}");
        // odd totals carry nothing
        let odd: f64 = records
            .iter()
            .filter(|r| (r.n1 + r.n2) % 2 == 1)
            .map(|r| r.probability.abs())
            .sum();
        assert!(odd < 1e-12, "odd mass {odd:e}");
        // mass concentrates near (a^2, a^2) and the axes near 2 a^2
        let p_diag: f64 = records
            .iter()
            .filter(|r| r.n1.abs_diff(6) <= 3 && r.n2.abs_diff(6) <= 3)
            .map(|r| r.probability)
            .sum();
        let p_axis: f64 = records
            .iter()
            .filter(|r| {
                (r.n1 == 0 && r.n2.abs_diff(12) <= 6) || (r.n2 == 0 && r.n1.abs_diff(12) <= 6)
            })
            .map(|r| r.probability)
            .sum();
        assert!(p_diag > 0.3, "diagonal cluster mass {p_diag}");
        assert!(p_axis > 0.3, "axis cluster mass {p_axis}");
    }

    #[test]
    fn parity_sorting_of_mixed_input() {
        let f = frame(2.0);
        let tol = Tolerances::default();
        let bell = BellState::new(f.clone(), f.clone()).unwrap();
        let circuit = EcCircuit::new(bell, tol);
        let even = DensityMatrix::from_pure(&f.embed(c(0.6, 0.0), c(0.8, 0.0)));
        let odd_v = annihilate(&f.embed(c(0.6, 0.0), c(0.8, 0.0))).normalized();
        let odd = DensityMatrix::from_pure(&odd_v);
        let p_even = 0.7;
        let mixed = even.scaled(p_even).add(&odd.scaled(1.0 - p_even)).unwrap();
        let records = circuit.enumerate_outcomes(&mixed).unwrap();
        let odd_mass: f64 = records
            .iter()
            .filter(|r| (r.n1 + r.n2) % 2 == 1)
            .map(|r| r.probability)
            .sum();
        assert!(
            (odd_mass - (1.0 - p_even)).abs() < 1e-8,
            "odd mass {odd_mass}"
        );
    }

    #[test]
    fn lossless_channel_preserves_logical_zero() {
        let alpha = 4.0;
        let f = frame(alpha);
        let tol = Tolerances::default();
        let rho = DensityMatrix::from_pure(f.zero_l());
        let out = ec_channel(&rho, alpha, alpha, &tol).unwrap();
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-8);
        let fid = fidelity(f.zero_l(), &out).unwrap();
        assert!(fid >= 1.0 - 1e-4, "fidelity {fid}");
    }

    #[test]
    fn single_loss_branch_is_restored() {
        let alpha = 4.0;
        let f = frame(alpha);
        let tol = Tolerances::default();
        let plus = pauli_eigenstate(PauliLabel::Plus, &f).unwrap().embedded();
        let lost = annihilate(&plus).normalized();
        let out = ec_channel(&DensityMatrix::from_pure(&lost), alpha, alpha, &tol).unwrap();
        let fid = fidelity(&plus, &out).unwrap();
        assert!(fid > 0.999, "restored fidelity {fid}");
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn engine_single_step_matches_literal_channel() {
        let alpha = 2.0;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let tol = Tolerances::default();
        let gamma = 0.1;
        let seg = LossSpec::from_fraction(gamma).unwrap();
        let engine = ChainEngine::new(alpha, seg, d, tol).unwrap();
        assert!(engine.outcome_count() > 100);
        assert!(engine.reference_completeness() >= 1.0 - 1e-10);
        let f = engine.frame_out().clone();
        let input = LogicalCoeffState::new(f.clone(), c(0.8, 0.1), c(0.35, -0.45)).unwrap();

        let run = engine.run(&input, 1).unwrap();
        let fast = run.final_density().unwrap();

        let abar = alpha * (1.0 - gamma).sqrt();
        let rho = DensityMatrix::from_pure(&input.embedded());
        let lost = apply_loss(&rho, gamma, &tol).unwrap();
        let corrected = ec_channel(&lost, alpha, abar, &tol).unwrap();
        let literal = apply_loss(&corrected, gamma, &tol).unwrap();

        // the two paths truncate their Kraus and outcome tails independently,
        // so agreement is expected at the tail-tolerance scale
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((fast.mat()[[i, j]] - literal.mat()[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-10, "fast/literal defect {worst:e}");
    }

    #[test]
    fn chain_identity_limit() {
        let alpha = 2.5;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let tol = Tolerances::default();
        let f = LogicalFrame::new(alpha, d).unwrap();
        let input = pauli_eigenstate(PauliLabel::PlusI, &f).unwrap();
        let plan = plan_segments(LossSpec::from_fraction(0.0).unwrap(), 0);
        let out = simulate_chain(&input, &plan, alpha, &tol).unwrap();
        let fid = fidelity(&input.embedded(), &out).unwrap();
        assert!(fid > 1.0 - 1e-12, "identity-chain fidelity {fid}");
    }

    #[test]
    fn postselection_n0_is_trivial() {
        let alpha = 2.0;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let tol = Tolerances::default();
        let f = LogicalFrame::new(alpha, d).unwrap();
        let input = pauli_eigenstate(PauliLabel::Zero, &f).unwrap();
        let plan = plan_segments(LossSpec::from_db(1.0).unwrap(), 0);
        let run = simulate_chain_tracked(&input, &plan, alpha, &tol).unwrap();
        let (cond, retained) = run.postselect_identity_frame().unwrap();
        let avg = run.final_density().unwrap();
        assert_abs_diff_eq!(retained, 1.0, epsilon = 1e-12);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((cond.mat()[[i, j]] - avg.mat()[[i, j]]).norm());
            }
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn chain_trace_is_preserved() {
        let alpha = 2.5;
        let d = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
        let tol = Tolerances::default();
        let f = LogicalFrame::new(alpha, d).unwrap();
        let input = pauli_eigenstate(PauliLabel::Minus, &f).unwrap();
        let plan = plan_segments(LossSpec::from_db(1.0).unwrap(), 5);
        let out = simulate_chain(&input, &plan, alpha, &tol).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-8, "trace {}", out.trace());
        assert!(out.min_eigenvalue() > -1e-9);
    }
}
