//! Numerical toolkit for teleportation-based cat-code error correction in
//! lossy bosonic channels.
//!
//! The library simulates a single-mode bosonic qubit encoded in two-component
//! cat states, the teleportation circuit that detects and corrects
//! single-photon losses (a 50:50 beamsplitter, a logical Bell resource and two
//! photon-number-resolving detectors), and the pure-loss channel in Kraus
//! form. Error probabilities are measured with the Helstrom bound averaged
//! over the logical Pauli pairs.
//!
//! Modules:
//! - [`fock`]: truncated Fock-space primitives and the beamsplitter in the
//!   number basis.
//! - [`cat`]: cat-code logical states, Pauli eigenstates and Bell resources.
//! - [`loss`]: the pure-loss channel, dB conversions and channel segmentation.
//! - [`teleport`]: the error-correction circuit, outcome enumeration, Pauli
//!   frame tracking and repeated-correction chains.
//! - [`metrics`]: trace-norm distinguishability, averaged error probability,
//!   fidelity and Wigner grids.
//! - [`oracle`]: closed-form outcome amplitudes used to cross-check the
//!   numerics.
//! - [`cavity`]: cavity-QED reflection model for conditional Bell-state
//!   generation.
//!
//! A segmented lossy channel with corrections in between:
//!
//! ```
//! use catlab_core::cat::{pauli_eigenstate, PauliLabel};
//! use catlab_core::fock::choose_cutoff;
//! use catlab_core::loss::{plan_segments, LossSpec};
//! use catlab_core::metrics::avg_perr;
//! use catlab_core::teleport::ChainEngine;
//! use catlab_core::Tolerances;
//!
//! # fn main() -> catlab_core::Result<()> {
//! let alpha = 2.0;
//! let cutoff = choose_cutoff(std::f64::consts::SQRT_2 * alpha);
//! let plan = plan_segments(LossSpec::from_db(0.5)?, 4);
//! let engine = ChainEngine::new(alpha, plan.segment, cutoff, Tolerances::default())?;
//! let frame = engine.frame_out().clone();
//! let report = avg_perr(|label| {
//!     let input = pauli_eigenstate(label, &frame)?;
//!     engine.run(&input, plan.steps)?.final_density()
//! })?;
//! assert!(report.p_avg() < 0.5);
//! # Ok(())
//! # }
//! ```

pub mod cat;
pub mod cavity;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod oracle;
pub mod teleport;

pub use cat::{
    apply_logical_pauli, bell_state, logical_one, logical_zero, pauli_eigenstate, BellState,
    LogicalBlock, LogicalCoeffState, LogicalFrame, Pauli, PauliLabel, TwoModeVector,
};
pub use cavity::{
    bell_from_cavity, bell_from_cavity_with_pair, reflect_cat, reflection, AtomSuperposition,
    CavityParams, CoherentSum, FieldAtomState, ReflectionMode, ReflectionPair,
};
pub use error::{CatError, Result};
pub use fock::{
    annihilate, bs_fock_element, bs_output_coherent, choose_cutoff, choose_cutoff_with, coherent,
    rotate, BsTable, CutoffRule, DensityMatrix, FockVector, ModeOperator,
};
pub use loss::{
    apply_loss, db_to_fraction, fraction_to_db, kraus, loss_branches, plan_segments, LossSpec,
    SegmentPlan,
};
pub use metrics::{
    avg_perr, fidelity, helstrom_perr, trace_norm, wigner, PerrReport, WignerGrid, WignerGridSpec,
};
pub use teleport::{
    correction_rule, ec_channel, simulate_chain, simulate_chain_tracked, ChainEngine, ChainRun,
    ConditionalMap, CorrectionRule, EcCircuit, OutcomeRecord,
};

/// Numerical tolerances shared across the pipeline.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Allowed deviation of state norms from 1 after a normalization step.
    pub norm_tol: f64,
    /// Allowed weight in the top two Fock bins of a physical state.
    pub leak_tol: f64,
    /// Allowed Hermiticity defect of density matrices.
    pub herm_tol: f64,
    /// Allowed negative eigenvalue magnitude of density matrices.
    pub psd_tol: f64,
    /// Allowed trace deviation of normalized density matrices.
    pub trace_tol: f64,
    /// Allowed defect in enumerated outcome-probability completeness.
    pub prob_tol: f64,
    /// Residual weight at which the Kraus series is truncated.
    pub kraus_tail: f64,
    /// Residual probability at which outcome enumeration stops.
    pub enumeration_tail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm_tol: 1e-10,
            leak_tol: 1e-12,
            herm_tol: 1e-10,
            psd_tol: 1e-9,
            trace_tol: 1e-10,
            prob_tol: 1e-8,
            kraus_tail: 1e-12,
            enumeration_tail: 1e-10,
        }
    }
}
