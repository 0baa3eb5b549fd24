//! Cat-code logical states, Pauli eigenstates, logical Bell resources and
//! coefficient-level Pauli maps.
//!
//! `|0_L>` is the even cat at `±alpha` and `|1_L>` the even cat at `±i alpha`.
//! The two are not orthogonal at finite amplitude, so every normalization here
//! is numerical and goes through the 2x2 Gram matrix; closed-form prefactors
//! are never trusted. Logical Z has no exact single-mode unitary within the
//! span, so Pauli corrections act on coefficients (classical frame tracking)
//! rather than as Fock-space gates.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{CatError, Result};
use crate::fock::{coherent, DensityMatrix, FockVector};

/// Exact powers of `i`.
pub(crate) fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Even cat at `±alpha`, normalized.
pub fn logical_zero(alpha: f64, cutoff: usize) -> Result<FockVector> {
    let plus = coherent(C64::new(alpha, 0.0), cutoff)?;
    let minus = coherent(C64::new(-alpha, 0.0), cutoff)?;
    Ok(plus.add(&minus)?.normalized())
}

/// Even cat at `±i alpha`, normalized. Built entry-wise from the `±alpha` cat
/// through the exact relation `one[n] = i^n zero[n]`, which keeps the odd
/// entries and the mod-4 cancellations bit-exact.
pub fn logical_one(alpha: f64, cutoff: usize) -> Result<FockVector> {
    Ok(one_from_zero(&logical_zero(alpha, cutoff)?))
}

fn one_from_zero(zero: &FockVector) -> FockVector {
    let amps = Array1::from_iter(zero.amps().iter().enumerate().map(|(n, a)| a * i_pow(n)));
    FockVector::from_amps(amps)
}

/// Logical frame at a fixed amplitude: embedded basis states plus their Gram
/// data.
#[derive(Debug, Clone)]
pub struct LogicalFrame {
    alpha: f64,
    zero: FockVector,
    one: FockVector,
    overlap: C64,
}

impl LogicalFrame {
    pub fn new(alpha: f64, cutoff: usize) -> Result<Self> {
        let zero = logical_zero(alpha, cutoff)?;
        let one = one_from_zero(&zero);
        let overlap = zero.inner(&one)?;
        Ok(LogicalFrame {
            alpha,
            zero,
            one,
            overlap,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff(&self) -> usize {
        self.zero.cutoff()
    }

    pub fn zero_l(&self) -> &FockVector {
        &self.zero
    }

    pub fn one_l(&self) -> &FockVector {
        &self.one
    }

    pub fn basis(&self, k: usize) -> &FockVector {
        if k == 0 {
            &self.zero
        } else {
            &self.one
        }
    }

    /// `<0_L|1_L>`; real and equal to `cos(alpha^2)/cosh(alpha^2)` up to
    /// truncation.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    /// Gram matrix `G[k][l] = <k_L|l_L>`, Hermitian with unit diagonal.
    pub fn gram(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(1.0, 0.0), self.overlap],
            [self.overlap.conj(), C64::new(1.0, 0.0)],
        ]
    }

    /// Embedded state `mu|0_L> + nu|1_L>`, unnormalized.
    pub fn embed(&self, mu: C64, nu: C64) -> FockVector {
        let amps = Array1::from_iter(
            self.zero
                .amps()
                .iter()
                .zip(self.one.amps().iter())
                .map(|(z, o)| mu * z + nu * o),
        );
        FockVector::from_amps(amps)
    }

    /// Norm^2 of the embedding of `(mu, nu)`.
    pub fn coeff_norm_sq(&self, mu: C64, nu: C64) -> f64 {
        let g = self.overlap;
        (mu.norm_sqr() + nu.norm_sqr() + 2.0 * (mu.conj() * nu * g).re).max(0.0)
    }

    /// Physical trace of the embedded block `sum_kl w[k][l] |k_L><l_L|`.
    pub fn gram_trace(&self, w: &LogicalBlock) -> f64 {
        let g = self.overlap;
        (w.0[0][0] + w.0[1][1] + w.0[0][1] * g.conj() + w.0[1][0] * g).re
    }

    /// Embeds a 2x2 coefficient block into the full Fock space.
    pub fn embed_block(&self, w: &LogicalBlock) -> DensityMatrix {
        let d = self.cutoff();
        let mut mat = Array2::zeros((d, d));
        for k in 0..2 {
            for l in 0..2 {
                let c = w.0[k][l];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let vk = self.basis(k);
                let vl = self.basis(l);
                for i in 0..d {
                    let a = c * vk.amp(i);
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        mat[[i, j]] += a * vl.amp(j).conj();
                    }
                }
            }
        }
        DensityMatrix::from_mat(mat)
    }
}

/// Pauli frame label tracked classically through the protocol. `XZ` denotes
/// the composition of an X and a Z correction (a Y up to phase).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Z,
    XZ,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ];

    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Z => 2,
            Pauli::XZ => 3,
        }
    }

    /// Group composition modulo phase (the Klein four-group).
    pub fn then(self, other: Pauli) -> Pauli {
        let x = (self == Pauli::X || self == Pauli::XZ) ^ (other == Pauli::X || other == Pauli::XZ);
        let z = (self == Pauli::Z || self == Pauli::XZ) ^ (other == Pauli::Z || other == Pauli::XZ);
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::XZ,
        }
    }

    /// Action on logical coefficients: X swaps, Z negates the `|1_L>`
    /// coefficient.
    pub fn apply_coeffs(self, mu: C64, nu: C64) -> (C64, C64) {
        match self {
            Pauli::I => (mu, nu),
            Pauli::X => (nu, mu),
            Pauli::Z => (mu, -nu),
            Pauli::XZ => (-nu, mu),
        }
    }

    /// Conjugation `P w P†` on a coefficient block.
    pub fn apply_block(self, w: &LogicalBlock) -> LogicalBlock {
        let m = w.0;
        match self {
            Pauli::I => *w,
            Pauli::X => LogicalBlock([[m[1][1], m[1][0]], [m[0][1], m[0][0]]]),
            Pauli::Z => LogicalBlock([[m[0][0], -m[0][1]], [-m[1][0], m[1][1]]]),
            Pauli::XZ => LogicalBlock([[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]]),
        }
    }
}

/// 2x2 coefficient block over the (generally non-orthogonal) logical basis:
/// the state `sum_kl w[k][l] |k_L><l_L|`, not necessarily normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalBlock(pub [[C64; 2]; 2]);

impl LogicalBlock {
    pub fn zero() -> Self {
        LogicalBlock([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn from_pure(mu: C64, nu: C64) -> Self {
        LogicalBlock([
            [mu * mu.conj(), mu * nu.conj()],
            [nu * mu.conj(), nu * nu.conj()],
        ])
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &LogicalBlock, s: f64) {
        for k in 0..2 {
            for l in 0..2 {
                self.0[k][l] += other.0[k][l] * s;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Pauli eigenstate labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLabel {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 6] = [
        PauliLabel::Zero,
        PauliLabel::One,
        PauliLabel::Plus,
        PauliLabel::Minus,
        PauliLabel::PlusI,
        PauliLabel::MinusI,
    ];

    /// Raw coefficient pair before Gram normalization.
    pub fn raw_coeffs(self) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        match self {
            PauliLabel::Zero => (one, C64::new(0.0, 0.0)),
            PauliLabel::One => (C64::new(0.0, 0.0), one),
            PauliLabel::Plus => (one, one),
            PauliLabel::Minus => (one, -one),
            PauliLabel::PlusI => (one, C64::new(0.0, 1.0)),
            PauliLabel::MinusI => (one, C64::new(0.0, -1.0)),
        }
    }

    pub fn parse(s: &str) -> Option<PauliLabel> {
        match s {
            "0" | "zero" => Some(PauliLabel::Zero),
            "1" | "one" => Some(PauliLabel::One),
            "+" | "plus" => Some(PauliLabel::Plus),
            "-" | "minus" => Some(PauliLabel::Minus),
            "+i" | "plus_i" => Some(PauliLabel::PlusI),
            "-i" | "minus_i" => Some(PauliLabel::MinusI),
            _ => None,
        }
    }
}

/// Logical state `mu|0_L> + nu|1_L>` with coefficients normalized against the
/// frame's Gram matrix, so the embedding has unit norm.
#[derive(Debug, Clone)]
pub struct LogicalCoeffState {
    pub frame: LogicalFrame,
    pub mu: C64,
    pub nu: C64,
}

impl LogicalCoeffState {
    pub fn new(frame: LogicalFrame, mu: C64, nu: C64) -> Result<Self> {
        let n2 = frame.coeff_norm_sq(mu, nu);
        if n2 <= 0.0 {
            return Err(CatError::InvalidParameter(
                "logical coefficients embed to the zero vector".into(),
            ));
        }
        let s = C64::new(1.0 / n2.sqrt(), 0.0);
        Ok(LogicalCoeffState {
            frame,
            mu: mu * s,
            nu: nu * s,
        })
    }

    pub fn embedded(&self) -> FockVector {
        self.frame.embed(self.mu, self.nu)
    }

    pub fn block(&self) -> LogicalBlock {
        LogicalBlock::from_pure(self.mu, self.nu)
    }
}

/// Pauli eigenstate in a given frame; the coefficient pairs are
/// `(1,0), (0,1), (1,±1), (1,±i)` normalized numerically via the Gram matrix.
pub fn pauli_eigenstate(label: PauliLabel, frame: &LogicalFrame) -> Result<LogicalCoeffState> {
    let (mu, nu) = label.raw_coeffs();
    LogicalCoeffState::new(frame.clone(), mu, nu)
}

/// Coefficient-level Pauli applied to a logical state, renormalized in the
/// frame.
pub fn apply_logical_pauli(state: &LogicalCoeffState, p: Pauli) -> Result<LogicalCoeffState> {
    let (mu, nu) = p.apply_coeffs(state.mu, state.nu);
    LogicalCoeffState::new(state.frame.clone(), mu, nu)
}

/// Dense two-mode state with `cutoff` levels per mode, flattened so that
/// `amps[na * cutoff + nb]` is the amplitude of `|na>|nb>`.
#[derive(Debug, Clone)]
pub struct TwoModeVector {
    amps: Array1<C64>,
    cutoff: usize,
}

impl TwoModeVector {
    pub fn zeros(cutoff: usize) -> Self {
        TwoModeVector {
            amps: Array1::zeros(cutoff * cutoff),
            cutoff,
        }
    }

    pub fn from_amps(amps: Array1<C64>, cutoff: usize) -> Self {
        assert_eq!(amps.len(), cutoff * cutoff);
        TwoModeVector { amps, cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn amp(&self, na: usize, nb: usize) -> C64 {
        self.amps[na * self.cutoff + nb]
    }

    /// Adds `coeff * |va>|vb>`.
    pub fn add_product(&mut self, coeff: C64, va: &FockVector, vb: &FockVector) {
        let d = self.cutoff;
        for na in 0..d {
            let a = coeff * va.amp(na);
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for nb in 0..d {
                self.amps[na * d + nb] += a * vb.amp(nb);
            }
        }
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.cutoff != other.cutoff {
            return Err(CatError::DimensionMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        TwoModeVector {
            amps: self.amps.mapv(|a| a / n),
            cutoff: self.cutoff,
        }
    }

    /// `|<self|other>|^2` for normalized inputs.
    pub fn fidelity_with(&self, other: &Self) -> Result<f64> {
        let ip = self.normalized().inner(&other.normalized())?;
        Ok(ip.norm_sqr().clamp(0.0, 1.0))
    }

    /// Photon-number parity expectation of one mode (0 or 1), tracing the
    /// other out.
    pub fn mode_parity(&self, mode: usize) -> f64 {
        let d = self.cutoff;
        let mut p = 0.0;
        for na in 0..d {
            for nb in 0..d {
                let w = self.amps[na * d + nb].norm_sqr();
                let n = if mode == 0 { na } else { nb };
                p += if n % 2 == 0 { w } else { -w };
            }
        }
        p / self.norm().powi(2)
    }
}

/// Logical Bell resource `|0bar_L>|0_L> + |1bar_L>|1_L>`, numerically
/// normalized. The `in` frame carries the reduced amplitude matched to the
/// input after loss; the `out` frame carries the restored amplitude.
#[derive(Debug, Clone)]
pub struct BellState {
    frame_in: LogicalFrame,
    frame_out: LogicalFrame,
    norm: f64,
}

impl BellState {
    pub fn new(frame_in: LogicalFrame, frame_out: LogicalFrame) -> Result<Self> {
        if frame_in.cutoff() != frame_out.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: frame_in.cutoff(),
                right: frame_out.cutoff(),
            });
        }
        if frame_in.alpha() > frame_out.alpha() {
            return Err(CatError::InvalidParameter(format!(
                "bell input amplitude {} exceeds output amplitude {}",
                frame_in.alpha(),
                frame_out.alpha()
            )));
        }
        let norm_sq = 2.0 + 2.0 * (frame_in.overlap() * frame_out.overlap()).re;
        Ok(BellState {
            frame_in,
            frame_out,
            norm: norm_sq.sqrt(),
        })
    }

    pub fn frame_in(&self) -> &LogicalFrame {
        &self.frame_in
    }

    pub fn frame_out(&self) -> &LogicalFrame {
        &self.frame_out
    }

    pub fn cutoff(&self) -> usize {
        self.frame_in.cutoff()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Component of the mode mixed with the input that is paired with output
    /// label `k`, including the overall Bell normalization.
    pub fn input_component(&self, k: usize) -> FockVector {
        self.frame_in
            .basis(k)
            .scaled(C64::new(1.0 / self.norm, 0.0))
    }

    /// Dense two-mode vector with the input-side mode first.
    pub fn two_mode_vector(&self) -> TwoModeVector {
        let mut v = TwoModeVector::zeros(self.cutoff());
        let c = C64::new(1.0 / self.norm, 0.0);
        v.add_product(c, self.frame_in.basis(0), self.frame_out.basis(0));
        v.add_product(c, self.frame_in.basis(1), self.frame_out.basis(1));
        v
    }
}

/// Bell resource from amplitudes, sharing one cutoff.
pub fn bell_state(alpha_in: f64, alpha_out: f64, cutoff: usize) -> Result<BellState> {
    BellState::new(
        LogicalFrame::new(alpha_in, cutoff)?,
        LogicalFrame::new(alpha_out, cutoff)?,
    )
}
