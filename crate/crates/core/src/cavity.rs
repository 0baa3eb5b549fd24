//! Cavity-QED resource factory: atom-state-dependent reflection coefficients
//! and two-pass conditional generation of the logical Bell state.
//!
//! A coherent pulse reflecting off the atom-cavity system picks up a phase
//! that depends on the atomic state. Reflecting both halves of a cat-state
//! pair off the same detuned cavity and projecting the atom onto `|+>`
//! produces the two-mode Bell resource consumed by the teleportation circuit.
//! Non-unit reflection moduli are handled as explicit amplitude scaling; the
//! which-path decoherence accompanying real reflection loss is NOT modeled,
//! so that regime is flagged as an approximation instead of silently trusted.

use num_complex::Complex64 as C64;

use crate::cat::TwoModeVector;
use crate::error::{CatError, Result};
use crate::fock::coherent;

/// Unit-modulus tolerance for the ideal-reflection mode.
pub const IDEAL_TOL: f64 = 1e-3;

/// Rates of the atom-cavity system, all in one arbitrary frequency unit.
/// `gamma_at` is the atomic spontaneous decay rate (named apart from the
/// segment loss fraction).
#[derive(Debug, Clone, Copy)]
pub struct CavityParams {
    /// Coupling rate between the input free-space mode and the cavity.
    pub kappa_r: f64,
    /// Total cavity decay rate.
    pub kappa: f64,
    /// Detuning between the input field and the cavity.
    pub delta: f64,
    /// Spontaneous decay rate of the excited atomic state.
    pub gamma_at: f64,
    /// Atom-cavity coupling strength.
    pub g: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 {
            return Err(CatError::InvalidParameter("kappa must be positive".into()));
        }
        if self.kappa_r < 0.0 || self.gamma_at < 0.0 || self.g < 0.0 {
            return Err(CatError::InvalidParameter(
                "cavity rates must be non-negative".into(),
            ));
        }
        if self.kappa_r > self.kappa {
            return Err(CatError::InvalidParameter(format!(
                "kappa_r = {} exceeds kappa = {}",
                self.kappa_r, self.kappa
            )));
        }
        Ok(())
    }
}

/// Reflection coefficients for the two atomic ground states.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionPair {
    pub r_up: C64,
    pub r_down: C64,
}

impl ReflectionPair {
    /// `arg(r_down / r_up)`.
    pub fn phase_difference(&self) -> f64 {
        (self.r_down / self.r_up).arg()
    }

    pub fn max_modulus_error(&self) -> f64 {
        (self.r_up.norm() - 1.0)
            .abs()
            .max((self.r_down.norm() - 1.0).abs())
    }

    /// Unit-modulus version keeping only the phases.
    pub fn phases_only(&self) -> ReflectionPair {
        ReflectionPair {
            r_up: self.r_up / self.r_up.norm(),
            r_down: self.r_down / self.r_down.norm(),
        }
    }
}

/// Reflection coefficients
/// `r_up = 1 - 2 kr (i d + g_at) / ((i d + k)(i d + g_at) + g^2)` and
/// `r_down = 1 - 2 kr / (i d + k)`.
pub fn reflection(p: &CavityParams) -> Result<ReflectionPair> {
    p.validate()?;
    let id = C64::new(0.0, p.delta);
    let r_up = 1.0
        - 2.0 * p.kappa_r * (id + p.gamma_at) / ((id + p.kappa) * (id + p.gamma_at) + p.g * p.g);
    let r_down = 1.0 - 2.0 * p.kappa_r / (id + p.kappa);
    Ok(ReflectionPair { r_up, r_down })
}

/// Superposition of coherent components `sum_k coeff_k |amplitude_k>`.
#[derive(Debug, Clone)]
pub struct CoherentSum {
    pub terms: Vec<(C64, C64)>,
}

/// `<b1|b2> = e^{i Im(b1* b2)} e^{-|b1-b2|^2 / 2}`.
pub fn coherent_overlap(b1: C64, b2: C64) -> C64 {
    (b1.conj() * b2 - 0.5 * b1.norm_sqr() - 0.5 * b2.norm_sqr()).exp()
}

impl CoherentSum {
    /// Even cat `|alpha> + |-alpha>`, normalized.
    pub fn cat(alpha: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        CoherentSum {
            terms: vec![(one, alpha), (one, -alpha)],
        }
        .normalized()
    }

    pub fn norm_sq(&self) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (ci, bi) in &self.terms {
            for (cj, bj) in &self.terms {
                acc += ci.conj() * cj * coherent_overlap(*bi, *bj);
            }
        }
        acc.re.max(0.0)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        CoherentSum {
            terms: self.terms.iter().map(|(c, b)| (c / n, *b)).collect(),
        }
    }

    /// Component-wise amplitude map `|b> -> |r b>`.
    pub fn scale_amplitudes(&self, r: C64) -> Self {
        CoherentSum {
            terms: self.terms.iter().map(|(c, b)| (*c, r * b)).collect(),
        }
    }

    pub fn scale_coeffs(&self, s: C64) -> Self {
        CoherentSum {
            terms: self.terms.iter().map(|(c, b)| (c * s, *b)).collect(),
        }
    }

    pub fn embed(&self, cutoff: usize) -> Result<crate::fock::FockVector> {
        let mut v = crate::fock::FockVector::zeros(cutoff);
        for (c, b) in &self.terms {
            v = v.add(&coherent(*b, cutoff)?.scaled(*c))?;
        }
        Ok(v)
    }
}

/// Atom superposition `c_up |up> + c_down |down>`.
#[derive(Debug, Clone, Copy)]
pub struct AtomSuperposition {
    pub c_up: C64,
    pub c_down: C64,
}

impl AtomSuperposition {
    pub fn plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        AtomSuperposition { c_up: h, c_down: h }
    }

    pub fn up() -> Self {
        AtomSuperposition {
            c_up: C64::new(1.0, 0.0),
            c_down: C64::new(0.0, 0.0),
        }
    }
}

/// How to treat reflection coefficients away from unit modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionMode {
    /// Error out when a modulus differs from 1 by more than [`IDEAL_TOL`].
    IdealOnly,
    /// Scale coherent amplitudes by the non-unit modulus and flag the result
    /// as approximate (environment entanglement is not modeled).
    AllowAmplitudeScaling,
}

/// Field-atom state after one reflection: one coherent sum per atom branch.
#[derive(Debug, Clone)]
pub struct FieldAtomState {
    pub up: CoherentSum,
    pub down: CoherentSum,
    /// True when a non-unit modulus was scaled in.
    pub approximate: bool,
}

impl FieldAtomState {
    pub fn norm_sq(&self) -> f64 {
        self.up.norm_sq() + self.down.norm_sq()
    }
}

/// Reflects a coherent-component field off the cavity: the branch tagged by
/// atom state `s` has every amplitude scaled by `r_s`.
pub fn reflect_cat(
    field: &CoherentSum,
    atom: &AtomSuperposition,
    pair: &ReflectionPair,
    mode: ReflectionMode,
) -> Result<FieldAtomState> {
    let modulus_error = pair.max_modulus_error();
    let approximate = modulus_error > IDEAL_TOL;
    if approximate && mode == ReflectionMode::IdealOnly {
        return Err(CatError::NonIdealReflection {
            modulus: 1.0 + modulus_error,
            tol: IDEAL_TOL,
        });
    }
    Ok(FieldAtomState {
        up: field.scale_amplitudes(pair.r_up).scale_coeffs(atom.c_up),
        down: field
            .scale_amplitudes(pair.r_down)
            .scale_coeffs(atom.c_down),
        approximate,
    })
}

/// Two-pass Bell-state generation: both modes start as even cats at `alpha`,
/// reflect in turn off the same detuned cavity with the atom prepared in
/// `|+>`, and the atom is finally projected onto `|+>`. Returns the
/// conditioned two-mode state (embedded at `cutoff` levels per mode) and
/// the success probability of the atom measurement.
pub fn bell_from_cavity_with_pair(
    alpha: f64,
    pair: &ReflectionPair,
    cutoff: usize,
    mode: ReflectionMode,
) -> Result<(TwoModeVector, f64)> {
    let cat = CoherentSum::cat(C64::new(alpha, 0.0));
    let atom = AtomSuperposition::plus();
    // mode 1 reflection entangles the field with the atom
    let pass1 = reflect_cat(&cat, &atom, pair, mode)?;
    // mode 2 reflects off the same cavity within each atom branch
    let up2 = cat.scale_amplitudes(pair.r_up);
    let down2 = cat.scale_amplitudes(pair.r_down);
    // project the atom onto |+>: (up-branch + down-branch) / sqrt(2)
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut branches: Vec<(C64, C64, C64)> = Vec::new();
    for (branch1, branch2) in [(&pass1.up, &up2), (&pass1.down, &down2)] {
        for (c1, b1) in &branch1.terms {
            for (c2, b2) in &branch2.terms {
                branches.push((c1 * c2 * h, *b1, *b2));
            }
        }
    }
    let mut success = C64::new(0.0, 0.0);
    for (ci, b1i, b2i) in &branches {
        for (cj, b1j, b2j) in &branches {
            success += ci.conj() * cj * coherent_overlap(*b1i, *b1j) * coherent_overlap(*b2i, *b2j);
        }
    }
    let mut out = TwoModeVector::zeros(cutoff);
    for (c, b1, b2) in &branches {
        out.add_product(*c, &coherent(*b1, cutoff)?, &coherent(*b2, cutoff)?);
    }
    Ok((out, success.re.max(0.0)))
}

/// Bell generation with coefficients evaluated from the cavity parameters.
pub fn bell_from_cavity(
    alpha: f64,
    params: &CavityParams,
    cutoff: usize,
    mode: ReflectionMode,
) -> Result<(TwoModeVector, f64)> {
    let pair = reflection(params)?;
    bell_from_cavity_with_pair(alpha, &pair, cutoff, mode)
}
