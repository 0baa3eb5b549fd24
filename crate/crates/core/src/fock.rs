//! Truncated-Fock-space primitives: state construction, ladder operators,
//! rotations, and the 50:50 beamsplitter in the photon-number basis.
//!
//! The beamsplitter convention is fixed so that coherent states transform as
//! `|b1>|b2> -> |(b1+b2)/sqrt(2)> |(-b1+b2)/sqrt(2)>`, i.e. the creation
//! operators map as `a1+ -> (a1+ - a2+)/sqrt(2)`, `a2+ -> (a1+ + a2+)/sqrt(2)`.
//! With this convention every number-basis matrix element is real and the
//! unitary is block diagonal in the total photon number.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::{Array1, Array2};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_traits::ToPrimitive;

use crate::error::{CatError, Result};

const DEFAULT_LEAK_TOL: f64 = 1e-12;

/// Single bosonic mode in the number basis, amplitudes indexed by photon
/// number `0..cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Array1<C64>,
}

impl FockVector {
    pub fn zeros(cutoff: usize) -> Self {
        FockVector {
            amps: Array1::zeros(cutoff),
        }
    }

    pub fn from_amps(amps: Array1<C64>) -> Self {
        FockVector { amps }
    }

    /// Number state `|n>`.
    pub fn basis(n: usize, cutoff: usize) -> Self {
        let mut amps = Array1::zeros(cutoff);
        amps[n] = C64::new(1.0, 0.0);
        FockVector { amps }
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn amp(&self, n: usize) -> C64 {
        self.amps[n]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.cutoff() != other.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, s: C64) -> Self {
        FockVector {
            amps: self.amps.mapv(|a| a * s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.cutoff() != other.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(FockVector {
            amps: &self.amps + &other.amps,
        })
    }

    /// Weight in the top two Fock bins, the truncation-leakage witness.
    pub fn leakage(&self) -> f64 {
        let d = self.cutoff();
        if d < 2 {
            return self.norm_sq();
        }
        self.amps[d - 1].norm_sqr() + self.amps[d - 2].norm_sqr()
    }
}

/// Dense single-mode operator.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    mat: Array2<C64>,
}

impl ModeOperator {
    pub fn from_mat(mat: Array2<C64>) -> Self {
        ModeOperator { mat }
    }

    pub fn identity(cutoff: usize) -> Self {
        ModeOperator {
            mat: Array2::eye(cutoff),
        }
    }

    /// Annihilation operator, `a|n> = sqrt(n)|n-1>`.
    pub fn annihilation(cutoff: usize) -> Self {
        let mut mat = Array2::zeros((cutoff, cutoff));
        for n in 1..cutoff {
            mat[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        ModeOperator { mat }
    }

    /// Photon-number operator.
    pub fn number(cutoff: usize) -> Self {
        let mut mat = Array2::zeros((cutoff, cutoff));
        for n in 0..cutoff {
            mat[[n, n]] = C64::new(n as f64, 0.0);
        }
        ModeOperator { mat }
    }

    /// Phase-space rotation, diagonal with entries `e^{i theta n}`.
    pub fn rotation(theta: f64, cutoff: usize) -> Self {
        let mut mat = Array2::zeros((cutoff, cutoff));
        for n in 0..cutoff {
            mat[[n, n]] = C64::from_polar(1.0, theta * n as f64);
        }
        ModeOperator { mat }
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn cutoff(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dagger(&self) -> Self {
        ModeOperator {
            mat: self.mat.t().mapv(|a| a.conj()),
        }
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if self.cutoff() != v.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: self.cutoff(),
                right: v.cutoff(),
            });
        }
        Ok(FockVector {
            amps: self.mat.dot(v.amps()),
        })
    }
}

/// Density operator on the truncated mode.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    pub fn from_mat(mat: Array2<C64>) -> Self {
        DensityMatrix { mat }
    }

    pub fn from_pure(v: &FockVector) -> Self {
        let d = v.cutoff();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[[i, j]] = v.amp(i) * v.amp(j).conj();
            }
        }
        DensityMatrix { mat }
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn cutoff(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.diag().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.cutoff();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        err
    }

    pub fn hermitized(&self) -> Self {
        let d = self.cutoff();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[[i, j]] = 0.5 * (self.mat[[i, j]] + self.mat[[j, i]].conj());
            }
        }
        DensityMatrix { mat }
    }

    pub fn scaled(&self, s: f64) -> Self {
        DensityMatrix {
            mat: self.mat.mapv(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.cutoff() != other.cutoff() {
            return Err(CatError::DimensionMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(DensityMatrix {
            mat: &self.mat + &other.mat,
        })
    }

    /// Checks Hermiticity and trace against `herm_tol`/`trace_tol`; positivity
    /// is checked separately through [`Self::min_eigenvalue`].
    pub fn validate(&self, tol: &crate::Tolerances) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol.herm_tol {
            return Err(CatError::InvalidParameter(format!(
                "density matrix hermiticity defect {herm:.3e} exceeds {:.3e}",
                tol.herm_tol
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol.trace_tol {
            return Err(CatError::InvalidParameter(format!(
                "density matrix trace {tr} deviates from 1 beyond {:.3e}",
                tol.trace_tol
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = crate::linalg::hermitian_eigenvalues(&self.hermitized().mat);
        eig.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Safety margins of the cutoff rule `D = ceil(b^2 + linear*b + constant)`.
#[derive(Debug, Clone, Copy)]
pub struct CutoffRule {
    pub linear: f64,
    pub constant: f64,
}

impl Default for CutoffRule {
    fn default() -> Self {
        CutoffRule {
            linear: 6.0,
            constant: 20.0,
        }
    }
}

/// Cutoff for the largest coherent amplitude appearing in a pipeline. The
/// default margins keep the truncated tail of any coherent component with
/// `|beta| <= beta_max` below 1e-12, including the `sqrt(2) alpha` branches
/// behind the beamsplitter when called with `beta_max = sqrt(2) alpha`.
pub fn choose_cutoff(beta_max: f64) -> usize {
    choose_cutoff_with(beta_max, CutoffRule::default())
}

pub fn choose_cutoff_with(beta_max: f64, rule: CutoffRule) -> usize {
    let b = beta_max.max(0.0);
    (b * b + rule.linear * b + rule.constant).ceil() as usize
}

/// Coherent state `|beta>` with raw amplitudes `e^{-|beta|^2/2} beta^n / sqrt(n!)`.
///
/// Fails when the truncation leakage exceeds 1e-12; the vector is not
/// renormalized, so its norm is 1 up to the truncated tail.
pub fn coherent(beta: C64, cutoff: usize) -> Result<FockVector> {
    let mut amps = Array1::zeros(cutoff);
    let mut a = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        amps[n] = a;
        a *= beta / ((n + 1) as f64).sqrt();
    }
    let v = FockVector { amps };
    let leak = v.leakage();
    if leak >= DEFAULT_LEAK_TOL {
        return Err(CatError::CutoffTooSmall {
            cutoff,
            leakage: leak,
            tol: DEFAULT_LEAK_TOL,
        });
    }
    Ok(v)
}

/// Lowering by one photon: `out[n] = sqrt(n+1) v[n+1]`, unnormalized.
pub fn annihilate(v: &FockVector) -> FockVector {
    let d = v.cutoff();
    let mut amps = Array1::zeros(d);
    for n in 0..d - 1 {
        amps[n] = ((n + 1) as f64).sqrt() * v.amp(n + 1);
    }
    FockVector { amps }
}

/// Phase-space rotation `out[n] = e^{i theta n} v[n]`.
pub fn rotate(v: &FockVector, theta: f64) -> FockVector {
    let amps = Array1::from_iter(
        v.amps()
            .iter()
            .enumerate()
            .map(|(n, a)| a * C64::from_polar(1.0, theta * n as f64)),
    );
    FockVector { amps }
}

/// Coherent-state action of the 50:50 beamsplitter.
pub fn bs_output_coherent(beta1: C64, beta2: C64) -> (C64, C64) {
    (
        (beta1 + beta2) * FRAC_1_SQRT_2,
        (-beta1 + beta2) * FRAC_1_SQRT_2,
    )
}

/// Number-basis matrix element `<n1, n2| U_BS |n, m>`.
///
/// Zero exactly unless `n1 + n2 = n + m`; within a total-photon-number block
/// the elements are taken from the process-global [`BsTable`].
pub fn bs_fock_element(n1: usize, n2: usize, n: usize, m: usize) -> f64 {
    if n1 + n2 != n + m {
        return 0.0;
    }
    let t = n1 + n2;
    bs_table().block(t)[[n1, n]]
}

/// Process-global beamsplitter table.
pub fn bs_table() -> &'static BsTable {
    static TABLE: OnceLock<BsTable> = OnceLock::new();
    TABLE.get_or_init(BsTable::new)
}

/// Lazily grown cache of beamsplitter blocks per total photon number.
///
/// Block `t` is the `(t+1) x (t+1)` real orthogonal matrix with entries
/// `block[[n1, n]] = <n1, t-n1| U_BS |n, t-n>`. Elements are produced from the
/// exact integer expansion of `(z1 - z2)^n (z1 + z2)^m`, so each entry carries
/// full relative precision even deep in the combinatorial tails.
pub struct BsTable {
    inner: RwLock<BsInner>,
}

struct BsInner {
    blocks: Vec<Arc<Array2<f64>>>,
    /// Integer coefficients of the last block, row-major `[n1 * (t+1) + n]`.
    last_ints: Vec<BigInt>,
}

impl Default for BsTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BsTable {
    pub fn new() -> Self {
        let mut block0 = Array2::zeros((1, 1));
        block0[[0, 0]] = 1.0;
        BsTable {
            inner: RwLock::new(BsInner {
                blocks: vec![Arc::new(block0)],
                last_ints: vec![BigInt::from(1)],
            }),
        }
    }

    /// Block for total photon number `t`, growing the table as needed.
    pub fn block(&self, t: usize) -> Arc<Array2<f64>> {
        {
            let inner = self.inner.read().unwrap();
            if t < inner.blocks.len() {
                return Arc::clone(&inner.blocks[t]);
            }
        }
        let mut inner = self.inner.write().unwrap();
        while inner.blocks.len() <= t {
            grow_one(&mut inner);
        }
        Arc::clone(&inner.blocks[t])
    }

    pub fn max_total(&self) -> usize {
        self.inner.read().unwrap().blocks.len() - 1
    }
}

/// Extends the table by one block using the two-term integer recurrences
/// `S_t(n1; 0) = S_{t-1}(n1-1; 0) + S_{t-1}(n1; 0)` and
/// `S_t(n1; n) = S_{t-1}(n1-1; n-1) - S_{t-1}(n1; n-1)`.
fn grow_one(inner: &mut BsInner) {
    let t = inner.blocks.len();
    let w_prev = t; // row width of block t-1
    let w = t + 1;
    let prev = &inner.last_ints;
    let zero = BigInt::from(0);
    let at = |n1: isize, n: usize| -> &BigInt {
        if n1 < 0 || n1 as usize >= w_prev {
            &zero
        } else {
            &prev[n1 as usize * w_prev + n]
        }
    };
    let mut ints = vec![BigInt::from(0); w * w];
    for n1 in 0..w {
        ints[n1 * w] = at(n1 as isize - 1, 0) + at(n1 as isize, 0);
        for n in 1..w {
            ints[n1 * w + n] = at(n1 as isize - 1, n - 1) - at(n1 as isize, n - 1);
        }
    }

    // block[[n1, n]] = S * sqrt(n1! n2! / (n! m! 2^t)), all factors exact or
    // accumulated multiplicatively.
    let two_pow = if t % 2 == 0 {
        2f64.powi(-(t as i32) / 2)
    } else {
        2f64.powi(-(t as i32 - 1) / 2) * FRAC_1_SQRT_2
    };
    let mut block = Array2::zeros((w, w));
    let mut binom = 1f64; // C(t, n1)
    for n1 in 0..w {
        let mut r = 1.0 / binom.sqrt(); // sqrt(n1! n2! / (t! 0!)) at n = 0
        for n in 0..w {
            if n > 0 {
                r *= ((t - n + 1) as f64 / n as f64).sqrt();
            }
            let s = ints[n1 * w + n].to_f64().expect("BigInt to f64");
            block[[n1, n]] = s * r * two_pow;
        }
        binom *= (t - n1) as f64 / (n1 + 1) as f64;
    }

    inner.blocks.push(Arc::new(block));
    inner.last_ints = ints;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn coherent_vacuum() {
        let v = coherent(c(0.0, 0.0), 20).unwrap();
        assert_eq!(v.amp(0), c(1.0, 0.0));
        for n in 1..20 {
            assert_eq!(v.amp(n), c(0.0, 0.0));
        }
    }

    #[test]
    fn coherent_overlap_closed_form() {
        // <b1|b2> = e^{i Im(b1* b2)} e^{-|b1-b2|^2/2}
        let cases = [
            (c(1.2, 0.3), c(0.7, -0.5)),
            (c(2.0, 0.0), c(0.0, 2.0)),
            (c(-1.5, 0.8), c(0.9, 1.1)),
        ];
        let d = choose_cutoff(3.0);
        for (b1, b2) in cases {
            let v1 = coherent(b1, d).unwrap();
            let v2 = coherent(b2, d).unwrap();
            let num = v1.inner(&v2).unwrap();
            let expect =
                C64::from_polar(1.0, (b1.conj() * b2).im) * (-(b1 - b2).norm_sqr() / 2.0).exp();
            assert!(
                (num - expect).norm() < 1e-12,
                "overlap mismatch: {num} vs {expect}"
            );
        }
    }

    #[test]
    fn coherent_poisson_weight() {
        // |amps[4]|^2 equals the Poisson(4) mass at n = 4 for beta = 2.
        let d = choose_cutoff(2.0);
        let v = coherent(c(2.0, 0.0), d).unwrap();
        let lambda: f64 = 4.0;
        let pmf4 = (-lambda).exp() * lambda.powi(4) / 24.0;
        assert_abs_diff_eq!(v.amp(4).norm_sqr(), pmf4, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_rule_values() {
        assert_eq!(choose_cutoff(0.0), 20);
        assert_eq!(choose_cutoff(std::f64::consts::SQRT_2 * 4.0), 86);
    }

    #[test]
    fn cutoff_rule_leakage_margin() {
        // Independent Poisson tail bound at beta = 2.5 sqrt(2).
        let b: f64 = 2.5 * std::f64::consts::SQRT_2;
        let d = choose_cutoff(b);
        let v = coherent(c(b, 0.0), d).unwrap();
        assert!(v.leakage() < 1e-12);
        let lambda = b * b;
        let mut pmf = (-lambda).exp();
        let mut tail = 1.0;
        for n in 0..d - 2 {
            tail -= pmf;
            pmf *= lambda / (n + 1) as f64;
        }
        assert!(tail < 1e-12, "Poisson tail {tail:e}");
        assert!(v.leakage() <= tail * 1.0001 + 1e-300);
    }

    #[test]
    fn coherent_cutoff_too_small() {
        assert!(matches!(
            coherent(c(4.0, 0.0), 10),
            Err(CatError::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn annihilate_basics() {
        let vac = FockVector::basis(0, 8);
        assert_eq!(annihilate(&vac).norm(), 0.0);
        let one = FockVector::basis(1, 8);
        let out = annihilate(&one);
        assert_eq!(out.amp(0), c(1.0, 0.0));
        assert_eq!(out.norm(), 1.0);
    }

    #[test]
    fn annihilate_coherent_eigenvector() {
        let beta = c(1.3, -0.4);
        let d = choose_cutoff(2.0);
        let v = coherent(beta, d).unwrap();
        let av = annihilate(&v);
        for n in 0..d - 2 {
            assert!((av.amp(n) - beta * v.amp(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotate_basics() {
        let d = choose_cutoff(1.5);
        let v = coherent(c(1.5, 0.0), d).unwrap();
        let same = rotate(&v, 0.0);
        assert!((same.amps() - v.amps()).iter().all(|z| z.norm() == 0.0));
        // rotate by pi/2 maps |beta> to |i beta>
        let rot = rotate(&v, std::f64::consts::FRAC_PI_2);
        let target = coherent(c(0.0, 1.5), d).unwrap();
        for n in 0..d {
            assert!((rot.amp(n) - target.amp(n)).norm() < 1e-13);
        }
        assert_abs_diff_eq!(rot.norm(), v.norm(), epsilon = 1e-14);
    }

    #[test]
    fn rotate_twice_on_even_support() {
        let d = 30;
        let mut amps = Array1::zeros(d);
        for n in (0..d).step_by(2) {
            amps[n] = c(1.0 / (1.0 + n as f64), 0.2);
        }
        let v = FockVector::from_amps(amps);
        let r2 = rotate(
            &rotate(&v, std::f64::consts::FRAC_PI_2),
            std::f64::consts::FRAC_PI_2,
        );
        for n in 0..d {
            assert!((r2.amp(n) - v.amp(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn bs_coherent_action() {
        let a = c(1.0, 0.0);
        let (o1, o2) = bs_output_coherent(a, a);
        assert!((o1 - c(std::f64::consts::SQRT_2, 0.0)).norm() < 1e-15);
        assert!(o2.norm() < 1e-15);
        let (o1, o2) = bs_output_coherent(a, -a);
        assert!(o1.norm() < 1e-15);
        assert!((o2 - c(-std::f64::consts::SQRT_2, 0.0)).norm() < 1e-15);
        let (o1, o2) = bs_output_coherent(a, c(0.0, 1.0));
        assert_abs_diff_eq!(o1.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o2.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bs_element_anchors() {
        assert_eq!(bs_fock_element(0, 0, 0, 0), 1.0);
        assert_abs_diff_eq!(bs_fock_element(1, 1, 2, 0), -FRAC_1_SQRT_2, epsilon = 1e-15);
        // photon-number conservation is exact
        assert_eq!(bs_fock_element(1, 2, 2, 0), 0.0);
        assert_eq!(bs_fock_element(0, 1, 0, 0), 0.0);
    }

    /// Independent small-block oracle: direct alternating-sum expansion with
    /// i128 integers and f64 factorials.
    fn bs_element_direct(n1: usize, n2: usize, n: usize, m: usize) -> f64 {
        assert_eq!(n1 + n2, n + m);
        let binom = |n: usize, k: usize| -> i128 {
            if k > n {
                return 0;
            }
            let mut b: i128 = 1;
            for j in 0..k {
                b = b * (n - j) as i128 / (j + 1) as i128;
            }
            b
        };
        let mut s: i128 = 0;
        for j in 0..=n {
            if n1 >= j && n1 - j <= m {
                let sign = if (n - j) % 2 == 0 { 1 } else { -1 };
                s += sign * binom(n, j) * binom(m, n1 - j);
            }
        }
        let fact = |k: usize| -> f64 { (1..=k).map(|x| x as f64).product::<f64>().max(1.0) };
        let t = n + m;
        s as f64 * (fact(n1) * fact(n2) / (fact(n) * fact(m))).sqrt() / 2f64.powi(t as i32).sqrt()
    }

    #[test]
    fn bs_blocks_match_direct_expansion() {
        for t in 0..=22 {
            let block = bs_table().block(t);
            for n1 in 0..=t {
                for n in 0..=t {
                    let want = bs_element_direct(n1, t - n1, n, t - n);
                    let got = block[[n1, n]];
                    assert!(
                        (got - want).abs() <= 1e-14 * want.abs().max(1.0),
                        "t={t} n1={n1} n={n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn bs_blocks_unitary() {
        for &t in &[1usize, 2, 5, 17, 40, 90, 131] {
            let block = bs_table().block(t);
            let w = t + 1;
            for i in 0..w {
                for j in i..w {
                    let dot: f64 = (0..w).map(|k| block[[k, i]] * block[[k, j]]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "t={t} columns {i},{j}: {dot}");
                }
            }
        }
    }

    #[test]
    fn bs_blocks_factorize_coherent_states() {
        // Applying the number-basis blocks to |b1> x |b2> must reproduce the
        // coherent product state given by bs_output_coherent.
        let cases = [
            (c(1.0, 0.5), c(-0.3, 0.8)),
            (c(2.0, 0.0), c(0.0, 2.0)),
            (c(3.5, -1.0), c(1.0, 3.0)),
        ];
        for (b1, b2) in cases {
            let bmax = b1.norm().max(b2.norm()) * std::f64::consts::SQRT_2;
            let d = choose_cutoff(bmax);
            let v1 = coherent(b1, d).unwrap();
            let v2 = coherent(b2, d).unwrap();
            let (o1, o2) = bs_output_coherent(b1, b2);
            let w1 = coherent(o1, d).unwrap();
            let w2 = coherent(o2, d).unwrap();
            let mut worst = 0.0f64;
            for t in 0..=(d - 1) {
                let block = bs_table().block(t);
                for n1 in 0..=t.min(d - 1) {
                    let n2 = t - n1;
                    if n2 >= d {
                        continue;
                    }
                    let mut amp = C64::new(0.0, 0.0);
                    let lo = t.saturating_sub(d - 1);
                    for n in lo..=t.min(d - 1) {
                        amp += block[[n1, n]] * v1.amp(n) * v2.amp(t - n);
                    }
                    let want = w1.amp(n1) * w2.amp(n2);
                    worst = worst.max((amp - want).norm());
                }
            }
            assert!(worst < 1e-10, "coherent factorization defect {worst:e}");
        }
    }

    #[test]
    fn density_matrix_basics() {
        let d = choose_cutoff(1.0);
        let v = coherent(c(1.0, 0.0), d).unwrap().normalized();
        let rho = DensityMatrix::from_pure(&v);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        assert!(rho.hermiticity_error() < 1e-15);
        rho.validate(&crate::Tolerances::default()).unwrap();
    }
}
