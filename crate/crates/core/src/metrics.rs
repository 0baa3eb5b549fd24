//! Distinguishability and visualization metrics: trace norm, Helstrom bound,
//! averaged logical error probability, fidelity and Wigner grids.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::cat::PauliLabel;
use crate::error::{CatError, Result};
use crate::fock::{DensityMatrix, FockVector};
use crate::linalg;

/// Eigenvalues below this magnitude count as numerical zeros.
const EIG_FLOOR: f64 = 1e-13;

/// Helstrom error probabilities for the three logical Pauli pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerrReport {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl PerrReport {
    pub fn p_avg(&self) -> f64 {
        (self.p_x + self.p_y + self.p_z) / 3.0
    }
}

/// Trace norm of a Hermitian matrix via eigendecomposition.
pub fn trace_norm(delta: &Array2<C64>) -> f64 {
    linalg::hermitian_eigenvalues(delta)
        .into_iter()
        .filter(|l| l.abs() >= EIG_FLOOR)
        .map(f64::abs)
        .sum()
}

/// Minimum error probability for discriminating two states,
/// `1/2 - ||rho0 - rho1||_1 / 4`.
pub fn helstrom_perr(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    if rho0.cutoff() != rho1.cutoff() {
        return Err(CatError::DimensionMismatch {
            left: rho0.cutoff(),
            right: rho1.cutoff(),
        });
    }
    let delta = DensityMatrix::from_mat(rho0.mat() - rho1.mat()).hermitized();
    let p = 0.5 - 0.25 * trace_norm(delta.mat());
    Ok(p.clamp(0.0, 0.5))
}

/// Runs a channel on the three logical Pauli pairs and reports the Helstrom
/// error probability of each.
pub fn avg_perr<F>(mut channel: F) -> Result<PerrReport>
where
    F: FnMut(PauliLabel) -> Result<DensityMatrix>,
{
    let pairs = [
        (PauliLabel::Plus, PauliLabel::Minus),
        (PauliLabel::PlusI, PauliLabel::MinusI),
        (PauliLabel::Zero, PauliLabel::One),
    ];
    let mut p = [0.0; 3];
    for (slot, (a, b)) in pairs.iter().enumerate() {
        let ra = channel(*a)?;
        let rb = channel(*b)?;
        p[slot] = helstrom_perr(&ra, &rb)?;
    }
    Ok(PerrReport {
        p_x: p[0],
        p_y: p[1],
        p_z: p[2],
    })
}

/// `<psi| rho |psi>`, clamped to `[0, 1]`.
pub fn fidelity(psi: &FockVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.cutoff() != rho.cutoff() {
        return Err(CatError::DimensionMismatch {
            left: psi.cutoff(),
            right: rho.cutoff(),
        });
    }
    let d = psi.cutoff();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..d {
            row += rho.mat()[[i, j]] * psi.amp(j);
        }
        acc += psi.amp(i).conj() * row;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// Rectangular phase-space grid specification; axes are `x = Re(beta)` and
/// `p = Im(beta)`.
#[derive(Debug, Clone, Copy)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl WignerGridSpec {
    /// Square grid covering `|x|, |p| <= half_width` with the given step.
    pub fn centered(half_width: f64, step: f64) -> Self {
        let n = (2.0 * half_width / step).round() as usize + 1;
        WignerGridSpec {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sampled Wigner function, `values[[ix, ip]] = W(xs[ix], ps[ip])`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Array2<f64>,
}

impl WignerGrid {
    /// Riemann-sum integral over the grid; close to 1 for physical states on
    /// a sufficiently large grid.
    pub fn grid_integral(&self) -> f64 {
        if self.xs.len() < 2 || self.ps.len() < 2 {
            return 0.0;
        }
        let dx = self.xs[1] - self.xs[0];
        let dp = self.ps[1] - self.ps[0];
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Wigner function via the displaced-parity form
/// `W(beta) = (2/pi) Tr[rho D(beta) P D(beta)†]` with `beta = x + i p`, a
/// convention under which the grid integral of W is 1.
///
/// Evaluation uses the exact operator identity `D(beta) P D(beta)† =
/// D(2 beta) P`, so each grid point only needs the cutoff-sized block of one
/// displacement operator, generated in place by the two-index recurrence
/// `<n|D|m> = (gamma <n-1|D|m> + sqrt(m) <n-1|D|m-1>) / sqrt(n)`.
pub fn wigner(rho: &DensityMatrix, spec: &WignerGridSpec) -> Result<WignerGrid> {
    let d = rho.cutoff();
    let herm = rho.hermitized();
    let xs = spec.xs();
    let ps = spec.ps();
    let mut values = Array2::zeros((xs.len(), ps.len()));
    let mut block = Array2::<C64>::zeros((d, d));
    let coeffs = BlockCoeffs::new(d);
    for (ix, &x) in xs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            let gamma = C64::new(2.0 * x, 2.0 * p);
            displacement_block(gamma, &coeffs, &mut block);
            // (2/pi) tr(rho D(2 beta) P)
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..d {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let mut row = C64::new(0.0, 0.0);
                for n in 0..d {
                    row += herm.mat()[[m, n]] * block[[n, m]];
                }
                acc += sign * row;
            }
            values[[ix, ip]] = acc.re * std::f64::consts::FRAC_2_PI;
        }
    }
    Ok(WignerGrid { xs, ps, values })
}

/// Square-root coefficient tables used by the displacement recurrence.
struct BlockCoeffs {
    sqrts: Vec<dd::Dd>,
    inv_sqrts: Vec<dd::Dd>,
}

impl BlockCoeffs {
    fn new(d: usize) -> Self {
        let sqrts: Vec<dd::Dd> = (0..d).map(dd::Dd::sqrt_usize).collect();
        let inv_sqrts = sqrts
            .iter()
            .map(|s| dd::Dd::from_f64(1.0).div(*s))
            .collect();
        BlockCoeffs { sqrts, inv_sqrts }
    }
}

/// Fills `b[[n, m]] = <n|D(gamma)|m>` for all indices below the cutoff.
///
/// The recurrence amplifies perturbations by many orders of magnitude when
/// `|gamma|` is comparable to the square root of the cutoff, so both the
/// arithmetic and the square-root coefficients are kept in double-double
/// precision; far outside the reachable energy ball, where even that would
/// degrade, every element is provably below 1e-14 and the block is zeroed.
fn displacement_block(gamma: C64, coeffs: &BlockCoeffs, b: &mut Array2<C64>) {
    use dd::DdComplex;
    let d = b.nrows();
    if block_negligible(gamma.norm(), d) {
        b.fill(C64::new(0.0, 0.0));
        return;
    }
    let g = DdComplex::from_c64(gamma);
    let neg_gc = DdComplex::from_c64(-gamma.conj());
    let mut prev = vec![DdComplex::ZERO; d];
    let mut cur = vec![DdComplex::ZERO; d];
    cur[0] = DdComplex::from_f64((-0.5 * gamma.norm_sqr()).exp());
    for m in 1..d {
        cur[m] = cur[m - 1].mul(neg_gc).scale_dd(coeffs.inv_sqrts[m]);
    }
    for (m, v) in cur.iter().enumerate() {
        b[[0, m]] = v.to_c64();
    }
    for n in 1..d {
        std::mem::swap(&mut prev, &mut cur);
        let inv = coeffs.inv_sqrts[n];
        cur[0] = prev[0].mul(g).scale_dd(inv);
        for m in 1..d {
            cur[m] = prev[m]
                .mul(g)
                .add(prev[m - 1].scale_dd(coeffs.sqrts[m]))
                .scale_dd(inv);
        }
        for (m, v) in cur.iter().enumerate() {
            b[[n, m]] = v.to_c64();
        }
    }
}

/// True when every block element is provably tiny: for `x^2 >= d` the element
/// magnitudes are bounded by `x^(n+m) / sqrt(n! m!) e^{nm/x^2 - x^2/2}`, which
/// peaks at `n = m = d - 1`.
fn block_negligible(x: f64, d: usize) -> bool {
    if x * x < d as f64 {
        return false;
    }
    let nd = (d - 1) as f64;
    let mut ln_fact = 0.0;
    for k in 1..d {
        ln_fact += (k as f64).ln();
    }
    let ln_bound = 2.0 * nd * x.ln() - ln_fact + nd * nd / (x * x) - 0.5 * x * x;
    ln_bound < (1e-14f64).ln()
}

/// Minimal double-double arithmetic for the displacement recurrence.
mod dd {
    use num_complex::Complex64 as C64;

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        hi: f64,
        lo: f64,
    }

    impl Dd {
        pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

        fn two_sum(a: f64, b: f64) -> Dd {
            let s = a + b;
            let bb = s - a;
            Dd {
                hi: s,
                lo: (a - (s - bb)) + (b - bb),
            }
        }

        fn quick_two_sum(a: f64, b: f64) -> Dd {
            let s = a + b;
            Dd {
                hi: s,
                lo: b - (s - a),
            }
        }

        fn two_prod(a: f64, b: f64) -> Dd {
            let p = a * b;
            Dd {
                hi: p,
                lo: f64::mul_add(a, b, -p),
            }
        }

        pub fn add(self, o: Dd) -> Dd {
            let s = Self::two_sum(self.hi, o.hi);
            Self::quick_two_sum(s.hi, s.lo + self.lo + o.lo)
        }

        pub fn mul(self, o: Dd) -> Dd {
            let p = Self::two_prod(self.hi, o.hi);
            Self::quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
        }

        pub fn scale(self, x: f64) -> Dd {
            let p = Self::two_prod(self.hi, x);
            Self::quick_two_sum(p.hi, p.lo + self.lo * x)
        }

        pub fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }

        pub fn from_f64(x: f64) -> Dd {
            Dd { hi: x, lo: 0.0 }
        }

        /// Square root of a small integer, Newton-refined to double-double
        /// accuracy.
        pub fn sqrt_usize(m: usize) -> Dd {
            if m == 0 {
                return Dd::ZERO;
            }
            let x = m as f64;
            let s = x.sqrt();
            let p = Self::two_prod(s, s);
            let resid = (x - p.hi) - p.lo;
            Self::quick_two_sum(s, resid / (2.0 * s))
        }

        pub fn div(self, b: Dd) -> Dd {
            let q0 = self.hi / b.hi;
            let r = self.add(b.scale(q0).neg());
            let q1 = (r.hi + r.lo) / (b.hi + b.lo);
            Self::quick_two_sum(q0, q1)
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }

    #[derive(Debug, Clone, Copy)]
    pub struct DdComplex {
        re: Dd,
        im: Dd,
    }

    impl DdComplex {
        pub const ZERO: DdComplex = DdComplex {
            re: Dd::ZERO,
            im: Dd::ZERO,
        };

        pub fn from_f64(x: f64) -> Self {
            DdComplex {
                re: Dd { hi: x, lo: 0.0 },
                im: Dd::ZERO,
            }
        }

        pub fn from_c64(z: C64) -> Self {
            DdComplex {
                re: Dd { hi: z.re, lo: 0.0 },
                im: Dd { hi: z.im, lo: 0.0 },
            }
        }

        pub fn to_c64(self) -> C64 {
            C64::new(self.re.to_f64(), self.im.to_f64())
        }

        pub fn add(self, o: Self) -> Self {
            DdComplex {
                re: self.re.add(o.re),
                im: self.im.add(o.im),
            }
        }

        pub fn mul(self, o: Self) -> Self {
            DdComplex {
                re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
                im: self.re.mul(o.im).add(self.im.mul(o.re)),
            }
        }

        pub fn scale_dd(self, x: Dd) -> Self {
            DdComplex {
                re: self.re.mul(x),
                im: self.im.mul(x),
            }
        }
    }
}
