//! Two-qubit reduced states and the entanglement measures derived from them.
//!
//! All correlators are expectation values of spin-1/2 operators (range +-1/4).
//! Two-site states use the basis `(up up, up down, down up, down down)`.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, singular_values};
use crate::model::ModelParams;
use crate::scalar::{czero, Complex, Real};

const CLAMP: f64 = 1e-8;
const RADICAND_FAIL: f64 = 1e-6;

/// Two-site correlators `g^{ab} = <S^a_l S^b_m>` and magnetizations `<S^z>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrelatorBundle<T> {
    pub g_xx: T,
    pub g_yy: T,
    pub g_zz: T,
    pub g_xy: T,
    pub g_yx: T,
    pub mz_l: T,
    pub mz_m: T,
}

impl<T: Real> CorrelatorBundle<T> {
    /// Half-sum `M_z`.
    pub fn m_z(&self) -> T {
        (self.mz_l + self.mz_m) / T::lit(2.0)
    }

    /// Half-difference `delta S_z`.
    pub fn ds_z(&self) -> T {
        (self.mz_l - self.mz_m) / T::lit(2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let q = T::lit(0.25) + T::tol(1e-10);
        let h = T::lit(0.5) + T::tol(1e-10);
        for (name, g) in [("g_xx", self.g_xx), ("g_yy", self.g_yy), ("g_zz", self.g_zz), ("g_xy", self.g_xy), ("g_yx", self.g_yx)] {
            if !(g.abs() <= q) {
                return Err(Error::Precondition(format!("{name} = {g} outside [-1/4, 1/4]")));
            }
        }
        if !(self.mz_l.abs() <= h && self.mz_m.abs() <= h) {
            return Err(Error::Precondition("magnetization outside [-1/2, 1/2]".into()));
        }
        Ok(())
    }
}

/// Entries of the two parity blocks: outer `(a, c; c*, b)`, inner `(x, z; z*, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntries<T> {
    pub a: T,
    pub b: T,
    pub c: Complex<T>,
    pub x: T,
    pub y: T,
    pub z: Complex<T>,
}

/// Two-site reduced density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteDensity<T> {
    m: [Complex<T>; 16],
}

impl<T: Real> TwoSiteDensity<T> {
    pub fn from_blocks(a: T, b: T, c: Complex<T>, x: T, y: T, z: Complex<T>) -> Self {
        let mut m = [czero::<T>(); 16];
        m[0] = Complex::new(a, T::zero());
        m[15] = Complex::new(b, T::zero());
        m[3] = c;
        m[12] = c.conj();
        m[5] = Complex::new(x, T::zero());
        m[10] = Complex::new(y, T::zero());
        m[6] = z;
        m[9] = z.conj();
        Self { m }
    }

    /// Wraps a full 4x4 matrix (row-major).
    pub fn from_matrix(m: [Complex<T>; 16]) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> &[Complex<T>; 16] {
        &self.m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.m[r * 4 + c]
    }

    pub fn entries(&self) -> BlockEntries<T> {
        BlockEntries {
            a: self.m[0].re,
            b: self.m[15].re,
            c: self.m[3],
            x: self.m[5].re,
            y: self.m[10].re,
            z: self.m[6],
        }
    }

    /// Largest modulus among entries outside the two parity blocks.
    pub fn off_block_weight(&self) -> T {
        [1usize, 2, 4, 7, 8, 11, 13, 14]
            .iter()
            .map(|&i| self.m[i].norm())
            .fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> T {
        self.m[0].re + self.m[5].re + self.m[10].re + self.m[15].re
    }

    /// `<S^z>` of the first and second site from the partial traces.
    pub fn magnetizations(&self) -> (T, T) {
        let h = T::lit(0.5);
        (self.m[0].re + self.m[5].re - h, self.m[0].re + self.m[10].re - h)
    }

    /// Correlators reproducing this state through [`rho2_from_correlators`].
    pub fn correlators(&self) -> CorrelatorBundle<T> {
        let e = self.entries();
        let h = T::lit(0.5);
        let (mz_l, mz_m) = self.magnetizations();
        CorrelatorBundle {
            g_xx: h * (e.c.re + e.z.re),
            g_yy: h * (e.z.re - e.c.re),
            g_xy: h * (e.z.im - e.c.im),
            g_yx: -h * (e.c.im + e.z.im),
            g_zz: h * (e.a + e.b) - T::lit(0.25),
            mz_l,
            mz_m,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigen(&self.m, 4).0
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.m[r * 4 + c] - self.m[c * 4 + r].conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace and positivity down to `-1e-6`.
    pub fn check_physical(&self) -> Result<()> {
        if self.hermiticity_defect() > T::tol(1e-10) {
            return Err(Error::Precondition("density matrix is not Hermitian".into()));
        }
        if (self.trace() - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::Precondition(format!("trace {} != 1", self.trace())));
        }
        let lo = self.eigenvalues()[0];
        if lo < -T::lit(RADICAND_FAIL) {
            return Err(Error::Nonphysical(lo.as_f64()));
        }
        Ok(())
    }
}

/// Single-site state `diag(1/2 + <S^z>, 1/2 - <S^z>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSiteDensity<T> {
    pub mz: T,
}

impl<T: Real> OneSiteDensity<T> {
    pub fn new(mz: T) -> Result<Self> {
        if !(mz.abs() <= T::lit(0.5) + T::tol(1e-12)) {
            return Err(Error::Precondition(format!("<S^z> = {mz} outside [-1/2, 1/2]")));
        }
        Ok(Self { mz })
    }
}

/// States with a computable spectrum.
pub trait Spectrum<T> {
    fn spectrum(&self) -> Vec<T>;
}

impl<T: Real> Spectrum<T> for OneSiteDensity<T> {
    fn spectrum(&self) -> Vec<T> {
        let h = T::lit(0.5);
        vec![h + self.mz, h - self.mz]
    }
}

impl<T: Real> Spectrum<T> for TwoSiteDensity<T> {
    fn spectrum(&self) -> Vec<T> {
        self.eigenvalues()
    }
}

/// `rho^(2)` assembled from correlators.
pub fn rho2_from_correlators<T: Real>(c: &CorrelatorBundle<T>) -> Result<TwoSiteDensity<T>> {
    c.validate()?;
    let q = T::lit(0.25);
    let a = q + c.m_z() + c.g_zz;
    let b = q - c.m_z() + c.g_zz;
    let x = q - c.g_zz + c.ds_z();
    let y = q - c.g_zz - c.ds_z();
    let cc = Complex::new(c.g_xx - c.g_yy, -(c.g_xy + c.g_yx));
    let z = Complex::new(c.g_xx + c.g_yy, c.g_xy - c.g_yx);
    let rho = TwoSiteDensity::from_blocks(a, b, cc, x, y, z);
    let lo = rho.eigenvalues()[0];
    if lo < -T::lit(RADICAND_FAIL) {
        return Err(Error::Nonphysical(lo.as_f64()));
    }
    Ok(rho)
}

fn clamped_sqrt<T: Real>(r: T) -> Result<T> {
    if r >= T::zero() {
        Ok(r.sqrt())
    } else if r >= -T::lit(RADICAND_FAIL) {
        // rounding, or a marginally nonphysical input; either way the square root is zero
        Ok(T::zero())
    } else {
        Err(Error::InvalidRadicand(r.as_f64()))
    }
}

/// Concurrence from correlators without any eigenvalue problem.
pub fn concurrence_closed<T: Real>(c: &CorrelatorBundle<T>) -> Result<T> {
    let q = T::lit(0.25);
    let d1 = (c.g_xx - c.g_yy).hypot(c.g_xy + c.g_yx);
    let r1 = clamped_sqrt((q - c.g_zz).powi(2) - c.ds_z().powi(2))?;
    let d2 = (c.g_xx + c.g_yy).hypot(c.g_xy - c.g_yx);
    let r2 = clamped_sqrt((q + c.g_zz).powi(2) - c.m_z().powi(2))?;
    Ok(T::lit(2.0) * T::zero().max(d1 - r1).max(d2 - r2))
}

/// Wootters concurrence `max{0, l_1 - l_2 - l_3 - l_4}`.
///
/// The `l_i` (square roots of the eigenvalues of `rho (sy x sy) rho^* (sy x sy)`) are
/// obtained as singular values of `tau = W^T (sy x sy) W` for a factor `rho = W W^dag`,
/// which keeps full absolute accuracy for rank-deficient states.
pub fn concurrence_wootters<T: Real>(rho: &TwoSiteDensity<T>) -> Result<T> {
    let (w, v) = hermitian_eigen(rho.matrix(), 4);
    let mut root = [T::zero(); 4];
    for (s, &e) in root.iter_mut().zip(&w) {
        if e < -T::lit(CLAMP) {
            return Err(Error::Nonphysical(e.as_f64()));
        }
        *s = e.max(T::zero()).sqrt();
    }
    // W = V diag(sqrt p); sy x sy maps basis index k to 3 - k with signs (+, -, -, +)
    let sign = [T::one(), -T::one(), -T::one(), T::one()];
    let mut tau = [czero::<T>(); 16];
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = czero::<T>();
            for k in 0..4 {
                acc = acc + v[k * 4 + a] * v[(3 - k) * 4 + b] * sign[k];
            }
            tau[a * 4 + b] = acc * root[a] * root[b];
        }
    }
    let ls = singular_values(&tau, 4);
    Ok((ls[0] - ls[1] - ls[2] - ls[3]).max(T::zero()))
}

/// Concurrence of a number-conserving state, `max{0, 4|g^{+-}| - sqrt(((1 + 4 g_zz)/2)^2 - (M_l + M_m)^2)}`.
///
/// `|g^{+-}| = sqrt(g_xx^2 + g_xy^2)` reduces to `|g_xx|` for a real pair coherence.
/// States mixing magnetization sectors are rejected.
pub fn concurrence_iso<T: Real>(c: &CorrelatorBundle<T>) -> Result<T> {
    let tol = T::tol(1e-10);
    if (c.g_xx - c.g_yy).abs() > tol || (c.g_xy + c.g_yx).abs() > tol {
        return Err(Error::Precondition("state is not number conserving (g_xx != g_yy or g_xy != -g_yx)".into()));
    }
    let two = T::lit(2.0);
    let r = clamped_sqrt(((T::one() + T::lit(4.0) * c.g_zz) / two).powi(2) - (c.mz_l + c.mz_m).powi(2))?;
    Ok((T::lit(4.0) * c.g_xx.hypot(c.g_xy) - r).max(T::zero()))
}

/// `tau = 4 det rho^(1) = 1 - 4 <S^z>^2`.
pub fn one_tangle<T: Real>(mz: T) -> T {
    (T::one() - T::lit(4.0) * mz * mz).max(T::zero())
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    let p = p.max(T::zero()).min(T::one());
    xlog2(p) + xlog2(T::one() - p)
}

fn xlog2<T: Real>(p: T) -> T {
    if p <= T::zero() {
        T::zero()
    } else {
        -p * p.log2()
    }
}

/// Von Neumann entropy in bits; eigenvalues in `[-1e-8, 0)` count as zero.
pub fn entropy_vn<T: Real, D: Spectrum<T>>(rho: &D) -> Result<T> {
    let mut s = T::zero();
    for p in rho.spectrum() {
        if p < -T::lit(CLAMP) {
            return Err(Error::Nonphysical(p.as_f64()));
        }
        s += xlog2(p);
    }
    Ok(s)
}

/// Overlaps with the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellFidelities<T> {
    pub psi_minus: T,
    pub psi_plus: T,
    pub phi_minus: T,
    pub phi_plus: T,
}

impl<T: Real> BellFidelities<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.psi_minus, self.psi_plus, self.phi_minus, self.phi_plus]
    }
}

pub fn bell_fidelities<T: Real>(rho: &TwoSiteDensity<T>) -> BellFidelities<T> {
    let e = rho.entries();
    let h = T::lit(0.5);
    BellFidelities {
        psi_minus: h * (e.x + e.y) - e.z.re,
        psi_plus: h * (e.x + e.y) + e.z.re,
        phi_minus: h * (e.a + e.b) - e.c.re,
        phi_plus: h * (e.a + e.b) + e.c.re,
    }
}

/// Overlap with `(|down down> + e^{i phi}|up up>)/sqrt 2`.
pub fn fidelity_phi_family<T: Real>(rho: &TwoSiteDensity<T>, phi: T) -> T {
    let e = rho.entries();
    T::lit(0.5) * (e.a + e.b) + (Complex::from_polar(T::one(), -phi) * e.c).re
}

/// Overlap with `(|up down> + e^{i phi}|down up>)/sqrt 2`.
pub fn fidelity_psi_family<T: Real>(rho: &TwoSiteDensity<T>, phi: T) -> T {
    let e = rho.entries();
    T::lit(0.5) * (e.x + e.y) + (Complex::from_polar(T::one(), phi) * e.z).re
}

/// Residual tangle `tau_1 - sum C^2`.
pub fn ckw_residual<T: Real>(tau1: T, concurrences: &[T]) -> T {
    tau1 - concurrences.iter().map(|c| *c * *c).sum::<T>()
}

/// `(4 (det_j - det_vac), 1 - det_vac/det_j)`; the relative part is 0 when both vanish.
pub fn tangle_deviation<T: Real>(det_rho_site: T, det_rho_vacuum: T) -> (T, T) {
    let delta = T::lit(4.0) * (det_rho_site - det_rho_vacuum);
    let rel = if det_rho_site == T::zero() && det_rho_vacuum == T::zero() {
        T::zero()
    } else {
        T::one() - det_rho_vacuum / det_rho_site
    };
    (delta, rel)
}

/// Short-time estimate `max{0, gamma lambda t - (gamma lambda t)^2 / 2}`.
pub fn perturbative_vacuum_concurrence<T: Real>(t: T, p: &ModelParams<T>) -> T {
    let s = p.gamma * p.lambda * t;
    (s - s * s / T::lit(2.0)).max(T::zero())
}
