//! Closed-form dynamics of the isotropic chain (`gamma = 0`).
//!
//! With number conservation a single flipped spin spreads as
//! `c_a^dag(-t) = e^{it} sum_l i^{l-a} J_{l-a}(lambda t) c_l^dag`; the global phase is dropped.

use crate::error::{Error, Result};
use crate::measures::{binary_entropy, TwoSiteDensity};
use crate::model::light_cone_radius;
use crate::scalar::{cplx, czero, i_pow, Complex, Real};
use crate::special::bessel_j_table;

/// One-particle wavepacket `sum_l w_l c_l^dag |vac>` from `(c_i^dag + e^{i phi} c_j^dag)|vac>/sqrt 2`.
#[derive(Debug, Clone)]
pub struct SingleParticleState<T> {
    pub time: T,
    pub lambda: T,
    pub source_sites: (i64, i64),
    pub phase: T,
    lo: i64,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> SingleParticleState<T> {
    pub fn amplitude(&self, l: i64) -> Complex<T> {
        let idx = l - self.lo;
        if idx < 0 || idx as usize >= self.amplitudes.len() {
            czero()
        } else {
            self.amplitudes[idx as usize]
        }
    }

    /// Sites covered by the light-cone window.
    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.lo + self.amplitudes.len() as i64 - 1
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|w| w.norm_sqr()).sum()
    }

    pub fn occupation(&self, l: i64) -> T {
        self.amplitude(l).norm_sqr()
    }

    /// Multiplies every amplitude by the same unit phase.
    pub fn with_global_phase(mut self, theta: T) -> Self {
        let u = Complex::from_polar(T::one(), theta);
        for w in self.amplitudes.iter_mut() {
            *w = *w * u;
        }
        self
    }

    /// Two-site reduced state of the pair `(n, m)`.
    pub fn rho2(&self, n: i64, m: i64) -> TwoSiteDensity<T> {
        let (wn, wm) = (self.amplitude(n), self.amplitude(m));
        let pn = wn.norm_sqr();
        let pm = wm.norm_sqr();
        TwoSiteDensity::from_blocks(T::zero(), T::one() - pn - pm, czero(), pn, pm, wn * wm.conj())
    }
}

/// Amplitude table `i^{l-a} J_{l-a}(x)` indexed by `l - a`.
struct Spread<T> {
    radius: i64,
    vals: Vec<Complex<T>>,
}

impl<T: Real> Spread<T> {
    fn new(radius: i64, x: T) -> Result<Self> {
        let table = bessel_j_table(radius as usize, x)?;
        let vals = (-radius..=radius)
            .map(|d| {
                let j = table[d.unsigned_abs() as usize];
                let j = if d < 0 && d % 2 != 0 { -j } else { j };
                i_pow::<T>(d) * j
            })
            .collect();
        Ok(Self { radius, vals })
    }

    fn at(&self, d: i64) -> Complex<T> {
        if d.abs() > self.radius {
            czero()
        } else {
            self.vals[(d + self.radius) as usize]
        }
    }
}

fn bessel_signed<T: Real>(table: &[T], n: i64) -> T {
    let idx = n.unsigned_abs() as usize;
    if idx >= table.len() {
        return T::zero();
    }
    let v = table[idx];
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

pub fn wavepacket<T: Real>(i: i64, j: i64, phi: T, t: T, lambda: T) -> Result<SingleParticleState<T>> {
    if i == j {
        return Err(Error::Precondition("source sites must differ".into()));
    }
    if !(t >= T::zero()) {
        return Err(Error::Precondition(format!("time {t} must be >= 0")));
    }
    let r = light_cone_radius(lambda, t);
    let lo = i.min(j) - r;
    let hi = i.max(j) + r;
    let spread = Spread::new(hi - lo, lambda * t)?;
    let s = T::FRAC_1_SQRT_2();
    let e = Complex::from_polar(T::one(), phi);
    let amplitudes = (lo..=hi)
        .map(|l| (spread.at(l - i) + e * spread.at(l - j)) * s)
        .collect();
    Ok(SingleParticleState { time: t, lambda, source_sites: (i, j), phase: phi, lo, amplitudes })
}

/// `C_nm = 2 |w_n w_m^*|`.
pub fn concurrence_psi<T: Real>(state: &SingleParticleState<T>, n: i64, m: i64) -> Result<T> {
    if n == m {
        return Err(Error::Precondition("sites must differ".into()));
    }
    Ok(T::lit(2.0) * state.amplitude(n).norm() * state.amplitude(m).norm())
}

/// Concurrence left on the source pair `(i, i + x)`: `|J_0^2 + 2 i^x J_0 J_x cos phi + (-1)^x J_x^2|`.
pub fn self_concurrence<T: Real>(x: i64, phi: T, t: T, lambda: T) -> Result<T> {
    if x < 1 {
        return Err(Error::Precondition("separation must be >= 1".into()));
    }
    let table = bessel_j_table(x as usize, lambda * t)?;
    let (j0, jx) = (table[0], table[x as usize]);
    let sign = if x % 2 == 0 { T::one() } else { -T::one() };
    let v = cplx(j0 * j0 + sign * jx * jx, T::zero()) + i_pow::<T>(x) * (T::lit(2.0) * j0 * jx * phi.cos());
    Ok(v.norm())
}

/// Entropy of the pair `(n, m)`, `h(|w_n|^2 + |w_m|^2)`.
pub fn two_site_entropy<T: Real>(state: &SingleParticleState<T>, n: i64, m: i64) -> Result<T> {
    if n == m {
        return Err(Error::Precondition("sites must differ".into()));
    }
    Ok(binary_entropy(state.occupation(n) + state.occupation(m)))
}

/// Entropy of a block; the reduced state has rank two.
pub fn block_entropy<T: Real>(state: &SingleParticleState<T>, sites: &[i64]) -> Result<T> {
    let mut seen = std::collections::BTreeSet::new();
    for &s in sites {
        if !seen.insert(s) {
            return Err(Error::Precondition(format!("site {s} repeated in block")));
        }
    }
    Ok(binary_entropy(sites.iter().map(|&l| state.occupation(l)).sum()))
}

/// Overlap with `(|up,down> + e^{i phi_ref}|down,up>)/sqrt 2` on `(n, m)`: `|w_n + e^{-i phi_ref} w_m|^2 / 2`.
pub fn fidelity_psi<T: Real>(state: &SingleParticleState<T>, n: i64, m: i64, phi_ref: T) -> Result<T> {
    if n == m {
        return Err(Error::Precondition("sites must differ".into()));
    }
    let v = state.amplitude(n) + Complex::from_polar(T::one(), -phi_ref) * state.amplitude(m);
    Ok(v.norm_sqr() / T::lit(2.0))
}

/// One-tangle of site `j` and the sum of squared concurrences with every other site.
pub fn ckw_pair<T: Real>(state: &SingleParticleState<T>, j: i64) -> (T, T) {
    let pj = state.occupation(j);
    let four = T::lit(4.0);
    let tau = four * pj * (T::one() - pj);
    let sum = state
        .window()
        .filter(|&l| l != j)
        .map(|l| four * pj * state.occupation(l))
        .sum();
    (tau, sum)
}

/// `sum_{m != n} C_nm`.
pub fn total_concurrence<T: Real>(state: &SingleParticleState<T>, n: i64) -> T {
    let wn = state.amplitude(n).norm();
    let two = T::lit(2.0);
    state
        .window()
        .filter(|&l| l != n)
        .map(|l| two * wn * state.amplitude(l).norm())
        .sum()
}

/// Density-matrix entries of the pair `(n, m)` for `(1 + e^{i phi} c_i^dag c_j^dag)|vac>/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiStateCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c_abs: T,
    pub x: T,
    pub y: T,
    pub z_abs: T,
    pub sites: (i64, i64),
    pub source: (i64, i64),
    pub time: T,
}

pub fn phi_state_coefficients<T: Real>(
    i: i64,
    j: i64,
    n: i64,
    m: i64,
    t: T,
    lambda: T,
) -> Result<PhiStateCoefficients<T>> {
    if i == j {
        return Err(Error::Precondition("source sites must differ".into()));
    }
    if n >= m {
        return Err(Error::Precondition("need n < m".into()));
    }
    let reach = [n - i, n - j, m - i, m - j].iter().map(|d| d.abs()).max().unwrap_or(0);
    let table = bessel_j_table(reach as usize, lambda * t)?;
    let jb = |d: i64| bessel_signed(&table, d);
    let half = T::lit(0.5);
    let (jni, jnj, jmi, jmj) = (jb(n - i), jb(n - j), jb(m - i), jb(m - j));
    let det = jni * jmj - jnj * jmi;
    let a = half * det * det;
    let b = T::one() + a - half * (jmi * jmi + jni * jni + jmj * jmj + jnj * jnj);
    let c_abs = half * det.abs();
    let x = half * (jni * jni + jnj * jnj) - a;
    let y = half * (jmi * jmi + jmj * jmj) - a;
    let interior: T = (n + 1..m)
        .map(|r| (jni * jb(r - j) - jnj * jb(r - i)) * (jmi * jb(r - j) - jmj * jb(r - i)))
        .sum();
    let z_abs = (half * (jmi * jni + jmj * jnj) - interior).abs();
    Ok(PhiStateCoefficients { a, b, c_abs, x, y, z_abs, sites: (n, m), source: (i, j), time: t })
}

/// Which Bell family dominates the concurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    PhiLike,
    PsiLike,
}

/// `C = 2 max{0, |c| - sqrt(xy), |z| - sqrt(ab)}` and the winning candidate (ties go to `PhiLike`).
pub fn concurrence_phi<T: Real>(k: &PhiStateCoefficients<T>) -> (T, Branch) {
    let c1 = k.c_abs - (k.x * k.y).max(T::zero()).sqrt();
    let c2 = k.z_abs - (k.a * k.b).max(T::zero()).sqrt();
    let branch = if c1 >= c2 { Branch::PhiLike } else { Branch::PsiLike };
    (T::lit(2.0) * c1.max(c2).max(T::zero()), branch)
}

/// Full two-site state of the pair `(n, m)` for the `Phi` initial state, in the frame
/// co-rotating with the field (the relative phase `e^{2it}` of the two sectors removed).
pub fn phi_state_density<T: Real>(
    i: i64,
    j: i64,
    phi: T,
    n: i64,
    m: i64,
    t: T,
    lambda: T,
) -> Result<TwoSiteDensity<T>> {
    if i == j || n == m {
        return Err(Error::Precondition("sites must differ".into()));
    }
    let r = light_cone_radius(lambda, t);
    let lo = i.min(j).min(n).min(m) - r;
    let hi = i.max(j).max(n).max(m) + r;
    let spread = Spread::new(hi - lo, lambda * t)?;
    let e = Complex::from_polar(T::one(), phi);
    // amplitude of the configuration with up spins {p, q}
    let pair = |p: i64, q: i64| {
        let (p, q) = (p.min(q), p.max(q));
        e * (spread.at(p - i) * spread.at(q - j) - spread.at(q - i) * spread.at(p - j))
    };
    let half = T::lit(0.5);
    let a = half * pair(n, m).norm_sqr();
    let c = pair(n, m) * half;
    let mut x = T::zero();
    let mut y = T::zero();
    let mut z = czero::<T>();
    for s in lo..=hi {
        if s == n || s == m {
            continue;
        }
        let (an, am) = (pair(n, s), pair(m, s));
        x += half * an.norm_sqr();
        y += half * am.norm_sqr();
        z += an * am.conj() * half;
    }
    let b = T::one() - a - x - y;
    Ok(TwoSiteDensity::from_blocks(a, b, c, x, y, z))
}

/// Bell phases maximizing the `Phi` and `Psi` fidelities, `(phi + pi/2 (i+j-m-n), pi/2 (m-n))` mod `2 pi`.
///
/// Each phase fixes the optimal Bell axis; whether the maximum sits at the returned
/// phase or at the phase plus `pi` depends on the sign of a time-dependent Bessel bracket.
pub fn optimal_phases<T: Real>(n: i64, m: i64, i: i64, j: i64, phi: T) -> (T, T) {
    let tau = T::TAU();
    let q = T::FRAC_PI_2();
    let wrap = |v: T| {
        let r = v % tau;
        if r < T::zero() {
            r + tau
        } else {
            r
        }
    };
    (wrap(phi + q * T::from_i64(i + j - m - n)), wrap(q * T::from_i64(m - n)))
}
