//! Model parameters, free-fermion spectrum and Heisenberg evolution coefficients.

use crate::error::{Error, Result};
use crate::scalar::{cplx, czero, Complex, Real};
use crate::special::Quadrature;

/// Extra sites kept beyond the light cone `ceil(lambda t)`.
pub const LIGHT_CONE_MARGIN: i64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainSize {
    /// Ring with antiperiodic fermion momenta `k = 2 pi (n + 1/2) / N`: the even-parity
    /// sector of the spin ring, which holds the vacuum and the ground state.
    FiniteRing(usize),
    /// Ring with periodic fermion momenta `k = 2 pi n / N`: the odd-parity sector of the
    /// spin ring, which holds single-flip states such as the Bell pairs.
    OddRing(usize),
    ThermodynamicLimit,
}

/// Couplings of `H = -lambda sum[(1+gamma) SxSx + (1-gamma) SySy] - sum Sz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub lambda: T,
    pub gamma: T,
    pub size: ChainSize,
}

impl<T: Real> ModelParams<T> {
    pub fn new(lambda: T, gamma: T, size: ChainSize) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must be >= 0")));
        }
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must lie in [0, 1]")));
        }
        if let ChainSize::FiniteRing(n) | ChainSize::OddRing(n) = size {
            if n < 2 {
                return Err(Error::InvalidParams(format!("ring size {n} must be >= 2")));
            }
        }
        Ok(Self { lambda, gamma, size })
    }

    pub fn infinite(lambda: T, gamma: T) -> Result<Self> {
        Self::new(lambda, gamma, ChainSize::ThermodynamicLimit)
    }

    pub fn ring(lambda: T, gamma: T, n: usize) -> Result<Self> {
        Self::new(lambda, gamma, ChainSize::FiniteRing(n))
    }

    pub fn odd_ring(lambda: T, gamma: T, n: usize) -> Result<Self> {
        Self::new(lambda, gamma, ChainSize::OddRing(n))
    }

    /// `1 + lambda cos k`, minus the single-particle energy.
    pub fn eps_tilde(&self, k: T) -> T {
        T::one() + self.lambda * k.cos()
    }

    /// `lambda gamma sin k`, the pairing amplitude.
    pub fn pairing(&self, k: T) -> T {
        self.lambda * self.gamma * k.sin()
    }
}

/// Wavenumber folded into `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum<T>(T);

impl<T: Real> Momentum<T> {
    pub fn new(k: T) -> Self {
        let two_pi = T::TAU();
        let mut r = k % two_pi;
        if r <= -T::PI() {
            r += two_pi;
        } else if r > T::PI() {
            r -= two_pi;
        }
        Self(r)
    }

    /// The n-th point `2 pi (n + 1/2) / N` of the shifted ring grid, which never hits 0 or pi.
    pub fn ring_point(n: usize, ring: usize) -> Self {
        let kf = T::TAU() * (T::from_i64(n as i64) + T::lit(0.5)) / T::from_i64(ring as i64);
        Self::new(kf)
    }

    pub fn k(&self) -> T {
        self.0
    }
}

/// `Lambda_k = sqrt((1 + lambda cos k)^2 + lambda^2 gamma^2 sin^2 k)`.
pub fn dispersion<T: Real>(k: Momentum<T>, p: &ModelParams<T>) -> T {
    p.eps_tilde(k.k()).hypot(p.pairing(k.k()))
}

/// Bogoliubov angle `(alpha_k, beta_k)` with `1 - 2 beta^2 = -(1 + lambda cos k)/Lambda_k`.
///
/// Where `sin k = 0` the pairing vanishes and the continuous limit is returned:
/// `(0, 1)` when `1 + lambda cos k > 0`, `(1, 0)` when it is negative.
pub fn bogoliubov<T: Real>(k: Momentum<T>, p: &ModelParams<T>) -> Result<(T, T)> {
    let kk = k.k();
    let e = p.eps_tilde(kk);
    let d = p.pairing(kk);
    let lam = e.hypot(d);
    if lam <= T::lit(8.0) * T::epsilon() * (T::one() + p.lambda) {
        return Err(Error::DegenerateMomentum { k: kk.as_f64() });
    }
    let two = T::lit(2.0);
    let (alpha, beta) = if e >= T::zero() {
        let beta = ((lam + e) / (two * lam)).sqrt();
        (d.abs() / (two * lam * beta), beta)
    } else {
        let alpha = ((lam - e) / (two * lam)).sqrt();
        (alpha, d.abs() / (two * lam * alpha))
    };
    let sign = if kk < T::zero() { -T::one() } else { T::one() };
    Ok((alpha, sign * beta))
}

/// Real-space propagator `c_j(t) = sum_x [a(x) c_{j+x} + b(x) c^dag_{j+x}]`.
#[derive(Debug, Clone)]
pub struct EvolutionCoefficients<T> {
    pub time: T,
    pub x_max: i64,
    a: Vec<Complex<T>>,
    b: Vec<Complex<T>>,
}

impl<T: Real> EvolutionCoefficients<T> {
    pub fn a_tilde(&self, x: i64) -> Complex<T> {
        if x.abs() > self.x_max {
            czero()
        } else {
            self.a[(x + self.x_max) as usize]
        }
    }

    pub fn b_tilde(&self, x: i64) -> Complex<T> {
        if x.abs() > self.x_max {
            czero()
        } else {
            self.b[(x + self.x_max) as usize]
        }
    }

    /// `sum_x |a|^2 + |b|^2`, equal to one when the window holds the full light cone.
    pub fn norm(&self) -> T {
        self.a.iter().chain(&self.b).map(|z| z.norm_sqr()).sum()
    }
}

/// Default cutoff `ceil(lambda t) + 30`.
pub fn light_cone_radius<T: Real>(lambda: T, t: T) -> i64 {
    (lambda * t).ceil().as_f64() as i64 + LIGHT_CONE_MARGIN
}

/// Evolution coefficients on `|x| <= x_max`.
///
/// The infinite chain integrates over `[0, pi]` with weight `1/pi`; a ring of `N` sites
/// sums over the shifted grid with weight `1/N`. Both give the identity at `t = 0`.
pub fn evolution_coefficients<T: Real>(
    x_max: i64,
    t: T,
    p: &ModelParams<T>,
) -> Result<EvolutionCoefficients<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Precondition(format!("time {t} must be >= 0")));
    }
    let x_max = x_max.max(0);
    let len = (2 * x_max + 1) as usize;
    let mut a = vec![czero(); len];
    let mut b = vec![czero(); len];
    let (nodes, weights) = momentum_rule(p, t, x_max)?;
    for (&k, &w) in nodes.iter().zip(&weights) {
        let (v, ue, uo) = mode_kernels(p, k, t);
        for x in 0..=x_max {
            let (s, c) = (k * T::from_i64(x)).sin_cos();
            let ev = cplx(w * v * c, w * ue * c);
            let od = cplx(T::zero(), w * uo * s);
            a[(x_max + x) as usize] += ev;
            b[(x_max + x) as usize] += od;
        }
    }
    for x in 1..=x_max {
        a[(x_max - x) as usize] = a[(x_max + x) as usize];
        b[(x_max - x) as usize] = -b[(x_max + x) as usize];
    }
    let out = EvolutionCoefficients { time: t, x_max, a, b };
    let tail = (T::one() - out.norm()).abs();
    if tail > T::tol(1e-10) {
        return Err(Error::CutoffTooSmall { x_max, tail: tail.as_f64() });
    }
    Ok(out)
}

/// `(cos Lambda t, (1 + lambda cos k) sin(Lambda t)/Lambda, lambda gamma sin k sin(Lambda t)/Lambda)`.
///
/// `sin(Lambda t)/Lambda` is evaluated as a function of `Lambda^2`, so gapless points are regular.
pub(crate) fn mode_kernels<T: Real>(p: &ModelParams<T>, k: T, t: T) -> (T, T, T) {
    let e = p.eps_tilde(k);
    let d = p.pairing(k);
    let lam = e.hypot(d);
    let v = (lam * t).cos();
    let sinc = sinc_t(lam, t);
    (v, e * sinc, d * sinc)
}

/// `sin(L t)/L`, continuous at `L = 0`.
pub(crate) fn sinc_t<T: Real>(lam: T, t: T) -> T {
    let x = lam * t;
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        t * (T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0))
    } else {
        x.sin() / lam
    }
}

/// Momentum nodes on `[0, pi]` and weights normalized so that `sum w = 1`
/// (i.e. `(1/pi) int_0^pi` or `(2/N) sum_{0<k<pi}`) for even integrands.
pub(crate) fn momentum_rule<T: Real>(p: &ModelParams<T>, t: T, r: i64) -> Result<(Vec<T>, Vec<T>)> {
    match p.size {
        ChainSize::ThermodynamicLimit => {
            let q = Quadrature::<T>::for_frequency(p.lambda * t + T::from_i64(r.abs()))?;
            let inv_pi = T::FRAC_1_PI();
            Ok((q.nodes, q.weights.into_iter().map(|w| w * inv_pi).collect()))
        }
        ChainSize::FiniteRing(n) => {
            if n % 2 != 0 {
                return Err(Error::InvalidParams(format!("momentum sums need an even ring, got {n}")));
            }
            let w = T::lit(2.0) / T::from_i64(n as i64);
            let nodes: Vec<T> = (0..n / 2).map(|m| Momentum::<T>::ring_point(m, n).k()).collect();
            let weights = vec![w; nodes.len()];
            Ok((nodes, weights))
        }
        ChainSize::OddRing(n) => {
            if n % 2 != 0 {
                return Err(Error::InvalidParams(format!("momentum sums need an even ring, got {n}")));
            }
            let nf = T::from_i64(n as i64);
            let nodes: Vec<T> = (0..=n / 2).map(|m| T::TAU() * T::from_i64(m as i64) / nf).collect();
            // k = 0 and k = pi have no partner -k
            let weights = (0..=n / 2)
                .map(|m| if m == 0 || m == n / 2 { T::one() / nf } else { T::lit(2.0) / nf })
                .collect();
            Ok((nodes, weights))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_j;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(l: f64, g: f64) -> ModelParams<f64> {
        ModelParams::infinite(l, g).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::infinite(-0.1_f64, 0.5_f64).is_err());
        assert!(ModelParams::infinite(0.5_f64, 1.5_f64).is_err());
        assert!(ModelParams::ring(0.5_f64, 0.5_f64, 1).is_err());
        assert!(ModelParams::ring(0.5_f64, 0.5_f64, 2).is_ok());
        let odd = ModelParams::ring(0.5_f64, 0.5_f64, 5).unwrap();
        assert!(momentum_rule(&odd, 1.0, 0).is_err());
        assert!(ModelParams::ring(0.5_f64, 0.5_f64, 12).is_ok());
    }

    #[test]
    fn momentum_folding() {
        let k = Momentum::new(3.0_f64 * std::f64::consts::PI);
        assert!((k.k() - std::f64::consts::PI).abs() < 1e-12);
        let k = Momentum::new(-std::f64::consts::PI);
        assert!((k.k() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn dispersion_limits() {
        for k in [-2.0_f64, 0.1_f64, 1.3_f64, 3.0_f64] {
            assert!((dispersion(Momentum::new(k), &p(0.0_f64, 0.7_f64)) - 1.0_f64).abs() < 1e-15);
            let l = 0.8_f64;
            let want = (1.0_f64 + l * f64::cos(k)).abs();
            assert!((dispersion(Momentum::new(k), &p(l, 0.0_f64)) - want).abs() < 1e-15);
            let pp = p(0.9_f64, 0.4_f64);
            assert_eq!(dispersion(Momentum::new(k), &pp), dispersion(Momentum::new(-k), &pp));
        }
        let pi = Momentum::new(std::f64::consts::PI);
        assert!(dispersion(pi, &p(1.0_f64, 1.0_f64)) < 1e-15);
    }

    #[test]
    fn bogoliubov_normalization_and_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = rng.gen_range(-3.1..3.1);
            let pp = p(rng.gen_range(0.0..2.0), rng.gen_range(0.0..1.0));
            let (a, b) = bogoliubov(Momentum::new(k), &pp).unwrap();
            assert!((a * a + b * b - 1.0_f64).abs() < 1e-12);
        }
        let (a, b) = bogoliubov(Momentum::new(0.7_f64), &p(0.8_f64, 1e-9)).unwrap();
        assert!(a.abs() < 1e-8 && (b - 1.0_f64).abs() < 1e-12);
        let (a, b) = bogoliubov(Momentum::new(-0.7_f64), &p(0.8_f64, 1e-9)).unwrap();
        assert!(a.abs() < 1e-8 && (b + 1.0_f64).abs() < 1e-12);
        assert_eq!(bogoliubov(Momentum::new(0.0_f64), &p(0.8_f64, 0.5_f64)).unwrap(), (0.0_f64, 1.0_f64));
        let err = bogoliubov(Momentum::new(std::f64::consts::PI), &p(1.0_f64, 0.3_f64));
        assert!(matches!(err, Err(Error::DegenerateMomentum { .. })));
    }

    #[test]
    fn evolution_identity_at_zero_time() {
        for pp in [p(0.5_f64, 0.0_f64), p(1.0_f64, 1.0_f64), ModelParams::ring(0.7_f64, 0.5_f64, 16).unwrap()] {
            let e = evolution_coefficients(6, 0.0_f64, &pp).unwrap();
            for x in -6..=6 {
                let want = if x == 0 { 1.0_f64 } else { 0.0_f64 };
                assert!((e.a_tilde(x) - Complex::new(want, 0.0_f64)).norm() < 1e-14);
                assert!(e.b_tilde(x).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn evolution_parity_and_unitarity() {
        let pp = p(1.0_f64, 1.0_f64);
        let e = evolution_coefficients(light_cone_radius(1.0_f64, 1.0_f64), 1.0_f64, &pp).unwrap();
        assert!((e.norm() - 1.0_f64).abs() < 1e-10);
        for x in 1..10 {
            assert_eq!(e.a_tilde(x), e.a_tilde(-x));
            assert_eq!(e.b_tilde(x), -e.b_tilde(-x));
        }
        for &lt in &[5.0_f64, 20.0_f64, 50.0_f64] {
            let pp = p(0.8_f64, 0.6_f64);
            let e = evolution_coefficients(light_cone_radius(0.8_f64, lt / 0.8_f64), lt / 0.8_f64, &pp).unwrap();
            assert!((e.norm() - 1.0_f64).abs() < 1e-10, "lt={lt}");
        }
    }

    #[test]
    fn evolution_cutoff_too_small() {
        let r = evolution_coefficients(3, 10.0_f64, &p(1.0_f64, 0.5_f64));
        assert!(matches!(r, Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn isotropic_evolution_is_bessel() {
        let (l, t) = (0.9_f64, 4.0_f64);
        let e = evolution_coefficients(light_cone_radius(l, t), t, &p(l, 0.0_f64)).unwrap();
        let phase = Complex::new(0.0_f64, t).exp();
        for x in -12i64..=12 {
            assert!(e.b_tilde(x).norm() < 1e-15);
            let want = phase * crate::scalar::i_pow::<f64>(x) * bessel_j(x, l * t).unwrap();
            assert!((e.a_tilde(x) - want).norm() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn finite_ring_converges_to_infinite_chain() {
        for &(l, g, t) in &[(1.0_f64, 1.0_f64, 2.0_f64), (0.5_f64, 0.5_f64, 20.0_f64), (1.0_f64, 0.3_f64, 15.0_f64)] {
            let inf = evolution_coefficients(light_cone_radius(l, t), t, &p(l, g)).unwrap();
            let fin = evolution_coefficients(light_cone_radius(l, t), t, &ModelParams::ring(l, g, 512).unwrap())
                .unwrap();
            for x in -inf.x_max..=inf.x_max {
                assert!((inf.a_tilde(x) - fin.a_tilde(x)).norm() < 1e-8);
                assert!((inf.b_tilde(x) - fin.b_tilde(x)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn single_precision_smoke() {
        let pp = ModelParams::<f32>::infinite(0.5, 0.5).unwrap();
        let e = evolution_coefficients(light_cone_radius(0.5f32, 2.0), 2.0f32, &pp).unwrap();
        assert!((e.norm() - 1.0).abs() < 1e-4);
    }
}
