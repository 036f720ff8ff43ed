//! Correlator kernels and Majorana two-point functions for the vacuum and for Bell
//! pairs `(c_i^dag +- c_j^dag)|vac>/sqrt 2` inserted on it.
//!
//! Majoranas: `A_l = c_l^dag + c_l`, `B_l = c_l^dag - c_l`.

use crate::error::{Error, Result};
use crate::model::{mode_kernels, momentum_rule, ModelParams};
use crate::scalar::{cplx, czero, Complex, Real};
use std::ops::RangeInclusive;

/// `U^o(r)`, `U^e(r)`, `V(r)` for `|r| <= radius` at one time.
#[derive(Debug, Clone)]
pub struct KernelCache<T> {
    pub params: ModelParams<T>,
    pub time: T,
    pub radius: i64,
    u_odd: Vec<T>,
    u_even: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> KernelCache<T> {
    pub fn u_odd(&self, r: i64) -> T {
        let s = if r < 0 { -T::one() } else { T::one() };
        s * self.u_odd.get(r.unsigned_abs() as usize).copied().unwrap_or(T::zero())
    }

    pub fn u_even(&self, r: i64) -> T {
        self.u_even.get(r.unsigned_abs() as usize).copied().unwrap_or(T::zero())
    }

    pub fn v(&self, r: i64) -> T {
        self.v.get(r.unsigned_abs() as usize).copied().unwrap_or(T::zero())
    }

    /// Particle amplitude `a(x) = V(x) + i U^e(x)` of `c_j(t)` on `c_{j+x}`.
    pub fn a_tilde(&self, x: i64) -> Complex<T> {
        cplx(self.v(x), self.u_even(x))
    }

    /// Hole amplitude `b(x) = i U^o(x)` of `c_j(t)` on `c^dag_{j+x}`.
    pub fn b_tilde(&self, x: i64) -> Complex<T> {
        cplx(T::zero(), self.u_odd(x))
    }
}

pub fn kernels<T: Real>(t: T, radius: i64, p: &ModelParams<T>) -> Result<KernelCache<T>> {
    kernels_with_rule(t, radius, p, momentum_rule(p, t, radius)?)
}

fn kernels_with_rule<T: Real>(
    t: T,
    radius: i64,
    p: &ModelParams<T>,
    (nodes, weights): (Vec<T>, Vec<T>),
) -> Result<KernelCache<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Precondition(format!("time {t} must be >= 0")));
    }
    let radius = radius.max(0);
    let n = radius as usize + 1;
    let (mut uo, mut ue, mut v) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for (&k, &w) in nodes.iter().zip(&weights) {
        let (vk, uek, uok) = mode_kernels(p, k, t);
        for r in 0..n {
            let (s, c) = (k * T::from_i64(r as i64)).sin_cos();
            uo[r] += w * uok * s;
            ue[r] += w * uek * c;
            v[r] += w * vk * c;
        }
    }
    Ok(KernelCache { params: *p, time: t, radius, u_odd: uo, u_even: ue, v })
}

/// Kernels with an explicit panel count (thermodynamic limit only), for convergence studies.
pub fn kernels_with_panels<T: Real>(t: T, radius: i64, p: &ModelParams<T>, panels: usize) -> Result<KernelCache<T>> {
    let q = crate::special::Quadrature::<T>::with_panels(panels)?;
    let inv_pi = T::FRAC_1_PI();
    let w = q.weights.iter().map(|&w| w * inv_pi).collect();
    kernels_with_rule(t, radius, p, (q.nodes, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajoranaKind {
    A,
    B,
}

/// A Majorana operator `A_site` or `B_site` at the evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Majorana {
    pub kind: MajoranaKind,
    pub site: i64,
}

impl Majorana {
    pub fn a(site: i64) -> Self {
        Self { kind: MajoranaKind::A, site }
    }

    pub fn b(site: i64) -> Self {
        Self { kind: MajoranaKind::B, site }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateTag {
    Vacuum,
    BellPlus(i64, i64),
    BellMinus(i64, i64),
}

/// Contractions `<C_bar X>` and `<X C^dag>` of every window Majorana with the
/// creation operator `C^dag = (c_i^dag + w c_j^dag)/sqrt 2` that defines a Bell pair.
#[derive(Debug, Clone)]
struct Border<T> {
    left: [Vec<Complex<T>>; 2],
    right: [Vec<Complex<T>>; 2],
}

/// All two-point functions `<A A>`, `<B B>`, `<A B>` on a window of sites.
///
/// For Bell tags the stored values are the full expectation values in the Bell state,
/// i.e. vacuum part plus the rank-two correction; the parts stay available for the
/// Pfaffian routes that need them separately.
#[derive(Debug, Clone)]
pub struct ContractionSet<T> {
    pub state_tag: StateTag,
    pub time: T,
    lo: i64,
    n: usize,
    vac: [Vec<Complex<T>>; 3],
    border: Option<Border<T>>,
}

impl<T: Real> ContractionSet<T> {
    pub fn window(&self) -> RangeInclusive<i64> {
        self.lo..=self.lo + self.n as i64 - 1
    }

    fn idx(&self, l: i64) -> Result<usize> {
        let d = l - self.lo;
        if d < 0 || d as usize >= self.n {
            Err(Error::WindowUnderflow(l))
        } else {
            Ok(d as usize)
        }
    }

    /// Vacuum part `<vac| X Y |vac>` of the time-evolved operators.
    pub fn vacuum_contraction(&self, x: Majorana, y: Majorana) -> Result<Complex<T>> {
        use MajoranaKind::*;
        let (i, j) = (self.idx(x.site)?, self.idx(y.site)?);
        let n = self.n;
        Ok(match (x.kind, y.kind) {
            (A, A) => self.vac[0][i * n + j],
            (B, B) => self.vac[1][i * n + j],
            (A, B) => self.vac[2][i * n + j],
            (B, A) => -self.vac[2][j * n + i],
        })
    }

    /// `<C_bar X>` (zero for the vacuum).
    pub fn left(&self, x: Majorana) -> Result<Complex<T>> {
        let i = self.idx(x.site)?;
        Ok(self.border.as_ref().map_or(czero(), |b| b.left[kind_index(x.kind)][i]))
    }

    /// `<X C^dag>` (zero for the vacuum).
    pub fn right(&self, x: Majorana) -> Result<Complex<T>> {
        let i = self.idx(x.site)?;
        Ok(self.border.as_ref().map_or(czero(), |b| b.right[kind_index(x.kind)][i]))
    }

    pub fn has_border(&self) -> bool {
        self.border.is_some()
    }

    /// Rank-two correction `<C_bar X><Y C^dag> - <C_bar Y><X C^dag>`.
    pub fn correction(&self, x: Majorana, y: Majorana) -> Result<Complex<T>> {
        Ok(self.left(x)? * self.right(y)? - self.left(y)? * self.right(x)?)
    }

    /// Full two-point function `<X Y>` in the tagged state.
    pub fn contraction(&self, x: Majorana, y: Majorana) -> Result<Complex<T>> {
        Ok(self.vacuum_contraction(x, y)? + self.correction(x, y)?)
    }

    pub fn aa(&self, l: i64, m: i64) -> Result<Complex<T>> {
        self.contraction(Majorana::a(l), Majorana::a(m))
    }

    pub fn bb(&self, l: i64, m: i64) -> Result<Complex<T>> {
        self.contraction(Majorana::b(l), Majorana::b(m))
    }

    pub fn ab(&self, l: i64, m: i64) -> Result<Complex<T>> {
        self.contraction(Majorana::a(l), Majorana::b(m))
    }
}

fn kind_index(k: MajoranaKind) -> usize {
    match k {
        MajoranaKind::A => 0,
        MajoranaKind::B => 1,
    }
}

fn window_bounds(window: &RangeInclusive<i64>) -> Result<(i64, usize)> {
    if window.is_empty() {
        return Err(Error::Precondition("empty site window".into()));
    }
    Ok((*window.start(), (window.end() - window.start() + 1) as usize))
}

/// Translation-invariant vacuum functions of the separation `R = m - l`:
/// `<A_l B_{l+R}> = delta - 2 avg_k[cos kR u_o^2 + sin kR u_o u_e]`,
/// `<A_l A_{l+R}> = delta - 2i avg_k[sin kR u_o v]`.
pub(crate) fn vacuum_profiles<T: Real>(t: T, span: i64, p: &ModelParams<T>) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    let (nodes, weights) = momentum_rule(p, T::lit(2.0) * t, span)?;
    let len = (2 * span + 1) as usize;
    let mut ab = vec![czero::<T>(); len];
    let mut aa = vec![czero::<T>(); len];
    let two = T::lit(2.0);
    for (&k, &w) in nodes.iter().zip(&weights) {
        let (v, ue, uo) = mode_kernels(p, k, t);
        for r in -span..=span {
            let (s, c) = (k * T::from_i64(r)).sin_cos();
            let idx = (r + span) as usize;
            ab[idx].re -= two * w * (c * uo * uo + s * uo * ue);
            aa[idx].im -= two * w * s * uo * v;
        }
    }
    ab[span as usize].re += T::one();
    aa[span as usize].re += T::one();
    Ok((aa, ab))
}

pub fn vacuum_contractions<T: Real>(t: T, window: RangeInclusive<i64>, p: &ModelParams<T>) -> Result<ContractionSet<T>> {
    if !(t >= T::zero()) {
        return Err(Error::Precondition(format!("time {t} must be >= 0")));
    }
    let (lo, n) = window_bounds(&window)?;
    let span = n as i64 - 1;
    let (aa_r, ab_r) = vacuum_profiles(t, span, p)?;
    let mut aa = vec![czero::<T>(); n * n];
    let mut bb = vec![czero::<T>(); n * n];
    let mut ab = vec![czero::<T>(); n * n];
    for i in 0..n {
        for j in 0..n {
            let r = (j as i64 - i as i64 + span) as usize;
            aa[i * n + j] = aa_r[r];
            bb[i * n + j] = -aa_r[r].conj();
            ab[i * n + j] = ab_r[r];
        }
    }
    Ok(ContractionSet { state_tag: StateTag::Vacuum, time: t, lo, n, vac: [aa, bb, ab], border: None })
}

/// Coefficients `(alpha_y, beta_y)` of `X(t) = sum_y alpha_y c_y + beta_y c_y^dag` at `y = site + x`.
pub(crate) fn mode_coefficients<T: Real>(kind: MajoranaKind, k: &KernelCache<T>, x: i64) -> (Complex<T>, Complex<T>) {
    let (pa, qb) = (k.a_tilde(x), k.b_tilde(x));
    match kind {
        MajoranaKind::A => (pa + qb.conj(), qb + pa.conj()),
        MajoranaKind::B => (qb.conj() - pa, pa.conj() - qb),
    }
}

/// Contractions in `(c_i^dag + sign c_j^dag)|vac>/sqrt 2`.
pub fn bell_contractions<T: Real>(
    t: T,
    window: RangeInclusive<i64>,
    p: &ModelParams<T>,
    i: i64,
    j: i64,
    plus: bool,
) -> Result<ContractionSet<T>> {
    let phase = if plus { T::zero() } else { T::PI() };
    let mut cs = bell_contractions_with_phase(t, window, p, i, j, phase)?;
    cs.state_tag = if plus { StateTag::BellPlus(i, j) } else { StateTag::BellMinus(i, j) };
    Ok(cs)
}

/// Contractions in `(c_i^dag + e^{i phi} c_j^dag)|vac>/sqrt 2`.
pub fn bell_contractions_with_phase<T: Real>(
    t: T,
    window: RangeInclusive<i64>,
    p: &ModelParams<T>,
    i: i64,
    j: i64,
    phi: T,
) -> Result<ContractionSet<T>> {
    if i == j {
        return Err(Error::Precondition("Bell sites must differ".into()));
    }
    let mut cs = vacuum_contractions(t, window.clone(), p)?;
    let (lo, n) = (cs.lo, cs.n);
    let hi = lo + n as i64 - 1;
    let reach = [i - lo, i - hi, j - lo, j - hi].iter().map(|d| d.abs()).max().unwrap_or(0);
    let ker = kernels(t, reach, p)?;
    let s = T::FRAC_1_SQRT_2();
    let w = [Complex::new(T::one(), T::zero()), Complex::from_polar(T::one(), phi)];
    let mut left = [vec![czero::<T>(); n], vec![czero::<T>(); n]];
    let mut right = [vec![czero::<T>(); n], vec![czero::<T>(); n]];
    for (ki, kind) in [MajoranaKind::A, MajoranaKind::B].into_iter().enumerate() {
        for idx in 0..n {
            let l = lo + idx as i64;
            for (a, wa) in [i, j].iter().zip(&w) {
                let (alpha, beta) = mode_coefficients(kind, &ker, a - l);
                left[ki][idx] += wa.conj() * beta * s;
                right[ki][idx] += *wa * alpha * s;
            }
        }
    }
    cs.border = Some(Border { left, right });
    cs.state_tag = StateTag::BellPlus(i, j);
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evolution_coefficients, light_cone_radius};

    fn p(l: f64, g: f64) -> ModelParams<f64> {
        ModelParams::infinite(l, g).unwrap()
    }

    #[test]
    fn kernel_limits_and_parity() {
        let k = kernels(0.0_f64, 5, &p(0.7_f64, 0.4_f64)).unwrap();
        for r in -5..=5 {
            let d = if r == 0 { 1.0_f64 } else { 0.0_f64 };
            assert!((k.v(r) - d).abs() < 1e-14 && k.u_odd(r).abs() < 1e-15 && k.u_even(r).abs() < 1e-15);
        }
        let k = kernels(3.0_f64, 8, &p(0.7_f64, 0.0_f64)).unwrap();
        assert!((0..=8).all(|r| k.u_odd(r) == 0.0_f64));
        let k = kernels(2.0_f64, 8, &p(1.0_f64, 0.6_f64)).unwrap();
        for r in 1..=8 {
            assert_eq!(k.u_odd(-r), -k.u_odd(r));
            assert_eq!(k.u_even(-r), k.u_even(r));
            assert_eq!(k.v(-r), k.v(r));
        }
    }

    #[test]
    fn kernels_match_evolution_coefficients() {
        let pp = p(0.8_f64, 0.5_f64);
        let t = 3.0_f64;
        let k = kernels(t, 10, &pp).unwrap();
        let e = evolution_coefficients(light_cone_radius(0.8_f64, t), t, &pp).unwrap();
        for x in -10..=10 {
            assert!((k.a_tilde(x) - e.a_tilde(x)).norm() < 1e-13);
            assert!((k.b_tilde(x) - e.b_tilde(x)).norm() < 1e-13);
        }
    }

    #[test]
    fn kernels_match_large_ring() {
        let k = kernels(2.0_f64, 5, &p(1.0_f64, 1.0_f64)).unwrap();
        let f = kernels(2.0_f64, 5, &ModelParams::ring(1.0_f64, 1.0_f64, 512).unwrap()).unwrap();
        for r in 0..=5 {
            assert!((k.u_odd(r) - f.u_odd(r)).abs() < 1e-8);
            assert!((k.u_even(r) - f.u_even(r)).abs() < 1e-8);
            assert!((k.v(r) - f.v(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn panel_refinement_is_converged() {
        let pp = p(1.0_f64, 0.7_f64);
        let t = 6.0_f64;
        let base = kernels(t, 12, &pp).unwrap();
        let panels = (8.0_f64 * (1.0_f64 + 6.0_f64 + 12.0_f64)).ceil() as usize;
        let fine = kernels_with_panels(t, 12, &pp, 2 * panels).unwrap();
        for r in 0..=12 {
            assert!((base.v(r) - fine.v(r)).abs() < 1e-9);
            assert!((base.u_odd(r) - fine.u_odd(r)).abs() < 1e-9);
            assert!((base.u_even(r) - fine.u_even(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn vacuum_limits() {
        let cs = vacuum_contractions(0.0_f64, 0..=4, &p(0.5_f64, 0.5_f64)).unwrap();
        for l in 0..=4 {
            for m in 0..=4 {
                let d = if l == m { 1.0_f64 } else { 0.0_f64 };
                assert!((cs.ab(l, m).unwrap() - Complex::new(d, 0.0_f64)).norm() < 1e-15);
                if l != m {
                    assert!(cs.aa(l, m).unwrap().norm() < 1e-15 && cs.bb(l, m).unwrap().norm() < 1e-15);
                }
            }
        }
        let cs = vacuum_contractions(4.0_f64, 0..=4, &p(0.9_f64, 0.0_f64)).unwrap();
        for l in 0..=4 {
            for m in 0..=4 {
                let d = if l == m { 1.0_f64 } else { 0.0_f64 };
                assert!((cs.ab(l, m).unwrap() - Complex::new(d, 0.0_f64)).norm() < 1e-14);
                if l != m {
                    assert!(cs.aa(l, m).unwrap().norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn vacuum_structure() {
        let cs = vacuum_contractions(1.5_f64, -3..=3, &p(0.5_f64, 0.5_f64)).unwrap();
        for l in -3..=3 {
            for m in -3..=3 {
                let aa = cs.aa(l, m).unwrap();
                assert!((cs.bb(l, m).unwrap() + aa.conj()).norm() < 1e-15);
                if l != m {
                    assert_eq!(aa, -cs.aa(m, l).unwrap());
                    assert_eq!(cs.bb(l, m).unwrap(), -cs.bb(m, l).unwrap());
                }
            }
        }
        assert!(matches!(cs.ab(-3, 4), Err(Error::WindowUnderflow(4))));
    }

    #[test]
    fn vacuum_matches_mode_sums() {
        // <X Y> = sum_y alpha_y(X) beta_y(Y) with the coefficients of the evolved operators
        let pp = p(0.5_f64, 0.5_f64);
        let t = 1.5_f64;
        let r = light_cone_radius(0.5_f64, t) + 4;
        let ker = kernels(t, r, &pp).unwrap();
        let cs = vacuum_contractions(t, 0..=3, &pp).unwrap();
        for (kx, ky) in [(MajoranaKind::A, MajoranaKind::B), (MajoranaKind::A, MajoranaKind::A), (MajoranaKind::B, MajoranaKind::B)] {
            for l in 0..=3 {
                for m in 0..=3 {
                    let sum: Complex<f64> = (-r..=r + 3)
                        .map(|y| mode_coefficients(kx, &ker, y - l).0 * mode_coefficients(ky, &ker, y - m).1)
                        .sum();
                    let got = cs.contraction(Majorana { kind: kx, site: l }, Majorana { kind: ky, site: m }).unwrap();
                    assert!((sum - got).norm() < 1e-11, "{kx:?}{ky:?} {l} {m}: {sum} vs {got}");
                }
            }
        }
    }

    #[test]
    fn vacuum_matches_large_ring() {
        let a = vacuum_contractions(1.5_f64, 0..=3, &p(0.5_f64, 0.5_f64)).unwrap();
        let b = vacuum_contractions(1.5_f64, 0..=3, &ModelParams::ring(0.5_f64, 0.5_f64, 512).unwrap()).unwrap();
        for l in 0..=3 {
            for m in 0..=3 {
                assert!((a.ab(l, m).unwrap() - b.ab(l, m).unwrap()).norm() < 1e-8);
                assert!((a.aa(l, m).unwrap() - b.aa(l, m).unwrap()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn singlet_at_time_zero() {
        // (c_1^dag - c_2^dag)|vac>/sqrt 2: <A_l B_m> = delta_lm - 2 <c_m^dag c_l>, so the
        // one-particle density matrix is diag(1/2, 1/2) with coherence -1/2
        let cs = bell_contractions(0.0_f64, 0..=4, &p(0.5_f64, 0.5_f64), 1, 2, false).unwrap();
        let rho = |l: i64, m: i64| {
            let d = if l == m { 1.0_f64 } else { 0.0_f64 };
            (Complex::new(d, 0.0_f64) - cs.ab(l, m).unwrap()) / 2.0_f64
        };
        assert!((rho(1, 1) - Complex::new(0.5_f64, 0.0_f64)).norm() < 1e-15);
        assert!((rho(2, 2) - Complex::new(0.5_f64, 0.0_f64)).norm() < 1e-15);
        assert!((rho(1, 2) - Complex::new(-0.5_f64, 0.0_f64)).norm() < 1e-15);
        assert!(rho(0, 0).norm() < 1e-15 && rho(3, 3).norm() < 1e-15);
        assert!(cs.aa(1, 2).unwrap().norm() < 1e-15);
    }

    #[test]
    fn bell_structure() {
        let cs = bell_contractions(1.0_f64, -1..=4, &p(1.0_f64, 0.5_f64), 1, 2, false).unwrap();
        assert_eq!(cs.state_tag, StateTag::BellMinus(1, 2));
        for l in -1..=4 {
            for m in -1..=4 {
                if l != m {
                    assert!((cs.aa(l, m).unwrap() + cs.aa(m, l).unwrap()).norm() < 1e-15);
                    assert!((cs.bb(l, m).unwrap() + cs.bb(m, l).unwrap()).norm() < 1e-15);
                }
            }
        }
    }

    /// Printed product forms of the Bell corrections, `f_r = f(r - i) +- f(r - j)`.
    fn printed(k: &KernelCache<f64>, i: i64, j: i64, sg: f64, l: i64, m: i64) -> [Complex<f64>; 3] {
        let f = |g: &dyn Fn(i64) -> f64, r: i64| g(r - i) + sg * g(r - j);
        let v = |r| k.v(r);
        let opl = |r| k.u_odd(r) + k.u_even(r);
        let omi = |r| k.u_odd(r) - k.u_even(r);
        let ab = -f(&v, m) * f(&v, l) + f(&opl, l) * f(&omi, m);
        let aa = f(&v, m) * f(&opl, l) - f(&v, l) * f(&opl, m);
        let bb = f(&v, m) * f(&omi, l) - f(&v, l) * f(&omi, m);
        [Complex::new(ab, 0.0), Complex::new(0.0, aa), Complex::new(0.0, bb)]
    }

    #[test]
    fn bell_corrections_match_printed_products() {
        let pp = p(1.0, 0.5);
        let t = 1.0;
        let (i, j) = (1, 2);
        let k = kernels(t, 10, &pp).unwrap();
        for plus in [true, false] {
            let sg = if plus { 1.0 } else { -1.0 };
            let cs = bell_contractions(t, -2..=5, &pp, i, j, plus).unwrap();
            for l in -2..=5 {
                for m in -2..=5 {
                    let want = printed(&k, i, j, sg, l, m);
                    let got = [
                        cs.correction(Majorana::a(l), Majorana::b(m)).unwrap(),
                        cs.correction(Majorana::a(l), Majorana::a(m)).unwrap(),
                        cs.correction(Majorana::b(l), Majorana::b(m)).unwrap(),
                    ];
                    // same-type corrections carry the opposite overall sign
                    let want = [want[0], -want[1], -want[2]];
                    for (g, w) in got.iter().zip(&want) {
                        assert!((g - w).norm() < 1e-13, "l={l} m={m}: {g} vs {w}");
                    }
                }
            }
        }
    }
}

