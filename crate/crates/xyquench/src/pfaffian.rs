//! Pfaffians and Wick assembly of spin correlators from Majorana contractions.

use crate::error::{Error, Result};
use crate::measures::CorrelatorBundle;
use crate::scalar::{cone, cplx, czero, Complex, Real};
use crate::vacuum::{ContractionSet, Majorana, MajoranaKind};

/// Dense skew-symmetric complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct SkewMatrix<T> {
    dim: usize,
    m: Vec<Complex<T>>,
}

impl<T: Real> SkewMatrix<T> {
    /// Builds the matrix from its strict upper triangle, row by row.
    pub fn from_upper(dim: usize, upper: &[Complex<T>]) -> Result<Self> {
        if upper.len() != dim * dim.saturating_sub(1) / 2 {
            return Err(Error::Precondition(format!("{} upper entries for dimension {dim}", upper.len())));
        }
        let mut m = vec![czero(); dim * dim];
        let mut it = upper.iter();
        for p in 0..dim {
            for q in p + 1..dim {
                let v = *it.next().unwrap();
                m[p * dim + q] = v;
                m[q * dim + p] = -v;
            }
        }
        Ok(Self { dim, m })
    }

    /// Accepts a full matrix if it is antisymmetric within `1e-12` of its scale.
    pub fn from_full(dim: usize, m: Vec<Complex<T>>) -> Result<Self> {
        if m.len() != dim * dim {
            return Err(Error::Precondition(format!("{} entries for dimension {dim}", m.len())));
        }
        let scale = m.iter().map(|z| z.norm()).fold(T::one(), T::max);
        let mut dev = T::zero();
        for p in 0..dim {
            for q in p..dim {
                dev = dev.max((m[p * dim + q] + m[q * dim + p]).norm());
            }
        }
        if dev > T::tol(1e-12) * scale {
            return Err(Error::NotSkew(dev.as_f64()));
        }
        Ok(Self { dim, m })
    }

    /// Builds `M_pq = f(p, q)` for `p < q`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Result<Complex<T>>) -> Result<Self> {
        let mut m = vec![czero(); dim * dim];
        for p in 0..dim {
            for q in p + 1..dim {
                let v = f(p, q)?;
                m[p * dim + q] = v;
                m[q * dim + p] = -v;
            }
        }
        Ok(Self { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, q: usize) -> Complex<T> {
        self.m[p * self.dim + q]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.m
    }
}

/// Pfaffian by Parlett-Reid elimination with partial pivoting; closed forms up to 4x4.
pub fn pfaffian<T: Real>(s: &SkewMatrix<T>) -> Result<Complex<T>> {
    let n = s.dim;
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let e = |p: usize, q: usize| s.m[p * n + q];
    match n {
        0 => return Ok(cone()),
        2 => return Ok(e(0, 1)),
        4 => return Ok(e(0, 1) * e(2, 3) - e(0, 2) * e(1, 3) + e(0, 3) * e(1, 2)),
        _ => {}
    }
    let mut a = s.m.clone();
    let mut pf = cone::<T>();
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[kp * n + k].norm();
        for r in k + 2..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            for c in 0..n {
                a.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }
        let piv = a[k * n + k + 1];
        if piv == czero() {
            return Ok(czero());
        }
        pf = pf * piv;
        if k + 2 < n {
            let tau: Vec<Complex<T>> = (k + 2..n).map(|c| a[k * n + c] / piv).collect();
            let col: Vec<Complex<T>> = (k + 2..n).map(|r| a[r * n + k + 1]).collect();
            for (ri, r) in (k + 2..n).enumerate() {
                for (ci, c) in (k + 2..n).enumerate() {
                    a[r * n + c] = a[r * n + c] + tau[ri] * col[ci] - col[ri] * tau[ci];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Ordered Majorana string whose vacuum-style Pfaffian times `prefactor` gives
/// `<S^alpha_l S^beta_m>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorString<T> {
    pub ops: Vec<Majorana>,
    pub prefactor: Complex<T>,
}

/// `s(alpha, beta)` for distance `r`.
pub fn string_prefactor<T: Real>(alpha: Axis, beta: Axis, r: i64) -> Complex<T> {
    let quarter = T::lit(0.25);
    if alpha == beta {
        let sg = if (r * (r + 1) / 2) % 2 == 0 { T::one() } else { -T::one() };
        cplx(quarter * sg, T::zero())
    } else {
        let sg = if (r * (r - 1) / 2) % 2 == 0 { T::one() } else { -T::one() };
        cplx(T::zero(), -quarter * sg)
    }
}

/// Sign of the permutation taking `from` to `to` (same elements, no repeats).
fn permutation_sign(from: &[Majorana], to: &[Majorana]) -> i32 {
    let pos: Vec<usize> = to.iter().map(|x| from.iter().position(|y| y == x).unwrap()).collect();
    let mut inv = 0;
    for a in 0..pos.len() {
        for b in a + 1..pos.len() {
            if pos[a] > pos[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Majorana string for `<S^alpha_l S^beta_m>`, `l < m`.
///
/// Canonical order is all `A` ascending, then all `B` ascending. The prefactor is
/// derived from the Jordan-Wigner reduction of the spin product and equals `s(alpha, beta)`.
pub fn operator_string<T: Real>(alpha: Axis, beta: Axis, l: i64, m: i64) -> Result<OperatorString<T>> {
    if m <= l {
        return Err(Error::Precondition(format!("operator string needs l < m, got {l}, {m}")));
    }
    // spin product reduced to (coefficient, first, last) around the inner pairs A_s B_s
    let (coef, first, last) = match (alpha, beta) {
        (Axis::X, Axis::X) => (cone::<T>(), Majorana::b(l), Majorana::a(m)),
        (Axis::Y, Axis::Y) => (-cone::<T>(), Majorana::a(l), Majorana::b(m)),
        (Axis::X, Axis::Y) => (cplx(T::zero(), -T::one()), Majorana::b(l), Majorana::b(m)),
        (Axis::Y, Axis::X) => (cplx(T::zero(), -T::one()), Majorana::a(l), Majorana::a(m)),
    };
    let mut raw = vec![first];
    for s in l + 1..m {
        raw.push(Majorana::a(s));
        raw.push(Majorana::b(s));
    }
    raw.push(last);
    let mut ops = raw.clone();
    ops.sort_by_key(|x| (x.kind == MajoranaKind::B, x.site));
    let sign = T::from_i64(permutation_sign(&raw, &ops) as i64);
    Ok(OperatorString { ops, prefactor: coef * sign * T::lit(0.25) })
}

/// How the expectation value of a Majorana string is evaluated in a Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellRoute {
    /// One Pfaffian of size `2R + 2` over `(C_bar, string, C^dag)`.
    Enlarged,
    /// `pf(M + K)` with the rank-two correction `K` folded into the contractions.
    RankTwo,
    /// `pf(M) + sum_s pf(P^s)`, row `s` of `P^s` carrying the correction.
    RowReplacement,
}

fn vacuum_matrix<T: Real>(ops: &[Majorana], cs: &ContractionSet<T>) -> Result<SkewMatrix<T>> {
    SkewMatrix::from_fn(ops.len(), |p, q| cs.vacuum_contraction(ops[p], ops[q]))
}

/// Expectation value of an ordered product of distinct Majoranas in the tagged state.
pub fn string_expectation<T: Real>(ops: &[Majorana], cs: &ContractionSet<T>, route: BellRoute) -> Result<Complex<T>> {
    if !cs.has_border() {
        return pfaffian(&vacuum_matrix(ops, cs)?);
    }
    let n = ops.len();
    match route {
        BellRoute::Enlarged => {
            let d = n + 2;
            let m = SkewMatrix::from_fn(d, |p, q| match (p, q) {
                (0, q) if q == d - 1 => Ok(cone()),
                (0, q) => cs.left(ops[q - 1]),
                (p, q) if q == d - 1 => cs.right(ops[p - 1]),
                (p, q) => cs.vacuum_contraction(ops[p - 1], ops[q - 1]),
            })?;
            pfaffian(&m)
        }
        BellRoute::RankTwo => pfaffian(&SkewMatrix::from_fn(n, |p, q| cs.contraction(ops[p], ops[q]))?),
        BellRoute::RowReplacement => {
            let base = vacuum_matrix(ops, cs)?;
            let mut total = pfaffian(&base)?;
            total = total + row_replacement_sum(ops, cs, &base)?;
            Ok(total)
        }
    }
}

/// `sum_s pf(P^s)`: row `s` holds the corrections to later operators, column `s` above the
/// diagonal is zeroed, so every pairing uses exactly one corrected line.
pub fn row_replacement_sum<T: Real>(ops: &[Majorana], cs: &ContractionSet<T>, base: &SkewMatrix<T>) -> Result<Complex<T>> {
    let n = ops.len();
    let mut total = czero();
    for s in 0..n {
        let ps = SkewMatrix::from_fn(n, |p, q| {
            if p == s {
                cs.correction(ops[s], ops[q])
            } else if q == s {
                Ok(czero())
            } else {
                Ok(base.get(p, q))
            }
        })?;
        total = total + pfaffian(&ps)?;
    }
    Ok(total)
}

/// `<S^alpha_l S^beta_m>` for `l != m`.
pub fn spin_correlator<T: Real>(alpha: Axis, beta: Axis, l: i64, m: i64, cs: &ContractionSet<T>) -> Result<Complex<T>> {
    spin_correlator_via(alpha, beta, l, m, cs, BellRoute::Enlarged)
}

pub fn spin_correlator_via<T: Real>(
    alpha: Axis,
    beta: Axis,
    l: i64,
    m: i64,
    cs: &ContractionSet<T>,
    route: BellRoute,
) -> Result<Complex<T>> {
    if l == m {
        return Err(Error::Precondition("two-site correlator needs distinct sites".into()));
    }
    // spins on different sites commute
    let (alpha, beta, l, m) = if l < m { (alpha, beta, l, m) } else { (beta, alpha, m, l) };
    let s = operator_string::<T>(alpha, beta, l, m)?;
    Ok(s.prefactor * string_expectation(&s.ops, cs, route)?)
}

/// `(g_zz, M^z_l, M^z_m)` from the four-operator Wick expansion.
pub fn gzz_and_magnetization<T: Real>(l: i64, m: i64, cs: &ContractionSet<T>) -> Result<(T, T, T)> {
    if l == m {
        return Err(Error::Precondition("two-site correlator needs distinct sites".into()));
    }
    let ops = [Majorana::a(l), Majorana::b(l), Majorana::a(m), Majorana::b(m)];
    let half = T::lit(0.5);
    let mzl = cs.contraction(ops[0], ops[1])? * (-half);
    let mzm = cs.contraction(ops[2], ops[3])? * (-half);
    let gzz = string_expectation(&ops, cs, BellRoute::Enlarged)? * T::lit(0.25);
    Ok((real_part(gzz)?, real_part(mzl)?, real_part(mzm)?))
}

fn real_part<T: Real>(z: Complex<T>) -> Result<T> {
    if z.im.abs() > T::tol(1e-10) {
        return Err(Error::Precondition(format!("expected a real value, imaginary part {:e}", z.im.as_f64())));
    }
    Ok(z.re)
}

/// All two-site correlators and magnetizations of the pair `(l, m)`.
pub fn correlator_bundle<T: Real>(l: i64, m: i64, cs: &ContractionSet<T>) -> Result<CorrelatorBundle<T>> {
    let (g_zz, mz_l, mz_m) = gzz_and_magnetization(l, m, cs)?;
    let g = |a, b| spin_correlator(a, b, l, m, cs).and_then(real_part);
    Ok(CorrelatorBundle {
        g_xx: g(Axis::X, Axis::X)?,
        g_yy: g(Axis::Y, Axis::Y)?,
        g_zz,
        g_xy: g(Axis::X, Axis::Y)?,
        g_yx: g(Axis::Y, Axis::X)?,
        mz_l,
        mz_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotropic::wavepacket;
    use crate::linalg::det_complex;
    use crate::model::ModelParams;
    use crate::vacuum::{bell_contractions, vacuum_contractions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> SkewMatrix<f64> {
        let up: Vec<_> = (0..n * (n - 1) / 2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        SkewMatrix::from_upper(n, &up).unwrap()
    }

    #[test]
    fn small_closed_forms() {
        let a = c(0.3, -1.2);
        assert_eq!(pfaffian(&SkewMatrix::from_upper(2, &[a]).unwrap()).unwrap(), a);
        let e = [c(1.0, 0.5), c(-0.7, 0.2), c(0.4, 0.0), c(2.0, -1.0), c(0.1, 0.9), c(-1.3, 0.6)];
        let want = e[0] * e[5] - e[1] * e[4] + e[2] * e[3];
        let got = pfaffian(&SkewMatrix::from_upper(4, &e).unwrap()).unwrap();
        assert_eq!(got, want);
        assert_eq!(pfaffian(&SkewMatrix::<f64>::from_upper(0, &[]).unwrap()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..20 {
            let n = 2 * (k % 10 + 1);
            let s = random_skew(&mut rng, n);
            let pf = pfaffian(&s).unwrap();
            let det = det_complex(s.as_slice(), n);
            assert!((pf * pf - det).norm() <= 1e-9 * det.norm(), "n={n}");
        }
    }

    #[test]
    fn permutation_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = 8;
            let s = random_skew(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if perm[a] > perm[b] {
                        inv += 1;
                    }
                }
            }
            let det_p = if inv % 2 == 0 { 1.0 } else { -1.0 };
            let m: Vec<_> = (0..n * n).map(|x| s.get(perm[x / n], perm[x % n])).collect();
            let sp = SkewMatrix::from_full(n, m).unwrap();
            let (a, b) = (pfaffian(&sp).unwrap(), pfaffian(&s).unwrap() * det_p);
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(SkewMatrix::from_full(2, bad), Err(Error::NotSkew(_))));
        let odd = SkewMatrix::from_upper(3, &[c(1.0, 0.0); 3]).unwrap();
        assert!(matches!(pfaffian(&odd), Err(Error::OddDimension(3))));
    }

    #[test]
    fn prefactors_follow_closed_form() {
        for r in 1..=9 {
            for (a, b) in [(Axis::X, Axis::X), (Axis::Y, Axis::Y), (Axis::X, Axis::Y), (Axis::Y, Axis::X)] {
                let s = operator_string::<f64>(a, b, 3, 3 + r).unwrap();
                assert_eq!(s.ops.len() as i64, 2 * r);
                assert_eq!(s.prefactor, string_prefactor(a, b, r), "{a:?}{b:?} r={r}");
            }
        }
        let xx = operator_string::<f64>(Axis::X, Axis::X, 4, 5).unwrap();
        assert_eq!(xx.ops, vec![Majorana::a(5), Majorana::b(4)]);
        let yy = operator_string::<f64>(Axis::Y, Axis::Y, 4, 5).unwrap();
        assert_eq!(yy.ops, vec![Majorana::a(4), Majorana::b(5)]);
        let xx3 = operator_string::<f64>(Axis::X, Axis::X, 0, 3).unwrap();
        let want: Vec<_> = [1, 2, 3].map(Majorana::a).into_iter().chain([0, 1, 2].map(Majorana::b)).collect();
        assert_eq!(xx3.ops, want);
    }

    fn params(lambda: f64, gamma: f64) -> ModelParams<f64> {
        ModelParams::infinite(lambda, gamma).unwrap()
    }

    #[test]
    fn vacuum_at_time_zero() {
        let cs = vacuum_contractions(0.0, -2..=6, &params(1.0, 0.5)).unwrap();
        for (a, b) in [(Axis::X, Axis::X), (Axis::Y, Axis::Y), (Axis::X, Axis::Y), (Axis::Y, Axis::X)] {
            for r in 1..=3 {
                assert!(spin_correlator(a, b, 1, 1 + r, &cs).unwrap().norm() < 1e-14);
            }
        }
        let (gzz, ml, mm) = gzz_and_magnetization(1, 2, &cs).unwrap();
        assert!((gzz - 0.25).abs() < 1e-14 && (ml + 0.5).abs() < 1e-14 && (mm + 0.5).abs() < 1e-14);
    }

    #[test]
    fn isotropic_vacuum_stays_empty() {
        let cs = vacuum_contractions(2.0, -2..=6, &params(1.0, 0.0)).unwrap();
        let b = correlator_bundle(0, 2, &cs).unwrap();
        assert!(b.g_xx.abs() < 1e-12 && b.g_xy.abs() < 1e-12);
        assert!((b.g_zz - 0.25).abs() < 1e-12 && (b.mz_l + 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_routes_agree() {
        let pp = params(0.5, 0.5);
        for plus in [true, false] {
            let cs = bell_contractions(1.0, -3..=8, &pp, 1, 2, plus).unwrap();
            for (a, b) in [(Axis::X, Axis::X), (Axis::Y, Axis::Y), (Axis::X, Axis::Y), (Axis::Y, Axis::X)] {
                for (l, m) in [(2, 3), (0, 3), (-1, 4), (5, 1)] {
                    let e = spin_correlator_via(a, b, l, m, &cs, BellRoute::Enlarged).unwrap();
                    let r2 = spin_correlator_via(a, b, l, m, &cs, BellRoute::RankTwo).unwrap();
                    let rr = spin_correlator_via(a, b, l, m, &cs, BellRoute::RowReplacement).unwrap();
                    assert!((e - r2).norm() < 1e-13 && (e - rr).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn row_sum_alone_is_not_the_correlator() {
        // the bare sum of row-replaced Pfaffians misses the vacuum term
        let cs = bell_contractions(1.0, -3..=8, &params(0.5, 0.5), 1, 2, false).unwrap();
        let s = operator_string::<f64>(Axis::X, Axis::X, 2, 3).unwrap();
        let base = vacuum_matrix(&s.ops, &cs).unwrap();
        let bare = s.prefactor * row_replacement_sum(&s.ops, &cs, &base).unwrap();
        let full = spin_correlator(Axis::X, Axis::X, 2, 3, &cs).unwrap();
        assert!((bare - full).norm() > 1e-3);
    }

    #[test]
    fn isotropic_bell_matches_single_particle_state() {
        let (lambda, t) = (1.0, 1.3);
        let pp = params(lambda, 0.0);
        for (plus, phi) in [(true, 0.0), (false, PI)] {
            let cs = bell_contractions(t, -4..=8, &pp, 1, 3, plus).unwrap();
            let w = wavepacket(1, 3, phi, t, lambda).unwrap();
            for (n, m) in [(1, 3), (0, 2), (2, 5), (-1, 4)] {
                let got = correlator_bundle(n, m, &cs).unwrap();
                let want = w.rho2(n, m).correlators();
                for (g, e) in [
                    (got.g_xx, want.g_xx),
                    (got.g_yy, want.g_yy),
                    (got.g_zz, want.g_zz),
                    (got.g_xy, want.g_xy),
                    (got.g_yx, want.g_yx),
                    (got.mz_l, want.mz_l),
                    (got.mz_m, want.mz_m),
                ] {
                    assert!((g - e).abs() < 1e-10, "plus={plus} ({n},{m}): {got:?} vs {want:?}");
                }
            }
        }
    }

    #[test]
    fn symmetric_under_site_exchange() {
        let cs = bell_contractions(0.8, -3..=8, &params(1.0, 1.0), 1, 2, false).unwrap();
        for (a, b) in [(Axis::X, Axis::Y), (Axis::X, Axis::X)] {
            let g1 = spin_correlator(a, b, 1, 4, &cs).unwrap();
            let g2 = spin_correlator(b, a, 4, 1, &cs).unwrap();
            assert_eq!(g1, g2);
        }
    }

    #[test]
    fn distance_seven_is_fast() {
        let cs = vacuum_contractions(1.0, 0..=8, &params(1.0, 0.5)).unwrap();
        let start = std::time::Instant::now();
        let reps = 200;
        for _ in 0..reps {
            spin_correlator(Axis::X, Axis::X, 0, 7, &cs).unwrap();
        }
        let per = start.elapsed().as_secs_f64() / reps as f64;
        assert!(per < 1e-3, "{per} s per point");
    }
}
