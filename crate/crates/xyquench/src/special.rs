//! Bessel functions of the first kind and composite Gauss-Legendre quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const BESSEL_MAX_ORDER: i64 = 2000;
pub const BESSEL_MAX_ARG: f64 = 2000.0;

/// `J_n(x)` for integer order.
pub fn bessel_j<T: Real>(n: i64, x: T) -> Result<T> {
    check_bessel_range(n, x)?;
    let table = bessel_j_table(n.unsigned_abs() as usize, x)?;
    let v = table[n.unsigned_abs() as usize];
    Ok(if n < 0 && n % 2 != 0 { -v } else { v })
}

/// `J_0(x), ..., J_{n_max}(x)` from a single downward recurrence.
///
/// Miller's algorithm normalized by `J_0 + 2 sum J_{2k} = 1`. The start order sits far
/// enough above both `n_max` and `x` that the seed error is negligible at every order.
pub fn bessel_j_table<T: Real>(n_max: usize, x: T) -> Result<Vec<T>> {
    check_bessel_range(n_max as i64, x)?;
    let mut out = vec![T::zero(); n_max + 1];
    if x == T::zero() {
        out[0] = T::one();
        return Ok(out);
    }
    let xf = x.as_f64();
    let top = (n_max as f64).max(xf) + 30.0 + 20.0 * xf.cbrt();
    let mut start = top.ceil() as usize;
    start += start % 2;

    let big = T::max_value().sqrt();
    let two = T::lit(2.0);
    let mut vals = vec![T::zero(); start + 2];
    vals[start] = T::min_positive_value().sqrt();
    let mut k = start;
    while k > 0 {
        let next = two * T::from_i64(k as i64) / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > big {
            let s = T::one() / big;
            for v in vals[k - 1..].iter_mut() {
                *v *= s;
            }
        }
        k -= 1;
    }
    let mut norm = vals[0];
    let mut m = 2;
    while m <= start {
        norm += two * vals[m];
        m += 2;
    }
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        *o = *v / norm;
    }
    Ok(out)
}

fn check_bessel_range<T: Real>(n: i64, x: T) -> Result<()> {
    if n.abs() > BESSEL_MAX_ORDER || !(x >= T::zero()) || x.as_f64() > BESSEL_MAX_ARG {
        return Err(Error::OutOfRange(format!("J_{n}({x})")));
    }
    Ok(())
}

/// Points per Gauss-Legendre panel.
pub const GL_POINTS: usize = 10;
/// Hard cap on the panel count before giving up.
pub const MAX_PANELS: usize = 400_000;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_i64(n as i64);
    for i in 0..(n + 1) / 2 {
        let guess = (T::PI() * (T::from_i64(i as i64) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut z = guess;
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= T::epsilon() {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != T::zero() {
            dp = d;
        }
        let w = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    for k in 2..=n {
        let kf = T::from_i64(k as i64);
        let p2 = ((T::lit(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_i64(n as i64);
    (p1, nf * (z * p1 - p0) / (z * z - T::one()))
}

/// Composite Gauss-Legendre rule on `[0, pi]`.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub panels: usize,
}

impl<T: Real> Quadrature<T> {
    pub fn with_panels(panels: usize) -> Result<Self> {
        if panels == 0 || panels > MAX_PANELS {
            return Err(Error::QuadratureFailure { panels, cap: MAX_PANELS });
        }
        let (x, w) = gauss_legendre::<T>(GL_POINTS);
        let h = T::PI() / T::from_i64(panels as i64);
        let half = h / T::lit(2.0);
        let mut nodes = Vec::with_capacity(panels * GL_POINTS);
        let mut weights = Vec::with_capacity(panels * GL_POINTS);
        for p in 0..panels {
            let mid = h * T::from_i64(p as i64) + half;
            for (xi, wi) in x.iter().zip(w.iter()) {
                nodes.push(mid + half * *xi);
                weights.push(half * *wi);
            }
        }
        Ok(Self { nodes, weights, panels })
    }

    /// Panel count `ceil(8 (1 + omega))` for integrands oscillating at angular rate `omega`.
    pub fn for_frequency(omega: T) -> Result<Self> {
        let p = (8.0 * (1.0 + omega.as_f64().abs())).ceil();
        if !p.is_finite() || p > MAX_PANELS as f64 {
            return Err(Error::QuadratureFailure { panels: p as usize, cap: MAX_PANELS });
        }
        Self::with_panels(p as usize)
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&k, &w)| w * f(k)).sum()
    }
}
