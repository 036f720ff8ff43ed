//! Small dense kernels generic over the scalar type. Matrices are row-major.

use crate::scalar::{cone, czero, Complex, Real};

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Returns ascending eigenvalues and the matching eigenvectors as columns.
pub fn hermitian_eigen<T: Real>(a: &[Complex<T>], n: usize) -> (Vec<T>, Vec<Complex<T>>) {
    let mut m = a.to_vec();
    let mut v = vec![czero::<T>(); n * n];
    for i in 0..n {
        v[i * n + i] = cone();
    }
    let scale: T = m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let stop = T::epsilon() * T::epsilon() * scale * scale;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum();
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let ph = apq / mag;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // V = identity except [[c, s], [-s conj(ph), c conj(ph)]] on (p, q)
                let vpp = Complex::new(c, T::zero());
                let vpq = Complex::new(s, T::zero());
                let vqp = ph.conj() * (-s);
                let vqq = ph.conj() * c;
                for r in 0..n {
                    let (xp, xq) = (m[r * n + p], m[r * n + q]);
                    m[r * n + p] = xp * vpp + xq * vqp;
                    m[r * n + q] = xp * vpq + xq * vqq;
                    let (ep, eq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = ep * vpp + eq * vqp;
                    v[r * n + q] = ep * vpq + eq * vqq;
                }
                for col in 0..n {
                    let (xp, xq) = (m[p * n + col], m[q * n + col]);
                    m[p * n + col] = vpp.conj() * xp + vqp.conj() * xq;
                    m[q * n + col] = vpq.conj() * xp + vqq.conj() * xq;
                }
                m[p * n + q] = czero();
                m[q * n + p] = czero();
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.partial_cmp(&m[j * n + j].re).unwrap());
    let vals = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vecs = vec![czero::<T>(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new] = v[r * n + old];
        }
    }
    (vals, vecs)
}

/// Determinant by LU decomposition with partial pivoting.
pub fn det_complex<T: Real>(a: &[Complex<T>], n: usize) -> Complex<T> {
    let mut m = a.to_vec();
    let mut det = cone::<T>();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].norm().partial_cmp(&m[j * n + k].norm()).unwrap())
            .unwrap();
        if m[piv * n + k] == czero() {
            return czero();
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = m[k * n + k];
        det = det * d;
        for i in k + 1..n {
            let f = m[i * n + k] / d;
            if f == czero() {
                continue;
            }
            for c in k + 1..n {
                let u = m[k * n + c];
                m[i * n + c] = m[i * n + c] - f * u;
            }
        }
    }
    det
}

/// Real determinant by LU decomposition with partial pivoting.
pub fn det_real<T: Real>(a: &[T], n: usize) -> T {
    let c: Vec<Complex<T>> = a.iter().map(|&x| Complex::new(x, T::zero())).collect();
    det_complex(&c, n).re
}

/// Singular values of a square matrix by one-sided Jacobi rotations, descending.
/// Accurate to `eps * ||a||` in absolute terms, without squaring the matrix.
pub fn singular_values<T: Real>(a: &[Complex<T>], n: usize) -> Vec<T> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut al, mut be, mut ga) = (T::zero(), T::zero(), czero::<T>());
                for r in 0..n {
                    let (x, y) = (m[r * n + p], m[r * n + q]);
                    al += x.norm_sqr();
                    be += y.norm_sqr();
                    ga = ga + x.conj() * y;
                }
                let mag = ga.norm();
                if mag <= T::epsilon() * (al * be).sqrt() || mag == T::zero() {
                    continue;
                }
                rotated = true;
                let ph = ga / mag;
                let theta = (be - al) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let vqp = ph.conj() * (-s);
                let vqq = ph.conj() * c;
                for r in 0..n {
                    let (x, y) = (m[r * n + p], m[r * n + q]);
                    m[r * n + p] = x * c + y * vqp;
                    m[r * n + q] = x * s + y * vqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut out: Vec<T> = (0..n)
        .map(|c| (0..n).map(|r| m[r * n + c].norm_sqr()).sum::<T>().sqrt())
        .collect();
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}

pub fn matmul<T: Real>(a: &[Complex<T>], b: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    let mut out = vec![czero::<T>(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == czero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 4, 7] {
            let mut a = vec![Complex::new(0.0_f64, 0.0_f64); n * n];
            for i in 0..n {
                a[i * n + i] = Complex::new(rng.gen_range(-1.0..1.0), 0.0_f64);
                for j in i + 1..n {
                    let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    a[i * n + j] = z;
                    a[j * n + i] = z.conj();
                }
            }
            let (w, v) = hermitian_eigen(&a, n);
            for i in 0..n {
                for j in 0..n {
                    let r: Complex<f64> = (0..n).map(|k| v[i * n + k] * w[k] * v[j * n + k].conj()).sum();
                    assert!((r - a[i * n + j]).norm() < 1e-13);
                }
            }
            assert!(w.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn jacobi_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 4;
        let a: Vec<Complex<f64>> = (0..n * n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut aha = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                aha[i * n + j] = (0..n).map(|r| a[r * n + i].conj() * a[r * n + j]).sum();
            }
        }
        let (w, _) = hermitian_eigen(&aha, n);
        let mut sv: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        sv.reverse();
        let got = singular_values(&a, n);
        for (g, e) in got.iter().zip(&sv) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_determinant() {
        let a = [2.0_f64, 1.0_f64, 0.0_f64, 1.0_f64, 3.0_f64, 1.0_f64, 0.0_f64, 1.0_f64, 4.0_f64];
        assert!((det_real(&a, 3) - 18.0_f64).abs() < 1e-13);
        let b = [0.0_f64, 1.0_f64, 1.0_f64, 0.0_f64];
        assert!((det_real(&b, 2) + 1.0_f64).abs() < 1e-15);
    }
}
