//! Dense Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal, implicitly shifted QL on that, then back
//! transformation of the requested lowest eigenvectors only.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Real;

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigh<T> {
    pub values: Vec<T>,
    /// `vectors[i]` is the normalized eigenvector belonging to `values[i]`.
    pub vectors: Vec<Vec<Complex<T>>>,
}

struct Reflector<T> {
    /// Reflector acts on indices `offset..n`.
    offset: usize,
    v: Vec<Complex<T>>,
}

/// Largest entry modulus; the scale used in diagnostics.
pub fn max_abs<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Diagonalize the Hermitian `n x n` row-major matrix `a`, returning all
/// eigenvalues and the eigenvectors of the `k` lowest.
pub fn eigh<T: Real>(a: &[Complex<T>], n: usize, k: usize) -> Result<Eigh<T>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    let k = k.min(n);
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: vec![] });
    }
    let norm = max_abs(a);

    let mut work = a.to_vec();
    let (mut d, mut e, reflectors) = tridiagonalize(&mut work, n);

    // Unitary diagonal D with D* T' D real: off-diagonals become |e_i|.
    let mut phase = vec![Complex::new(T::one(), T::zero()); n];
    let mut e_real = vec![T::zero(); n];
    for i in 0..n.saturating_sub(1) {
        let r = e[i].norm();
        phase[i + 1] = if r > T::zero() { phase[i] * (e[i] / r) } else { phase[i] };
        e_real[i] = r;
    }
    e.clear();

    let mut z = identity_rows::<T>(n);
    tql2(&mut d, &mut e_real, &mut z, norm)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();

    let vectors = order[..k]
        .iter()
        .map(|&col| {
            let mut y: Vec<Complex<T>> =
                (0..n).map(|r| phase[r] * z[col][r]).collect();
            for refl in reflectors.iter().rev() {
                apply_reflector(refl, &mut y);
            }
            fix_phase(&mut y);
            y
        })
        .collect();

    Ok(Eigh { values, vectors })
}

fn identity_rows<T: Real>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| {
            let mut row = vec![T::zero(); n];
            row[i] = T::one();
            row
        })
        .collect()
}

fn apply_reflector<T: Real>(refl: &Reflector<T>, y: &mut [Complex<T>]) {
    let tail = &mut y[refl.offset..];
    let dot: Complex<T> = refl.v.iter().zip(tail.iter()).map(|(v, y)| v.conj() * y).sum();
    let two = T::lit(2.0);
    for (yi, vi) in tail.iter_mut().zip(&refl.v) {
        *yi -= vi * dot * two;
    }
}

/// Make the first non-negligible component real and positive.
pub fn fix_phase<T: Real>(v: &mut [Complex<T>]) {
    let peak = v.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if peak == T::zero() {
        return;
    }
    let thresh = peak * T::lit(1e-6);
    if let Some(z) = v.iter().find(|z| z.norm() >= thresh).copied() {
        let rot = z.conj() / z.norm();
        v.iter_mut().for_each(|c| *c *= rot);
    }
}

/// In-place Householder reduction. Returns the diagonal, the complex
/// sub-diagonal `e[i] = T'(i+1, i)` and the reflectors used.
fn tridiagonalize<T: Real>(
    a: &mut [Complex<T>],
    n: usize,
) -> (Vec<T>, Vec<Complex<T>>, Vec<Reflector<T>>) {
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);
    let mut reflectors = Vec::new();
    let mut p = vec![zero; n];
    let mut w = vec![zero; n];

    for col in 0..n.saturating_sub(2) {
        let off = col + 1;
        let m = n - off;
        let x0 = a[off * n + col];
        let tail_sq: T = (off + 1..n).map(|r| a[r * n + col].norm_sqr()).sum();
        if tail_sq == T::zero() {
            continue;
        }
        let sigma = (x0.norm_sqr() + tail_sq).sqrt();
        let unit = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::new(T::one(), T::zero()) };
        let alpha = -unit * sigma;

        let mut v: Vec<Complex<T>> = (off..n).map(|r| a[r * n + col]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);

        // Column/row `col` collapse onto alpha.
        a[off * n + col] = alpha;
        a[col * n + off] = alpha.conj();
        for r in off + 1..n {
            a[r * n + col] = zero;
            a[col * n + r] = zero;
        }

        // Trailing block B <- B - v w* - w v*, w = 2p - 2 (v* p) v, p = B v.
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(b, v)| b * v).sum();
        }
        let vp: Complex<T> = v.iter().zip(&p[..m]).map(|(v, p)| v.conj() * p).sum();
        for i in 0..m {
            w[i] = p[i] * two - v[i] * vp * two;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }

        reflectors.push(Reflector { offset: off, v });
    }

    let d = (0..n).map(|i| a[i * n + i].re).collect();
    let e = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i]).collect();
    (d, e, reflectors)
}

/// Implicit QL on a symmetric tridiagonal (`e[i]` couples `i` and `i+1`,
/// `e.len() == n`, last entry zero). `z[j]` accumulates eigenvector `j`.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], z: &mut [Vec<T>], norm: T) -> Result<()> {
    let n = d.len();
    let eps = T::epsilon();
    let max_iter = 30 * n.max(1);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    e[n - 1] = T::zero();

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence { dim: n, index: l, norm: norm.as_f64() });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = z.split_at_mut(i + 1);
                    let zi = &mut lo[i];
                    let zi1 = &mut hi[0];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
