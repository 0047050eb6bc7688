//! Dense nonsymmetric eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form and the Francis double-shift QR iteration.
//!
//! The working buffers are 1-based (row and column 0 unused) so the index
//! arithmetic follows the classical formulation line for line.

use ndarray::Array2;
use num_complex::Complex64;

/// The QR iteration gave up before every eigenvalue was isolated.
#[derive(Debug, Clone)]
pub struct QrFailure {
    /// Eigenvalues deflated before the iteration budget ran out.
    pub converged: Vec<Complex64>,
    pub iterations: usize,
}

struct Buf {
    n: usize,
    a: Vec<f64>,
}

impl Buf {
    fn from_array(m: &Array2<f64>) -> Self {
        let n = m.nrows();
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for ((i, j), &v) in m.indexed_iter() {
            a[(i + 1) * (n + 1) + j + 1] = v;
        }
        Buf { n, a }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (self.n + 1) + j]
    }
}

/// Eigenvalues of a square matrix. Complex eigenvalues come out in exactly
/// conjugate pairs (identical real parts, negated imaginary parts).
pub fn eigenvalues(m: &Array2<f64>) -> Result<Vec<Complex64>, QrFailure> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigenvalues needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut buf = Buf::from_array(m);
    balance(&mut buf);
    hessenberg(&mut buf);
    hqr(&mut buf)
}

// Diagonal similarity by powers of two so that row and column norms are
// comparable; exact in floating point.
fn balance(b: &mut Buf) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = b.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += b.get(j, i).abs();
                    r += b.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= SQRDX;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= SQRDX;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *b.at(i, j) *= g;
                    }
                    for j in 1..=n {
                        *b.at(j, i) *= f;
                    }
                }
            }
        }
    }
}

// Orthogonal similarity reduction to upper Hessenberg form.
fn hessenberg(b: &mut Buf) {
    let n = b.n;
    let (low, high) = (1, n);
    let mut ort = vec![0.0; n + 1];
    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += b.get(i, m - 1).abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..=high).rev() {
            ort[i] = b.get(i, m - 1) / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;
        for j in m..=n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * b.get(i, j);
            }
            f /= h;
            for i in m..=high {
                *b.at(i, j) -= f * ort[i];
            }
        }
        for i in 1..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * b.get(i, j);
            }
            f /= h;
            for j in m..=high {
                *b.at(i, j) -= f * ort[j];
            }
        }
        ort[m] *= scale;
        *b.at(m, m - 1) = scale * g;
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            *b.at(i, j) = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr(b: &mut Buf) -> Result<Vec<Complex64>, QrFailure> {
    let n = b.n;
    let max_iterations = 100 * n.max(1);
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut done = vec![false; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += b.get(i, j).abs();
        }
    }

    let mut total = 0usize;
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w): (f64, f64, f64, f64);
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = b.get(l - 1, l - 1).abs() + b.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if b.get(l, l - 1).abs() + s == s {
                    *b.at(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            x = b.get(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                done[nn] = true;
                nn -= 1;
            } else {
                y = b.get(nn - 1, nn - 1);
                w = b.get(nn, nn - 1) * b.get(nn - 1, nn);
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    done[nn - 1] = true;
                    done[nn] = true;
                    nn -= 2;
                } else {
                    if total >= max_iterations {
                        let converged = (1..=n)
                            .filter(|&i| done[i])
                            .map(|i| Complex64::new(wr[i], wi[i]))
                            .collect();
                        return Err(QrFailure {
                            converged,
                            iterations: total,
                        });
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            *b.at(i, i) -= x;
                        }
                        let s = b.get(nn, nn - 1).abs() + b.get(nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    total += 1;
                    // look for two consecutive small subdiagonal elements
                    let mut m = nn - 2;
                    loop {
                        z = b.get(m, m);
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / b.get(m + 1, m) + b.get(m, m + 1);
                        q = b.get(m + 1, m + 1) - z - r - s;
                        r = b.get(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = b.get(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs()
                            * (b.get(m - 1, m - 1).abs() + z.abs() + b.get(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        *b.at(i, i - 2) = 0.0;
                        if i != m + 2 {
                            *b.at(i, i - 3) = 0.0;
                        }
                    }
                    // double QR step on rows l..nn, columns m..nn
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = b.get(k, k - 1);
                            q = b.get(k + 1, k - 1);
                            r = 0.0;
                            if k != nn - 1 {
                                r = b.get(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    *b.at(k, k - 1) = -b.get(k, k - 1);
                                }
                            } else {
                                *b.at(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = b.get(k, j) + q * b.get(k + 1, j);
                                if k != nn - 1 {
                                    p += r * b.get(k + 2, j);
                                    *b.at(k + 2, j) -= p * z;
                                }
                                *b.at(k + 1, j) -= p * y;
                                *b.at(k, j) -= p * x;
                            }
                            let mmin = nn.min(k + 3);
                            for i in l..=mmin {
                                p = x * b.get(i, k) + y * b.get(i, k + 1);
                                if k != nn - 1 {
                                    p += z * b.get(i, k + 2);
                                    *b.at(i, k + 2) -= p * r;
                                }
                                *b.at(i, k + 1) -= p * q;
                                *b.at(i, k) -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Relative residual `‖M v − λ v‖ / (‖M‖∞ ‖v‖)` of an approximate
/// eigenvector found by inverse iteration; small values confirm `λ` is an
/// eigenvalue of `M`.
pub fn inverse_iteration_residual(m: &Array2<f64>, lambda: Complex64) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let norm = infinity_norm(m).max(f64::MIN_POSITIVE);
    // shift slightly off the eigenvalue so the solve stays nonsingular
    let shift = lambda + Complex64::new(norm * 1e-10, norm * 1e-10);
    let mut shifted: Vec<Complex64> = m.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for i in 0..n {
        shifted[i * n + i] -= shift;
    }
    let Some(lu) = ComplexLu::factor(shifted, n) else {
        // exactly singular: the shift itself is an eigenvalue
        return 0.0;
    };
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64) * 0.37, 0.5 - (i as f64) * 0.11))
        .collect();
    for _ in 0..3 {
        v = lu.solve(&v);
        let len = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(len.is_finite() && len > 0.0) {
            return f64::INFINITY;
        }
        v.iter_mut().for_each(|c| *c /= len);
    }
    let mut res = 0.0;
    for i in 0..n {
        let mut acc = -lambda * v[i];
        for j in 0..n {
            acc += m[[i, j]] * v[j];
        }
        res += acc.norm_sqr();
    }
    res.sqrt() / norm
}

pub fn infinity_norm(m: &Array2<f64>) -> f64 {
    m.outer_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn factor(mut a: Vec<Complex64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n).max_by(|&i, &j| {
                a[i * n + k]
                    .norm()
                    .partial_cmp(&a[j * n + k].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[pivot * n + k].norm() == 0.0 {
                return None;
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            let d = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                for j in (k + 1)..n {
                    let sub = f * a[k * n + j];
                    a[i * n + j] -= sub;
                }
            }
        }
        Some(ComplexLu { n, lu: a, perm })
    }

    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let sub = self.lu[i * n + j] * y[j];
                y[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = self.lu[i * n + j] * y[j];
                y[i] -= sub;
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }
}
