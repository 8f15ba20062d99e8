//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations (EISPACK tql2).

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

struct Reflector {
    tau: C64,
    v: Vec<C64>,
}

/// Reduces the Hermitian part of `m` in place (row-major `a`) to tridiagonal
/// form. Returns (diag, offdiag, reflectors); `offdiag[k]` couples k and k+1.
fn tridiagonalize(a: &mut [C64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<Reflector>) {
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let alpha = a[(k + 1) * n + k];
        let xnorm = ((k + 2)..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 && alpha.im == 0.0 {
            off[k] = alpha.re;
            reflectors.push(Reflector { tau: ZERO, v: Vec::new() });
            continue;
        }
        let norm = alpha.norm().hypot(xnorm);
        let beta = if alpha.re >= 0.0 { -norm } else { norm };
        let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
        let scale = ONE / (alpha - beta);
        let mut v = Vec::with_capacity(m);
        v.push(ONE);
        for i in (k + 2)..n {
            v.push(a[i * n + k] * scale);
        }
        off[k] = beta;

        // Trailing block S = a[k+1.., k+1..] <- H^* S H with H = I - tau v v^*.
        let base = k + 1;
        let w = &mut w[..m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &a[(base + i) * n + base..(base + i) * n + n];
            let s: C64 = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            *wi = tau * s;
        }
        let wv: C64 = w.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
        let corr = -0.5 * tau * wv;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += corr * vi;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        reflectors.push(Reflector { tau, v });
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    (diag, off, reflectors)
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` holds the element
/// coupling i-1 and i (e[0] ignored). When `zt` is given it accumulates the
/// transposed eigenvector matrix (row k = eigenvector k).
fn tql2(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) {
    let n = d.len();
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    break;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
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
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
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
        e[l] = 0.0;
    }
}

fn symmetrized(m: &ComplexMatrix) -> Vec<C64> {
    assert!(m.is_square(), "eigendecomposition needs a square matrix");
    let n = m.rows();
    let mut a = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)].conj());
        }
    }
    a
}

/// Eigenvalues (ascending) of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut a = symmetrized(m);
    let (mut d, off, _) = tridiagonalize(&mut a, n);
    let mut e = vec![0.0; n];
    for (k, &b) in off.iter().enumerate() {
        e[k + 1] = b;
    }
    tql2(&mut d, &mut e, None);
    d.sort_by(|x, y| x.total_cmp(y));
    d
}

/// Full eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut a = symmetrized(m);
    let (mut d, off, reflectors) = tridiagonalize(&mut a, n);
    let mut e = vec![0.0; n];
    for (k, &b) in off.iter().enumerate() {
        e[k + 1] = b;
    }
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some(&mut zt));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));

    // Row-major X with X[:, k] = Z[:, order[k]], then X <- H_0 … H_{n-2} X.
    let mut x = vec![ZERO; n * n];
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            x[i * n + k] = C64::new(zt[src * n + i], 0.0);
        }
    }
    let mut tmp = vec![ZERO; n];
    for (k, refl) in reflectors.iter().enumerate().rev() {
        if refl.tau == ZERO {
            continue;
        }
        let base = k + 1;
        // tmp = v^* X[base.., :]
        tmp.iter_mut().for_each(|t| *t = ZERO);
        for (i, vi) in refl.v.iter().enumerate() {
            let vc = vi.conj();
            let row = &x[(base + i) * n..(base + i + 1) * n];
            for (t, xij) in tmp.iter_mut().zip(row) {
                *t += vc * xij;
            }
        }
        for (i, vi) in refl.v.iter().enumerate() {
            let f = refl.tau * vi;
            let row = &mut x[(base + i) * n..(base + i + 1) * n];
            for (xij, t) in row.iter_mut().zip(&tmp) {
                *xij -= f * t;
            }
        }
    }
    let values = order.iter().map(|&k| d[k]).collect();
    HermitianEigen { values, vectors: ComplexMatrix::from_vec_unchecked(n, n, x) }
}
