//! Dense complex linear algebra shared by every other module.
//!
//! The Hermitian eigensolver in [`eigen`] is the only spectral primitive.
//! Singular value decompositions are read off the Hermitian dilation
//! `[[0, M], [M^*, 0]]` of a square triangular factor, which keeps singular
//! values accurate to `eps·‖M‖` instead of `sqrt(eps)·‖M‖`.

mod eigen;
mod matrix;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use matrix::{inner, max_abs_diff, norm, vec_serde, ComplexMatrix, C64, ONE, ZERO};

/// Relative threshold below which singular values count as zero.
pub const TOL_RANK: f64 = 1e-10;
/// Relative tolerance for structural identities checked at construction.
pub const TOL_EQ: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite matrix entry")]
    NonFinite,
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// Negative eigenvalues down to `-tol·‖M‖` and eigenvalues at rounding level
/// are set to zero before taking roots, so the root of a projection is the
/// projection itself rather than picking up `sqrt(eps)` noise.
pub fn hermitian_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, NumError> {
    hermitian_sqrt_with_floor(m, tol, 0.0)
}

/// As [`hermitian_sqrt`], additionally zeroing eigenvalues `≤ abs_floor`.
/// Callers whose matrices live on a known unit scale (such as `I - T^*T`)
/// use this to discard rounding noise that a relative threshold would keep.
pub fn hermitian_sqrt_with_floor(
    m: &ComplexMatrix,
    tol: f64,
    abs_floor: f64,
) -> Result<ComplexMatrix, NumError> {
    if !m.is_square() {
        return Err(NumError::Dimension(format!("square root of {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let scale = m.frobenius_norm();
    // Absolute floor so matrices that vanish up to rounding are accepted.
    let floor = 64.0 * (n as f64) * f64::EPSILON;
    let asymmetry = m.hermitian_defect();
    if asymmetry > tol * scale + floor {
        return Err(NumError::NotHermitian { asymmetry });
    }
    if n == 0 || scale == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let eig = hermitian_eigen(m);
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -(tol * scale + floor) {
        return Err(NumError::NotPsd { min_eigenvalue: min });
    }
    let noise = (16.0 * (n as f64) * f64::EPSILON * scale).max(abs_floor);
    let roots: Vec<f64> =
        eig.values.iter().map(|&l| if l <= noise { 0.0 } else { l.sqrt() }).collect();
    Ok(reassemble(&eig.vectors, &roots))
}

/// `V diag(values) V^*`.
fn reassemble(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = vectors.rows();
    let k = values.len();
    let mut scaled = vectors.clone();
    for i in 0..n {
        for (j, &val) in values.iter().enumerate().take(k) {
            scaled[(i, j)] *= val;
        }
    }
    scaled.matmul(&vectors.adjoint())
}

/// Thin singular value decomposition `M = U diag(sigma) V^*` with `sigma`
/// descending and `min(rows, cols)` terms. Singular vectors belonging to
/// singular values at rounding level are not meaningful.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows < cols {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }
    let k = cols;
    if k == 0 {
        return Svd { u: ComplexMatrix::zeros(rows, 0), sigma: Vec::new(), v: ComplexMatrix::zeros(0, 0) };
    }
    let (q, r) = householder_qr(m);
    let mut dilation = ComplexMatrix::zeros(2 * k, 2 * k);
    dilation.set_block(0, k, &r);
    dilation.set_block(k, 0, &r.adjoint());
    let eig = hermitian_eigen(&dilation);
    let mut ur = ComplexMatrix::zeros(k, k);
    let mut vr = ComplexMatrix::zeros(k, k);
    let mut sigma = Vec::with_capacity(k);
    let s2 = std::f64::consts::SQRT_2;
    for t in 0..k {
        let src = 2 * k - 1 - t;
        sigma.push(eig.values[src].max(0.0));
        for i in 0..k {
            ur[(i, t)] = eig.vectors[(i, src)] * s2;
            vr[(i, t)] = eig.vectors[(k + i, src)] * s2;
        }
    }
    Svd { u: q.matmul(&ur), sigma, v: vr }
}

/// Householder QR of a tall matrix: returns `Q` (rows×cols, orthonormal
/// columns) and upper-triangular `R` (cols×cols) with `M = Q R`.
pub fn householder_qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (rows, cols) = m.shape();
    assert!(rows >= cols, "householder_qr needs rows >= cols");
    let mut a = m.clone();
    let mut reflectors: Vec<(C64, Vec<C64>)> = Vec::with_capacity(cols);
    for k in 0..cols {
        let alpha = a[(k, k)];
        let xnorm = ((k + 1)..rows).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 && alpha.im == 0.0 {
            reflectors.push((ZERO, Vec::new()));
            continue;
        }
        let nrm = alpha.norm().hypot(xnorm);
        let beta = if alpha.re >= 0.0 { -nrm } else { nrm };
        let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
        let scale = ONE / (alpha - beta);
        let mut v = vec![ONE];
        v.extend(((k + 1)..rows).map(|i| a[(i, k)] * scale));
        a[(k, k)] = C64::new(beta, 0.0);
        for i in (k + 1)..rows {
            a[(i, k)] = ZERO;
        }
        // Remaining columns <- H^* col with H^* = I - conj(tau) v v^*.
        for j in (k + 1)..cols {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * a[(k + i, j)]).sum();
            let f = tau.conj() * s;
            for (i, vi) in v.iter().enumerate() {
                a[(k + i, j)] -= f * vi;
            }
        }
        reflectors.push((tau, v));
    }
    let r = a.block(0, 0, cols, cols);
    let mut q = ComplexMatrix::zeros(rows, cols);
    for i in 0..cols {
        q[(i, i)] = ONE;
    }
    for (k, (tau, v)) in reflectors.iter().enumerate().rev() {
        if *tau == ZERO {
            continue;
        }
        for j in 0..cols {
            let s: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * q[(k + i, j)]).sum();
            let f = tau * s;
            for (i, vi) in v.iter().enumerate() {
                q[(k + i, j)] -= f * vi;
            }
        }
    }
    (q, r)
}

/// Gram–Schmidt with one reorthogonalization pass. Columns whose residual
/// falls below `drop_tol` (relative to their original norm) are discarded.
pub fn orthonormalize(columns: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for col in columns {
        let original = norm(col);
        if original == 0.0 {
            continue;
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv > drop_tol * original {
            v.iter_mut().for_each(|z| *z /= nv);
            basis.push(v);
        }
    }
    basis
}

/// Rotates a unit column so its first non-negligible coordinate is real positive.
fn fix_phase(col: &mut [C64]) {
    let pivot = col.iter().find(|z| z.norm() > 1e-8).copied();
    if let Some(p) = pivot {
        let phase = p.conj() / p.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
}

fn is_hermitian_exactish(m: &ComplexMatrix) -> bool {
    m.is_square() && m.hermitian_defect() <= 1e-14 * m.max_abs().max(f64::MIN_POSITIVE)
}

/// Orthonormal basis of the column space of `m`.
///
/// The rank counts singular values above `tol·sigma_max`. Columns come in
/// order of decreasing singular value, each with its first non-negligible
/// coordinate real positive.
pub fn range_onb(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let rows = m.rows();
    if m.max_abs() == 0.0 || m.cols() == 0 {
        return ComplexMatrix::zeros(rows, 0);
    }
    let candidates: Vec<Vec<C64>> = if is_hermitian_exactish(m) {
        let eig = hermitian_eigen(m);
        let smax = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut idx: Vec<usize> =
            (0..rows).filter(|&k| eig.values[k].abs() > tol * smax).collect();
        idx.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()).then(a.cmp(&b)));
        idx.iter().map(|&k| eig.vectors.column(k)).collect()
    } else {
        let s = svd(m);
        let smax = s.sigma.first().copied().unwrap_or(0.0);
        (0..s.sigma.len()).filter(|&k| s.sigma[k] > tol * smax).map(|k| s.u.column(k)).collect()
    };
    let mut basis = orthonormalize(&candidates, 1e-6);
    basis.iter_mut().for_each(|c| fix_phase(c));
    ComplexMatrix::from_columns(rows, &basis)
}

/// Orthonormal basis of the orthogonal complement of the range of a matrix
/// with orthonormal columns `q` inside its ambient space.
pub fn complement_onb(q: &ComplexMatrix) -> ComplexMatrix {
    let n = q.rows();
    if q.cols() == 0 {
        return ComplexMatrix::identity(n);
    }
    let projector = ComplexMatrix::identity(n).sub(&q.matmul(&q.adjoint()));
    let eig = hermitian_eigen(&projector);
    let mut cols: Vec<Vec<C64>> =
        (0..n).rev().filter(|&k| eig.values[k] > 0.5).map(|k| eig.vectors.column(k)).collect();
    cols = orthonormalize(&cols, 1e-6);
    cols.iter_mut().for_each(|c| fix_phase(c));
    ComplexMatrix::from_columns(n, &cols)
}

/// Largest singular value, from the eigenvalues of the smaller Gram matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let gram = if m.cols() <= m.rows() { m.adjoint().matmul(m) } else { m.matmul(&m.adjoint()) };
    let vals = hermitian_eigenvalues(&gram);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Moore–Penrose pseudoinverse; singular values at or below `tol·sigma_max` count as zero.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if m.max_abs() == 0.0 || rows == 0 || cols == 0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    if is_hermitian_exactish(m) {
        let eig = hermitian_eigen(m);
        let smax = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let inv: Vec<f64> = eig
            .values
            .iter()
            .map(|&l| if l.abs() > tol * smax { 1.0 / l } else { 0.0 })
            .collect();
        return reassemble(&eig.vectors, &inv);
    }
    let s = svd(m);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..s.sigma.len()).filter(|&k| s.sigma[k] > tol * smax).collect();
    let mut out = ComplexMatrix::zeros(cols, rows);
    for &k in &keep {
        let vk = s.v.column(k);
        let uk = s.u.column(k);
        let inv = 1.0 / s.sigma[k];
        for i in 0..cols {
            let a = vk[i] * inv;
            for j in 0..rows {
                out[(i, j)] += a * uk[j].conj();
            }
        }
    }
    out
}

/// Matrix of i.i.d. complex standard normal entries, `(x + iy)/sqrt(2)`.
pub fn random_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re * s, im * s)
        })
        .collect();
    ComplexMatrix::from_vec_unchecked(rows, cols, data)
}

/// Seeded random isometry `V` (rows×cols) with `V^* V = I`: Gram–Schmidt on a
/// complex Gaussian matrix, so the triangular factor has a real positive diagonal.
pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> Result<ComplexMatrix, NumError> {
    if cols > rows {
        return Err(NumError::Dimension(format!("no isometry from dimension {cols} into {rows}")));
    }
    let mut s = seed;
    loop {
        let g = random_gaussian_matrix(rows, cols, s);
        let basis = orthonormalize(&g.columns(), 1e-8);
        if basis.len() == cols {
            return Ok(ComplexMatrix::from_columns(rows, &basis));
        }
        // Rank-deficient draw; essentially impossible for Gaussian entries.
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
    }
}
