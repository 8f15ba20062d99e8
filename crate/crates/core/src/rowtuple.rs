//! Operator tuples `(T_1, …, T_d)` on a common space and their defect data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{
    hermitian_eigenvalues, hermitian_sqrt_with_floor, operator_norm, range_onb, ComplexMatrix, TOL_RANK,
};

/// `d` square matrices of equal size `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorTuple {
    d: usize,
    n: usize,
    ops: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct TupleJson {
    d: usize,
    n: usize,
    ops: Vec<ComplexMatrix>,
}

impl<'de> Deserialize<'de> for OperatorTuple {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = TupleJson::deserialize(de)?;
        let t = OperatorTuple::new(raw.ops).map_err(serde::de::Error::custom)?;
        if t.d != raw.d || t.n != raw.n {
            return Err(serde::de::Error::custom("tuple header disagrees with operators"));
        }
        Ok(t)
    }
}

impl OperatorTuple {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let d = ops.len();
        if d == 0 {
            return Err(Error::Shape("empty operator tuple".into()));
        }
        let n = ops[0].rows();
        for (j, op) in ops.iter().enumerate() {
            if op.shape() != (n, n) {
                return Err(Error::Shape(format!(
                    "operator {} is {}x{}, expected {n}x{n}",
                    j + 1,
                    op.rows(),
                    op.cols()
                )));
            }
        }
        Ok(Self { d, n, ops })
    }

    pub fn zero(d: usize, n: usize) -> Self {
        Self { d, n, ops: vec![ComplexMatrix::zeros(n, n); d] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `T_j` for a letter `j ∈ 1..=d`.
    pub fn op(&self, j: usize) -> &ComplexMatrix {
        &self.ops[j - 1]
    }

    /// Row operator `[T_1 … T_d] : ⊕^d H → H`.
    pub fn row_operator(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(self.n, &self.ops)
    }

    /// `Σ_j T_j T_j^*`
    pub fn gram_row(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for t in &self.ops {
            acc = acc.add(&t.matmul(&t.adjoint()));
        }
        acc
    }

    /// `T_{α_1} ⋯ T_{α_k}` for a word given as letters.
    pub fn word_product(&self, letters: &[u32]) -> ComplexMatrix {
        letters
            .iter()
            .fold(ComplexMatrix::identity(self.n), |acc, &l| acc.matmul(self.op(l as usize)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { d: self.d, n: self.n, ops: self.ops.iter().map(|t| t.scale_real(s)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub contraction: bool,
    pub coisometric: bool,
    pub row_isometry: bool,
}

pub fn classify(t: &OperatorTuple, tol: f64) -> Classification {
    let n = t.dim();
    let gram = t.gram_row();
    let slack = ComplexMatrix::identity(n).sub(&gram);
    let min_eig = hermitian_eigenvalues(&slack).first().copied().unwrap_or(0.0);
    let coisometric = n > 0 && operator_norm(&slack) <= tol;
    let mut worst: f64 = 0.0;
    for i in 0..t.d() {
        for j in 0..t.d() {
            let prod = t.ops[i].adjoint().matmul(&t.ops[j]);
            let target = if i == j { ComplexMatrix::identity(n) } else { ComplexMatrix::zeros(n, n) };
            worst = worst.max(operator_norm(&prod.sub(&target)));
        }
    }
    Classification { contraction: min_eig >= -tol, coisometric, row_isometry: worst <= tol }
}

/// Defect operator `D_T = (I - T^*T)^{1/2}` on `⊕^d H` with a fixed
/// orthonormal frame of its range.
///
/// Operators into the defect space are kept in frame coordinates:
/// `inject[j] = Q^* D ι_j` is `(D_T)_j` and `inject_adj[j] = ι_j^* D Q` is `(D_T)_j^*`.
#[derive(Clone, Debug)]
pub struct DefectData {
    pub d: usize,
    pub n: usize,
    pub row_op: ComplexMatrix,
    pub defect: ComplexMatrix,
    pub basis: ComplexMatrix,
    pub inject: Vec<ComplexMatrix>,
    pub inject_adj: Vec<ComplexMatrix>,
}

impl DefectData {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// `(D_T)_j = D ι_j` in ambient `⊕^d H` coordinates (`d·n × n`).
    pub fn component(&self, j: usize) -> ComplexMatrix {
        self.defect.block(0, (j - 1) * self.n, self.d * self.n, self.n)
    }
}

pub fn defect(t: &OperatorTuple, tol: f64) -> Result<DefectData> {
    let (d, n) = (t.d(), t.dim());
    let row_op = t.row_operator();
    let dn = d * n;
    let slack = ComplexMatrix::identity(dn).sub(&row_op.adjoint().matmul(&row_op));
    let min_eig = hermitian_eigenvalues(&slack).first().copied().unwrap_or(0.0);
    if min_eig < -tol {
        return Err(Error::NotContraction { min_eigenvalue: min_eig });
    }
    let defect = hermitian_sqrt_with_floor(&slack, tol, 64.0 * (dn as f64) * f64::EPSILON)?;
    let basis = range_onb(&defect, TOL_RANK);
    let proj = basis.adjoint().matmul(&defect);
    let mut inject = Vec::with_capacity(d);
    let mut inject_adj = Vec::with_capacity(d);
    for j in 0..d {
        let c = proj.block(0, j * n, basis.cols(), n);
        inject_adj.push(c.adjoint());
        inject.push(c);
    }
    Ok(DefectData { d, n, row_op, defect, basis, inject, inject_adj })
}

/// `max_ij ‖(D_T)_i^*(D_T)_j - (δ_ij I - T_i^*T_j)‖`, computed through the
/// defect frame so that the frame itself is also exercised.
pub fn block_identity_violation(t: &OperatorTuple, dd: &DefectData) -> f64 {
    let n = t.dim();
    let mut worst: f64 = 0.0;
    for i in 0..t.d() {
        for j in 0..t.d() {
            let lhs = dd.inject_adj[i].matmul(&dd.inject[j]);
            let mut rhs = t.ops[i].adjoint().matmul(&t.ops[j]).scale_real(-1.0);
            if i == j {
                rhs = rhs.add(&ComplexMatrix::identity(n));
            }
            worst = worst.max(operator_norm(&lhs.sub(&rhs)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{random_gaussian_matrix, random_isometry, C64, TOL_EQ};

    fn half_tuple() -> OperatorTuple {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        OperatorTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[h]]),
            ComplexMatrix::from_real_rows(&[&[h]]),
        ])
        .unwrap()
    }

    fn random_contraction(d: usize, n: usize, seed: u64, scale: f64) -> OperatorTuple {
        let ops: Vec<_> = (0..d).map(|j| random_gaussian_matrix(n, n, seed + j as u64)).collect();
        let t = OperatorTuple::new(ops).unwrap();
        let s = operator_norm(&t.row_operator());
        t.scaled(scale / s)
    }

    fn random_coisometry(d: usize, n: usize, seed: u64) -> OperatorTuple {
        let v = random_isometry(d * n, n, seed).unwrap();
        let ops = (0..d).map(|j| v.block(j * n, 0, n, n).adjoint()).collect();
        OperatorTuple::new(ops).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify(&half_tuple(), TOL_EQ);
        assert!(c.contraction && c.coisometric && !c.row_isometry);
        let z = classify(&OperatorTuple::zero(2, 3), TOL_EQ);
        assert!(z.contraction && !z.coisometric);
        let big = half_tuple().scaled(2.0);
        assert!(!classify(&big, TOL_EQ).contraction);
    }

    #[test]
    fn truncated_creation_operators_are_row_isometric_below_top_level() {
        use crate::words::{count_upto, enumerate};
        let (d, depth) = (2usize, 3usize);
        let idx = enumerate(d, depth);
        let dim = idx.len();
        let band = count_upto(d, depth - 1);
        let creation: Vec<ComplexMatrix> = (1..=d as u32)
            .map(|j| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                for w in idx.iter().filter(|w| w.len() < depth) {
                    m[(idx.index(&w.prepend(j)).unwrap(), idx.index(&w).unwrap())] = C64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                let p = creation[i].adjoint().matmul(&creation[j]).block(0, 0, band, band);
                let expect =
                    if i == j { ComplexMatrix::identity(band) } else { ComplexMatrix::zeros(band, band) };
                assert_eq!(p, expect);
            }
        }
        // The compressions to the exactness band form a row isometry into the full space.
        let restricted: Vec<ComplexMatrix> = creation.iter().map(|l| l.block(0, 0, dim, band)).collect();
        for i in 0..d {
            for j in 0..d {
                let p = restricted[i].adjoint().matmul(&restricted[j]);
                assert!(p.max_abs_diff(&if i == j {
                    ComplexMatrix::identity(band)
                } else {
                    ComplexMatrix::zeros(band, band)
                }) == 0.0);
            }
        }
    }

    #[test]
    fn defect_of_half_tuple() {
        let dd = defect(&half_tuple(), TOL_EQ).unwrap();
        let expect = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
        assert!(dd.defect.max_abs_diff(&expect) < 1e-14);
        assert_eq!(dd.rank(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((dd.basis[(0, 0)] - C64::new(h, 0.0)).norm() < 1e-14);
        assert!((dd.basis[(1, 0)] - C64::new(-h, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn defect_of_row_isometry_and_zero() {
        // In finite dimensions a row isometry needs d·n ≤ n, so d = 1 and T is unitary.
        let u = random_isometry(3, 3, 1).unwrap();
        let dd = defect(&OperatorTuple::new(vec![u]).unwrap(), TOL_EQ).unwrap();
        assert_eq!(dd.rank(), 0);
        assert!(dd.defect.max_abs() < 1e-12);
        let z = defect(&OperatorTuple::zero(1, 1), TOL_EQ).unwrap();
        assert_eq!(z.rank(), 1);
        assert!(z.defect.max_abs_diff(&ComplexMatrix::identity(1)) < 1e-15);
    }

    #[test]
    fn defect_rejects_non_contraction() {
        assert!(matches!(
            defect(&half_tuple().scaled(1.5), TOL_EQ),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn defect_identities_random() {
        for seed in 0..6 {
            let t = random_contraction(3, 2, 100 + seed, 0.8);
            let dd = defect(&t, TOL_EQ).unwrap();
            let dn = 6;
            let d2 = dd.defect.matmul(&dd.defect);
            let target = ComplexMatrix::identity(dn).sub(&dd.row_op.adjoint().matmul(&dd.row_op));
            assert!(d2.max_abs_diff(&target) < 1e-12);
            let q = &dd.basis;
            assert!(q.adjoint().matmul(q).max_abs_diff(&ComplexMatrix::identity(q.cols())) < 1e-12);
            assert!(q.matmul(&q.adjoint().matmul(&dd.defect)).max_abs_diff(&dd.defect) < 1e-10);
            // (D)_i^*(D)_j = δ_ij I - T_i^* T_j
            for i in 1..=3 {
                for j in 1..=3 {
                    let lhs = dd.component(i).adjoint().matmul(&dd.component(j));
                    let mut rhs = t.op(i).adjoint().matmul(t.op(j)).scale_real(-1.0);
                    if i == j {
                        rhs = rhs.add(&ComplexMatrix::identity(2));
                    }
                    assert!(lhs.max_abs_diff(&rhs) < 1e-10);
                    let coords = dd.inject[i - 1].adjoint().matmul(&dd.inject[j - 1]);
                    assert!(coords.max_abs_diff(&rhs) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn defect_block_identity() {
        for seed in 0..5 {
            let t = random_contraction(3, 2, seed, 0.9);
            let dd = defect(&t, TOL_EQ).unwrap();
            assert!(block_identity_violation(&t, &dd) < 1e-12);
            let c = random_coisometry(2, 3, seed);
            let dd = defect(&c, TOL_EQ).unwrap();
            assert!(block_identity_violation(&c, &dd) < 1e-12);
        }
    }

    #[test]
    fn coisometric_defect_is_projection() {
        for seed in 0..5 {
            let t = random_coisometry(3, 2, seed);
            assert!(classify(&t, 1e-10).coisometric);
            let dd = defect(&t, TOL_EQ).unwrap();
            let d2 = dd.defect.matmul(&dd.defect);
            assert!(d2.max_abs_diff(&dd.defect) < 1e-12);
            assert_eq!(dd.rank(), 4);
        }
    }

    #[test]
    fn tuple_json_round_trip() {
        let t = random_contraction(2, 2, 3, 0.5);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with("{\"d\":2,\"n\":2,\"ops\":["));
        let back: OperatorTuple = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
