//! Coisometric liftings `E_j = [[C_j, 0], [B_j, A_j]]` of a coisometric tuple `C`.
//!
//! `H_E = H_C ⊕ H_A`, with `H_C` occupying the first `dimC` coordinates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{
    complement_onb, hermitian_eigenvalues, hermitian_sqrt_with_floor, operator_norm, pseudo_inverse,
    random_gaussian_matrix, random_isometry, range_onb, ComplexMatrix, TOL_EQ, TOL_RANK,
};
use crate::report::Check;
use crate::rowtuple::{defect, DefectData, OperatorTuple};

pub const DEFAULT_A_SCALE: f64 = 0.9;

/// The raw block data of a lifting, as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceData {
    pub d: usize,
    #[serde(rename = "dimC")]
    pub dim_c: usize,
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "C")]
    pub c: Vec<ComplexMatrix>,
    #[serde(rename = "A")]
    pub a: Vec<ComplexMatrix>,
    #[serde(rename = "B")]
    pub b: Vec<ComplexMatrix>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl InstanceData {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn shapes(&self) -> Result<(OperatorTuple, OperatorTuple)> {
        let (d, nc, na) = (self.d, self.dim_c, self.dim_a);
        if d == 0 {
            return Err(Error::Shape("d must be at least 1".into()));
        }
        if self.c.len() != d || self.a.len() != d || self.b.len() != d {
            return Err(Error::Shape(format!(
                "expected {d} blocks each of C, A, B; got {}, {}, {}",
                self.c.len(),
                self.a.len(),
                self.b.len()
            )));
        }
        let check = |m: &ComplexMatrix, r: usize, c: usize, name: &str, j: usize| {
            if m.shape() != (r, c) {
                Err(Error::Shape(format!("{name}_{} is {}x{}, expected {r}x{c}", j + 1, m.rows(), m.cols())))
            } else {
                Ok(())
            }
        };
        for j in 0..d {
            check(&self.c[j], nc, nc, "C", j)?;
            check(&self.a[j], na, na, "A", j)?;
            check(&self.b[j], na, nc, "B", j)?;
        }
        Ok((OperatorTuple::new(self.c.clone())?, OperatorTuple::new(self.a.clone())?))
    }
}

/// A validated coisometric lifting together with its derived data.
#[derive(Clone, Debug)]
pub struct LiftingInstance {
    pub d: usize,
    pub dim_c: usize,
    pub dim_a: usize,
    pub c: OperatorTuple,
    pub a: OperatorTuple,
    pub b: Vec<ComplexMatrix>,
    pub e: OperatorTuple,
    pub defect_c: DefectData,
    pub defect_e: DefectData,
    /// `D_{*,A} = (I - ΣA_jA_j^*)^{1/2}` on `H_A`.
    pub dstar: ComplexMatrix,
    /// Orthonormal frame of the range of `D_{*,A}` (`dimA × r_*`).
    pub dstar_basis: ComplexMatrix,
    /// `γ`, `r_C × r_*` in frame coordinates.
    pub gamma: ComplexMatrix,
    pub seed: Option<u64>,
}

impl Serialize for LiftingInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.data().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LiftingInstance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let data = InstanceData::deserialize(de)?;
        LiftingInstance::from_data(&data, TOL_EQ).map_err(serde::de::Error::custom)
    }
}

fn stack_adjoints(blocks: &[ComplexMatrix], cols: usize) -> ComplexMatrix {
    let adj: Vec<_> = blocks.iter().map(|b| b.adjoint()).collect();
    ComplexMatrix::vstack(cols, &adj)
}

/// `D_{*,A}` and a frame of its range.
pub fn star_defect(a: &OperatorTuple, tol: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.dim();
    let slack = ComplexMatrix::identity(n).sub(&a.gram_row());
    let min = hermitian_eigenvalues(&slack).first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotContraction { min_eigenvalue: min });
    }
    let dstar = hermitian_sqrt_with_floor(&slack, tol, 64.0 * (n.max(1) as f64) * f64::EPSILON)?;
    let basis = range_onb(&dstar, TOL_RANK);
    Ok((dstar, basis))
}

/// `γ` from `Q_C` (frame of `𝒟_C`), `D_{*,A}` with its frame `Q_*`, and `B^*` in
/// `⊕^d H_C` coordinates.
pub fn gamma_from_parts(
    qc: &ComplexMatrix,
    dstar: &ComplexMatrix,
    qstar: &ComplexMatrix,
    b_star: &ComplexMatrix,
    tol: f64,
) -> Result<ComplexMatrix> {
    let kernel = complement_onb(qstar);
    let leak = operator_norm(&b_star.matmul(&kernel));
    if leak > tol {
        return Err(Error::GammaUndefined { violation: leak });
    }
    let restricted = qstar.adjoint().matmul(dstar).matmul(qstar);
    let inv = pseudo_inverse(&restricted, TOL_RANK);
    Ok(qc.adjoint().matmul(b_star).matmul(qstar).matmul(&inv))
}

impl LiftingInstance {
    pub fn assemble(c: OperatorTuple, a: OperatorTuple, b: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let data = InstanceData {
            d: c.d(),
            dim_c: c.dim(),
            dim_a: a.dim(),
            c: c.ops().to_vec(),
            a: a.ops().to_vec(),
            b,
            seed: None,
        };
        Self::from_data(&data, tol)
    }

    pub fn from_data(data: &InstanceData, tol: f64) -> Result<Self> {
        let (c, a) = data.shapes()?;
        let (d, nc, na) = (data.d, data.dim_c, data.dim_a);
        if c.d() != a.d() {
            return Err(Error::Shape("C and A have different d".into()));
        }
        let b = data.b.clone();

        let viol_c = operator_norm(&c.gram_row().sub(&ComplexMatrix::identity(nc)));
        if viol_c > tol {
            return Err(Error::NotCoisometricC { violation: viol_c });
        }
        let (off, diag) = block_violations(&c, &a, &b);
        if off > tol {
            return Err(Error::NotCoisometricE { block: "ΣC_jB_j* = 0", violation: off });
        }
        if diag > tol {
            return Err(Error::NotCoisometricE { block: "ΣB_jB_j* + ΣA_jA_j* = I", violation: diag });
        }

        let e_ops = (0..d)
            .map(|j| {
                let mut m = ComplexMatrix::zeros(nc + na, nc + na);
                m.set_block(0, 0, &c.ops()[j]);
                m.set_block(nc, 0, &b[j]);
                m.set_block(nc, nc, &a.ops()[j]);
                m
            })
            .collect();
        let e = OperatorTuple::new(e_ops)?;
        let defect_c = defect(&c, tol)?;
        let defect_e = defect(&e, tol)?;
        let (dstar, dstar_basis) = star_defect(&a, tol)?;
        let b_star = stack_adjoints(&b, na);
        let gamma = gamma_from_parts(&defect_c.basis, &dstar, &dstar_basis, &b_star, tol)?;

        let inst = LiftingInstance {
            d,
            dim_c: nc,
            dim_a: na,
            c,
            a,
            b,
            e,
            defect_c,
            defect_e,
            dstar,
            dstar_basis,
            gamma,
            seed: data.seed,
        };
        let (iso, fact) = inst.gamma_violations();
        if iso.max(fact) > tol {
            return Err(Error::GammaUndefined { violation: iso.max(fact) });
        }
        Ok(inst)
    }

    pub fn data(&self) -> InstanceData {
        InstanceData {
            d: self.d,
            dim_c: self.dim_c,
            dim_a: self.dim_a,
            c: self.c.ops().to_vec(),
            a: self.a.ops().to_vec(),
            b: self.b.clone(),
            seed: self.seed,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_data(&InstanceData::from_json(s)?, TOL_EQ)
    }

    pub fn to_json(&self) -> Result<String> {
        self.data().to_json()
    }

    pub fn dim_e(&self) -> usize {
        self.dim_c + self.dim_a
    }

    /// `B^* : H_A → ⊕^d H_C`
    pub fn b_star(&self) -> ComplexMatrix {
        stack_adjoints(&self.b, self.dim_a)
    }

    /// `B = [B_1 … B_d] : ⊕^d H_C → H_A`
    pub fn b_row(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(self.dim_a, &self.b)
    }

    pub fn rank_star(&self) -> usize {
        self.dstar_basis.cols()
    }

    /// `γ D_{*,A} : H_A → 𝒟_C` in frame coordinates (`r_C × dimA`).
    pub fn gamma_dstar(&self) -> ComplexMatrix {
        self.gamma.matmul(&self.dstar_basis.adjoint()).matmul(&self.dstar)
    }

    /// `(‖γ^*γ - I‖, ‖Q_C γ Q_*^* D_{*,A} - B^*‖)`
    pub fn gamma_violations(&self) -> (f64, f64) {
        let r = self.gamma.cols();
        let iso = operator_norm(&self.gamma.adjoint().matmul(&self.gamma).sub(&ComplexMatrix::identity(r)));
        let lifted = self.defect_c.basis.matmul(&self.gamma_dstar());
        let fact = operator_norm(&lifted.sub(&self.b_star()));
        (iso, fact)
    }

    /// All defining identities of the instance as report lines.
    pub fn invariant_checks(&self, tol: f64) -> Vec<Check> {
        invariant_checks_for(&self.c, &self.a, &self.b, tol, Some(self))
    }
}

fn block_violations(c: &OperatorTuple, a: &OperatorTuple, b: &[ComplexMatrix]) -> (f64, f64) {
    let (nc, na) = (c.dim(), a.dim());
    let mut cb = ComplexMatrix::zeros(nc, na);
    let mut bb = a.gram_row();
    for (cj, bj) in c.ops().iter().zip(b) {
        cb = cb.add(&cj.matmul(&bj.adjoint()));
        bb = bb.add(&bj.matmul(&bj.adjoint()));
    }
    (operator_norm(&cb), operator_norm(&bb.sub(&ComplexMatrix::identity(na))))
}

fn invariant_checks_for(
    c: &OperatorTuple,
    a: &OperatorTuple,
    b: &[ComplexMatrix],
    tol: f64,
    inst: Option<&LiftingInstance>,
) -> Vec<Check> {
    let nc = c.dim();
    let (off, diag) = block_violations(c, a, b);
    let mut out = vec![
        Check::new("lifting: ΣC_jC_j* = I", operator_norm(&c.gram_row().sub(&ComplexMatrix::identity(nc))), tol),
        Check::new("lifting: ΣC_jB_j* = 0", off, tol),
        Check::new("lifting: ΣB_jB_j* + ΣA_jA_j* = I", diag, tol),
    ];
    match inst {
        Some(inst) => {
            let ne = inst.dim_e();
            out.insert(
                1,
                Check::new(
                    "lifting: ΣE_jE_j* = I",
                    operator_norm(&inst.e.gram_row().sub(&ComplexMatrix::identity(ne))),
                    tol,
                ),
            );
            let (iso, fact) = inst.gamma_violations();
            out.push(Check::new("lifting: γ*γ = I", iso, tol));
            out.push(Check::new("lifting: γD_*,A = B*", fact, tol));
            out.push(lifting_property_check_tuple(&inst.c, &inst.e, tol));
        }
        None => out.push(Check::new("lifting: instance assembles", f64::INFINITY, tol)),
    }
    out
}

/// Report lines for raw block data that may fail to assemble.
pub fn data_checks(data: &InstanceData, tol: f64) -> Vec<Check> {
    let Ok((c, a)) = data.shapes() else {
        return vec![Check::new("lifting: block shapes", f64::INFINITY, 0.0)];
    };
    match LiftingInstance::from_data(data, tol) {
        Ok(inst) => inst.invariant_checks(tol),
        Err(_) => invariant_checks_for(&c, &a, &data.b, tol, None),
    }
}

/// Recomputes `γ` from the instance's blocks.
pub fn extract_gamma(inst: &LiftingInstance, tol: f64) -> Result<ComplexMatrix> {
    gamma_from_parts(&inst.defect_c.basis, &inst.dstar, &inst.dstar_basis, &inst.b_star(), tol)
}

/// Random coisometric lifting parametrized by a random isometry `γ`.
pub fn generate(d: usize, dim_c: usize, dim_a: usize, seed: u64, a_scale: f64) -> Result<LiftingInstance> {
    if d == 0 || dim_c == 0 {
        return Err(Error::Shape("need d ≥ 1 and dimC ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&a_scale) {
        return Err(Error::Shape(format!("aScale {a_scale} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s_c, s_a, s_g) = (rng.next_u64(), rng.next_u64(), rng.next_u64());

    let v = random_isometry(d * dim_c, dim_c, s_c)?;
    let c_ops: Vec<_> = (0..d).map(|j| v.block(j * dim_c, 0, dim_c, dim_c).adjoint()).collect();
    let c = OperatorTuple::new(c_ops)?;

    let a = if dim_a == 0 || a_scale == 0.0 {
        OperatorTuple::zero(d, dim_a)
    } else {
        let g = random_gaussian_matrix(dim_a, d * dim_a, s_a);
        let g = g.scale_real(a_scale / operator_norm(&g));
        OperatorTuple::new((0..d).map(|j| g.block(0, j * dim_a, dim_a, dim_a)).collect())?
    };

    let defect_c = defect(&c, TOL_EQ)?;
    let (dstar, qstar) = star_defect(&a, TOL_EQ)?;
    let (rc, rs) = (defect_c.rank(), qstar.cols());
    if rs > rc {
        return Err(Error::Infeasible { rank_star: rs, rank_c: rc });
    }
    let gamma = random_isometry(rc, rs, s_g)?;
    let b_star = defect_c.basis.matmul(&gamma).matmul(&qstar.adjoint()).matmul(&dstar);
    let b = (0..d).map(|j| b_star.block(j * dim_c, 0, dim_c, dim_a).adjoint()).collect();

    let data = InstanceData {
        d,
        dim_c,
        dim_a,
        c: c.ops().to_vec(),
        a: a.ops().to_vec(),
        b,
        seed: Some(seed),
    };
    LiftingInstance::from_data(&data, TOL_EQ)
}

/// `E_j^*|_{H_C} = C_j^*`, i.e. the top-right block of every `E_j` vanishes and
/// the top-left block is `C_j`.
pub fn lifting_property_check_tuple(c: &OperatorTuple, e: &OperatorTuple, tol: f64) -> Check {
    let nc = c.dim();
    let ne = e.dim();
    let mut worst: f64 = 0.0;
    for (cj, ej) in c.ops().iter().zip(e.ops()) {
        let col = ej.adjoint().block(0, 0, ne, nc);
        let mut target = ComplexMatrix::zeros(ne, nc);
        target.set_block(0, 0, &cj.adjoint());
        worst = worst.max(operator_norm(&col.sub(&target)));
    }
    Check::new("lifting: E_j*|H_C = C_j*", worst, tol)
}

pub fn lifting_property_check(inst: &LiftingInstance, tol: f64) -> Check {
    lifting_property_check_tuple(&inst.c, &inst.e, tol)
}
