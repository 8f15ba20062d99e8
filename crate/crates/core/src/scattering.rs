//! The outgoing Cuntz scattering system carried by `V^E` on `H_A ⊕ Γ ⊗ 𝒟_E`.
//!
//! Vectors of that space are E-side graded vectors whose `H_C` coordinates
//! vanish; "ambient coordinates" drop those `dimC` leading entries.

use rayon::prelude::*;

use crate::dilation::{Dilation, GradedVector};
use crate::error::{Error, Result};
use crate::intertwiner::{BasisManifest, Intertwiner, Side};
use crate::lifting::LiftingInstance;
use crate::numkernel::{complement_onb, operator_norm, orthonormalize, ComplexMatrix, C64};
use crate::report::{Check, Report};
use crate::words::{count_upto, WordIndex};

pub const TOL_WANDERING: f64 = 1e-10;
pub const TOL_ANGLE: f64 = 1e-8;
pub const TOL_SHIFT: f64 = 1e-12;
pub const TOL_ROW_UNITARY: f64 = 1e-10;

/// Orthonormal frame of a subspace of `H_A ⊕ Γ_{≤N} ⊗ 𝒟_E`.
#[derive(Clone, Debug)]
pub struct SubspaceFrame {
    pub manifest: BasisManifest,
    pub frame: ComplexMatrix,
}

impl SubspaceFrame {
    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.frame.cols();
        self.frame.adjoint().matmul(&self.frame).max_abs_diff(&ComplexMatrix::identity(k))
    }
}

fn ambient_manifest(inst: &LiftingInstance, e: &Dilation, depth: usize) -> BasisManifest {
    BasisManifest {
        side: Side::E,
        d: inst.d,
        h_dim: inst.dim_a,
        inner_dim: e.inner_dim(),
        depth,
        words: WordIndex::new(inst.d, depth).iter().collect(),
    }
}

fn ambient_dim(inst: &LiftingInstance, e: &Dilation, depth: usize) -> usize {
    inst.dim_a + count_upto(inst.d, depth) * e.inner_dim()
}

/// E-side vector with zero `H_C` part from ambient coordinates.
fn from_ambient(inst: &LiftingInstance, e: &Dilation, depth: usize, coords: &[C64]) -> GradedVector {
    let mut flat = vec![C64::new(0.0, 0.0); inst.dim_c];
    flat.extend_from_slice(coords);
    GradedVector::from_flat(inst.d, depth, Some(e.h_dim()), e.inner_dim(), &flat).expect("ambient coordinates")
}

/// `(ambient coordinates, size of the H_C part)`
fn to_ambient(inst: &LiftingInstance, v: &GradedVector) -> (Vec<C64>, f64) {
    let flat = v.to_flat();
    let hc = crate::numkernel::norm(&flat[..inst.dim_c]);
    (flat[inst.dim_c..].to_vec(), hc)
}

/// `W^*(e_∅ ⊗ η_k)` for the frame vectors `η_k` of `𝒟_C`, as depth-`N` E-side vectors.
pub fn estar_vectors(inst: &LiftingInstance, depth: usize) -> Result<Vec<GradedVector>> {
    let it = Intertwiner::new(inst);
    (0..it.c.inner_dim())
        .into_par_iter()
        .map(|k| it.w_star(&it.c.basis_vector(depth, it.c.h_dim() + k)))
        .collect()
}

/// `ℰ_* = W^*(e_∅ ⊗ 𝒟_C)` inside the depth-`N` ambient space.
pub fn estar_frame(inst: &LiftingInstance, depth: usize) -> Result<SubspaceFrame> {
    if depth == 0 {
        return Err(Error::DepthError("ℰ_* frame needs depth N ≥ 1".into()));
    }
    let it = Intertwiner::new(inst);
    let cols: Vec<Vec<C64>> = estar_vectors(inst, depth)?.iter().map(|v| to_ambient(inst, v).0).collect();
    let basis = orthonormalize(&cols, 1e-8);
    Ok(SubspaceFrame {
        manifest: ambient_manifest(inst, &it.e, depth),
        frame: ComplexMatrix::from_columns(ambient_dim(inst, &it.e, depth), &basis),
    })
}

/// Columns `V_j^E x` over basis vectors `x` of the depth-`(N-1)` ambient space,
/// ordered by `j` then `x`, plus the largest `H_C` component seen.
fn shifted_ambient(inst: &LiftingInstance, e: &Dilation, depth: usize) -> (ComplexMatrix, f64) {
    let src = depth - 1;
    let n_src = ambient_dim(inst, e, src);
    let pairs: Vec<(usize, usize)> = (1..=inst.d).flat_map(|j| (0..n_src).map(move |k| (j, k))).collect();
    let cols: Vec<(Vec<C64>, f64)> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let mut coords = vec![C64::new(0.0, 0.0); n_src];
            coords[k] = C64::new(1.0, 0.0);
            let x = from_ambient(inst, e, src, &coords);
            to_ambient(inst, &e.apply(j, &x).expect("V_j on ambient vector"))
        })
        .collect();
    let leak = cols.iter().map(|c| c.1).fold(0.0, f64::max);
    let cols: Vec<Vec<C64>> = cols.into_iter().map(|c| c.0).collect();
    (ComplexMatrix::from_columns(ambient_dim(inst, e, depth), &cols), leak)
}

/// Wandering property of the span of `frame` (ambient coordinates at depth 0
/// or deeper), tested with words of length `≤ m` and against `V_j^E`-ranges at
/// depth `n`.
pub fn wandering_checks(inst: &LiftingInstance, frame: &[GradedVector], n: usize, m: usize) -> Result<Report> {
    if m + 1 > n {
        return Err(Error::DepthError(format!("words of length {m} need depth N ≥ {}", m + 1)));
    }
    let it = Intertwiner::new(inst);
    let e = &it.e;
    let words: Vec<_> = WordIndex::new(inst.d, m).iter().collect();
    let images: Vec<Vec<C64>> = words
        .par_iter()
        .flat_map_iter(|w| {
            frame.iter().map(move |u| {
                let v = e.word_apply(w.letters(), u).expect("V_α on frame vector");
                v.padded(n.max(v.depth())).truncated(n).to_flat()
            })
        })
        .collect();
    let g = ComplexMatrix::from_columns(images[0].len(), &images);
    let gram = g.adjoint().matmul(&g);
    let mut report = Report::default();
    report.push(Check::new(
        format!("scattering: ⟨V_α u, V_β w⟩ = δ_αβ⟨u, w⟩ for |α|, |β| ≤ {m}"),
        gram.max_abs_diff(&ComplexMatrix::identity(gram.rows())),
        TOL_WANDERING,
    ));
    let (r, _) = shifted_ambient(inst, e, n);
    let f = ComplexMatrix::from_columns(
        ambient_dim(inst, e, n),
        &frame.iter().map(|u| to_ambient(inst, &u.padded(n.max(u.depth())).truncated(n)).0).collect::<Vec<_>>(),
    );
    report.push(Check::new("scattering: ℰ_* ⊥ V_j^E(ambient)", r.adjoint().matmul(&f).max_abs(), TOL_WANDERING));
    Ok(report)
}

pub fn verify_wandering(inst: &LiftingInstance, n: usize, m: usize) -> Result<Report> {
    if m + 1 > n {
        return Err(Error::DepthError(format!("words of length {m} need depth N ≥ {}", m + 1)));
    }
    // ℰ_* sits at depth 0; computing it at depth 1 is exact and cheaper.
    let frame: Vec<GradedVector> = estar_vectors(inst, 1)?;
    wandering_checks(inst, &frame, n, m)
}

/// `ℰ_* = ambient ⊖ span_j V_j^E(ambient)` at depth `N`.
pub fn verify_complement(inst: &LiftingInstance, n: usize) -> Result<Report> {
    let it = Intertwiner::new(inst);
    let e = &it.e;
    let estar = estar_frame(inst, n)?;
    let (r, leak) = shifted_ambient(inst, e, n);
    let k = r.cols();
    let mut report = Report::default();
    report.push(Check::new("scattering: V^E keeps H_A ⊕ Γ⊗𝒟_E invariant", leak, TOL_SHIFT));
    report.push(Check::new(
        "scattering: V_j^E have orthonormal ranges on the ambient space",
        r.adjoint().matmul(&r).max_abs_diff(&ComplexMatrix::identity(k)),
        TOL_WANDERING,
    ));
    let raw: Vec<GradedVector> = estar_vectors(inst, n)?;
    let hc = raw.iter().map(|v| to_ambient(inst, v).1).fold(0.0, f64::max);
    report.push(Check::new("scattering: ℰ_* ⊂ H_A ⊕ Γ⊗𝒟_E", hc, TOL_WANDERING));

    let comp = complement_onb(&r);
    let expected = (inst.d - 1) * inst.dim_c;
    report.push(Check::exact("scattering: dim(ambient ⊖ ΣV_j^E ambient) = (d-1)·dimC", expected, comp.cols()));
    report.push(Check::exact("scattering: dim ℰ_* = (d-1)·dimC", expected, estar.dim()));
    let angle = if comp.cols() == estar.dim() { max_principal_sine(&comp, &estar.frame) } else { f64::INFINITY };
    report.push(Check::new("scattering: principal angles between ℰ_* and the complement", angle, TOL_ANGLE));
    Ok(report)
}

/// Largest principal angle sine between the ranges of two orthonormal frames.
pub fn max_principal_sine(q1: &ComplexMatrix, q2: &ComplexMatrix) -> f64 {
    let off = |a: &ComplexMatrix, b: &ComplexMatrix| {
        let proj = a.matmul(&a.adjoint().matmul(b));
        operator_norm(&b.sub(&proj))
    };
    off(q1, q2).max(off(q2, q1))
}

/// `{V_α^E(e_∅ ⊗ x)}` over `|α| ≤ N` and frame vectors `x` of `𝒟_E` is an
/// orthonormal basis of `Γ_{≤N} ⊗ 𝒟_E`.
pub fn verify_shift_g(inst: &LiftingInstance, n: usize) -> Result<Report> {
    let it = Intertwiner::new(inst);
    let e = &it.e;
    let r = e.inner_dim();
    let words: Vec<_> = WordIndex::new(inst.d, n).iter().collect();
    let cols: Vec<(Vec<C64>, f64)> = words
        .par_iter()
        .flat_map_iter(|w| {
            (0..r).map(move |k| {
                let x = e.basis_vector(0, e.h_dim() + k);
                let v = e.word_apply(w.letters(), &x).expect("V_α on 𝒢");
                let v = v.padded(n);
                let h = crate::numkernel::norm(v.h().unwrap());
                (v.fock().to_vec(), h)
            })
        })
        .collect();
    let h_leak = cols.iter().map(|c| c.1).fold(0.0, f64::max);
    let f = ComplexMatrix::from_columns(count_upto(inst.d, n) * r, &cols.into_iter().map(|c| c.0).collect::<Vec<_>>());
    let mut report = Report::default();
    report.push(Check::exact("scattering: #{V_α(e_∅⊗x)} = dim Γ_{≤N}⊗𝒟_E", f.rows(), f.cols()));
    report.push(Check::new("scattering: V_α^E(e_∅⊗𝒟_E) has no H_E part", h_leak, TOL_SHIFT));
    let id = ComplexMatrix::identity(f.cols());
    report.push(Check::new("scattering: {V_α(e_∅⊗x)} orthonormal", f.adjoint().matmul(&f).max_abs_diff(&id), TOL_SHIFT));
    if f.is_square() {
        report.push(Check::new(
            "scattering: {V_α(e_∅⊗x)} spans Γ_{≤N}⊗𝒟_E",
            f.matmul(&f.adjoint()).max_abs_diff(&id),
            TOL_SHIFT,
        ));
    }
    Ok(report)
}

/// `Σ_j V_j V_j^* = I` on depth-`N` vectors.
pub fn row_unitary_check(dil: &Dilation, n: usize, label: &str) -> Check {
    let worst = (0..dil.space_dim(n))
        .into_par_iter()
        .map(|k| {
            let x = dil.basis_vector(n, k);
            let mut acc = dil.zeros(n + 1);
            for j in 1..=dil.d() {
                let back = dil.adjoint_apply(j, &x).expect("V_j^*");
                acc = acc.add(&dil.apply(j, &back).expect("V_j")).expect("same space");
            }
            acc.max_abs_diff(&x)
        })
        .reduce(|| 0.0, f64::max);
    Check::new(format!("{label}: Σ_j V_jV_j* = I"), worst, TOL_ROW_UNITARY)
}

/// The whole outgoing scattering certificate at depth `N`.
pub fn verify_scattering(inst: &LiftingInstance, n: usize) -> Result<Report> {
    if n == 0 {
        return Err(Error::DepthError("scattering checks need depth N ≥ 1".into()));
    }
    let mut report = verify_wandering(inst, n, (n - 1).min(2))?;
    report.extend(verify_complement(inst, n)?);
    report.extend(verify_shift_g(inst, n)?);
    let it = Intertwiner::new(inst);
    report.push(row_unitary_check(&it.e, n, "scattering: V^E row unitary"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{generate, DEFAULT_A_SCALE};

    fn assert_pass(r: &Report) {
        for c in &r.checks {
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn trivial_lifting_estar_is_vacuum_defect() {
        let inst = generate(2, 2, 0, 3, DEFAULT_A_SCALE).unwrap();
        let f = estar_frame(&inst, 2).unwrap();
        assert_eq!(f.dim(), 2);
        // Ambient = Γ_{≤2}⊗𝒟_C; frame must be the level-0 coordinates.
        let r = f.frame.rows();
        let mut lvl0 = ComplexMatrix::zeros(r, 2);
        for k in 0..2 {
            lvl0[(k, k)] = C64::new(1.0, 0.0);
        }
        assert!(max_principal_sine(&lvl0, &f.frame) < 1e-12);
        assert_pass(&verify_wandering(&inst, 3, 2).unwrap());
        assert_pass(&verify_complement(&inst, 2).unwrap());
    }

    #[test]
    fn estar_dimension_and_orthonormality() {
        for (d, nc, na) in [(2, 2, 2), (3, 1, 2), (3, 2, 1)] {
            let inst = generate(d, nc, na, 13, DEFAULT_A_SCALE).unwrap();
            let raw = estar_vectors(&inst, 2).unwrap();
            assert_eq!(raw.len(), (d - 1) * nc);
            for (i, u) in raw.iter().enumerate() {
                for (j, w) in raw.iter().enumerate() {
                    let ip = u.inner(w).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(expect, 0.0)).norm() < 1e-10);
                }
            }
            let f = estar_frame(&inst, 2).unwrap();
            assert_eq!(f.dim(), (d - 1) * nc);
            assert!(f.orthonormality_defect() < 1e-12);
        }
    }

    #[test]
    fn random_instance_is_wandering() {
        let inst = generate(2, 2, 2, 21, DEFAULT_A_SCALE).unwrap();
        assert_pass(&verify_wandering(&inst, 4, 2).unwrap());
        assert!(matches!(verify_wandering(&inst, 2, 2), Err(Error::DepthError(_))));
    }

    #[test]
    fn perturbed_frame_is_not_wandering() {
        let inst = generate(2, 2, 2, 21, DEFAULT_A_SCALE).unwrap();
        let it = Intertwiner::new(&inst);
        let mut frame = estar_vectors(&inst, 1).unwrap();
        // Push the first frame vector 1e-3 towards V_1(some ambient vector).
        let x = it.e.basis_vector(0, inst.dim_c);
        let v1x = it.e.apply(1, &x).unwrap();
        frame[0] = frame[0].add(&v1x.scale(C64::new(1e-3, 0.0))).unwrap();
        let r = wandering_checks(&inst, &frame, 3, 2).unwrap();
        assert!(!r.all_pass());
    }

    #[test]
    fn complement_matches_estar() {
        for (d, nc, na, n) in [(2, 2, 2, 3), (3, 1, 1, 2), (3, 2, 3, 2)] {
            let inst = generate(d, nc, na, 8, DEFAULT_A_SCALE).unwrap();
            let r = verify_complement(&inst, n).unwrap();
            assert_pass(&r);
        }
    }

    #[test]
    fn shift_g_and_row_unitary() {
        let inst = generate(3, 2, 1, 2, DEFAULT_A_SCALE).unwrap();
        assert_pass(&verify_shift_g(&inst, 2).unwrap());
        let it = Intertwiner::new(&inst);
        assert!(row_unitary_check(&it.e, 2, "E").pass);
        assert!(row_unitary_check(&it.c, 2, "C").pass);
    }

    #[test]
    fn full_certificate() {
        let inst = generate(2, 1, 1, 30, DEFAULT_A_SCALE).unwrap();
        assert_pass(&verify_scattering(&inst, 3).unwrap());
    }
}
