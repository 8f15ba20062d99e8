//! The characteristic function `Θ_{C,E}` of a lifting, written out from its
//! Fock expansion on `Θ_{C,E}(D_E)_i h`, and its comparison with the transfer
//! function and with `Ŵ`.
//!
//! Multi-indices follow `A_α = A_{α_1} ⋯ A_{α_n}`. With that reading the Fock
//! coefficient at `w` equals the transfer coefficient at `reverse(w)`, so the
//! identifications `ℓ²(Λ̃, 𝒟) ≅ Γ ⊗ 𝒟` are word reversals.

use rayon::prelude::*;

use crate::dilation::GradedVector;
use crate::error::{Error, Result};
use crate::intertwiner::Intertwiner;
use crate::lifting::LiftingInstance;
use crate::numkernel::{complement_onb, operator_norm, pseudo_inverse, ComplexMatrix, C64, TOL_RANK};
use crate::report::{Check, Report};
use crate::transfer::{build_colligation, toeplitz_matrix, NCSeries};
use crate::words::{count_upto, level_offset, level_size, WordIndex};

pub const TOL_COINCIDENCE: f64 = 1e-10;
pub const TOL_WELL_DEFINED: f64 = 1e-8;

/// Blocks `w ↦` compression of `Θ_{C,E}` to `e_w ⊗ 𝒟_C`, in the series layout.
pub type CharFnMatrix = NCSeries;

/// `(A_α)^* v` for every word `|α| ≤ depth`, in graded order.
fn a_star_words(inst: &LiftingInstance, v: &[C64], depth: usize) -> Vec<Vec<C64>> {
    let d = inst.d;
    let a_adj: Vec<ComplexMatrix> = inst.a.ops().iter().map(|a| a.adjoint()).collect();
    let mut out = vec![v.to_vec()];
    for m in 0..depth {
        let base = level_offset(d, m);
        for r in 0..level_size(d, m) {
            // (A_{α·k})^* = A_k^* (A_α)^*, and α·k has rank r·d + (k - 1).
            for adj in &a_adj {
                out.push(adj.mul_vec(&out[base + r]));
            }
        }
    }
    out
}

/// `Θ_{C,E}(D_E)_i h` truncated to words of length `≤ depth`, as a Fock-only
/// vector with `𝒟_C` coefficients.
pub fn charfn_on_defect(inst: &LiftingInstance, i: usize, h: &[C64], depth: usize) -> Result<GradedVector> {
    crate::dilation::check_letter(i, inst.d)?;
    if h.len() != inst.dim_e() {
        return Err(Error::DimMismatch(format!("h has length {}, H_E has dimension {}", h.len(), inst.dim_e())));
    }
    let d = inst.d;
    let rc = inst.defect_c.rank();
    let (hc, ha) = h.split_at(inst.dim_c);
    let gd = inst.gamma_dstar();
    let bi = &inst.b[i - 1];
    let ai = inst.a.op(i);
    let mut out = GradedVector::zeros(d, depth, None, rc);

    // e_∅: (D_C)_i h_c - γD_* B_i h_c - γD_* A_i h_a
    let bh = bi.mul_vec(hc);
    let mut v0 = inst.defect_c.inject[i - 1].mul_vec(hc);
    let lead: Vec<C64> = bh.iter().zip(ai.mul_vec(ha)).map(|(x, y)| x + y).collect();
    for (o, s) in v0.iter_mut().zip(gd.mul_vec(&lead)) {
        *o -= s;
    }
    out.level_mut(0).copy_from_slice(&v0);
    if depth == 0 {
        return Ok(out);
    }

    // |α| ≥ 1 from h_c: -γD_*(A_α)^* B_i h_c
    let from_c = a_star_words(inst, &bh, depth);
    let fock = out.fock_mut();
    for (k, v) in from_c.iter().enumerate().skip(1) {
        for (o, s) in fock[k * rc..(k + 1) * rc].iter_mut().zip(gd.mul_vec(v)) {
            *o -= s;
        }
    }

    // Words j·α from h_a: γD_*(A_α)^*(δ_ij - A_j^*A_i) h_a
    let aih = ai.mul_vec(ha);
    for j in 1..=d {
        let mut seed = inst.a.op(j).adjoint().mul_vec(&aih);
        seed.iter_mut().for_each(|z| *z = -*z);
        if j == i {
            seed.iter_mut().zip(ha).for_each(|(z, x)| *z += x);
        }
        let tails = a_star_words(inst, &seed, depth - 1);
        for m in 0..depth {
            for r in 0..level_size(d, m) {
                let src = level_offset(d, m) + r;
                let dst = level_offset(d, m + 1) + (j - 1) * level_size(d, m) + r;
                for (o, s) in fock[dst * rc..(dst + 1) * rc].iter_mut().zip(gd.mul_vec(&tails[src])) {
                    *o += s;
                }
            }
        }
    }
    Ok(out)
}

/// `Θ_{C,E}` on the `𝒟_E` frame: `M · D_E^+ · Q_E`, where `M(⊕_i h_i) = Σ_i Θ(D_E)_i h_i`.
pub fn charfn_matrix(inst: &LiftingInstance, depth: usize, tol: f64) -> Result<CharFnMatrix> {
    let (d, ne) = (inst.d, inst.dim_e());
    let rc = inst.defect_c.rank();
    let re = inst.defect_e.rank();
    let rows = count_upto(d, depth) * rc;
    let cols: Result<Vec<Vec<C64>>> = (0..d * ne)
        .into_par_iter()
        .map(|k| {
            let mut h = vec![C64::new(0.0, 0.0); ne];
            h[k % ne] = C64::new(1.0, 0.0);
            charfn_on_defect(inst, k / ne + 1, &h, depth).map(|v| v.fock().to_vec())
        })
        .collect();
    let m = ComplexMatrix::from_columns(rows, &cols?);
    let kernel = complement_onb(&inst.defect_e.basis);
    let leak = operator_norm(&m.matmul(&kernel));
    if leak > tol {
        return Err(Error::IllDefined { violation: leak });
    }
    let theta = m.matmul(&pseudo_inverse(&inst.defect_e.defect, TOL_RANK)).matmul(&inst.defect_e.basis);
    let mut out = NCSeries::zeros(d, depth, rc, re);
    for (k, w) in WordIndex::new(d, depth).iter().enumerate() {
        out.set(&w, theta.block(k * rc, 0, rc, re))?;
    }
    Ok(out)
}

/// Block at `w` against the transfer coefficient at `reverse(w)`.
pub fn verify_coincidence(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    let cf = charfn_matrix(inst, depth, TOL_WELL_DEFINED)?;
    let theta = build_colligation(inst).series(depth);
    let worst = cf
        .words()
        .iter()
        .map(|w| cf.coeff(w).unwrap().max_abs_diff(theta.coeff(&w.reverse()).unwrap()))
        .fold(0.0, f64::max);
    Ok(Report::new(vec![Check::new("charfn: block(w) = Θ^(reverse(w))", worst, TOL_COINCIDENCE)]))
}

/// Permutation of graded word indices given by reversal.
fn reversal_perm(d: usize, depth: usize) -> Vec<usize> {
    let idx = WordIndex::new(d, depth);
    idx.iter().map(|w| idx.index(&w.reverse()).unwrap()).collect()
}

/// (i) `Ŵ(e_∅ ⊗ η)` reproduces `Θ_{C,E} η`; (ii) `Ŵ` on Fock-only vectors is
/// `M_Θ` after reversing words on both sides.
pub fn verify_w_restriction(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    let it = Intertwiner::new(inst);
    let w = it.compute_w(depth)?;
    let cf = charfn_matrix(inst, depth, TOL_WELL_DEFINED)?;
    let (nc, ne) = (inst.dim_c, inst.dim_e());
    let (rc, re) = (it.c.inner_dim(), it.e.inner_dim());
    let nwords = count_upto(inst.d, depth);
    let words: Vec<_> = WordIndex::new(inst.d, depth).iter().collect();

    // (i) columns at e_∅ ⊗ η_k
    let mut impulse: f64 = 0.0;
    for k in 0..re {
        let col = w.matrix.column(ne + k);
        impulse = impulse.max(col[..nc].iter().map(|z| z.norm()).fold(0.0, f64::max));
        for (wi, word) in words.iter().enumerate() {
            let block = cf.coeff(word).unwrap();
            for r in 0..rc {
                impulse = impulse.max((col[nc + wi * rc + r] - block[(r, k)]).norm());
            }
        }
    }

    // (ii) Fock-to-Fock part of Ŵ against the Toeplitz matrix.
    let theta = build_colligation(inst).series(depth);
    let t = toeplitz_matrix(&theta, depth);
    let perm = reversal_perm(inst.d, depth);
    let mut fock: f64 = 0.0;
    for b in 0..nwords {
        for q in 0..re {
            let col = ne + perm[b] * re + q;
            fock = fock.max(
                (0..nc)
                    .map(|r| w.matrix[(r, col)].norm())
                    .fold(0.0, f64::max),
            );
            for g in 0..nwords {
                for p in 0..rc {
                    let row = nc + perm[g] * rc + p;
                    fock = fock.max((w.matrix[(row, col)] - t[(g * rc + p, b * re + q)]).norm());
                }
            }
        }
    }
    Ok(Report::new(vec![
        Check::new("charfn: W(e_∅⊗η) = Θ_C,E η", impulse, TOL_COINCIDENCE),
        Check::new("charfn: W on Fock vectors = M_Θ up to word reversal", fock, TOL_COINCIDENCE),
    ]))
}
