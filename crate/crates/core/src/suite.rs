//! Checks that need both dilations or the intertwiner, and the full `verify` run.

use rayon::prelude::*;

use crate::charfn::{verify_coincidence, verify_w_restriction};
use crate::dilation::Dilation;
use crate::error::{Error, Result};
use crate::intertwiner::Intertwiner;
use crate::lifting::LiftingInstance;
use crate::ncsystem::verify_io_suite;
use crate::numkernel::{ComplexMatrix, TOL_EQ};
use crate::report::{Check, Report};
use crate::scattering::{row_unitary_check, verify_scattering};
use crate::transfer::{verify_contraction, verify_multi_analytic, verify_structure};
use crate::words::WordIndex;

pub const TOL_ISOMETRY: f64 = 1e-12;
pub const TOL_COMPRESSION: f64 = 1e-10;
pub const TOL_INTERTWINING: f64 = 1e-10;
pub const TOL_COISOMETRY: f64 = 1e-10;
pub const TOL_FIXED: f64 = 1e-12;
pub const TOL_STABLE: f64 = 1e-12;

/// Isometry with orthogonal ranges, row unitarity (for coisometric tuples)
/// and compression `P_H V_α|_H = T_α` for `|α| ≤ 3`.
pub fn dilation_checks(dil: &Dilation, depth: usize, label: &str, coisometric: bool) -> Result<Report> {
    let d = dil.d();
    let mats: Result<Vec<ComplexMatrix>> = (1..=d).into_par_iter().map(|j| dil.matrix(j, depth)).collect();
    let row = ComplexMatrix::hstack(dil.space_dim(depth + 1), &mats?);
    let gram = row.adjoint().matmul(&row);
    let iso = gram.max_abs_diff(&ComplexMatrix::identity(gram.rows()));

    let mut comp: f64 = 0.0;
    for w in WordIndex::new(d, 3).iter() {
        let t = dil.tuple.word_product(w.letters());
        for k in 0..dil.h_dim() {
            let out = dil.word_apply(w.letters(), &dil.basis_vector(0, k))?;
            let col = t.column(k);
            let diff = out.h().unwrap().iter().zip(&col).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            comp = comp.max(diff);
        }
    }

    let mut report = Report::new(vec![
        Check::new(format!("{label}: V isometric with orthogonal ranges"), iso, TOL_ISOMETRY),
        Check::new(format!("{label}: P_H V_α|_H = T_α, |α| ≤ 3"), comp, TOL_COMPRESSION),
    ]);
    if coisometric {
        report.push(row_unitary_check(dil, depth, label));
    }
    Ok(report)
}

/// `ŴV_j^E = V_j^CŴ` and `V_j^EŴ^* = Ŵ^*V_j^C` on depth-`N` basis vectors.
pub fn verify_intertwining(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    let it = Intertwiner::new(inst);
    let d = inst.d;
    let fwd = (1..=d)
        .into_par_iter()
        .flat_map(|j| (0..it.e.space_dim(depth)).into_par_iter().map(move |k| (j, k)))
        .map(|(j, k)| -> Result<f64> {
            let x = it.e.basis_vector(depth, k);
            let lhs = it.w(&it.e.apply(j, &x)?)?;
            let rhs = it.c.apply(j, &it.w(&x)?)?;
            Ok(lhs.max_abs_diff(&rhs))
        })
        .collect::<Result<Vec<f64>>>()?;
    let bwd = (1..=d)
        .into_par_iter()
        .flat_map(|j| (0..it.c.space_dim(depth)).into_par_iter().map(move |k| (j, k)))
        .map(|(j, k)| -> Result<f64> {
            let y = it.c.basis_vector(depth, k);
            let lhs = it.e.apply(j, &it.w_star(&y)?)?;
            let rhs = it.w_star(&it.c.apply(j, &y)?)?;
            Ok(lhs.max_abs_diff(&rhs))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    Ok(Report::new(vec![
        Check::new("intertwining: ŴV_j^E = V_j^CŴ", max(fwd), TOL_INTERTWINING),
        Check::new("intertwining: V_j^EŴ* = Ŵ*V_j^C", max(bwd), TOL_INTERTWINING),
    ]))
}

/// `ŴŴ^* = I`, `Ŵ^* = Ŵ^H`, `Ŵh̃ = Ŵ^*h̃ = h̃` on `H_C`, and agreement of
/// `N + 1` and `N + 2` stages on the depth-`N` truncation.
pub fn verify_coisometry(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    let it = Intertwiner::new(inst);
    let w = it.compute_w(depth)?;
    let ws = it.compute_w_star(depth)?;
    let id = ComplexMatrix::identity(w.matrix.rows());
    let nc = inst.dim_c;
    let embed = |m: &ComplexMatrix| {
        let mut e = ComplexMatrix::zeros(m.rows(), nc);
        e.set_block(0, 0, &ComplexMatrix::identity(nc));
        m.block(0, 0, m.rows(), nc).max_abs_diff(&e)
    };
    let fixed = embed(&w.matrix).max(embed(&ws.matrix));

    let w2 = it.compute_w_stages(depth, depth + 2)?;
    let ws2 = it.compute_w_star_stages(depth, depth + 2)?;
    let stable = w2
        .matrix
        .block(0, 0, w.matrix.rows(), w.matrix.cols())
        .max_abs_diff(&w.matrix)
        .max(ws2.matrix.block(0, 0, ws.matrix.rows(), ws.matrix.cols()).max_abs_diff(&ws.matrix));

    Ok(Report::new(vec![
        Check::new("coisometry: ŴŴ* = I", w.matrix.matmul(&ws.matrix).max_abs_diff(&id), TOL_COISOMETRY),
        Check::new("coisometry: Ŵ* = Ŵ^H", ws.matrix.max_abs_diff(&w.matrix.adjoint()), TOL_COISOMETRY),
        Check::new("coisometry: Ŵh̃ = Ŵ*h̃ = h̃ on H_C", fixed, TOL_FIXED),
        Check::new("coisometry: N+1 and N+2 stages agree", stable, TOL_STABLE),
    ]))
}

/// Every check, in order, at depth `N ≥ 1`.
pub fn verify_all(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    if depth == 0 {
        return Err(Error::DepthError("verify needs depth N ≥ 1".into()));
    }
    let mut report = Report::new(inst.invariant_checks(TOL_EQ));
    let it = Intertwiner::new(inst);
    report.extend(dilation_checks(&it.c, depth, "dilation C", true)?);
    report.extend(dilation_checks(&it.e, depth, "dilation E", true)?);
    report.extend(verify_intertwining(inst, depth)?);
    report.extend(verify_coisometry(inst, depth)?);
    report.extend(verify_scattering(inst, depth)?);
    report.extend(verify_contraction(inst, depth));
    report.extend(verify_multi_analytic(inst, depth)?);
    report.extend(verify_io_suite(inst, depth)?);
    report.extend(verify_coincidence(inst, depth)?);
    report.extend(verify_w_restriction(inst, depth)?);
    report.extend(verify_structure(inst));
    Ok(report)
}
