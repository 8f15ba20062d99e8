//! The word-indexed linear system of a colligation:
//! `x(jα) = E_j^* x(α) + (D_E)_j^* u(α)`, `y(α) = C̃ x(α) + D̃ u(α)`, `x(∅) = 0`.

use serde::{Deserialize, Serialize};

use crate::dilation::{gemv_acc, GradedVector};
use crate::error::{Error, Result};
use crate::lifting::LiftingInstance;
use crate::numkernel::{max_abs_diff, vec_serde, ComplexMatrix, C64, ZERO};
use crate::report::{Check, Report};
use crate::transfer::{build_colligation, series_multiply, Colligation, NCSeries};
use crate::words::{count_upto, level_offset, level_size, Word, WordIndex};

pub const TOL_IO: f64 = 1e-10;

/// Input, state and output of one run, each indexed by the graded word order.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub d: usize,
    pub depth: usize,
    pub u: Vec<Vec<C64>>,
    pub x: Vec<Vec<C64>>,
    pub y: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    word: Word,
    #[serde(with = "vec_serde")]
    coeff: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryJson {
    depth: usize,
    u: Vec<Entry>,
    x: Vec<Entry>,
    y: Vec<Entry>,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let words: Vec<Word> = WordIndex::new(self.d, self.depth).iter().collect();
        let list = |v: &[Vec<C64>]| {
            words.iter().zip(v).map(|(w, c)| Entry { word: w.clone(), coeff: c.clone() }).collect::<Vec<_>>()
        };
        TrajectoryJson { depth: self.depth, u: list(&self.u), x: list(&self.x), y: list(&self.y) }.serialize(s)
    }
}

impl Trajectory {
    pub fn words(&self) -> Vec<Word> {
        WordIndex::new(self.d, self.depth).iter().collect()
    }

    pub fn y_at(&self, w: &Word) -> Option<&[C64]> {
        WordIndex::new(self.d, self.depth).index(w).map(|i| self.y[i].as_slice())
    }

    pub fn x_at(&self, w: &Word) -> Option<&[C64]> {
        WordIndex::new(self.d, self.depth).index(w).map(|i| self.x[i].as_slice())
    }
}

/// Splits a Fock-only graded vector into per-word input vectors.
fn input_table(u: &GradedVector, depth: usize, dim: usize) -> Result<Vec<Vec<C64>>> {
    if u.inner_dim() != dim {
        return Err(Error::InnerSpaceMismatch { expected: dim, got: u.inner_dim() });
    }
    let u = if u.depth() >= depth { u.truncated(depth) } else { u.padded(depth) };
    Ok((0..count_upto(u.d(), depth)).map(|k| u.fock()[k * dim..(k + 1) * dim].to_vec()).collect())
}

pub fn simulate_colligation(coll: &Colligation, u: &GradedVector, depth: usize) -> Result<Trajectory> {
    let d = coll.d;
    if u.d() != d {
        return Err(Error::DimMismatch(format!("input over {} letters, system has {d}", u.d())));
    }
    let (ne, re, rc) = (coll.state_dim(), coll.in_dim(), coll.out_dim());
    let u = input_table(u, depth, re)?;
    let n = count_upto(d, depth);
    let mut x = vec![vec![ZERO; ne]; n];
    for m in 0..depth {
        for r in 0..level_size(d, m) {
            let src = level_offset(d, m) + r;
            for j in 0..d {
                let dst = level_offset(d, m + 1) + j * level_size(d, m) + r;
                let mut acc = vec![ZERO; ne];
                gemv_acc(&coll.ej_star[j], &x[src], &mut acc);
                gemv_acc(&coll.dej_star[j], &u[src], &mut acc);
                x[dst] = acc;
            }
        }
    }
    let y = (0..n)
        .map(|k| {
            let mut acc = vec![ZERO; rc];
            gemv_acc(&coll.c_tilde, &x[k], &mut acc);
            gemv_acc(&coll.d_tilde, &u[k], &mut acc);
            acc
        })
        .collect();
    Ok(Trajectory { d, depth, u, x, y })
}

/// Runs the system of the lifting's colligation on `u` (values in `𝒟_E` coordinates).
pub fn simulate(inst: &LiftingInstance, u: &GradedVector, depth: usize) -> Result<Trajectory> {
    simulate_colligation(&build_colligation(inst), u, depth)
}

/// A signal as a series of `dim × 1` coefficients.
pub fn signal_series(d: usize, values: &[Vec<C64>], depth: usize, dim: usize) -> NCSeries {
    let mut s = NCSeries::zeros(d, depth, dim, 1);
    for (w, v) in WordIndex::new(d, depth).iter().zip(values) {
        s.set(&w, ComplexMatrix::from_columns(dim, std::slice::from_ref(v))).expect("shape");
    }
    s
}

/// Largest gap between the simulated output and `Θ * u`.
pub fn io_violation(coll: &Colligation, theta: &NCSeries, u: &GradedVector, depth: usize) -> Result<f64> {
    let traj = simulate_colligation(coll, u, depth)?;
    let useries = signal_series(coll.d, &traj.u, depth, coll.in_dim());
    let conv = series_multiply(theta, &useries, Some(depth))?;
    Ok(traj
        .y
        .iter()
        .zip(conv.coeffs())
        .map(|(y, c)| max_abs_diff(y, &c.column(0)))
        .fold(0.0, f64::max))
}

pub fn verify_io(inst: &LiftingInstance, u: &GradedVector, depth: usize) -> Result<Report> {
    let coll = build_colligation(inst);
    let theta = coll.series(depth);
    let v = io_violation(&coll, &theta, u, depth)?;
    Ok(Report::new(vec![Check::new("system: recursion output = Θ * u", v, TOL_IO)]))
}

/// Impulses at `∅` along every `𝒟_E` frame vector plus one seeded random input.
pub fn verify_io_suite(inst: &LiftingInstance, depth: usize) -> Result<Report> {
    let coll = build_colligation(inst);
    let theta = coll.series(depth);
    let re = coll.in_dim();
    let mut impulse: f64 = 0.0;
    for k in 0..re {
        let u = GradedVector::basis(inst.d, depth, None, re, k);
        impulse = impulse.max(io_violation(&coll, &theta, &u, depth)?);
    }
    let seed = inst.seed.unwrap_or(0) ^ 0x696f_5f72_616e_646f;
    let g = crate::numkernel::random_gaussian_matrix(count_upto(inst.d, depth) * re, 1, seed).column(0);
    let u = GradedVector::from_parts(inst.d, depth, None, re, g)?;
    let random = io_violation(&coll, &theta, &u, depth)?;
    Ok(Report::new(vec![
        Check::new("system: impulse responses = Θ coefficients", impulse, TOL_IO),
        Check::new("system: recursion output = Θ * u (random input)", random, TOL_IO),
    ]))
}
