//! The colligation of a lifting, its transfer function as a noncommutative
//! power series, and block-Toeplitz compressions of the multiplier `M_Θ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::LiftingInstance;
use crate::numkernel::{operator_norm, random_gaussian_matrix, ComplexMatrix};
use crate::report::{Check, Report};
use crate::rowtuple::block_identity_violation;
use crate::words::{count_upto, level_offset, level_size, Word, WordIndex};

pub const TOL_CONTRACTION: f64 = 1e-8;
pub const TOL_UNIT_NORM: f64 = 1e-10;
pub const TOL_MULTI_ANALYTIC: f64 = 1e-12;
pub const TOL_STRUCTURE: f64 = 1e-10;

/// `[E_j^*, (D_E)_j^* ; C̃, D̃]`, with `𝒟_E` and `𝒟_C` in frame coordinates.
#[derive(Clone, Debug)]
pub struct Colligation {
    pub d: usize,
    pub dim_c: usize,
    pub ej_star: Vec<ComplexMatrix>,
    pub dej_star: Vec<ComplexMatrix>,
    pub c_tilde: ComplexMatrix,
    pub d_tilde: ComplexMatrix,
}

pub fn build_colligation(inst: &LiftingInstance) -> Colligation {
    let (nc, ne) = (inst.dim_c, inst.dim_e());
    let re = inst.defect_e.rank();
    let rc = inst.defect_c.rank();
    let ej_star: Vec<_> = inst.e.ops().iter().map(|e| e.adjoint()).collect();
    let dej_star = inst.defect_e.inject_adj.clone();
    let mut c_tilde = ComplexMatrix::zeros(rc, ne);
    let mut d_tilde = ComplexMatrix::zeros(rc, re);
    for j in 0..inst.d {
        let dc = &inst.defect_c.inject[j];
        // P_{H_C} keeps the first dimC rows.
        c_tilde = c_tilde.add(&dc.matmul(&ej_star[j].block(0, 0, nc, ne)));
        d_tilde = d_tilde.add(&dc.matmul(&dej_star[j].block(0, 0, nc, re)));
    }
    Colligation { d: inst.d, dim_c: nc, ej_star, dej_star, c_tilde, d_tilde }
}

impl Colligation {
    pub fn state_dim(&self) -> usize {
        self.c_tilde.cols()
    }

    pub fn in_dim(&self) -> usize {
        self.d_tilde.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.d_tilde.rows()
    }

    /// Stacked `[E_j^*, (D_E)_j^*]` over `j`: the matrix of `U_1`.
    pub fn top_block(&self) -> ComplexMatrix {
        let (ne, re) = (self.state_dim(), self.in_dim());
        let mut g = ComplexMatrix::zeros(self.d * ne, ne + re);
        for j in 0..self.d {
            g.set_block(j * ne, 0, &self.ej_star[j]);
            g.set_block(j * ne, ne, &self.dej_star[j]);
        }
        g
    }

    /// `[C̃, D̃]`
    pub fn bottom_block(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(self.out_dim(), &[self.c_tilde.clone(), self.d_tilde.clone()])
    }

    /// The top block is unitary and the bottom block has orthonormal rows.
    pub fn checks(&self, tol: f64) -> Vec<Check> {
        let g = self.top_block();
        let id_c = ComplexMatrix::identity(g.cols());
        let id_r = ComplexMatrix::identity(g.rows());
        let unitary = g.adjoint().matmul(&g).max_abs_diff(&id_c).max(g.matmul(&g.adjoint()).max_abs_diff(&id_r));
        let b = self.bottom_block();
        let coiso = b.matmul(&b.adjoint()).max_abs_diff(&ComplexMatrix::identity(b.rows()));
        vec![
            Check::new("colligation: [E_j*, (D_E)_j*] unitary", unitary, tol),
            Check::new("colligation: [C̃, D̃] coisometric", coiso, tol),
        ]
    }

    /// `Θ^{(g)}`: `D̃` at `∅`, otherwise `C̃ E_{g_1}^* ⋯ E_{g_{k-1}}^* (D_E)_{g_k}^*`.
    pub fn coeff(&self, g: &Word) -> ComplexMatrix {
        let l = g.letters();
        match l.split_last() {
            None => self.d_tilde.clone(),
            Some((&last, init)) => {
                let mut x = self.dej_star[last as usize - 1].clone();
                for &k in init.iter().rev() {
                    x = self.ej_star[k as usize - 1].matmul(&x);
                }
                self.c_tilde.matmul(&x)
            }
        }
    }

    /// All coefficients up to `depth`, sharing the state products between words.
    pub fn series(&self, depth: usize) -> NCSeries {
        let (d, re, rc) = (self.d, self.in_dim(), self.out_dim());
        let mut out = NCSeries::zeros(d, depth, rc, re);
        out.coeffs[0] = self.d_tilde.clone();
        // states[r] = E_{g_1}^* ⋯ (D_E)_{g_k}^* for the level-k word of rank r.
        let mut states: Vec<ComplexMatrix> = self.dej_star.clone();
        for m in 1..=depth {
            let base = level_offset(d, m);
            let coeffs: Vec<ComplexMatrix> = states.par_iter().map(|x| self.c_tilde.matmul(x)).collect();
            for (r, c) in coeffs.into_iter().enumerate() {
                out.coeffs[base + r] = c;
            }
            if m < depth {
                // Prepending j puts j·w at rank (j-1)·d^m + rank(w).
                states = (0..d)
                    .into_par_iter()
                    .flat_map_iter(|j| states.iter().map(move |x| self.ej_star[j].matmul(x)).collect::<Vec<_>>())
                    .collect();
            }
        }
        out
    }
}

/// Coefficients `Θ^{(g)}` for `|g| ≤ depth`, dense in graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct NCSeries {
    d: usize,
    depth: usize,
    out_dim: usize,
    in_dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    word: Word,
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SeriesJson {
    in_dim: usize,
    out_dim: usize,
    depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    coeffs: Vec<CoeffEntry>,
}

impl Serialize for NCSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            depth: self.depth,
            d: Some(self.d),
            coeffs: self
                .words()
                .iter()
                .zip(&self.coeffs)
                .map(|(w, m)| CoeffEntry { word: w.clone(), matrix: m.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NCSeries {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SeriesJson::deserialize(de)?;
        let d = raw
            .d
            .unwrap_or_else(|| raw.coeffs.iter().map(|c| c.word.max_letter() as usize).max().unwrap_or(1).max(1));
        let mut s = NCSeries::zeros(d, raw.depth, raw.out_dim, raw.in_dim);
        for e in raw.coeffs {
            if e.matrix.shape() != (raw.out_dim, raw.in_dim) {
                return Err(D::Error::custom(format!("coefficient at {} has the wrong shape", e.word)));
            }
            let word = Word::new(e.word.letters().to_vec(), d as u32).map_err(D::Error::custom)?;
            s.set(&word, e.matrix).map_err(D::Error::custom)?;
        }
        Ok(s)
    }
}

impl NCSeries {
    pub fn zeros(d: usize, depth: usize, out_dim: usize, in_dim: usize) -> Self {
        NCSeries { d, depth, out_dim, in_dim, coeffs: vec![ComplexMatrix::zeros(out_dim, in_dim); count_upto(d, depth)] }
    }

    /// `c·I` at the empty word.
    pub fn constant(d: usize, depth: usize, c: ComplexMatrix) -> Self {
        let mut s = Self::zeros(d, depth, c.rows(), c.cols());
        s.coeffs[0] = c;
        s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn words(&self) -> Vec<Word> {
        WordIndex::new(self.d, self.depth).iter().collect()
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    fn index(&self, w: &Word) -> Option<usize> {
        WordIndex::new(self.d, self.depth).index(w)
    }

    /// `None` beyond the truncation depth.
    pub fn coeff(&self, w: &Word) -> Option<&ComplexMatrix> {
        self.index(w).map(|i| &self.coeffs[i])
    }

    pub fn set(&mut self, w: &Word, m: ComplexMatrix) -> Result<()> {
        if m.shape() != (self.out_dim, self.in_dim) {
            return Err(Error::DimMismatch(format!(
                "coefficient is {}x{}, series is {}x{}",
                m.rows(),
                m.cols(),
                self.out_dim,
                self.in_dim
            )));
        }
        let i = self.index(w).ok_or_else(|| Error::DepthError(format!("word {w} beyond depth {}", self.depth)))?;
        self.coeffs[i] = m;
        Ok(())
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        NCSeries { depth, coeffs: self.coeffs[..count_upto(self.d, depth)].to_vec(), ..self.clone() }
    }

    pub fn padded(&self, depth: usize) -> Self {
        let mut s = self.clone();
        if depth > self.depth {
            s.depth = depth;
            s.coeffs.resize(count_upto(self.d, depth), ComplexMatrix::zeros(self.out_dim, self.in_dim));
        }
        s
    }

    /// Largest coefficient difference, treating missing levels as zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let depth = self.depth.max(other.depth);
        let (a, b) = (self.padded(depth), other.padded(depth));
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
    }

    /// `u·z^i`: every support word gets the letter `i` appended.
    pub fn right_shift(&self, i: usize) -> Self {
        let mut out = Self::zeros(self.d, self.depth + 1, self.out_dim, self.in_dim);
        for m in 0..=self.depth {
            for r in 0..level_size(self.d, m) {
                let dst = level_offset(self.d, m + 1) + r * self.d + (i - 1);
                out.coeffs[dst] = self.coeffs[level_offset(self.d, m) + r].clone();
            }
        }
        out
    }
}

/// Index of `a·b` in the graded enumeration.
fn concat_index(d: usize, a_len: usize, a_rank: usize, b_len: usize, b_rank: usize) -> usize {
    level_offset(d, a_len + b_len) + a_rank * level_size(d, b_len) + b_rank
}

/// `y(g) = Σ_{g = a·b} θ(a) u(b)` up to `min(N_θ + N_u, cap)`.
pub fn series_multiply(theta: &NCSeries, u: &NCSeries, cap: Option<usize>) -> Result<NCSeries> {
    if theta.d != u.d {
        return Err(Error::DimMismatch(format!("alphabets of size {} and {}", theta.d, u.d)));
    }
    if theta.in_dim != u.out_dim {
        return Err(Error::DimMismatch(format!(
            "θ takes {}-dimensional inputs, u has {}-dimensional values",
            theta.in_dim, u.out_dim
        )));
    }
    let d = theta.d;
    let depth = (theta.depth + u.depth).min(cap.unwrap_or(usize::MAX));
    let words: Vec<Word> = WordIndex::new(d, depth).iter().collect();
    let coeffs = words
        .par_iter()
        .map(|g| {
            let mut acc = ComplexMatrix::zeros(theta.out_dim, u.in_dim);
            for (a, b) in g.splits() {
                if let (Some(t), Some(v)) = (theta.coeff(&a), u.coeff(&b)) {
                    acc = acc.add(&t.matmul(v));
                }
            }
            acc
        })
        .collect();
    Ok(NCSeries { d, depth, out_dim: theta.out_dim, in_dim: u.in_dim, coeffs })
}

/// Compression of `M_Θ` to words of length `≤ N`: block `(a·b, b)` is `θ(a)`.
pub fn toeplitz_matrix(theta: &NCSeries, n: usize) -> ComplexMatrix {
    let d = theta.d;
    let (p, q) = (theta.out_dim, theta.in_dim);
    let size = count_upto(d, n);
    let mut t = ComplexMatrix::zeros(size * p, size * q);
    for bl in 0..=n {
        for br in 0..level_size(d, bl) {
            let col = level_offset(d, bl) + br;
            for al in 0..=(n - bl).min(theta.depth) {
                for ar in 0..level_size(d, al) {
                    let row = concat_index(d, al, ar, bl, br);
                    let c = &theta.coeffs[level_offset(d, al) + ar];
                    t.set_block(row * p, col * q, c);
                }
            }
        }
    }
    t
}

pub fn transfer_coeff(inst: &LiftingInstance, g: &Word) -> ComplexMatrix {
    build_colligation(inst).coeff(g)
}

pub fn transfer_series(inst: &LiftingInstance, depth: usize) -> NCSeries {
    build_colligation(inst).series(depth)
}

/// `C̃|_{H_C} = 0`, `C̃|_{H_A} = γD_{*,A}`, the `D_C` block identity, and the
/// colligation's own consistency.
pub fn verify_structure(inst: &LiftingInstance) -> Report {
    let coll = build_colligation(inst);
    let (nc, na) = (inst.dim_c, inst.dim_a);
    let rc = coll.out_dim();
    let on_c = coll.c_tilde.block(0, 0, rc, nc).max_abs();
    let on_a = coll.c_tilde.block(0, nc, rc, na).max_abs_diff(&inst.gamma_dstar());
    let mut r = Report::new(vec![
        Check::new("structure: C̃|H_C = 0", on_c, TOL_STRUCTURE),
        Check::new("structure: C̃|H_A = γD_*,A", on_a, TOL_STRUCTURE),
        Check::new(
            "structure: (D_C)_i*(D_C)_j = δ_ij I - C_i*C_j",
            block_identity_violation(&inst.c, &inst.defect_c),
            TOL_STRUCTURE,
        ),
    ]);
    for c in coll.checks(TOL_STRUCTURE) {
        r.push(c);
    }
    r
}

/// Operator norm of the depth-`N` Toeplitz compression of `M_Θ`.
pub fn toeplitz_norm(inst: &LiftingInstance, n: usize) -> f64 {
    operator_norm(&toeplitz_matrix(&transfer_series(inst, n), n))
}

pub fn verify_contraction(inst: &LiftingInstance, n: usize) -> Report {
    let norm = toeplitz_norm(inst, n);
    let mut r = Report::new(vec![Check::new("transfer: ‖M_Θ compression‖ ≤ 1", (norm - 1.0).max(0.0), TOL_CONTRACTION)]);
    if inst.dim_a == 0 {
        r.push(Check::new("transfer: ‖M_Θ compression‖ = 1 for E = C", (norm - 1.0).abs(), TOL_UNIT_NORM));
    }
    r
}

/// `M_Θ(u·z^i) = (M_Θ u)·z^i` for a random depth-`(N-1)` input.
pub fn verify_multi_analytic(inst: &LiftingInstance, n: usize) -> Result<Report> {
    if n == 0 {
        return Err(Error::DepthError("multi-analyticity needs depth N ≥ 1".into()));
    }
    let theta = transfer_series(inst, n);
    let seed = inst.seed.unwrap_or(0) ^ 0x6d75_6c74_6961_6e61;
    let u = random_input(inst.d, n - 1, theta.in_dim, seed);
    let mut worst: f64 = 0.0;
    for i in 1..=inst.d {
        let lhs = series_multiply(&theta, &u.right_shift(i), Some(n))?;
        let rhs = series_multiply(&theta, &u, Some(n - 1))?.right_shift(i);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(Report::new(vec![Check::new("transfer: M_Θ intertwines right translations", worst, TOL_MULTI_ANALYTIC)]))
}

/// Random signal with values in `ℂ^dim` (a series of `dim × 1` coefficients).
pub fn random_input(d: usize, depth: usize, dim: usize, seed: u64) -> NCSeries {
    let n = count_upto(d, depth);
    let g = random_gaussian_matrix(dim, n, seed);
    NCSeries {
        d,
        depth,
        out_dim: dim,
        in_dim: 1,
        coeffs: (0..n).map(|k| g.block(0, k, dim, 1)).collect(),
    }
}
