//! Stage unitaries `Ũ_n`, `U_n` and the intertwining coisometry `Ŵ`.
//!
//! A stage-`n` vector lives in `H ⊗ 𝒫^{⊗n} ⊕ ⊕_{m ≥ n} (Fock level m ⊗ 𝒟)`.
//! Its tensor part is indexed by P-words of length `n` in level-rank order,
//! so P-letters and Fock letters share the alphabet `{1..d}`.
//!
//! `Ŵ` is computed on a depth-`N` domain by running the stage maps far enough
//! that the result no longer changes: `N + 1` stages suffice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::{gemv_acc, Dilation, GradedVector};
use crate::error::{Error, Result};
use crate::lifting::LiftingInstance;
use crate::numkernel::{norm, ComplexMatrix, C64, ZERO};
use crate::words::{count_upto, level_offset, level_size, Word, WordIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    C,
    E,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageVector {
    side: Side,
    d: usize,
    h_dim: usize,
    inner: usize,
    stage: usize,
    depth: usize,
    tensor: Vec<C64>,
    /// Fock levels `stage..=depth`.
    tail: Vec<C64>,
}

impl StageVector {
    pub fn from_graded(side: Side, v: &GradedVector) -> Result<Self> {
        let h = v.h().ok_or_else(|| Error::DimMismatch("stage vector needs an H part".into()))?;
        Ok(StageVector {
            side,
            d: v.d(),
            h_dim: h.len(),
            inner: v.inner_dim(),
            stage: 0,
            depth: v.depth(),
            tensor: h.to_vec(),
            tail: v.fock().to_vec(),
        })
    }

    pub fn to_graded(&self) -> Result<GradedVector> {
        if self.stage != 0 {
            return Err(Error::StageMismatch(format!("stage {} vector is not graded", self.stage)));
        }
        GradedVector::from_parts(self.d, self.depth, Some(self.tensor.clone()), self.inner, self.tail.clone())
    }

    pub fn zeros(side: Side, d: usize, h_dim: usize, inner: usize, stage: usize, depth: usize) -> Self {
        let depth = depth.max(stage.saturating_sub(1));
        let tail_len = (count_upto(d, depth) - level_offset(d, stage.min(depth + 1))) * inner;
        StageVector {
            side,
            d,
            h_dim,
            inner,
            stage,
            depth,
            tensor: vec![ZERO; level_size(d, stage) * h_dim],
            tail: vec![ZERO; tail_len],
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tensor(&self) -> &[C64] {
        &self.tensor
    }

    pub fn tensor_mut(&mut self) -> &mut [C64] {
        &mut self.tensor
    }

    pub fn tail(&self) -> &[C64] {
        &self.tail
    }

    pub fn tail_mut(&mut self) -> &mut [C64] {
        &mut self.tail
    }

    /// Tensor component at a P-word of length `stage`.
    pub fn tensor_at(&self, u: &Word) -> Option<&[C64]> {
        if u.len() != self.stage {
            return None;
        }
        let r = crate::words::level_rank(u, self.d);
        Some(&self.tensor[r * self.h_dim..(r + 1) * self.h_dim])
    }

    fn tail_level(&self, m: usize) -> Option<&[C64]> {
        if m < self.stage || m > self.depth {
            return None;
        }
        let a = (level_offset(self.d, m) - level_offset(self.d, self.stage)) * self.inner;
        Some(&self.tail[a..a + level_size(self.d, m) * self.inner])
    }

    pub fn norm(&self) -> f64 {
        (norm(&self.tensor).powi(2) + norm(&self.tail).powi(2)).sqrt()
    }

    pub fn to_flat(&self) -> Vec<C64> {
        let mut v = self.tensor.clone();
        v.extend_from_slice(&self.tail);
        v
    }
}

/// `Ŵ` (or `Ŵ^*`) as a dense matrix between graded bases.
#[derive(Clone, Debug, Serialize)]
pub struct WMatrix {
    pub matrix: ComplexMatrix,
    pub domain: BasisManifest,
    pub codomain: BasisManifest,
}

/// Coordinate order of a graded space: `hDim` H coordinates, then each word
/// in order with `innerDim` defect coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisManifest {
    pub side: Side,
    pub d: usize,
    pub h_dim: usize,
    pub inner_dim: usize,
    pub depth: usize,
    pub words: Vec<Word>,
}

impl BasisManifest {
    fn of(side: Side, dil: &Dilation, depth: usize) -> Self {
        BasisManifest {
            side,
            d: dil.d(),
            h_dim: dil.h_dim(),
            inner_dim: dil.inner_dim(),
            depth,
            words: WordIndex::new(dil.d(), depth).iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h_dim + self.words.len() * self.inner_dim
    }
}

impl WMatrix {
    pub fn apply(&self, x: &GradedVector) -> Result<GradedVector> {
        let flat = x.to_flat();
        if flat.len() != self.matrix.cols() {
            return Err(Error::DimMismatch(format!("vector of length {} for {} columns", flat.len(), self.matrix.cols())));
        }
        let y = self.matrix.mul_vec(&flat);
        let m = &self.codomain;
        GradedVector::from_flat(m.d, m.depth, Some(m.h_dim), m.inner_dim, &y)
    }
}

/// The C- and E-side dilations of a lifting.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub c: Dilation,
    pub e: Dilation,
    dim_c: usize,
}

impl Intertwiner {
    pub fn new(inst: &LiftingInstance) -> Self {
        Intertwiner {
            c: Dilation::from_parts(inst.c.clone(), inst.defect_c.clone()),
            e: Dilation::from_parts(inst.e.clone(), inst.defect_e.clone()),
            dim_c: inst.dim_c,
        }
    }

    pub fn dilation(&self, side: Side) -> &Dilation {
        match side {
            Side::C => &self.c,
            Side::E => &self.e,
        }
    }

    pub fn d(&self) -> usize {
        self.c.d()
    }

    fn check(&self, side: Side, want_stage: usize, v: &StageVector) -> Result<()> {
        if v.side != side {
            return Err(Error::StageMismatch(format!("{:?}-side vector given to {side:?}-side stage", v.side)));
        }
        if v.stage != want_stage {
            return Err(Error::StageMismatch(format!("expected stage {want_stage}, got {}", v.stage)));
        }
        let dil = self.dilation(side);
        if v.h_dim != dil.h_dim() || v.inner != dil.inner_dim() || v.d != dil.d() {
            return Err(Error::StageMismatch("vector dimensions do not match the side".into()));
        }
        Ok(())
    }

    /// Stage `n-1 → n`: `tensor(u·j) = T_j^* tensor(u) + (D_T)_j^* tail(u)`.
    pub fn stage_forward(&self, side: Side, n: usize, v: &StageVector) -> Result<StageVector> {
        if n == 0 {
            return Err(Error::StageMismatch("stage maps start at n = 1".into()));
        }
        self.check(side, n - 1, v)?;
        let dil = self.dilation(side);
        let (d, hd, r, m) = (v.d, v.h_dim, v.inner, n - 1);
        let mut out = StageVector::zeros(side, d, hd, r, n, v.depth);
        let level = v.tail_level(m);
        for u in 0..level_size(d, m) {
            let x = &v.tensor[u * hd..(u + 1) * hd];
            for j in 1..=d {
                let slot = (u * d + j - 1) * hd;
                let dst = &mut out.tensor[slot..slot + hd];
                gemv_acc(dil.op_adjoint(j), x, dst);
                if let Some(level) = level {
                    gemv_acc(&dil.defect.inject_adj[j - 1], &level[u * r..(u + 1) * r], dst);
                }
            }
        }
        let consumed = level.map_or(0, |l| l.len());
        out.tail.copy_from_slice(&v.tail[consumed..]);
        Ok(out)
    }

    /// Stage `n → n-1`, the adjoint and inverse of [`Intertwiner::stage_forward`].
    pub fn stage_backward(&self, side: Side, n: usize, v: &StageVector) -> Result<StageVector> {
        if n == 0 {
            return Err(Error::StageMismatch("stage maps start at n = 1".into()));
        }
        self.check(side, n, v)?;
        let dil = self.dilation(side);
        let (d, hd, r, m) = (v.d, v.h_dim, v.inner, n - 1);
        let mut out = StageVector::zeros(side, d, hd, r, m, v.depth.max(m));
        let mut level = vec![ZERO; level_size(d, m) * r];
        for u in 0..level_size(d, m) {
            for j in 1..=d {
                let src = &v.tensor[(u * d + j - 1) * hd..(u * d + j) * hd];
                gemv_acc(dil.tuple.op(j), src, &mut out.tensor[u * hd..(u + 1) * hd]);
                gemv_acc(&dil.defect.inject[j - 1], src, &mut level[u * r..(u + 1) * r]);
            }
        }
        out.tail[..level.len()].copy_from_slice(&level);
        out.tail[level.len()..level.len() + v.tail.len()].copy_from_slice(&v.tail);
        Ok(out)
    }

    /// `P_n`: keep the `H_C` coordinates of every tensor component, drop the tail.
    pub fn project_p(&self, v: &StageVector) -> Result<StageVector> {
        if v.side != Side::E {
            return Err(Error::StageMismatch("P_n acts on E-side vectors".into()));
        }
        let mut out = v.clone();
        let hd = v.h_dim;
        for block in out.tensor.chunks_mut(hd) {
            block[self.dim_c..].iter_mut().for_each(|z| *z = ZERO);
        }
        out.tail.iter_mut().for_each(|z| *z = ZERO);
        Ok(out)
    }

    /// `P_n` followed by the identification `H_C ⊗ 𝒫^{⊗n} ⊂ ` C-side stage space.
    fn to_c_side(&self, v: &StageVector) -> StageVector {
        let mut out = StageVector::zeros(Side::C, v.d, self.dim_c, self.c.inner_dim(), v.stage, v.depth);
        for (dst, src) in out.tensor.chunks_mut(self.dim_c).zip(v.tensor.chunks(v.h_dim)) {
            dst.copy_from_slice(&src[..self.dim_c]);
        }
        out
    }

    fn to_e_side(&self, v: &StageVector) -> StageVector {
        let mut out = StageVector::zeros(Side::E, v.d, self.e.h_dim(), self.e.inner_dim(), v.stage, v.depth);
        for (dst, src) in out.tensor.chunks_mut(self.e.h_dim()).zip(v.tensor.chunks(v.h_dim)) {
            dst[..self.dim_c].copy_from_slice(src);
        }
        out
    }

    /// `Ũ_1^* ⋯ Ũ_s^* P_s U_s ⋯ U_1 x` for an E-side graded vector; the result has depth `≥ s - 1`.
    pub fn w_apply(&self, x: &GradedVector, stages: usize) -> Result<GradedVector> {
        let mut v = StageVector::from_graded(Side::E, x)?;
        self.check(Side::E, 0, &v)?;
        for n in 1..=stages {
            v = self.stage_forward(Side::E, n, &v)?;
        }
        let mut w = self.to_c_side(&v);
        for n in (1..=stages).rev() {
            w = self.stage_backward(Side::C, n, &w)?;
        }
        w.to_graded()
    }

    /// `U_1^* ⋯ U_s^* Ũ_s ⋯ Ũ_1 y` for a C-side graded vector.
    pub fn w_star_apply(&self, y: &GradedVector, stages: usize) -> Result<GradedVector> {
        let mut v = StageVector::from_graded(Side::C, y)?;
        self.check(Side::C, 0, &v)?;
        for n in 1..=stages {
            v = self.stage_forward(Side::C, n, &v)?;
        }
        let mut w = self.to_e_side(&v);
        for n in (1..=stages).rev() {
            w = self.stage_backward(Side::E, n, &w)?;
        }
        w.to_graded()
    }

    fn assemble(
        &self,
        from: Side,
        depth: usize,
        stages: usize,
        f: impl Fn(&GradedVector) -> Result<GradedVector> + Sync,
    ) -> Result<WMatrix> {
        if stages < depth + 1 {
            return Err(Error::DepthError(format!("{stages} stages cannot resolve depth {depth}")));
        }
        let to = if from == Side::E { Side::C } else { Side::E };
        let src = self.dilation(from);
        let cols: Result<Vec<Vec<C64>>> = (0..src.space_dim(depth))
            .into_par_iter()
            .map(|k| f(&src.basis_vector(depth, k)).map(|v| v.to_flat()))
            .collect();
        let out_depth = depth.max(stages - 1);
        let codomain = BasisManifest::of(to, self.dilation(to), out_depth);
        Ok(WMatrix {
            matrix: ComplexMatrix::from_columns(codomain.dim(), &cols?),
            domain: BasisManifest::of(from, src, depth),
            codomain,
        })
    }

    /// `Ŵ` on `H_E ⊕ Γ_{≤N} ⊗ 𝒟_E` using `stages ≥ N + 1` stage maps.
    pub fn compute_w_stages(&self, depth: usize, stages: usize) -> Result<WMatrix> {
        self.assemble(Side::E, depth, stages, |x| self.w_apply(x, stages))
    }

    pub fn compute_w_star_stages(&self, depth: usize, stages: usize) -> Result<WMatrix> {
        self.assemble(Side::C, depth, stages, |y| self.w_star_apply(y, stages))
    }

    pub fn compute_w(&self, depth: usize) -> Result<WMatrix> {
        self.compute_w_stages(depth, depth + 1)
    }

    pub fn compute_w_star(&self, depth: usize) -> Result<WMatrix> {
        self.compute_w_star_stages(depth, depth + 1)
    }

    /// Column of `Ŵ` at depth `N` with `N + 1` stages.
    pub fn w(&self, x: &GradedVector) -> Result<GradedVector> {
        self.w_apply(x, x.depth() + 1)
    }

    pub fn w_star(&self, y: &GradedVector) -> Result<GradedVector> {
        self.w_star_apply(y, y.depth() + 1)
    }
}

pub fn compute_w(inst: &LiftingInstance, depth: usize) -> Result<WMatrix> {
    Intertwiner::new(inst).compute_w(depth)
}

pub fn compute_w_star(inst: &LiftingInstance, depth: usize) -> Result<WMatrix> {
    Intertwiner::new(inst).compute_w_star(depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{generate, DEFAULT_A_SCALE};
    use crate::numkernel::{max_abs_diff, operator_norm, random_gaussian_matrix};

    fn random_stage(it: &Intertwiner, side: Side, stage: usize, depth: usize, seed: u64) -> StageVector {
        let dil = it.dilation(side);
        let mut v = StageVector::zeros(side, dil.d(), dil.h_dim(), dil.inner_dim(), stage, depth);
        let g = random_gaussian_matrix(v.tensor.len() + v.tail.len(), 1, seed).column(0);
        let t = v.tensor.len();
        v.tensor.copy_from_slice(&g[..t]);
        v.tail.copy_from_slice(&g[t..]);
        v
    }

    fn basis_stage(it: &Intertwiner, side: Side, stage: usize, depth: usize, k: usize) -> StageVector {
        let dil = it.dilation(side);
        let mut v = StageVector::zeros(side, dil.d(), dil.h_dim(), dil.inner_dim(), stage, depth);
        let t = v.tensor.len();
        if k < t {
            v.tensor[k] = C64::new(1.0, 0.0);
        } else {
            v.tail[k - t] = C64::new(1.0, 0.0);
        }
        v
    }

    fn stage_matrix(it: &Intertwiner, side: Side, n: usize, depth: usize) -> ComplexMatrix {
        let proto = basis_stage(it, side, n - 1, depth, 0);
        let dim = proto.tensor.len() + proto.tail.len();
        let cols: Vec<_> = (0..dim)
            .map(|k| it.stage_forward(side, n, &basis_stage(it, side, n - 1, depth, k)).unwrap().to_flat())
            .collect();
        ComplexMatrix::from_columns(cols[0].len(), &cols)
    }

    fn instance() -> LiftingInstance {
        generate(2, 2, 2, 7, DEFAULT_A_SCALE).unwrap()
    }

    #[test]
    fn first_stage_examples() {
        let inst = instance();
        let it = Intertwiner::new(&inst);
        let h = vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.0)];
        let x = GradedVector::from_h(2, 2, h.clone(), it.c.inner_dim());
        let v = it.stage_forward(Side::C, 1, &StageVector::from_graded(Side::C, &x).unwrap()).unwrap();
        for j in 1..=2u32 {
            let expect = inst.c.op(j as usize).adjoint().mul_vec(&h);
            assert!(max_abs_diff(v.tensor_at(&Word::letter(j)).unwrap(), &expect) < 1e-15);
        }
        assert!(v.tail().iter().all(|z| *z == ZERO));

        let mut y = it.c.zeros(2);
        let eta: Vec<C64> = (0..it.c.inner_dim()).map(|k| C64::new(k as f64 + 1.0, -1.0)).collect();
        y.coeff_mut(&Word::empty()).unwrap().copy_from_slice(&eta);
        let v = it.stage_forward(Side::C, 1, &StageVector::from_graded(Side::C, &y).unwrap()).unwrap();
        for j in 1..=2u32 {
            let expect = inst.defect_c.inject_adj[j as usize - 1].mul_vec(&eta);
            assert!(max_abs_diff(v.tensor_at(&Word::letter(j)).unwrap(), &expect) < 1e-15);
        }
    }

    #[test]
    fn stage_maps_are_unitary() {
        for (d, nc, na) in [(2, 2, 2), (3, 1, 2)] {
            let inst = generate(d, nc, na, 3, DEFAULT_A_SCALE).unwrap();
            let it = Intertwiner::new(&inst);
            for side in [Side::C, Side::E] {
                for n in 1..=3 {
                    let m = stage_matrix(&it, side, n, 2);
                    assert!(m.is_square());
                    let id = ComplexMatrix::identity(m.rows());
                    assert!(m.adjoint().matmul(&m).max_abs_diff(&id) < 1e-12, "{side:?} n={n}");
                    assert!(m.matmul(&m.adjoint()).max_abs_diff(&id) < 1e-12, "{side:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn backward_is_inverse_and_adjoint() {
        let inst = instance();
        let it = Intertwiner::new(&inst);
        for side in [Side::C, Side::E] {
            for n in 1..=4 {
                let x = random_stage(&it, side, n - 1, 3, n as u64);
                let f = it.stage_forward(side, n, &x).unwrap();
                assert!((f.norm() - x.norm()).abs() < 1e-12);
                let back = it.stage_backward(side, n, &f).unwrap();
                assert!(max_abs_diff(&back.to_flat(), &x.to_flat()) < 1e-12);

                let y = random_stage(&it, side, n, 3, 50 + n as u64);
                let by = it.stage_backward(side, n, &y).unwrap();
                let lhs = crate::numkernel::inner(&by.to_flat(), &x.to_flat());
                let rhs = crate::numkernel::inner(&y.to_flat(), &f.to_flat());
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_of_first_stage_recovers_h() {
        let inst = instance();
        let it = Intertwiner::new(&inst);
        let h = vec![C64::new(0.2, 0.1), C64::new(1.0, -1.0)];
        let mut v = StageVector::zeros(Side::C, 2, 2, it.c.inner_dim(), 1, 0);
        for j in 1..=2 {
            let x = inst.c.op(j).adjoint().mul_vec(&h);
            v.tensor[(j - 1) * 2..j * 2].copy_from_slice(&x);
        }
        let back = it.stage_backward(Side::C, 1, &v).unwrap().to_graded().unwrap();
        assert!(max_abs_diff(back.h().unwrap(), &h) < 1e-12);
        assert!(back.fock().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn stage_mismatch_errors() {
        let inst = instance();
        let it = Intertwiner::new(&inst);
        let v = random_stage(&it, Side::C, 1, 2, 0);
        assert!(matches!(it.stage_forward(Side::C, 1, &v), Err(Error::StageMismatch(_))));
        assert!(matches!(it.stage_forward(Side::E, 2, &v), Err(Error::StageMismatch(_))));
        assert!(matches!(it.stage_backward(Side::C, 2, &v), Err(Error::StageMismatch(_))));
        assert!(it.project_p(&v).is_err());
    }

    #[test]
    fn projection_p() {
        let inst = instance();
        let it = Intertwiner::new(&inst);
        let v = random_stage(&it, Side::E, 2, 3, 5);
        let p = it.project_p(&v).unwrap();
        assert_eq!(it.project_p(&p).unwrap(), p);
        assert!(p.norm() <= v.norm());
        let mut only_c = p.clone();
        only_c.tail.iter_mut().for_each(|z| *z = ZERO);
        assert_eq!(it.project_p(&only_c).unwrap(), only_c);
        let mut only_a = v.clone();
        only_a.tail.iter_mut().for_each(|z| *z = ZERO);
        for b in only_a.tensor.chunks_mut(4) {
            b[..2].iter_mut().for_each(|z| *z = ZERO);
        }
        assert!(it.project_p(&only_a).unwrap().norm() == 0.0);
    }

    #[test]
    fn trivial_lifting_gives_identity() {
        let inst = generate(2, 2, 0, 1, DEFAULT_A_SCALE).unwrap();
        let w = compute_w(&inst, 3).unwrap();
        let id = ComplexMatrix::identity(w.matrix.rows());
        assert!(w.matrix.max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn w_fixes_h_c() {
        let inst = generate(3, 2, 2, 4, DEFAULT_A_SCALE).unwrap();
        let it = Intertwiner::new(&inst);
        let w = it.compute_w(2).unwrap();
        let ws = it.compute_w_star(2).unwrap();
        for k in 0..inst.dim_c {
            let col = w.matrix.column(k);
            let cols = ws.matrix.column(k);
            let mut e = vec![ZERO; col.len()];
            e[k] = C64::new(1.0, 0.0);
            assert!(max_abs_diff(&col, &e) < 1e-12);
            let mut e = vec![ZERO; cols.len()];
            e[k] = C64::new(1.0, 0.0);
            assert!(max_abs_diff(&cols, &e) < 1e-12);
        }
    }

    #[test]
    fn w_is_coisometric_and_w_star_is_its_adjoint() {
        let inst = generate(2, 2, 2, 11, DEFAULT_A_SCALE).unwrap();
        let it = Intertwiner::new(&inst);
        let w = it.compute_w(3).unwrap();
        let ws = it.compute_w_star(3).unwrap();
        assert_eq!(w.domain, ws.codomain);
        assert_eq!(w.codomain, ws.domain);
        assert!(ws.matrix.max_abs_diff(&w.matrix.adjoint()) < 1e-12);
        let id = ComplexMatrix::identity(w.matrix.rows());
        assert!(w.matrix.matmul(&ws.matrix).max_abs_diff(&id) < 1e-10);
        assert!((operator_norm(&w.matrix) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extra_stage_changes_nothing() {
        let inst = generate(3, 2, 1, 2, DEFAULT_A_SCALE).unwrap();
        let it = Intertwiner::new(&inst);
        for depth in 0..3 {
            let a = it.compute_w_stages(depth, depth + 1).unwrap();
            let b = it.compute_w_stages(depth, depth + 2).unwrap();
            let common = a.matrix.rows();
            assert!(b.matrix.block(0, 0, common, b.matrix.cols()).max_abs_diff(&a.matrix) < 1e-12);
            // Ŵ is not grade preserving: the extra stage does populate level N + 1.
        }
        assert!(it.compute_w_stages(2, 2).is_err());
    }

    #[test]
    fn intertwines_dilations() {
        let inst = generate(2, 2, 2, 5, DEFAULT_A_SCALE).unwrap();
        let it = Intertwiner::new(&inst);
        let depth = 2;
        for j in 1..=2 {
            for k in 0..it.e.space_dim(depth) {
                let x = it.e.basis_vector(depth, k);
                let lhs = it.w(&it.e.apply(j, &x).unwrap()).unwrap();
                let rhs = it.c.apply(j, &it.w(&x).unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-10, "j={j} k={k}");
            }
            for k in 0..it.c.space_dim(depth) {
                let y = it.c.basis_vector(depth, k);
                let lhs = it.e.apply(j, &it.w_star(&y).unwrap()).unwrap();
                let rhs = it.w_star(&it.c.apply(j, &y).unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-10, "adjoint j={j} k={k}");
            }
        }
    }

    #[test]
    fn manifest_serializes() {
        let inst = generate(2, 1, 1, 0, DEFAULT_A_SCALE).unwrap();
        let w = compute_w(&inst, 1).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"codomain\"") && s.contains("\"words\":[[],[1],[2]]"));
    }
}
