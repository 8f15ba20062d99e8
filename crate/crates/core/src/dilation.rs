//! Truncated Fock spaces `H ⊕ (Γ_{≤N} ⊗ 𝒟)` and the explicit minimal isometric
//! dilation of a row contraction.
//!
//! Fock coefficients are stored flat in graded-lexicographic word order, each
//! occupying `inner` consecutive entries in defect-frame coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{inner, norm, vec_serde, ComplexMatrix, C64, ZERO};
use crate::rowtuple::{defect, DefectData, OperatorTuple};
use crate::words::{count_upto, level_offset, level_size, Word, WordError, WordIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector {
    d: usize,
    depth: usize,
    inner: usize,
    h: Option<Vec<C64>>,
    fock: Vec<C64>,
}

pub(crate) fn check_letter(j: usize, d: usize) -> Result<()> {
    if j == 0 || j > d {
        return Err(WordError::BadLetter { letter: j as u32, d: d as u32 }.into());
    }
    Ok(())
}

/// `out += m·x`
pub(crate) fn gemv_acc(m: &ComplexMatrix, x: &[C64], out: &mut [C64]) {
    let cols = m.cols();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m.data()[i * cols..(i + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<C64>();
    }
}

impl GradedVector {
    pub fn zeros(d: usize, depth: usize, h_dim: Option<usize>, inner: usize) -> Self {
        GradedVector {
            d,
            depth,
            inner,
            h: h_dim.map(|n| vec![ZERO; n]),
            fock: vec![ZERO; count_upto(d, depth) * inner],
        }
    }

    pub fn from_parts(d: usize, depth: usize, h: Option<Vec<C64>>, inner: usize, fock: Vec<C64>) -> Result<Self> {
        let expected = count_upto(d, depth) * inner;
        if fock.len() != expected {
            return Err(Error::DimMismatch(format!(
                "Fock part has {} entries, expected {expected}",
                fock.len()
            )));
        }
        Ok(GradedVector { d, depth, inner, h, fock })
    }

    /// Rebuilds a vector from [`GradedVector::to_flat`] output.
    pub fn from_flat(d: usize, depth: usize, h_dim: Option<usize>, inner: usize, flat: &[C64]) -> Result<Self> {
        let hn = h_dim.unwrap_or(0);
        if flat.len() < hn {
            return Err(Error::DimMismatch("flat vector shorter than H part".into()));
        }
        let h = h_dim.map(|_| flat[..hn].to_vec());
        Self::from_parts(d, depth, h, inner, flat[hn..].to_vec())
    }

    /// `k`-th graded basis vector (H coordinates first).
    pub fn basis(d: usize, depth: usize, h_dim: Option<usize>, inner: usize, k: usize) -> Self {
        let mut v = Self::zeros(d, depth, h_dim, inner);
        let hn = h_dim.unwrap_or(0);
        if k < hn {
            v.h.as_mut().unwrap()[k] = C64::new(1.0, 0.0);
        } else {
            v.fock[k - hn] = C64::new(1.0, 0.0);
        }
        v
    }

    /// `ℓ ⊕ 0`
    pub fn from_h(d: usize, depth: usize, h: Vec<C64>, inner: usize) -> Self {
        let mut v = Self::zeros(d, depth, None, inner);
        v.h = Some(h);
        v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn inner_dim(&self) -> usize {
        self.inner
    }

    pub fn h_dim(&self) -> Option<usize> {
        self.h.as_ref().map(|h| h.len())
    }

    pub fn h(&self) -> Option<&[C64]> {
        self.h.as_deref()
    }

    pub fn h_mut(&mut self) -> Option<&mut Vec<C64>> {
        self.h.as_mut()
    }

    pub fn fock(&self) -> &[C64] {
        &self.fock
    }

    pub fn fock_mut(&mut self) -> &mut [C64] {
        &mut self.fock
    }

    pub fn word_index(&self) -> WordIndex {
        WordIndex::new(self.d, self.depth)
    }

    fn slot(&self, w: &Word) -> Option<usize> {
        self.word_index().index(w).map(|i| i * self.inner)
    }

    pub fn coeff(&self, w: &Word) -> Option<&[C64]> {
        self.slot(w).map(|s| &self.fock[s..s + self.inner])
    }

    pub fn coeff_mut(&mut self, w: &Word) -> Option<&mut [C64]> {
        let r = self.inner;
        self.slot(w).map(move |s| &mut self.fock[s..s + r])
    }

    /// All coefficients of words of length `m`, concatenated by level rank.
    pub fn level(&self, m: usize) -> &[C64] {
        let a = level_offset(self.d, m) * self.inner;
        &self.fock[a..a + level_size(self.d, m) * self.inner]
    }

    pub fn level_mut(&mut self, m: usize) -> &mut [C64] {
        let a = level_offset(self.d, m) * self.inner;
        let b = a + level_size(self.d, m) * self.inner;
        &mut self.fock[a..b]
    }

    /// Length of the longest word with a nonzero coefficient.
    pub fn support_level(&self) -> Option<usize> {
        (0..=self.depth).rev().find(|&m| self.level(m).iter().any(|z| *z != ZERO))
    }

    /// H coordinates (if any) followed by the Fock part.
    pub fn to_flat(&self) -> Vec<C64> {
        let mut out = self.h.clone().unwrap_or_default();
        out.extend_from_slice(&self.fock);
        out
    }

    pub fn flat_dim(&self) -> usize {
        self.h_dim().unwrap_or(0) + self.fock.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.to_flat())
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.depth != other.depth || self.inner != other.inner || self.h_dim() != other.h_dim()
        {
            return Err(Error::DimMismatch("graded vectors live in different spaces".into()));
        }
        Ok(())
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.compatible(other)?;
        Ok(inner(&self.to_flat(), &other.to_flat()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        if let (Some(a), Some(b)) = (out.h.as_mut(), other.h.as_ref()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        out.fock.iter_mut().zip(&other.fock).for_each(|(x, y)| *x += y);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        if let Some(h) = out.h.as_mut() {
            h.iter_mut().for_each(|x| *x *= s);
        }
        out.fock.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// Same vector viewed at a larger depth (zero-extended).
    pub fn padded(&self, depth: usize) -> Self {
        assert!(depth >= self.depth);
        let mut fock = self.fock.clone();
        fock.resize(count_upto(self.d, depth) * self.inner, ZERO);
        GradedVector { fock, depth, ..self.clone() }
    }

    /// Drops all levels beyond `depth`.
    pub fn truncated(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        let fock = self.fock[..count_upto(self.d, depth) * self.inner].to_vec();
        GradedVector { fock, depth, ..self.clone() }
    }

    /// Compares two vectors on their common levels and reports the largest
    /// entry of anything beyond them.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let depth = self.depth.max(other.depth);
        let (a, b) = (self.padded(depth), other.padded(depth));
        a.to_flat().iter().zip(b.to_flat()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct FockEntry {
    word: Word,
    #[serde(with = "vec_serde")]
    coeff: Vec<C64>,
}

/// Wire form of a [`GradedVector`]. Zero Fock coefficients are omitted.
#[derive(Serialize, Deserialize)]
pub struct GradedVectorJson {
    #[serde(with = "opt_vec")]
    h: Option<Vec<C64>>,
    fock: Vec<FockEntry>,
    depth: usize,
}

mod opt_vec {
    use super::{vec_serde, C64};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<C64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => vec_serde::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<C64>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "vec_serde")] Vec<C64>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

impl From<&GradedVector> for GradedVectorJson {
    fn from(v: &GradedVector) -> Self {
        let fock = v
            .word_index()
            .iter()
            .enumerate()
            .filter_map(|(i, word)| {
                let c = &v.fock[i * v.inner..(i + 1) * v.inner];
                c.iter().any(|z| *z != ZERO).then(|| FockEntry { word, coeff: c.to_vec() })
            })
            .collect();
        GradedVectorJson { h: v.h.clone(), fock, depth: v.depth }
    }
}

impl GradedVectorJson {
    /// Builds the vector; `d` and the inner dimension come from context.
    pub fn into_vector(self, d: usize, inner: usize) -> Result<GradedVector> {
        let mut v = GradedVector::zeros(d, self.depth, None, inner);
        v.h = self.h;
        for e in self.fock {
            let word = Word::new(e.word.letters().to_vec(), d as u32)?;
            if e.coeff.len() != inner {
                return Err(Error::InnerSpaceMismatch { expected: inner, got: e.coeff.len() });
            }
            let slot = v
                .coeff_mut(&word)
                .ok_or_else(|| Error::DepthError(format!("word {word} beyond depth {}", self.depth)))?;
            slot.copy_from_slice(&e.coeff);
        }
        Ok(v)
    }
}

impl Serialize for GradedVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GradedVectorJson::from(self).serialize(s)
    }
}

/// `L_j x = e_j ⊗ x` on Fock-only vectors; the support must stay within depth.
pub fn creation(j: usize, x: &GradedVector) -> Result<GradedVector> {
    check_letter(j, x.d)?;
    if x.support_level() == Some(x.depth) {
        return Err(Error::OverDepth { depth: x.depth });
    }
    let mut out = GradedVector::zeros(x.d, x.depth, None, x.inner);
    for m in 0..x.depth {
        let src = x.level(m);
        let start = (j - 1) * src.len();
        out.level_mut(m + 1)[start..start + src.len()].copy_from_slice(src);
    }
    Ok(out)
}

/// `L_j^*`: the coefficient at `w` becomes the old coefficient at `j·w`.
pub fn creation_adjoint(j: usize, x: &GradedVector) -> Result<GradedVector> {
    check_letter(j, x.d)?;
    let mut out = GradedVector::zeros(x.d, x.depth, None, x.inner);
    for m in 0..x.depth {
        let len = level_size(x.d, m) * x.inner;
        let src = &x.level(m + 1)[(j - 1) * len..j * len];
        out.level_mut(m).copy_from_slice(src);
    }
    Ok(out)
}

/// A row contraction with its defect data, acting through its minimal
/// isometric dilation on `H ⊕ (Γ ⊗ 𝒟_T)`.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub tuple: OperatorTuple,
    pub defect: DefectData,
    adjoints: Vec<ComplexMatrix>,
}

impl Dilation {
    pub fn new(tuple: OperatorTuple, tol: f64) -> Result<Self> {
        let defect = defect(&tuple, tol)?;
        Ok(Self::from_parts(tuple, defect))
    }

    pub fn from_parts(tuple: OperatorTuple, defect: DefectData) -> Self {
        let adjoints = tuple.ops().iter().map(|t| t.adjoint()).collect();
        Dilation { tuple, defect, adjoints }
    }

    pub fn d(&self) -> usize {
        self.tuple.d()
    }

    pub fn h_dim(&self) -> usize {
        self.tuple.dim()
    }

    pub fn inner_dim(&self) -> usize {
        self.defect.rank()
    }

    /// `T_j^*`
    pub fn op_adjoint(&self, j: usize) -> &ComplexMatrix {
        &self.adjoints[j - 1]
    }

    pub fn zeros(&self, depth: usize) -> GradedVector {
        GradedVector::zeros(self.d(), depth, Some(self.h_dim()), self.inner_dim())
    }

    pub fn basis_vector(&self, depth: usize, k: usize) -> GradedVector {
        GradedVector::basis(self.d(), depth, Some(self.h_dim()), self.inner_dim(), k)
    }

    pub fn space_dim(&self, depth: usize) -> usize {
        self.h_dim() + count_upto(self.d(), depth) * self.inner_dim()
    }

    fn check(&self, j: usize, v: &GradedVector) -> Result<()> {
        check_letter(j, self.d())?;
        if v.d != self.d() {
            return Err(Error::DimMismatch(format!("vector over {} letters, tuple has {}", v.d, self.d())));
        }
        if v.inner != self.inner_dim() {
            return Err(Error::InnerSpaceMismatch { expected: self.inner_dim(), got: v.inner });
        }
        match v.h_dim() {
            Some(n) if n == self.h_dim() => Ok(()),
            Some(n) => Err(Error::DimMismatch(format!("H part has dimension {n}, expected {}", self.h_dim()))),
            None => Err(Error::DimMismatch("dilation needs an H part".into())),
        }
    }

    /// `V_j(ℓ ⊕ Σ e_α⊗d_α) = T_jℓ ⊕ [e_∅⊗(D_T)_jℓ + Σ e_{jα}⊗d_α]`, one level deeper.
    pub fn apply(&self, j: usize, v: &GradedVector) -> Result<GradedVector> {
        self.check(j, v)?;
        let h = v.h().unwrap();
        let mut out = self.zeros(v.depth + 1);
        gemv_acc(self.tuple.op(j), h, out.h.as_mut().unwrap());
        gemv_acc(&self.defect.inject[j - 1], h, out.level_mut(0));
        for m in 0..=v.depth {
            let src = v.level(m);
            let start = (j - 1) * src.len();
            out.level_mut(m + 1)[start..start + src.len()].copy_from_slice(src);
        }
        Ok(out)
    }

    /// `V_j^*(ℓ ⊕ Σ e_α⊗d_α) = (T_j^*ℓ + (D_T)_j^* d_∅) ⊕ Σ e_α⊗d_{jα}`, same depth.
    pub fn adjoint_apply(&self, j: usize, v: &GradedVector) -> Result<GradedVector> {
        self.check(j, v)?;
        let mut out = self.zeros(v.depth);
        let h_out = out.h.as_mut().unwrap();
        gemv_acc(self.op_adjoint(j), v.h().unwrap(), h_out);
        gemv_acc(&self.defect.inject_adj[j - 1], v.level(0), h_out);
        for m in 0..v.depth {
            let len = level_size(v.d, m) * v.inner;
            let src = &v.level(m + 1)[(j - 1) * len..j * len];
            out.level_mut(m).copy_from_slice(src);
        }
        Ok(out)
    }

    /// `V_α v = V_{α_1} ⋯ V_{α_k} v`
    pub fn word_apply(&self, letters: &[u32], v: &GradedVector) -> Result<GradedVector> {
        letters.iter().rev().try_fold(v.clone(), |acc, &l| self.apply(l as usize, &acc))
    }

    /// Dense matrix of `V_j` from depth `depth` to depth `depth + 1`.
    pub fn matrix(&self, j: usize, depth: usize) -> Result<ComplexMatrix> {
        let cols: Result<Vec<_>> = (0..self.space_dim(depth))
            .map(|k| self.apply(j, &self.basis_vector(depth, k)).map(|v| v.to_flat()))
            .collect();
        Ok(ComplexMatrix::from_columns(self.space_dim(depth + 1), &cols?))
    }
}

pub fn dilate_apply(t: &Dilation, j: usize, v: &GradedVector) -> Result<GradedVector> {
    t.apply(j, v)
}

pub fn dilate_adjoint_apply(t: &Dilation, j: usize, v: &GradedVector) -> Result<GradedVector> {
    t.adjoint_apply(j, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{random_gaussian_matrix, random_isometry, operator_norm};
    use proptest::prelude::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn half() -> Dilation {
        let t = OperatorTuple::new(vec![
            ComplexMatrix::from_real_rows(&[&[H]]),
            ComplexMatrix::from_real_rows(&[&[H]]),
        ])
        .unwrap();
        Dilation::new(t, 1e-10).unwrap()
    }

    fn random_contraction(d: usize, n: usize, seed: u64) -> Dilation {
        let g = random_gaussian_matrix(n, d * n, seed);
        let g = g.scale_real(0.8 / operator_norm(&g));
        let t = OperatorTuple::new((0..d).map(|j| g.block(0, j * n, n, n)).collect()).unwrap();
        Dilation::new(t, 1e-10).unwrap()
    }

    fn random_coisometry(d: usize, n: usize, seed: u64) -> Dilation {
        let v = random_isometry(d * n, n, seed).unwrap();
        let t = OperatorTuple::new((0..d).map(|j| v.block(j * n, 0, n, n).adjoint()).collect()).unwrap();
        Dilation::new(t, 1e-10).unwrap()
    }

    fn random_vector(dil: &Dilation, depth: usize, seed: u64) -> GradedVector {
        let n = dil.space_dim(depth);
        let g = random_gaussian_matrix(n, 1, seed);
        GradedVector::from_flat(dil.d(), depth, Some(dil.h_dim()), dil.inner_dim(), &g.column(0)).unwrap()
    }

    fn fock_only(d: usize, depth: usize, entries: &[(&str, C64)]) -> GradedVector {
        let mut v = GradedVector::zeros(d, depth, None, 1);
        for (w, z) in entries {
            v.coeff_mut(&Word::parse(w, d as u32).unwrap()).unwrap()[0] = *z;
        }
        v
    }

    #[test]
    fn creation_examples() {
        let x = fock_only(2, 2, &[("", c(3.0))]);
        assert_eq!(creation(1, &x).unwrap(), fock_only(2, 2, &[("1", c(3.0))]));
        let x = fock_only(2, 2, &[("2", c(3.0))]);
        assert_eq!(creation(1, &x).unwrap(), fock_only(2, 2, &[("12", c(3.0))]));
        let x = fock_only(2, 2, &[("22", c(1.0))]);
        assert!(matches!(creation(1, &x), Err(Error::OverDepth { depth: 2 })));
    }

    #[test]
    fn creation_isometries_have_orthogonal_ranges() {
        let d = 3;
        let depth = 3;
        for k in 0..count_upto(d, depth - 1) {
            let x = GradedVector::basis(d, depth, None, 1, k);
            for i in 1..=d {
                for j in 1..=d {
                    let y = creation_adjoint(i, &creation(j, &x).unwrap()).unwrap();
                    let expect = if i == j { x.clone() } else { x.scale(c(0.0)) };
                    assert_eq!(y, expect);
                }
            }
        }
    }

    #[test]
    fn half_tuple_dilation_example() {
        let dil = half();
        let v = GradedVector::from_h(2, 0, vec![c(2.0)], 1);
        let out = dil.apply(1, &v).unwrap();
        assert!((out.h().unwrap()[0] - c(2.0 * H)).norm() < 1e-15);
        // (D_C)_1 ℓ = (ℓ/2, -ℓ/2) = (ℓ/√2)·Q with Q = (1/√2, -1/√2).
        assert!((out.coeff(&Word::empty()).unwrap()[0] - c(2.0 * H)).norm() < 1e-15);
        assert_eq!(out.depth(), 1);
        assert_eq!(out.level(1), &[ZERO, ZERO]);
    }

    #[test]
    fn row_isometry_dilation_is_plain_shift() {
        // A single unitary: no defect.
        let u = random_isometry(2, 2, 4).unwrap();
        let dil = Dilation::new(OperatorTuple::new(vec![u.clone()]).unwrap(), 1e-10).unwrap();
        assert_eq!(dil.inner_dim(), 0);
        let v = GradedVector::from_h(1, 2, vec![c(1.0), c(-2.0)], 0);
        let out = dil.apply(1, &v).unwrap();
        assert!(crate::numkernel::max_abs_diff(out.h().unwrap(), &u.mul_vec(v.h().unwrap())) < 1e-15);
    }

    #[test]
    fn compression_reproduces_word_products() {
        let dil = random_contraction(2, 3, 11);
        let words = WordIndex::new(2, 3);
        for w in words.iter() {
            let t_alpha = dil.tuple.word_product(w.letters());
            for k in 0..3 {
                let v = dil.basis_vector(0, k);
                let out = dil.word_apply(w.letters(), &v).unwrap();
                let col = t_alpha.column(k);
                assert!(crate::numkernel::max_abs_diff(out.h().unwrap(), &col) < 1e-12, "{w}");
            }
        }
    }

    #[test]
    fn adjoint_examples() {
        let dil = half();
        let v = GradedVector::from_h(2, 1, vec![c(1.0)], 1);
        let out = dil.adjoint_apply(2, &v).unwrap();
        assert!((out.h().unwrap()[0] - c(H)).norm() < 1e-15);
        assert!(out.fock().iter().all(|z| *z == ZERO));

        let mut v = dil.zeros(1);
        v.coeff_mut(&Word::letter(1)).unwrap()[0] = c(5.0);
        let out = dil.adjoint_apply(1, &v).unwrap();
        assert_eq!(out.h().unwrap(), &[ZERO]);
        assert_eq!(out.coeff(&Word::empty()).unwrap(), &[c(5.0)]);
    }

    #[test]
    fn inner_space_mismatch() {
        let dil = half();
        let v = GradedVector::from_h(2, 1, vec![c(1.0)], 2);
        assert!(matches!(dil.apply(1, &v), Err(Error::InnerSpaceMismatch { expected: 1, got: 2 })));
        assert!(matches!(dil.adjoint_apply(1, &v), Err(Error::InnerSpaceMismatch { .. })));
    }

    #[test]
    fn coisometric_dilation_sums_to_identity() {
        for seed in 0..5 {
            let dil = random_coisometry(3, 2, seed);
            let depth = 3;
            let v = random_vector(&dil, depth, seed + 100);
            let mut acc = dil.zeros(depth + 1);
            for j in 1..=3 {
                let back = dil.adjoint_apply(j, &v).unwrap();
                acc = acc.add(&dil.apply(j, &back).unwrap()).unwrap();
            }
            assert!(acc.max_abs_diff(&v) < 1e-10);
        }
    }

    #[test]
    fn fock_part_acts_as_creation() {
        let dil = random_contraction(2, 2, 3);
        let r = dil.inner_dim();
        let depth = 2;
        let mut x = GradedVector::zeros(2, depth, None, r);
        x.fock_mut().iter_mut().enumerate().for_each(|(i, z)| *z = c(i as f64));
        let x = x.truncated(1).padded(depth);
        let with_h = GradedVector::from_parts(2, depth, Some(vec![ZERO; 2]), r, x.fock().to_vec()).unwrap();
        let via_v = dil.apply(2, &with_h).unwrap().truncated(depth);
        let via_l = creation(2, &x).unwrap();
        assert_eq!(via_v.fock(), via_l.fock());
        assert!(via_v.h().unwrap().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn json_round_trip() {
        let dil = random_contraction(2, 2, 8);
        let v = random_vector(&dil, 2, 9);
        let s = serde_json::to_string(&v).unwrap();
        let back: GradedVectorJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.into_vector(2, dil.inner_dim()).unwrap(), v);
        let f: GradedVectorJson = serde_json::from_str(r#"{"h":null,"fock":[{"word":[2],"coeff":[[1,0]]}],"depth":1}"#).unwrap();
        let f = f.into_vector(2, 1).unwrap();
        assert_eq!(f.coeff(&Word::letter(2)).unwrap(), &[c(1.0)]);
        assert!(f.h().is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dilation_is_isometric_with_orthogonal_ranges(seed in 0u64..1000, d in 1usize..4, n in 1usize..4, depth in 0usize..3) {
            let dil = random_contraction(d, n, seed);
            let v = random_vector(&dil, depth, seed + 1);
            let w = random_vector(&dil, depth, seed + 2);
            for i in 1..=d {
                let vi = dil.apply(i, &v).unwrap();
                prop_assert!((vi.norm() - v.norm()).abs() < 1e-12 * v.norm().max(1.0));
                for j in 1..=d {
                    let wj = dil.apply(j, &w).unwrap();
                    let ip = vi.inner(&wj).unwrap();
                    let expect = if i == j { v.inner(&w).unwrap() } else { ZERO };
                    prop_assert!((ip - expect).norm() < 1e-12 * (1.0 + v.norm() * w.norm()));
                }
            }
        }

        #[test]
        fn adjoint_is_adjoint(seed in 0u64..1000, d in 1usize..4, n in 1usize..3, depth in 0usize..3) {
            let dil = random_contraction(d, n, seed);
            let x = random_vector(&dil, depth + 1, seed + 1);
            let y = random_vector(&dil, depth, seed + 2);
            for j in 1..=d {
                let lhs = dil.adjoint_apply(j, &x).unwrap().truncated(depth).inner(&y).unwrap();
                let rhs = x.inner(&dil.apply(j, &y).unwrap()).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + x.norm() * y.norm()));
            }
        }
    }
}
