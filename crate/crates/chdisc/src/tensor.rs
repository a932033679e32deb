//! Labeled tensor-product spaces and the operator algebra built on them.
//!
//! Operators in this crate act on a tensor product of named subsystems such
//! as `I1 ⊗ O1 ⊗ I2 ⊗ O2` (slot input/output spaces). [`Space`] records the
//! ordered list of labels and dimensions, [`LabeledMatrix`] pairs a square
//! dense matrix with its space, and the free functions implement the calculus
//! used throughout: Kronecker products, partial traces, the trace-and-replace
//! map `A ↦ Tr_X(A) ⊗ 1_X/d_X`, system permutations, Choi matrices, and the
//! link product for composing Choi operators.
//!
//! Everything is generic over a [`Scalar`] ring so the same code path runs in
//! `f64` complex arithmetic (for the SDP solver) and in exact arithmetic over
//! ℚ(√d) (for certification). The two flavors share all index bookkeeping,
//! which keeps them consistent by construction.

use num_complex::Complex64;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Errors from labeled-space bookkeeping.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("label {0} appears more than once in a space")]
    LabelCollision(Label),
    #[error("label {0} is not part of the space")]
    MissingLabel(Label),
    #[error("spaces disagree: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("label {0} has dimension {1} on one side and {2} on the other")]
    SharedDimMismatch(Label, usize, usize),
    #[error("matrix dimension {0} does not match space dimension {1}")]
    DimMismatch(usize, usize),
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("label list is not a permutation of the space")]
    BadPermutation,
}

/// Name of one tensor factor. `I`/`O` are the input/output spaces of the
/// first and second channel use; `Aux` labels ancillas in tests and oracles.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Label {
    I1,
    O1,
    I2,
    O2,
    Aux(u8),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::I1 => write!(f, "I1"),
            Label::O1 => write!(f, "O1"),
            Label::I2 => write!(f, "I2"),
            Label::O2 => write!(f, "O2"),
            Label::Aux(k) => write!(f, "X{k}"),
        }
    }
}

/// Scalar ring shared by the float and exact flavors of every tensor op.
///
/// Only ring operations plus conjugation and exact scaling by small rationals
/// are required; division never appears in the generic code paths.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    /// The rational `num/den` as a ring element (exact where possible).
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Multiplication by the rational `num/den` (exact where possible).
    fn scale_ratio(&self, num: i64, den: i64) -> Self;
    /// Nearest-double view, used for diagnostics and float pre-screens.
    fn to_c64(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn conj(&self) -> Self {
        Complex64::new(self.re, -self.im)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn scale_ratio(&self, num: i64, den: i64) -> Self {
        self * (num as f64 / den as f64)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Ordered tensor product of labeled subsystems.
///
/// Flat indices are big-endian over the parts: the first label varies
/// slowest. `Space::of(&[(I1,2),(O1,2)])` has dimension 4 with basis order
/// `|00⟩, |01⟩, |10⟩, |11⟩` (I1 digit first).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Space {
    parts: Vec<(Label, usize)>,
}

impl Space {
    pub fn of(parts: &[(Label, usize)]) -> Result<Self, TensorError> {
        let mut seen = BTreeSet::new();
        for (l, _) in parts {
            if !seen.insert(*l) {
                return Err(TensorError::LabelCollision(*l));
            }
        }
        Ok(Space {
            parts: parts.to_vec(),
        })
    }

    /// The standard two-copy qubit space `I1 ⊗ O1 ⊗ I2 ⊗ O2`.
    pub fn two_copy_qubit() -> Self {
        Space::of(&[
            (Label::I1, 2),
            (Label::O1, 2),
            (Label::I2, 2),
            (Label::O2, 2),
        ])
        .unwrap()
    }

    /// The one-copy qubit space `I1 ⊗ O1`.
    pub fn one_copy_qubit() -> Self {
        Space::of(&[(Label::I1, 2), (Label::O1, 2)]).unwrap()
    }

    pub fn parts(&self) -> &[(Label, usize)] {
        &self.parts
    }

    pub fn labels(&self) -> Vec<Label> {
        self.parts.iter().map(|(l, _)| *l).collect()
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn contains(&self, l: Label) -> bool {
        self.parts.iter().any(|(pl, _)| *pl == l)
    }

    pub fn dim_of(&self, l: Label) -> Result<usize, TensorError> {
        self.parts
            .iter()
            .find(|(pl, _)| *pl == l)
            .map(|(_, d)| *d)
            .ok_or(TensorError::MissingLabel(l))
    }

    fn position(&self, l: Label) -> Result<usize, TensorError> {
        self.parts
            .iter()
            .position(|(pl, _)| *pl == l)
            .ok_or(TensorError::MissingLabel(l))
    }

    /// Stride (in flat-index units) of each part.
    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.parts[i + 1].1;
        }
        s
    }

    /// Flat-index offsets of every multi-index over `labels`, enumerated in
    /// mixed-radix order with the first label most significant. Index `k` of
    /// the result is the flat contribution of multi-index `k`; offsets over
    /// disjoint label sets simply add.
    fn offsets_for(&self, labels: &[Label]) -> Result<Vec<usize>, TensorError> {
        let strides = self.strides();
        let mut dims = Vec::with_capacity(labels.len());
        let mut lstr = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(*l)?;
            dims.push(self.parts[p].1);
            lstr.push(strides[p]);
        }
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        for mut k in 0..total {
            let mut off = 0;
            for i in (0..dims.len()).rev() {
                off += (k % dims[i]) * lstr[i];
                k /= dims[i];
            }
            out.push(off);
        }
        Ok(out)
    }

    /// Space formed by the parts whose labels are *not* in `over`, keeping
    /// their original order.
    fn without(&self, over: &[Label]) -> Space {
        Space {
            parts: self
                .parts
                .iter()
                .filter(|(l, _)| !over.contains(l))
                .cloned()
                .collect(),
        }
    }

    /// Concatenation of two spaces with disjoint labels.
    pub fn tensor(&self, rhs: &Space) -> Result<Space, TensorError> {
        let mut parts = self.parts.clone();
        for (l, d) in &rhs.parts {
            if self.contains(*l) {
                return Err(TensorError::LabelCollision(*l));
            }
            parts.push((*l, *d));
        }
        Ok(Space { parts })
    }

    pub fn describe(&self) -> String {
        self.parts
            .iter()
            .map(|(l, d)| format!("{l}:{d}"))
            .collect::<Vec<_>>()
            .join("⊗")
    }
}

/// Dense matrix over a [`Scalar`] ring, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, TensorError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(TensorError::NotSquare { rows: r, cols: c });
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(self.rows, rhs.rows, "row mismatch");
        assert_eq!(self.cols, rhs.cols, "column mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|a| a.mul(s))
    }

    pub fn scale_ratio(&self, num: i64, den: i64) -> Self {
        self.map(|a| a.scale_ratio(num, den))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j).add(&a.mul(rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        let mut acc = T::zero();
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    /// `Tr(self · rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> T {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        assert_eq!(self.rows, rhs.cols, "outer dimension mismatch");
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = acc.add(&self.get(i, j).mul(rhs.get(j, i)));
            }
        }
        acc
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitize(&self) -> Self {
        assert_eq!(self.rows, self.cols, "hermitize of non-square matrix");
        let mut out = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j).add(&self.get(j, i).conj()).scale_ratio(1, 2);
                out.set(i, j, v);
            }
        }
        out
    }

    /// Exact structural Hermiticity (`M[j][i] == conj(M[i][j])`).
    pub fn is_hermitian(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if self.get(j, i) != &self.get(i, j).conj() {
                    return false;
                }
            }
        }
        true
    }

    /// Plain Kronecker product (no label bookkeeping).
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Mat::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, a.mul(rhs.get(k, l)));
                    }
                }
            }
        }
        out
    }
}

/// Square operator on a labeled space.
#[derive(Clone, PartialEq, Debug)]
pub struct LabeledMatrix<T> {
    space: Space,
    mat: Mat<T>,
}

impl<T: Scalar> LabeledMatrix<T> {
    pub fn new(space: Space, mat: Mat<T>) -> Result<Self, TensorError> {
        if mat.rows() != mat.cols() {
            return Err(TensorError::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if mat.rows() != space.dim() {
            return Err(TensorError::DimMismatch(mat.rows(), space.dim()));
        }
        Ok(LabeledMatrix { space, mat })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        LabeledMatrix {
            space,
            mat: Mat::zeros(d, d),
        }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        LabeledMatrix {
            space,
            mat: Mat::identity(d),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn mat(&self) -> &Mat<T> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<T> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LabeledMatrix<U> {
        LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.map(f),
        }
    }

    fn check_same_space(&self, rhs: &Self) -> Result<(), TensorError> {
        if self.space != rhs.space {
            return Err(TensorError::SpaceMismatch(
                self.space.describe(),
                rhs.space.describe(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, TensorError> {
        self.check_same_space(rhs)?;
        Ok(LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.add(&rhs.mat),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, TensorError> {
        self.check_same_space(rhs)?;
        Ok(LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.sub(&rhs.mat),
        })
    }

    pub fn neg(&self) -> Self {
        LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.neg(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.scale(s),
        }
    }

    pub fn scale_ratio(&self, num: i64, den: i64) -> Self {
        LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.scale_ratio(num, den),
        }
    }

    pub fn trace(&self) -> T {
        self.mat.trace()
    }

    /// `Tr(self · rhs)` (spaces must match exactly, including order).
    pub fn trace_product(&self, rhs: &Self) -> Result<T, TensorError> {
        self.check_same_space(rhs)?;
        Ok(self.mat.trace_product(&rhs.mat))
    }

    pub fn hermitize(&self) -> Self {
        LabeledMatrix {
            space: self.space.clone(),
            mat: self.mat.hermitize(),
        }
    }

    /// Reinterprets the same matrix with new labels (dims must agree).
    /// Used to build the second copy of a channel: `C` on `I1 ⊗ O1` relabeled
    /// to `I2 ⊗ O2`.
    pub fn with_labels(&self, labels: &[Label]) -> Result<Self, TensorError> {
        if labels.len() != self.space.parts.len() {
            return Err(TensorError::BadPermutation);
        }
        let parts: Vec<(Label, usize)> = labels
            .iter()
            .zip(self.space.parts.iter())
            .map(|(l, (_, d))| (*l, *d))
            .collect();
        Ok(LabeledMatrix {
            space: Space::of(&parts)?,
            mat: self.mat.clone(),
        })
    }
}

/// Kronecker product with label bookkeeping; label sets must be disjoint.
pub fn kron<T: Scalar>(
    a: &LabeledMatrix<T>,
    b: &LabeledMatrix<T>,
) -> Result<LabeledMatrix<T>, TensorError> {
    let space = a.space.tensor(&b.space)?;
    Ok(LabeledMatrix {
        space,
        mat: a.mat.kron(&b.mat),
    })
}

/// Partial trace over the subsystems named in `over`.
pub fn partial_trace<T: Scalar>(
    a: &LabeledMatrix<T>,
    over: &[Label],
) -> Result<LabeledMatrix<T>, TensorError> {
    let sub_off = a.space.offsets_for(over)?;
    let out_space = a.space.without(over);
    let keep: Vec<Label> = out_space.labels();
    let keep_off = a.space.offsets_for(&keep)?;
    let out_dim = out_space.dim();
    let mut out = Mat::zeros(out_dim, out_dim);
    for (r, roff) in keep_off.iter().enumerate() {
        for (c, coff) in keep_off.iter().enumerate() {
            let mut acc = T::zero();
            for s in &sub_off {
                acc = acc.add(a.mat.get(roff + s, coff + s));
            }
            out.set(r, c, acc);
        }
    }
    LabeledMatrix::new(out_space, out)
}

/// Trace-and-replace map `A ↦ Tr_X(A) ⊗ 1_X/d_X`, written `_X A`.
///
/// The output lives on the *same* space with the same label order; the traced
/// subsystems are re-inserted in place as normalized identities.
pub fn trace_and_replace<T: Scalar>(
    a: &LabeledMatrix<T>,
    over: &[Label],
) -> Result<LabeledMatrix<T>, TensorError> {
    if over.is_empty() {
        return Ok(a.clone());
    }
    let pt = partial_trace(a, over)?;
    let sub_off = a.space.offsets_for(over)?;
    let keep_off = a.space.offsets_for(&pt.space.labels())?;
    let d_sub = sub_off.len() as i64;
    let mut out = Mat::zeros(a.dim(), a.dim());
    for (r, roff) in keep_off.iter().enumerate() {
        for (c, coff) in keep_off.iter().enumerate() {
            let v = pt.mat.get(r, c);
            if v.is_zero() {
                continue;
            }
            let v = v.scale_ratio(1, d_sub);
            for s in &sub_off {
                out.set(roff + s, coff + s, v.clone());
            }
        }
    }
    Ok(LabeledMatrix {
        space: a.space.clone(),
        mat: out,
    })
}

/// Reorders the tensor factors to `order` (a permutation of the labels).
pub fn permute_systems<T: Scalar>(
    a: &LabeledMatrix<T>,
    order: &[Label],
) -> Result<LabeledMatrix<T>, TensorError> {
    let labels = a.space.labels();
    if order.len() != labels.len() {
        return Err(TensorError::BadPermutation);
    }
    let mut parts = Vec::with_capacity(order.len());
    for l in order {
        if !labels.contains(l) {
            return Err(TensorError::BadPermutation);
        }
        parts.push((*l, a.space.dim_of(*l)?));
    }
    let new_space = Space::of(&parts)?;
    // map[r] = flat index in the new space of old flat index r.
    let old_off = a.space.offsets_for(&labels)?;
    let new_off_in_old_order = {
        // Offsets in the new space of multi-indices enumerated in the OLD
        // label order, so old index k maps to position new_map[k].
        new_space.offsets_for(&labels)?
    };
    debug_assert_eq!(old_off.len(), a.dim());
    let mut map = vec![0usize; a.dim()];
    for (k, off) in old_off.iter().enumerate() {
        map[*off] = new_off_in_old_order[k];
    }
    let mut out = Mat::zeros(a.dim(), a.dim());
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            out.set(map[r], map[c], a.mat.get(r, c).clone());
        }
    }
    LabeledMatrix::new(new_space, out)
}

/// Link product `A ★ B = Tr_S[(A^{T_S} ⊗ 1)(1 ⊗ B)]`, contracting over the
/// shared labels `S` with a partial transpose on the **first** argument.
///
/// The result lives on A's remaining labels followed by B's remaining labels.
/// With no shared labels this is the Kronecker product; with all labels
/// shared it is `Tr(A^T B)`-style full contraction to a 1×1 matrix.
pub fn link_product<T: Scalar>(
    a: &LabeledMatrix<T>,
    b: &LabeledMatrix<T>,
) -> Result<LabeledMatrix<T>, TensorError> {
    let shared: Vec<Label> = a
        .space
        .labels()
        .into_iter()
        .filter(|l| b.space.contains(*l))
        .collect();
    for l in &shared {
        let da = a.space.dim_of(*l)?;
        let db = b.space.dim_of(*l)?;
        if da != db {
            return Err(TensorError::SharedDimMismatch(*l, da, db));
        }
    }
    let a_only = a.space.without(&shared);
    let b_only = b.space.without(&shared);
    let out_space = a_only.tensor(&b_only)?;

    let aoff = a.space.offsets_for(&a_only.labels())?;
    let boff = b.space.offsets_for(&b_only.labels())?;
    let soff_a = a.space.offsets_for(&shared)?;
    let soff_b = b.space.offsets_for(&shared)?;
    let (na, nb, ns) = (aoff.len(), boff.len(), soff_a.len());

    let mut out = Mat::zeros(na * nb, na * nb);
    for ar in 0..na {
        for ac in 0..na {
            for br in 0..nb {
                for bc in 0..nb {
                    let mut acc = T::zero();
                    // out[(a,b),(a',b')] = Σ_{u,s} A[(a,u),(a',s)]·B[(u,b),(s,b')]
                    for u in 0..ns {
                        for s in 0..ns {
                            let av = a.mat.get(aoff[ar] + soff_a[u], aoff[ac] + soff_a[s]);
                            if av.is_zero() {
                                continue;
                            }
                            let bv = b.mat.get(soff_b[u] + boff[br], soff_b[s] + boff[bc]);
                            acc = acc.add(&av.mul(bv));
                        }
                    }
                    out.set(ar * nb + br, ac * nb + bc, acc);
                }
            }
        }
    }
    LabeledMatrix::new(out_space, out)
}

/// Choi matrix `C = Σ_{ij} |i⟩⟨j|_I ⊗ N(|i⟩⟨j|)_O` of the map with the given
/// Kraus operators (each `d_out × d_in`), on the space `in_label ⊗ out_label`.
pub fn choi_from_kraus<T: Scalar>(
    kraus: &[Mat<T>],
    in_label: (Label, usize),
    out_label: (Label, usize),
) -> Result<LabeledMatrix<T>, TensorError> {
    let (d_in, d_out) = (in_label.1, out_label.1);
    for k in kraus {
        if k.rows() != d_out || k.cols() != d_in {
            return Err(TensorError::DimMismatch(k.rows() * k.cols(), d_out * d_in));
        }
    }
    let space = Space::of(&[in_label, out_label])?;
    let mut out = Mat::zeros(d_in * d_out, d_in * d_out);
    // C[(i,o),(i',o')] = Σ_k K[o,i]·conj(K[o',i']).
    for i in 0..d_in {
        for ip in 0..d_in {
            for o in 0..d_out {
                for op in 0..d_out {
                    let mut acc = T::zero();
                    for k in kraus {
                        acc = acc.add(&k.get(o, i).mul(&k.get(op, ip).conj()));
                    }
                    out.set(i * d_out + o, ip * d_out + op, acc);
                }
            }
        }
    }
    LabeledMatrix::new(space, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, space: &Space) -> LabeledMatrix<Complex64> {
        let d = space.dim();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(
                    i,
                    j,
                    c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                );
            }
        }
        LabeledMatrix::new(space.clone(), m).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, space: &Space) -> LabeledMatrix<Complex64> {
        random_matrix(rng, space).hermitize()
    }

    fn approx_eq(a: &LabeledMatrix<Complex64>, b: &LabeledMatrix<Complex64>, tol: f64) -> bool {
        a.space() == b.space()
            && a.mat()
                .entries()
                .iter()
                .zip(b.mat().entries())
                .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn space_indexing_is_big_endian() {
        let s = Space::two_copy_qubit();
        assert_eq!(s.dim(), 16);
        assert_eq!(s.strides(), vec![8, 4, 2, 1]);
        // Offsets of O2 alone step by 1; offsets of I1 step by 8.
        assert_eq!(s.offsets_for(&[Label::O2]).unwrap(), vec![0, 1]);
        assert_eq!(s.offsets_for(&[Label::I1]).unwrap(), vec![0, 8]);
        assert_eq!(
            s.offsets_for(&[Label::O1, Label::I2]).unwrap(),
            vec![0, 2, 4, 6]
        );
        assert!(s.offsets_for(&[Label::Aux(0)]).is_err());
        assert!(Space::of(&[(Label::I1, 2), (Label::I1, 3)]).is_err());
    }

    #[test]
    fn kron_orders_labels_left_to_right() {
        let sa = Space::of(&[(Label::I1, 2)]).unwrap();
        let sb = Space::of(&[(Label::O1, 2)]).unwrap();
        let a = LabeledMatrix::new(
            sa,
            Mat::from_rows(vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(2.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let b = LabeledMatrix::new(
            sb,
            Mat::from_rows(vec![
                vec![c(0.0, 0.0), c(1.0, 0.0)],
                vec![c(1.0, 0.0), c(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.space().labels(), vec![Label::I1, Label::O1]);
        // Block structure: diag(1,2) ⊗ X.
        assert_eq!(*k.mat().get(0, 1), c(1.0, 0.0));
        assert_eq!(*k.mat().get(2, 3), c(2.0, 0.0));
        assert_eq!(*k.mat().get(0, 3), c(0.0, 0.0));
        // Same labels on both sides must fail.
        assert!(kron(&a, &a).is_err());
    }

    #[test]
    fn partial_trace_of_product_state_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sa = Space::of(&[(Label::I1, 2)]).unwrap();
        let sb = Space::of(&[(Label::O1, 3)]).unwrap();
        let a = random_hermitian(&mut rng, &sa);
        let b = random_hermitian(&mut rng, &sb);
        let ab = kron(&a, &b).unwrap();
        let tr_b = partial_trace(&ab, &[Label::O1]).unwrap();
        let expected = a.scale(&b.trace());
        assert!(approx_eq(&tr_b, &expected, 1e-12));
        // Tracing everything leaves a 1×1 matrix holding the full trace.
        let tr_all = partial_trace(&ab, &[Label::I1, Label::O1]).unwrap();
        assert_eq!(tr_all.dim(), 1);
        assert!((tr_all.mat().get(0, 0) - ab.trace()).norm() < 1e-12);
    }

    #[test]
    fn trace_and_replace_is_idempotent_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = Space::two_copy_qubit();
        let a = random_hermitian(&mut rng, &s);
        let over = [Label::O1, Label::I2];
        let once = trace_and_replace(&a, &over).unwrap();
        let twice = trace_and_replace(&once, &over).unwrap();
        assert!(approx_eq(&once, &twice, 1e-12));
        // Trace preserving.
        assert!((once.trace() - a.trace()).norm() < 1e-12);
        // Unital: _X 1 = 1.
        let one = LabeledMatrix::<Complex64>::identity(s.clone());
        assert!(approx_eq(
            &trace_and_replace(&one, &over).unwrap(),
            &one,
            1e-15
        ));
        // Self-adjoint: Tr(A·_X B) = Tr(_X A·B).
        let b = random_hermitian(&mut rng, &s);
        let lhs = a
            .trace_product(&trace_and_replace(&b, &over).unwrap())
            .unwrap();
        let rhs = trace_and_replace(&a, &over)
            .unwrap()
            .trace_product(&b)
            .unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        // Composition collapses to the union: _X(_Y A) = _{X∪Y} A.
        let x = [Label::O1];
        let y = [Label::I2, Label::O2];
        let xy = [Label::O1, Label::I2, Label::O2];
        let lhs = trace_and_replace(&trace_and_replace(&a, &y).unwrap(), &x).unwrap();
        let rhs = trace_and_replace(&a, &xy).unwrap();
        assert!(approx_eq(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn permute_systems_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = Space::of(&[(Label::I1, 2), (Label::O1, 3), (Label::I2, 2)]).unwrap();
        let a = random_matrix(&mut rng, &s);
        let order = [Label::I2, Label::I1, Label::O1];
        let p = permute_systems(&a, &order).unwrap();
        assert_eq!(p.space().labels(), order.to_vec());
        assert!((p.trace() - a.trace()).norm() < 1e-12);
        let back = permute_systems(&p, &[Label::I1, Label::O1, Label::I2]).unwrap();
        assert!(approx_eq(&back, &a, 0.0));
        // Permuting two kron factors equals kron in the other order.
        let sa = Space::of(&[(Label::I1, 2)]).unwrap();
        let sb = Space::of(&[(Label::O1, 3)]).unwrap();
        let x = random_matrix(&mut rng, &sa);
        let y = random_matrix(&mut rng, &sb);
        let xy = kron(&x, &y).unwrap();
        let yx = kron(&y, &x).unwrap();
        let perm = permute_systems(&xy, &[Label::O1, Label::I1]).unwrap();
        assert!(approx_eq(&perm, &yx, 1e-12));
    }

    #[test]
    fn link_product_matches_kron_when_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sa = Space::of(&[(Label::I1, 2)]).unwrap();
        let sb = Space::of(&[(Label::O2, 3)]).unwrap();
        let a = random_matrix(&mut rng, &sa);
        let b = random_matrix(&mut rng, &sb);
        let linked = link_product(&a, &b).unwrap();
        let kroned = kron(&a, &b).unwrap();
        assert!(approx_eq(&linked, &kroned, 1e-12));
    }

    #[test]
    fn link_product_applies_channels_to_states() {
        // Amplitude-damping-like Kraus pair applied via Choi + link product
        // must agree with direct Kraus application Σ K ρ K†.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g: f64 = 0.37;
        let k0 = Mat::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0)],
        ])
        .unwrap();
        let k1 = Mat::from_rows(vec![
            vec![c(0.0, 0.0), c(g.sqrt(), 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let kraus = vec![k0.clone(), k1.clone()];
        let choi = choi_from_kraus(&kraus, (Label::I1, 2), (Label::O1, 2)).unwrap();
        // Tr_O C = 1_I for a trace-preserving map.
        let tr_o = partial_trace(&choi, &[Label::O1]).unwrap();
        let idty = LabeledMatrix::<Complex64>::identity(Space::of(&[(Label::I1, 2)]).unwrap());
        assert!(approx_eq(&tr_o, &idty, 1e-12));

        let rho_space = Space::of(&[(Label::I1, 2)]).unwrap();
        let mut rho = random_hermitian(&mut rng, &rho_space);
        // Normalize to a state.
        let t = rho.trace();
        rho = rho.scale(&c(1.0 / t.re, 0.0));
        let out = link_product(&rho, &choi).unwrap();
        assert_eq!(out.space().labels(), vec![Label::O1]);
        let direct = {
            let m = k0
                .matmul(rho.mat())
                .matmul(&k0.dagger())
                .add(&k1.matmul(rho.mat()).matmul(&k1.dagger()));
            LabeledMatrix::new(Space::of(&[(Label::O1, 2)]).unwrap(), m).unwrap()
        };
        assert!(approx_eq(&out, &direct, 1e-12));
    }

    #[test]
    fn link_product_with_tester_reproduces_born_rule() {
        // p = Tr[(ρ ⊗ M^T)^{T_I ...}] — via labels: tester T = ρ ⊗ M on I,O with
        // the link product against C giving Tr(T^{T} ...). The cleanest oracle:
        // full contraction C ★ (ρ ⊗ M) where ρ sits on I and M^T on O equals
        // Tr(M · N(ρ)).
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g: f64 = 0.61;
        let k0 = Mat::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0)],
        ])
        .unwrap();
        let k1 = Mat::from_rows(vec![
            vec![c(0.0, 0.0), c(g.sqrt(), 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let choi =
            choi_from_kraus(&[k0.clone(), k1.clone()], (Label::I1, 2), (Label::O1, 2)).unwrap();
        let si = Space::of(&[(Label::I1, 2)]).unwrap();
        let so = Space::of(&[(Label::O1, 2)]).unwrap();
        let mut rho = random_hermitian(&mut rng, &si);
        let t = rho.trace();
        rho = rho.scale(&c(1.0 / t.re, 0.0));
        let m = random_hermitian(&mut rng, &so);

        // N(ρ) then Tr(M·N(ρ)).
        let out = link_product(&rho, &choi).unwrap();
        let expected = m.trace_product(&out).unwrap();

        // Same number via a single link of C with ρ ⊗ M^T (transpose on M
        // because the link transposes shared factors of the first argument).
        let m_t = LabeledMatrix::new(so.clone(), m.mat().dagger().map(|z| z.conj())).unwrap();
        let tester = kron(&rho, &m_t).unwrap();
        let p = link_product(&tester, &choi).unwrap();
        assert_eq!(p.dim(), 1);
        assert!((p.mat().get(0, 0) - expected).norm() < 1e-12);
    }

    #[test]
    fn link_product_is_symmetric_up_to_reordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sa = Space::of(&[(Label::I1, 2), (Label::O1, 2)]).unwrap();
        let sb = Space::of(&[(Label::O1, 2), (Label::I2, 2)]).unwrap();
        let a = random_hermitian(&mut rng, &sa);
        let b = random_hermitian(&mut rng, &sb);
        let ab = link_product(&a, &b).unwrap();
        let ba = link_product(&b, &a).unwrap();
        let ba_reordered = permute_systems(&ba, &ab.space().labels()).unwrap();
        assert!(approx_eq(&ab, &ba_reordered, 1e-12));
    }

    #[test]
    fn choi_of_identity_channel_is_unnormalized_bell_projector() {
        let k = vec![Mat::<Complex64>::identity(2)];
        let choi = choi_from_kraus(&k, (Label::I1, 2), (Label::O1, 2)).unwrap();
        assert!((choi.trace() - c(2.0, 0.0)).norm() < 1e-15);
        for (i, j) in [(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            assert!((choi.mat().get(i, j) - c(1.0, 0.0)).norm() < 1e-15);
        }
        assert!(choi.mat().get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn exact_flavor_agrees_with_float_flavor() {
        use crate::exact::{ExactComplex, Rational};
        use num::BigInt;
        // Build the same matrix in both flavors and compare a composite
        // operation: trace_and_replace ∘ permute ∘ kron.
        let s1 = Space::of(&[(Label::I1, 2), (Label::O1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let d = s1.dim();
        let mut mf = Mat::zeros(d, d);
        let mut me = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (n_re, n_im) = (rng.random_range(-8i64..8), rng.random_range(-8i64..8));
                mf.set(i, j, c(n_re as f64 / 4.0, n_im as f64 / 4.0));
                me.set(
                    i,
                    j,
                    ExactComplex::new(
                        crate::exact::QuadExt::from_rational(Rational::new(
                            BigInt::from(n_re),
                            BigInt::from(4),
                        )),
                        crate::exact::QuadExt::from_rational(Rational::new(
                            BigInt::from(n_im),
                            BigInt::from(4),
                        )),
                    ),
                );
            }
        }
        let lf = LabeledMatrix::new(s1.clone(), mf).unwrap();
        let le = LabeledMatrix::new(s1.clone(), me).unwrap();
        let f = trace_and_replace(&lf.hermitize(), &[Label::O1]).unwrap();
        let e = trace_and_replace(&le.hermitize(), &[Label::O1]).unwrap();
        for (x, y) in f.mat().entries().iter().zip(e.mat().entries()) {
            assert!((x - y.to_c64()).norm() < 1e-14);
        }
    }
}
