//! Strategy classes for multi-copy channel discrimination and the subspace
//! projectors that characterize them.
//!
//! A two-copy strategy is a *tester* `{T_i}` with `T_i ⪰ 0` whose sum
//! `W = Σ_i T_i` is a process matrix of the matching class. Each class of
//! processes spans a linear subspace of Hermitian operators on
//! `I1 ⊗ O1 ⊗ I2 ⊗ O2`, picked out by a projector that is a signed sum of
//! trace-and-replace maps `_X`:
//!
//! * parallel:  `P(W) = _{O1O2}W`;
//! * sequential (1 before 2): `P(W) = _{O2}W − _{I2O2}W + _{O1I2O2}W`;
//! * general:   `P(W) = _{I1O1O2}W − _{I1O1}W + _{O1I2O2}W − _{I2O2}W +
//!   _{O1}W + _{O2}W − _{O1O2}W`;
//!
//! together with the trace normalization `Tr W = d_{O1}d_{O2}`. Causally
//! separable processes are the convex hull of the two sequential orders and
//! have no single projector; they are handled by dedicated semidefinite
//! programs elsewhere.
//!
//! Every class also has a *dual affine space* — the operators `W̄` with
//! `Tr(W W̄) = 1` for all processes `W` of the class — described by a second
//! family of projectors and the normalization `Tr W̄ = d_{I1}d_{I2}`. Upper
//! bounds on discrimination probabilities are certified by exhibiting exact
//! members of these dual spaces.
//!
//! Because the maps `_X` compose as `_X ∘ _Y = _{X∪Y}`, all projector
//! identities (idempotence, nesting of the classes, duality pairing) can be
//! verified *symbolically* on the coefficient level, independent of any
//! matrix representation; the tests below do exactly that.

use crate::tensor::{Label, LabeledMatrix, Scalar, Space, TensorError, trace_and_replace};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors from strategy-level operations.
#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("strategy {0} does not define {1}")]
    Unsupported(Strategy, &'static str),
    #[error("{0} copies of the channel are not supported here")]
    WrongCopies(usize),
    #[error("cannot parse strategy {0:?}: expected par, seq12, seq21, sep, or gen")]
    BadName(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// The four strategy classes (with both sequential orders available).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Strategy {
    /// Both copies used side by side on one entangled probe.
    Par,
    /// Copy 1 strictly before copy 2.
    Seq12,
    /// Copy 2 strictly before copy 1.
    Seq21,
    /// Convex mixtures of the two sequential orders.
    Sep,
    /// General two-copy testers (indefinite causal order allowed).
    Gen,
}

impl Strategy {
    /// The classes reported by scans, in hierarchy order. `Seq12` stands in
    /// for the sequential class: when both hypotheses use two copies of one
    /// channel, the 1 ↔ 2 relabeling symmetry makes the orders equivalent.
    pub const HIERARCHY: [Strategy; 4] =
        [Strategy::Par, Strategy::Seq12, Strategy::Sep, Strategy::Gen];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Par => "par",
            Strategy::Seq12 => "seq12",
            Strategy::Seq21 => "seq21",
            Strategy::Sep => "sep",
            Strategy::Gen => "gen",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "par" => Ok(Strategy::Par),
            "seq" | "seq12" => Ok(Strategy::Seq12),
            "seq21" => Ok(Strategy::Seq21),
            "sep" => Ok(Strategy::Sep),
            "gen" => Ok(Strategy::Gen),
            _ => Err(StrategyError::BadName(s.to_string())),
        }
    }
}

/// A signed integer combination of trace-and-replace maps,
/// `P = Σ_S c_S · _S`, in canonical form (sorted distinct label sets,
/// nonzero coefficients).
///
/// Since `_X ∘ _Y = _{X∪Y}`, these maps form a commutative algebra and
/// compositions stay in this representation, which lets projector laws be
/// checked exactly without picking a basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProjectorMap {
    terms: Vec<(i64, Vec<Label>)>,
}

impl ProjectorMap {
    pub fn new(terms: &[(i64, &[Label])]) -> Self {
        let mut map: BTreeMap<Vec<Label>, i64> = BTreeMap::new();
        for (c, labels) in terms {
            let mut key = labels.to_vec();
            key.sort();
            key.dedup();
            *map.entry(key).or_insert(0) += c;
        }
        ProjectorMap {
            terms: map
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(k, c)| (c, k))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(i64, Vec<Label>)] {
        &self.terms
    }

    /// Applies the map to an operator (in either scalar flavor).
    pub fn apply<T: Scalar>(&self, w: &LabeledMatrix<T>) -> Result<LabeledMatrix<T>, TensorError> {
        let mut out = LabeledMatrix::zeros(w.space().clone());
        for (c, labels) in &self.terms {
            let term = trace_and_replace(w, labels)?.scale_ratio(*c, 1);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Composition `self ∘ inner` using `_S ∘ _T = _{S∪T}`.
    pub fn compose(&self, inner: &ProjectorMap) -> ProjectorMap {
        let mut map: BTreeMap<Vec<Label>, i64> = BTreeMap::new();
        for (c1, s1) in &self.terms {
            for (c2, s2) in &inner.terms {
                let mut key = s1.clone();
                key.extend(s2.iter().copied());
                key.sort();
                key.dedup();
                *map.entry(key).or_insert(0) += c1 * c2;
            }
        }
        ProjectorMap {
            terms: map
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(k, c)| (c, k))
                .collect(),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.compose(self) == *self
    }

    /// Dimension of the image subspace (as a space of Hermitian operators)
    /// on `space`: the superoperator trace `Σ_S c_S (D/d_S)²`.
    pub fn subspace_dimension(&self, space: &Space) -> Result<i64, TensorError> {
        let d_total = space.dim() as i64;
        let mut dim = 0i64;
        for (c, labels) in &self.terms {
            let mut d_s = 1i64;
            for l in labels {
                d_s *= space.dim_of(*l)? as i64;
            }
            let ratio = d_total / d_s;
            dim += c * ratio * ratio;
        }
        Ok(dim)
    }
}

use Label::{I1, I2, O1, O2};

/// Projector onto the linear span of the class's process matrices.
///
/// `copies` is 1 or 2; with one copy only the parallel class exists (a
/// one-slot tester), whose processes are `σ ⊗ 1^{O1}`.
pub fn process_projector(strategy: Strategy, copies: usize) -> Result<ProjectorMap, StrategyError> {
    match (copies, strategy) {
        (1, Strategy::Par) => Ok(ProjectorMap::new(&[(1, &[O1])])),
        (1, _) => Err(StrategyError::Unsupported(strategy, "a one-copy subspace")),
        (2, Strategy::Par) => Ok(ProjectorMap::new(&[(1, &[O1, O2])])),
        (2, Strategy::Seq12) => Ok(ProjectorMap::new(&[
            (1, &[O2]),
            (-1, &[I2, O2]),
            (1, &[O1, I2, O2]),
        ])),
        (2, Strategy::Seq21) => Ok(ProjectorMap::new(&[
            (1, &[O1]),
            (-1, &[I1, O1]),
            (1, &[O2, I1, O1]),
        ])),
        (2, Strategy::Gen) => Ok(ProjectorMap::new(&[
            (1, &[I1, O1, O2]),
            (-1, &[I1, O1]),
            (1, &[O1, I2, O2]),
            (-1, &[I2, O2]),
            (1, &[O1]),
            (1, &[O2]),
            (-1, &[O1, O2]),
        ])),
        (2, Strategy::Sep) => Err(StrategyError::Unsupported(
            strategy,
            "a single process subspace (it is a convex hull of two orders)",
        )),
        (k, _) => Err(StrategyError::WrongCopies(k)),
    }
}

/// Projector onto the linear span of the class's dual affine space — the
/// operators pairing to 1 with every process of the class.
pub fn dual_projector(strategy: Strategy, copies: usize) -> Result<ProjectorMap, StrategyError> {
    match (copies, strategy) {
        (1, Strategy::Par) => Ok(ProjectorMap::new(&[(1, &[]), (-1, &[O1]), (1, &[I1, O1])])),
        (1, _) => Err(StrategyError::Unsupported(
            strategy,
            "a one-copy dual subspace",
        )),
        (2, Strategy::Par) => Ok(ProjectorMap::new(&[
            (1, &[]),
            (-1, &[O1, O2]),
            (1, &[I1, I2, O1, O2]),
        ])),
        (2, Strategy::Seq12) => Ok(ProjectorMap::new(&[
            (1, &[]),
            (-1, &[O2]),
            (1, &[I2, O2]),
            (-1, &[O1, I2, O2]),
            (1, &[I1, O1, I2, O2]),
        ])),
        (2, Strategy::Seq21) => Ok(ProjectorMap::new(&[
            (1, &[]),
            (-1, &[O1]),
            (1, &[I1, O1]),
            (-1, &[O2, I1, O1]),
            (1, &[I2, O2, I1, O1]),
        ])),
        (2, Strategy::Gen) => Ok(ProjectorMap::new(&[
            (1, &[]),
            (-1, &[O1]),
            (1, &[I1, O1]),
            (-1, &[O2]),
            (1, &[I2, O2]),
            (-1, &[O1, I2, O2]),
            (-1, &[I1, O1, O2]),
            (1, &[O1, O2]),
            (1, &[I1, O1, I2, O2]),
        ])),
        (2, Strategy::Sep) => Err(StrategyError::Unsupported(
            strategy,
            "a single dual subspace (its dual witnesses are built per order)",
        )),
        (k, _) => Err(StrategyError::WrongCopies(k)),
    }
}

/// Required trace of a process matrix on `space`: the product of all output
/// dimensions (`d_{O1}·d_{O2}` for two copies).
pub fn process_trace(space: &Space) -> i64 {
    space
        .parts()
        .iter()
        .filter(|(l, _)| matches!(l, Label::O1 | Label::O2))
        .map(|(_, d)| *d as i64)
        .product()
}

/// Required trace of a dual-space element: the product of all input
/// dimensions (`d_{I1}·d_{I2}` for two copies).
pub fn dual_trace(space: &Space) -> i64 {
    space
        .parts()
        .iter()
        .filter(|(l, _)| matches!(l, Label::I1 | Label::I2))
        .map(|(_, d)| *d as i64)
        .product()
}

/// The white-noise process `(Tr-normalized identity)` — an interior point of
/// every process class, used as a strictly feasible starting point and as a
/// mixing target in certification.
pub fn white_noise<T: Scalar>(space: &Space) -> LabeledMatrix<T> {
    let dim = space.dim() as i64;
    LabeledMatrix::identity(space.clone()).scale_ratio(process_trace(space), dim)
}

/// Float validity check for a process matrix of a projector-defined class
/// (everything but SEP, whose membership needs a semidefinite program).
pub fn is_valid_process(
    w: &LabeledMatrix<num_complex::Complex64>,
    strategy: Strategy,
    tol: f64,
) -> Result<bool, StrategyError> {
    let copies = if w.space().contains(I2) { 2 } else { 1 };
    let proj = process_projector(strategy, copies)?;
    let projected = proj.apply(w)?;
    let drift = projected
        .sub(w)?
        .mat()
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let trace_err = (w.trace().re - process_trace(w.space()) as f64).abs() + w.trace().im.abs();
    let min_eig = crate::channels::float_min_eig_c64(w.mat());
    Ok(drift <= tol && trace_err <= tol && min_eig >= -tol)
}
