//! Channel families, their Choi operators, and discrimination ensembles.
//!
//! Channels are represented by their Choi operator on `I1 ⊗ O1` with the
//! convention `C = Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|)`, so a channel is completely
//! positive and trace preserving iff `C ⪰ 0` and `Tr_O C = 1_I` (hence
//! `Tr C = d_I`). Built-in parametric families carry an exact Choi twin over
//! ℚ(√d) alongside the floating-point one; randomly sampled channels start
//! float-only and can be upgraded to exact twins by the certification layer.

use crate::exact::{
    ExactComplex, ExactError, Rational, rational_from_str, rational_to_string, sqrt_rational,
};
use crate::tensor::{
    Label, LabeledMatrix, Mat, Scalar, Space, TensorError, kron, trace_and_replace,
};
use nalgebra::{Complex, DMatrix};
use num::{BigInt, One, Signed, Zero};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors from channel construction, parsing, and ensemble validation.
#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("parameter {0} is outside [0, 1]")]
    ParameterOutOfRange(String),
    #[error("cannot parse channel spec {0:?}: expected ad:<γ>, bf:<η>, or random:seed=<n>")]
    BadSpec(String),
    #[error("channel Choi must live on labels I1 ⊗ O1, got {0}")]
    BadChoiSpace(String),
    #[error("rejection sampling failed to produce a PSD Choi operator")]
    SamplingFailed,
    #[error("ensemble needs at least two channels")]
    EnsembleTooSmall,
    #[error("priors must be positive and sum to 1, got sum {0}")]
    BadPriors(String),
    #[error("channel copies mismatch: ensemble uses {0} copies, expected {1}")]
    CopiesMismatch(usize, usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Parametric description of a channel, used for display and run metadata.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ChannelSpec {
    /// Amplitude damping with decay probability γ:
    /// `ρ ↦ K₀ρK₀† + K₁ρK₁†` with `K₀ = diag(1, √(1−γ))`, `K₁ = √γ|0⟩⟨1|`.
    AmplitudeDamping { gamma: Rational },
    /// Bit flip `ρ ↦ ηρ + (1−η)XρX` with parameter η.
    BitFlip { eta: Rational },
    /// Channel sampled from the Hilbert–Schmidt projection construction.
    Random { seed: u64 },
    /// One member of a sampled pair (stream `pair` of the master seed).
    RandomPair { seed: u64, pair: u64, member: u8 },
    /// Free-form name for channels built directly from a Choi operator.
    Custom(String),
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::AmplitudeDamping { gamma } => {
                write!(f, "ad:{}", rational_to_string(gamma))
            }
            ChannelSpec::BitFlip { eta } => write!(f, "bf:{}", rational_to_string(eta)),
            ChannelSpec::Random { seed } => write!(f, "random:seed={seed}"),
            ChannelSpec::RandomPair { seed, pair, member } => {
                write!(f, "random:seed={seed},pair={pair},member={member}")
            }
            ChannelSpec::Custom(name) => write!(f, "{name}"),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChannelError::BadSpec(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "ad" => Ok(ChannelSpec::AmplitudeDamping {
                gamma: rational_from_str(arg).map_err(|_| bad())?,
            }),
            "bf" => Ok(ChannelSpec::BitFlip {
                eta: rational_from_str(arg).map_err(|_| bad())?,
            }),
            "random" => {
                let mut seed = None;
                let mut pair = None;
                let mut member = None;
                for part in arg.split(',') {
                    let (k, v) = part.split_once('=').ok_or_else(bad)?;
                    match k {
                        "seed" => seed = Some(v.parse().map_err(|_| bad())?),
                        "pair" => pair = Some(v.parse().map_err(|_| bad())?),
                        "member" => member = Some(v.parse().map_err(|_| bad())?),
                        _ => return Err(bad()),
                    }
                }
                match (seed, pair, member) {
                    (Some(seed), None, None) => Ok(ChannelSpec::Random { seed }),
                    (Some(seed), Some(pair), Some(member)) => {
                        Ok(ChannelSpec::RandomPair { seed, pair, member })
                    }
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

fn check_unit_interval(name: &str, x: &Rational) -> Result<(), ChannelError> {
    if x < &Rational::zero() || x > &Rational::one() {
        return Err(ChannelError::ParameterOutOfRange(format!(
            "{name} = {}",
            rational_to_string(x)
        )));
    }
    Ok(())
}

/// A channel: a Choi operator on `I1 ⊗ O1`, optionally with an exact twin.
#[derive(Clone, PartialEq, Debug)]
pub struct Channel {
    spec: ChannelSpec,
    choi: LabeledMatrix<Complex64>,
    choi_exact: Option<LabeledMatrix<ExactComplex>>,
}

impl Channel {
    /// Wraps an explicit float Choi operator (labels must be `I1 ⊗ O1`).
    pub fn from_choi(
        spec: ChannelSpec,
        choi: LabeledMatrix<Complex64>,
    ) -> Result<Self, ChannelError> {
        if choi.space().labels() != vec![Label::I1, Label::O1] {
            return Err(ChannelError::BadChoiSpace(format!(
                "{:?}",
                choi.space().labels()
            )));
        }
        Ok(Channel {
            spec,
            choi,
            choi_exact: None,
        })
    }

    fn from_exact(
        spec: ChannelSpec,
        choi_exact: LabeledMatrix<ExactComplex>,
    ) -> Result<Self, ChannelError> {
        let choi = choi_exact.map(|z| z.to_c64());
        let mut ch = Channel::from_choi(spec, choi)?;
        ch.choi_exact = Some(choi_exact);
        Ok(ch)
    }

    /// Amplitude-damping channel with decay probability `gamma`.
    pub fn amplitude_damping(gamma: &Rational) -> Result<Self, ChannelError> {
        check_unit_interval("gamma", gamma)?;
        let s = sqrt_rational(&(Rational::one() - gamma))?;
        let q = |r: Rational| ExactComplex::from_rational(r);
        let zero = || ExactComplex::zero();
        let rows = vec![
            vec![
                q(Rational::one()),
                zero(),
                zero(),
                ExactComplex::from_quad(s.clone()),
            ],
            vec![zero(), zero(), zero(), zero()],
            vec![zero(), zero(), q(gamma.clone()), zero()],
            vec![
                ExactComplex::from_quad(s),
                zero(),
                zero(),
                q(Rational::one() - gamma),
            ],
        ];
        let mat = Mat::from_rows(rows)?;
        let choi_exact = LabeledMatrix::new(Space::one_copy_qubit(), mat)?;
        Channel::from_exact(
            ChannelSpec::AmplitudeDamping {
                gamma: gamma.clone(),
            },
            choi_exact,
        )
    }

    /// Bit-flip channel `ρ ↦ ηρ + (1−η)XρX`: the parameter is the weight
    /// kept on the identity, so the state flips with probability `1 − η`.
    pub fn bit_flip(eta: &Rational) -> Result<Self, ChannelError> {
        check_unit_interval("eta", eta)?;
        let keep = eta;
        let flip = Rational::one() - eta;
        let q = |r: &Rational| ExactComplex::from_rational(r.clone());
        let zero = || ExactComplex::zero();
        // η·Choi(id) + (1−η)·Choi(X): Choi(id) hits (00,11) ⊗ (00,11),
        // Choi(X) hits (01,10) ⊗ (01,10) in (i,o) index pairs.
        let rows = vec![
            vec![q(keep), zero(), zero(), q(keep)],
            vec![zero(), q(&flip), q(&flip), zero()],
            vec![zero(), q(&flip), q(&flip), zero()],
            vec![q(keep), zero(), zero(), q(keep)],
        ];
        let mat = Mat::from_rows(rows)?;
        let choi_exact = LabeledMatrix::new(Space::one_copy_qubit(), mat)?;
        Channel::from_exact(ChannelSpec::BitFlip { eta: eta.clone() }, choi_exact)
    }

    /// Builds the channel a parsed spec describes. `Custom` specs only name
    /// a Choi operator supplied elsewhere, so they cannot be built here.
    pub fn from_spec(spec: &ChannelSpec) -> Result<Self, ChannelError> {
        match spec {
            ChannelSpec::AmplitudeDamping { gamma } => Channel::amplitude_damping(gamma),
            ChannelSpec::BitFlip { eta } => Channel::bit_flip(eta),
            ChannelSpec::Random { seed } => Channel::random(*seed),
            ChannelSpec::RandomPair { seed, pair, member } => {
                let (a, b) = Channel::random_pair(*seed, *pair)?;
                match member {
                    0 => Ok(a),
                    1 => Ok(b),
                    _ => Err(ChannelError::BadSpec(spec.to_string())),
                }
            }
            ChannelSpec::Custom(name) => Err(ChannelError::BadSpec(name.clone())),
        }
    }

    /// Samples a qubit channel: draw `A` from the Hilbert–Schmidt measure on
    /// unit-trace PSD matrices, project onto the trace-preserving subspace
    /// via `C = A − _O A + 1/d_O`, and retry until `C ⪰ 0`.
    pub fn random(seed: u64) -> Result<Self, ChannelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from_rng(&mut rng, ChannelSpec::Random { seed })
    }

    /// Deterministic pair of sampled channels: stream `pair` of the master
    /// seed, so pairs can be generated independently and in parallel.
    pub fn random_pair(seed: u64, pair: u64) -> Result<(Self, Self), ChannelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(pair);
        let a = Self::random_from_rng(
            &mut rng,
            ChannelSpec::RandomPair {
                seed,
                pair,
                member: 0,
            },
        )?;
        let b = Self::random_from_rng(
            &mut rng,
            ChannelSpec::RandomPair {
                seed,
                pair,
                member: 1,
            },
        )?;
        Ok((a, b))
    }

    fn random_from_rng(rng: &mut ChaCha8Rng, spec: ChannelSpec) -> Result<Self, ChannelError> {
        let space = Space::one_copy_qubit();
        let d = space.dim();
        for _ in 0..10_000 {
            let mut g: Mat<Complex64> = Mat::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    g.set(i, j, Complex64::new(re, im));
                }
            }
            let a_raw = g.matmul(&g.dagger()).hermitize();
            let tr = a_raw.trace().re;
            let a = LabeledMatrix::new(space.clone(), a_raw.scale(&Complex64::new(1.0 / tr, 0.0)))?;
            let replaced = trace_and_replace(&a, &[Label::O1])?;
            let half_id = LabeledMatrix::identity(space.clone()).scale_ratio(1, 2);
            let c = a.sub(&replaced)?.add(&half_id)?;
            if float_min_eig_c64(c.mat()) >= -1e-12 {
                return Channel::from_choi(spec, c);
            }
        }
        Err(ChannelError::SamplingFailed)
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    /// Float Choi operator on `I1 ⊗ O1`.
    pub fn choi(&self) -> &LabeledMatrix<Complex64> {
        &self.choi
    }

    /// Exact Choi twin, when the channel has one.
    pub fn choi_exact(&self) -> Option<&LabeledMatrix<ExactComplex>> {
        self.choi_exact.as_ref()
    }

    /// Input dimension `d_I`.
    pub fn d_in(&self) -> usize {
        self.choi.space().dim_of(Label::I1).unwrap()
    }

    /// Output dimension `d_O`.
    pub fn d_out(&self) -> usize {
        self.choi.space().dim_of(Label::O1).unwrap()
    }

    /// Returns a copy equipped with the given exact Choi twin. The float
    /// Choi is replaced by the twin's nearest-double image so that the two
    /// flavors describe the same channel.
    pub fn with_exact_choi(
        &self,
        choi_exact: LabeledMatrix<ExactComplex>,
    ) -> Result<Self, ChannelError> {
        Channel::from_exact(self.spec.clone(), choi_exact)
    }
}

/// Minimum eigenvalue of a Hermitian float matrix.
pub(crate) fn float_min_eig_c64(m: &Mat<Complex64>) -> f64 {
    let f = DMatrix::<Complex<f64>>::from_fn(m.rows(), m.cols(), |i, j| *m.get(i, j));
    f.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Labels used for the `c`-th copy (0-based) of a channel.
fn copy_labels(copy: usize) -> (Label, Label) {
    match copy {
        0 => (Label::I1, Label::O1),
        1 => (Label::I2, Label::O2),
        _ => unreachable!("only two copies are supported"),
    }
}

/// A weighted ensemble of channels to discriminate, with a fixed number of
/// copies (`k = 1` or `k = 2`).
#[derive(Clone, Debug)]
pub struct Ensemble {
    copies: usize,
    items: Vec<(Rational, Channel)>,
}

impl Ensemble {
    pub fn new(copies: usize, items: Vec<(Rational, Channel)>) -> Result<Self, ChannelError> {
        if !(1..=2).contains(&copies) {
            return Err(ChannelError::CopiesMismatch(copies, 2));
        }
        if items.len() < 2 {
            return Err(ChannelError::EnsembleTooSmall);
        }
        let sum: Rational = items.iter().map(|(p, _)| p.clone()).sum();
        if !sum.is_one() || items.iter().any(|(p, _)| !p.is_positive()) {
            return Err(ChannelError::BadPriors(rational_to_string(&sum)));
        }
        Ok(Ensemble { copies, items })
    }

    /// Two equally likely channels, discriminated with two copies each.
    pub fn uniform_pair(a: Channel, b: Channel) -> Result<Self, ChannelError> {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        Ensemble::new(2, vec![(half.clone(), a), (half, b)])
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(Rational, Channel)] {
        &self.items
    }

    /// `p_i · C_i^{⊗k}` as a float operator on the tester space
    /// (`I1 ⊗ O1` for one copy, `I1 ⊗ O1 ⊗ I2 ⊗ O2` for two).
    pub fn weighted_choi(&self, i: usize) -> Result<LabeledMatrix<Complex64>, ChannelError> {
        let (prior, channel) = &self.items[i];
        let p = rational_to_f64(prior);
        let out = self.choi_power(channel.choi())?;
        Ok(out.scale(&Complex64::new(p, 0.0)))
    }

    /// Exact counterpart of [`Ensemble::weighted_choi`]; requires the
    /// channel to carry an exact twin.
    pub fn weighted_choi_exact(
        &self,
        i: usize,
    ) -> Result<Option<LabeledMatrix<ExactComplex>>, ChannelError> {
        let (prior, channel) = &self.items[i];
        let Some(exact) = channel.choi_exact() else {
            return Ok(None);
        };
        let out = self.choi_power(exact)?;
        Ok(Some(out.map(|z| z.scale(prior))))
    }

    fn choi_power<T: Scalar>(
        &self,
        choi: &LabeledMatrix<T>,
    ) -> Result<LabeledMatrix<T>, ChannelError> {
        if self.copies == 1 {
            return Ok(choi.clone());
        }
        let (i2, o2) = copy_labels(1);
        let second = choi.with_labels(&[i2, o2])?;
        Ok(kron(choi, &second)?)
    }

    /// The common tester space of this ensemble.
    pub fn tester_space(&self) -> Result<Space, ChannelError> {
        Ok(self.weighted_choi(0)?.space().clone())
    }

    /// Human-readable description, e.g. `1/2·ad:67/100 + 1/2·bf:87/100 (2 copies)`.
    pub fn describe(&self) -> String {
        let terms: Vec<String> = self
            .items
            .iter()
            .map(|(p, c)| format!("{}·{}", rational_to_string(p), c.spec()))
            .collect();
        format!("{} ({} copies)", terms.join(" + "), self.copies)
    }

    /// True when every channel in the ensemble has an exact Choi twin.
    pub fn is_exact(&self) -> bool {
        self.items.iter().all(|(_, c)| c.choi_exact().is_some())
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
