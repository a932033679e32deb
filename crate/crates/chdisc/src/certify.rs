//! Exact certification of discrimination values from float SDP witnesses.
//!
//! The interior-point solver in [`crate::sdp`] returns testers and dual
//! witnesses that satisfy their constraints only up to solver tolerance.
//! This module repairs them into *exactly* feasible objects over ℚ and
//! ℚ(√d) and packages the result as a [`Certificate`] whose validity can be
//! re-checked from scratch, entirely in exact arithmetic, by anyone holding
//! the certificate and nothing else:
//!
//! * **Lower bounds** repair the primal testers. The testers are rounded to
//!   exact rationals, their sum is snapped back onto the strategy subspace,
//!   every block is mixed toward a multiple of the identity just far enough
//!   to restore positive semidefiniteness (the largest exactly feasible
//!   mixing weight found by [`binary_search_eta`]), and the family is
//!   rescaled to the exact process trace. The certified bound is the exact
//!   payoff `Σ_i Tr(T_i · p_i C_i^{⊗k})` of this feasible tester family —
//!   a success probability some strategy of the class actually attains.
//!
//! * **Upper bounds** repair the dual witness. Its rounded image is
//!   projected onto the dual affine span and mixed toward the depolarizing
//!   witness, and the claimed value is rounded up to a `10⁻⁶` grid plus the
//!   smallest slack rung at which the scaled witness exactly dominates
//!   every weighted Choi operator. Weak duality then makes the rounded
//!   value a true upper bound for the whole strategy class.
//!
//! Floating point appears below only as a pre-screen that skips hopeless
//! exact checks; it never decides an acceptance. Certificates serialize to
//! a self-contained JSON format ([`Certificate::to_json`]) that embeds the
//! ensemble's exact Choi operators, so [`Certificate::verify`] after
//! [`Certificate::from_json`] re-establishes the bound with no trust in the
//! producing process.

use std::fmt;

use num::{BigInt, One, Signed, Zero};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{Channel, ChannelError, ChannelSpec, Ensemble};
use crate::exact::{
    ExactComplex, ExactError, ExactMat, QuadExt, RadicalSum, Rational, binary_search_eta,
    float_min_eig, is_psd_exact, rational_from_str, rational_to_string,
};
use crate::sdp::{Discrimination, SdpError, SolverConfig, Witness, discriminate};
use crate::strategies::{
    Strategy, StrategyError, dual_projector, dual_trace, process_projector, process_trace,
};
use crate::tensor::{Label, LabeledMatrix, Mat, Space, TensorError, trace_and_replace};

/// Version tag written into serialized certificates.
pub const FORMAT_VERSION: u32 = 1;

/// Float minimum eigenvalue below which a candidate is rejected without
/// exact work. An exactly PSD matrix of the sizes used here rounds to a
/// float spectrum above this, so the screen only ever skips true rejects.
const DOMINANCE_SCREEN: f64 = -1e-9;

/// Exponents of the upper-bound mixing ladder `η = 1 − 2⁻ᵏ`. The feasible
/// window for `1 − η` spans roughly a factor of two, so consecutive powers
/// of two cannot step over it.
const UPPER_LADDER: std::ops::RangeInclusive<u32> = 4..=32;

#[derive(Error, Debug)]
pub enum CertifyError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ensemble member {0} has no exact Choi operator; exactify the ensemble first")]
    MissingExactChoi(usize),
    #[error("the solution carries the wrong witness shape: expected {expected}")]
    WrongWitness { expected: &'static str },
    #[error("no exactly dominating witness found within slack 1/100 above {base}")]
    UpperSearchExhausted { base: String },
    #[error("witness trace {0} is not positive, so it cannot be renormalized")]
    DegenerateTrace(String),
    #[error("malformed certificate: {0}")]
    BadCertificate(String),
    #[error("certificate check failed: {name}")]
    CheckFailed { name: String },
    #[error("internal inconsistency: {0}")]
    Inconsistent(&'static str),
}

/// Which side of the optimal value a certificate establishes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Lower,
    Upper,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Lower => write!(f, "lower"),
            Direction::Upper => write!(f, "upper"),
        }
    }
}

/// One named exact matrix stored in a certificate.
#[derive(Clone, Debug)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: LabeledMatrix<ExactComplex>,
}

/// One re-checkable claim together with its outcome.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Check {
    pub name: String,
    pub ok: bool,
}

/// A self-contained, exactly verifiable bound on a discrimination value.
///
/// The embedded ensemble (priors and exact one-copy Choi operators) is part
/// of the claim: [`Certificate::verify`] re-derives every check from it and
/// the stored witnesses alone. Use [`Certificate::describes`] to confirm
/// that a deserialized certificate talks about the ensemble you meant.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub strategy: Strategy,
    pub direction: Direction,
    pub copies: usize,
    pub ensemble: Ensemble,
    /// Mixing weight toward the depolarizing endpoint used during repair.
    pub eta: Rational,
    /// Grid slack consumed by the upper-bound search (zero for lower bounds).
    pub slack: Rational,
    /// The certified bound. Rational for upper bounds; lower bounds may
    /// carry one square root per distinct channel radicand.
    pub bound: RadicalSum,
    pub witnesses: Vec<NamedMatrix>,
    /// Outcomes of the verification run performed when the certificate was
    /// produced; [`Certificate::verify`] recomputes them from scratch.
    pub transcript: Vec<Check>,
}

/// A certified two-sided enclosure of one discrimination value.
#[derive(Clone, Debug)]
pub struct CertifiedInterval {
    pub strategy: Strategy,
    /// The solver's float estimate, for context only.
    pub float_value: f64,
    pub lower: Certificate,
    pub upper: Certificate,
}

impl CertifiedInterval {
    pub fn lower_bound(&self) -> &RadicalSum {
        &self.lower.bound
    }

    pub fn upper_bound(&self) -> &RadicalSum {
        &self.upper.bound
    }

    /// Float width of the enclosure, for reporting.
    pub fn width(&self) -> f64 {
        self.upper.bound.to_f64() - self.lower.bound.to_f64()
    }
}

/// Repairs the primal testers of `solution` into an exactly feasible
/// family and certifies its payoff as a lower bound.
pub fn certify_lower(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    match solution.strategy {
        Strategy::Sep => lower_separable(ensemble, solution),
        _ => lower_projective(ensemble, solution),
    }
}

/// Repairs the dual witness of `solution` and certifies the smallest value
/// on a `10⁻⁶` grid at which it exactly dominates the ensemble.
pub fn certify_upper(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    match solution.strategy {
        Strategy::Sep => upper_separable(ensemble, solution),
        _ => upper_projective(ensemble, solution),
    }
}

/// Solves the discrimination SDP and certifies both sides of the value.
///
/// The ensemble is exactified first when needed, so the certified interval
/// refers to the exactified ensemble (returned inside the certificates).
pub fn certify_interval(
    ensemble: &Ensemble,
    strategy: Strategy,
    config: &SolverConfig,
) -> Result<CertifiedInterval, CertifyError> {
    let exact = exactify_ensemble(ensemble)?;
    let solution = discriminate(&exact, strategy, config)?;
    let lower = certify_lower(&exact, &solution)?;
    let upper = certify_upper(&exact, &solution)?;
    if lower.bound > upper.bound {
        return Err(CertifyError::Inconsistent(
            "certified lower bound exceeds the certified upper bound",
        ));
    }
    Ok(CertifiedInterval {
        strategy,
        float_value: solution.value,
        lower,
        upper,
    })
}

/// Equips every channel of the ensemble with an exact Choi twin.
///
/// Channels that already carry one are kept. A float-only Choi operator is
/// rounded to exact rationals, its partial trace is restored to the exact
/// trace-preservation identity `Tr_O C = 1_I` (an affine correction), and
/// positivity is restored by mixing toward the completely depolarizing
/// Choi — the same η-search used for tester repair, so the perturbation is
/// on the order of the rounding error, not of any fixed tolerance.
pub fn exactify_ensemble(ensemble: &Ensemble) -> Result<Ensemble, CertifyError> {
    if ensemble.is_exact() {
        return Ok(ensemble.clone());
    }
    let mut items = Vec::with_capacity(ensemble.len());
    for (prior, channel) in ensemble.items() {
        if channel.choi_exact().is_some() {
            items.push((prior.clone(), channel.clone()));
            continue;
        }
        let raw = rationalize(channel.choi())?;
        let space = raw.space().clone();
        let d_out = channel.d_out() as i64;
        let white = LabeledMatrix::<ExactComplex>::identity(space).scale_ratio(1, d_out);
        let preserving = raw
            .sub(&trace_and_replace(&raw, &[Label::O1])?)?
            .add(&white)?;
        let eta = binary_search_eta(&[(preserving.mat().clone(), white.mat().clone())])?;
        let exact = mix(&preserving, &white, &eta)?;
        items.push((prior.clone(), channel.with_exact_choi(exact)?));
    }
    Ok(Ensemble::new(ensemble.copies(), items)?)
}

impl Certificate {
    /// Re-runs every check of this certificate from scratch in exact
    /// arithmetic and returns the transcript. The certificate is valid iff
    /// every returned check has `ok == true`; structural problems (missing
    /// witnesses, shape mismatches) surface as errors instead.
    pub fn verify(&self) -> Result<Vec<Check>, CertifyError> {
        let chois = weighted_chois_exact(&self.ensemble)?;
        let space = self.ensemble.tester_space()?;
        for w in &self.witnesses {
            if w.matrix.space() != &space {
                return Err(CertifyError::BadCertificate(format!(
                    "witness {:?} does not live on the tester space",
                    w.name
                )));
            }
        }
        let mut checks = Vec::new();
        match (self.direction, self.strategy) {
            (Direction::Lower, Strategy::Sep) => {
                self.check_lower_separable(&space, &chois, &mut checks)?
            }
            (Direction::Lower, _) => self.check_lower_projective(&space, &chois, &mut checks)?,
            (Direction::Upper, Strategy::Sep) => {
                self.check_upper_separable(&space, &chois, &mut checks)?
            }
            (Direction::Upper, _) => self.check_upper_projective(&space, &chois, &mut checks)?,
        }
        Ok(checks)
    }

    /// True when this certificate talks about exactly the given ensemble:
    /// same copies, same priors, and identical exact Choi operators.
    pub fn describes(&self, ensemble: &Ensemble) -> Result<bool, CertifyError> {
        if self.copies != ensemble.copies()
            || self.ensemble.copies() != ensemble.copies()
            || self.ensemble.len() != ensemble.len()
        {
            return Ok(false);
        }
        for ((pa, ca), (pb, cb)) in self.ensemble.items().iter().zip(ensemble.items()) {
            if pa != pb {
                return Ok(false);
            }
            let (Some(a), Some(b)) = (ca.choi_exact(), cb.choi_exact()) else {
                return Ok(false);
            };
            if !lm_equal(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Serializes the certificate to its self-contained JSON format.
    pub fn to_json(&self) -> Result<String, CertifyError> {
        Ok(serde_json::to_string(&self.to_dto())?)
    }

    /// Parses a certificate from JSON. Parsing performs structural checks
    /// only; call [`Certificate::verify`] to establish the bound.
    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        let dto: CertificateDto = serde_json::from_str(text)?;
        Certificate::from_dto(&dto)
    }

    fn witness(&self, name: &str) -> Result<&LabeledMatrix<ExactComplex>, CertifyError> {
        self.witnesses
            .iter()
            .find(|w| w.name == name)
            .map(|w| &w.matrix)
            .ok_or_else(|| CertifyError::BadCertificate(format!("missing witness {name:?}")))
    }

    fn expect_witnesses(&self, count: usize) -> Result<(), CertifyError> {
        if self.witnesses.len() != count {
            return Err(CertifyError::BadCertificate(format!(
                "expected {count} witnesses, found {}",
                self.witnesses.len()
            )));
        }
        Ok(())
    }

    fn testers(&self, n: usize) -> Result<Vec<&LabeledMatrix<ExactComplex>>, CertifyError> {
        (0..n)
            .map(|i| self.witness(&format!("tester[{i}]")))
            .collect()
    }

    fn check_lower_projective(
        &self,
        space: &Space,
        chois: &[LabeledMatrix<ExactComplex>],
        checks: &mut Vec<Check>,
    ) -> Result<(), CertifyError> {
        let n = chois.len();
        self.expect_witnesses(n)?;
        let testers = self.testers(n)?;
        for (i, t) in testers.iter().enumerate() {
            checks.push(Check {
                name: format!("tester[{i}] is positive semidefinite"),
                ok: psd_check(t)?,
            });
        }
        let sum = sum_all(&testers)?;
        let proj = process_projector(self.strategy, self.copies)?;
        checks.push(Check {
            name: "tester sum lies in the strategy subspace".into(),
            ok: lm_equal(&proj.apply(&sum)?, &sum)?,
        });
        let want = Rational::from_integer(BigInt::from(process_trace(space)));
        checks.push(Check {
            name: "tester sum has the process trace".into(),
            ok: trace_is(&sum, &want),
        });
        checks.push(Check {
            name: "bound equals the ensemble payoff of the testers".into(),
            ok: payoff(&testers, chois)? == self.bound,
        });
        Ok(())
    }

    fn check_lower_separable(
        &self,
        space: &Space,
        chois: &[LabeledMatrix<ExactComplex>],
        checks: &mut Vec<Check>,
    ) -> Result<(), CertifyError> {
        let n = chois.len();
        self.expect_witnesses(n + 2)?;
        let testers = self.testers(n)?;
        let block12 = self.witness("order[12]")?;
        let block21 = self.witness("order[21]")?;
        for (i, t) in testers.iter().enumerate() {
            checks.push(Check {
                name: format!("tester[{i}] is positive semidefinite"),
                ok: psd_check(t)?,
            });
        }
        for (name, block, order) in [
            ("order[12]", block12, Strategy::Seq12),
            ("order[21]", block21, Strategy::Seq21),
        ] {
            checks.push(Check {
                name: format!("{name} is positive semidefinite"),
                ok: psd_check(block)?,
            });
            let proj = process_projector(order, self.copies)?;
            checks.push(Check {
                name: format!("{name} lies in the {order} subspace"),
                ok: lm_equal(&proj.apply(block)?, block)?,
            });
        }
        let split = block12.add(block21)?;
        let sum = sum_all(&testers)?;
        checks.push(Check {
            name: "testers sum to the order split".into(),
            ok: lm_equal(&sum, &split)?,
        });
        let want = Rational::from_integer(BigInt::from(process_trace(space)));
        checks.push(Check {
            name: "order split has the process trace".into(),
            ok: trace_is(&split, &want),
        });
        checks.push(Check {
            name: "bound equals the ensemble payoff of the testers".into(),
            ok: payoff(&testers, chois)? == self.bound,
        });
        Ok(())
    }

    fn check_upper_projective(
        &self,
        space: &Space,
        chois: &[LabeledMatrix<ExactComplex>],
        checks: &mut Vec<Check>,
    ) -> Result<(), CertifyError> {
        self.expect_witnesses(1)?;
        let witness = self.witness("witness")?;
        let dual = dual_projector(self.strategy, self.copies)?;
        checks.push(Check {
            name: "witness lies in the dual affine span".into(),
            ok: lm_equal(&dual.apply(witness)?, witness)?,
        });
        let bound = self.rational_bound()?;
        let want = Rational::from_integer(BigInt::from(dual_trace(space))) * bound;
        checks.push(Check {
            name: "witness trace equals the dual trace times the bound".into(),
            ok: trace_is(witness, &want),
        });
        for (i, c) in chois.iter().enumerate() {
            checks.push(Check {
                name: format!("witness dominates weighted channel {i}"),
                ok: psd_check(&witness.sub(c)?)?,
            });
        }
        Ok(())
    }

    fn check_upper_separable(
        &self,
        space: &Space,
        chois: &[LabeledMatrix<ExactComplex>],
        checks: &mut Vec<Check>,
    ) -> Result<(), CertifyError> {
        self.expect_witnesses(3)?;
        let bridge = self.witness("bridge")?;
        let bound = self.rational_bound()?;
        let want = Rational::from_integer(BigInt::from(dual_trace(space))) * bound;
        for (name, order) in [
            ("order[12]", Strategy::Seq12),
            ("order[21]", Strategy::Seq21),
        ] {
            let block = self.witness(name)?;
            let dual = dual_projector(order, self.copies)?;
            checks.push(Check {
                name: format!("{name} lies in the {order} dual span"),
                ok: lm_equal(&dual.apply(block)?, block)?,
            });
            checks.push(Check {
                name: format!("{name} trace equals the dual trace times the bound"),
                ok: trace_is(block, &want),
            });
            checks.push(Check {
                name: format!("{name} dominates the bridge"),
                ok: psd_check(&block.sub(bridge)?)?,
            });
        }
        for (i, c) in chois.iter().enumerate() {
            checks.push(Check {
                name: format!("bridge dominates weighted channel {i}"),
                ok: psd_check(&bridge.sub(c)?)?,
            });
        }
        Ok(())
    }

    fn rational_bound(&self) -> Result<Rational, CertifyError> {
        self.bound
            .as_rational()
            .cloned()
            .ok_or_else(|| CertifyError::BadCertificate("upper bound must be rational".into()))
    }
}

/// Runs `verify` on a freshly built certificate, stores the transcript, and
/// refuses to return a certificate with a failing check.
fn finalize(mut certificate: Certificate) -> Result<Certificate, CertifyError> {
    let checks = certificate.verify()?;
    if let Some(bad) = checks.iter().find(|c| !c.ok) {
        return Err(CertifyError::CheckFailed {
            name: bad.name.clone(),
        });
    }
    certificate.transcript = checks;
    Ok(certificate)
}

fn lower_projective(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    let n = ensemble.len();
    if solution.testers.len() != n {
        return Err(CertifyError::Inconsistent(
            "tester count differs from the ensemble size",
        ));
    }
    let proj = process_projector(solution.strategy, ensemble.copies())?;
    let raw: Vec<LabeledMatrix<ExactComplex>> = solution
        .testers
        .iter()
        .map(rationalize)
        .collect::<Result<_, _>>()?;
    let sum = sum_all(&raw.iter().collect::<Vec<_>>())?;
    let fixed = proj.apply(&sum)?;
    let space = fixed.space().clone();
    let total = real_rational(&fixed.trace(), "projected tester sum trace")?;
    if !total.is_positive() {
        return Err(CertifyError::DegenerateTrace(rational_to_string(&total)));
    }
    // Distribute the subspace defect evenly, then mix every block toward an
    // equal share of white noise; equal shares keep the mixing target
    // strictly positive definite no matter how lopsided the testers are.
    let share = fixed.sub(&sum)?.scale_ratio(1, n as i64);
    let shifted: Vec<LabeledMatrix<ExactComplex>> = raw
        .iter()
        .map(|t| t.add(&share))
        .collect::<Result<_, _>>()?;
    let dim = Rational::from_integer(BigInt::from(space.dim() as i64));
    let target = scaled_identity(
        &space,
        &(total.clone() / (dim * Rational::from_integer(BigInt::from(n as i64)))),
    );
    let pairs: Vec<(ExactMat, ExactMat)> = shifted
        .iter()
        .map(|s| (s.mat().clone(), target.mat().clone()))
        .collect();
    let eta = binary_search_eta(&pairs)?;
    let gain = Rational::from_integer(BigInt::from(process_trace(&space))) / total;
    let chois = weighted_chois_exact(ensemble)?;
    let mut witnesses = Vec::with_capacity(n);
    for (i, s) in shifted.iter().enumerate() {
        witnesses.push(NamedMatrix {
            name: format!("tester[{i}]"),
            matrix: scale_rational(&mix(s, &target, &eta)?, &gain),
        });
    }
    let bound = payoff(
        &witnesses.iter().map(|w| &w.matrix).collect::<Vec<_>>(),
        &chois,
    )?;
    finalize(Certificate {
        strategy: solution.strategy,
        direction: Direction::Lower,
        copies: ensemble.copies(),
        ensemble: ensemble.clone(),
        eta,
        slack: Rational::zero(),
        bound,
        witnesses,
        transcript: Vec::new(),
    })
}

fn lower_separable(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    let Witness::Separable { w12, w21, .. } = &solution.witness else {
        return Err(CertifyError::WrongWitness {
            expected: "a separable witness with an order split",
        });
    };
    let n = ensemble.len();
    if solution.testers.len() != n {
        return Err(CertifyError::Inconsistent(
            "tester count differs from the ensemble size",
        ));
    }
    let proj12 = process_projector(Strategy::Seq12, ensemble.copies())?;
    let proj21 = process_projector(Strategy::Seq21, ensemble.copies())?;
    let mut block12 = proj12.apply(&rationalize(w12)?)?;
    let mut block21 = proj21.apply(&rationalize(w21)?)?;
    let space = block12.space().clone();
    // An order the optimum does not use may rationalize to a slightly
    // indefinite residue with nonpositive trace; certify a single-order
    // split in that case and let the defect absorb the residue.
    let mut tr12 = real_rational(&block12.trace(), "order[12] trace")?;
    if !tr12.is_positive() {
        block12 = LabeledMatrix::zeros(space.clone());
        tr12 = Rational::zero();
    }
    let mut tr21 = real_rational(&block21.trace(), "order[21] trace")?;
    if !tr21.is_positive() {
        block21 = LabeledMatrix::zeros(space.clone());
        tr21 = Rational::zero();
    }
    let total = tr12.clone() + tr21.clone();
    if !total.is_positive() {
        return Err(CertifyError::DegenerateTrace(rational_to_string(&total)));
    }
    let raw: Vec<LabeledMatrix<ExactComplex>> = solution
        .testers
        .iter()
        .map(rationalize)
        .collect::<Result<_, _>>()?;
    let sum = sum_all(&raw.iter().collect::<Vec<_>>())?;
    let split = block12.add(&block21)?;
    let share = split.sub(&sum)?.scale_ratio(1, n as i64);
    let shifted: Vec<LabeledMatrix<ExactComplex>> = raw
        .iter()
        .map(|t| t.add(&share))
        .collect::<Result<_, _>>()?;
    let dim = Rational::from_integer(BigInt::from(space.dim() as i64));
    let tester_target = scaled_identity(
        &space,
        &(total.clone() / (dim.clone() * Rational::from_integer(BigInt::from(n as i64)))),
    );
    let target12 = scaled_identity(&space, &(tr12 / dim.clone()));
    let target21 = scaled_identity(&space, &(tr21 / dim));
    // One common η keeps the split identity Σ T_i = W¹² + W²¹ exact: the
    // tester targets sum to the order targets by construction.
    let mut pairs: Vec<(ExactMat, ExactMat)> = shifted
        .iter()
        .map(|s| (s.mat().clone(), tester_target.mat().clone()))
        .collect();
    pairs.push((block12.mat().clone(), target12.mat().clone()));
    pairs.push((block21.mat().clone(), target21.mat().clone()));
    let eta = binary_search_eta(&pairs)?;
    let gain = Rational::from_integer(BigInt::from(process_trace(&space))) / total;
    let chois = weighted_chois_exact(ensemble)?;
    let mut witnesses = Vec::with_capacity(n + 2);
    for (i, s) in shifted.iter().enumerate() {
        witnesses.push(NamedMatrix {
            name: format!("tester[{i}]"),
            matrix: scale_rational(&mix(s, &tester_target, &eta)?, &gain),
        });
    }
    let bound = payoff(
        &witnesses.iter().map(|w| &w.matrix).collect::<Vec<_>>(),
        &chois,
    )?;
    witnesses.push(NamedMatrix {
        name: "order[12]".into(),
        matrix: scale_rational(&mix(&block12, &target12, &eta)?, &gain),
    });
    witnesses.push(NamedMatrix {
        name: "order[21]".into(),
        matrix: scale_rational(&mix(&block21, &target21, &eta)?, &gain),
    });
    finalize(Certificate {
        strategy: solution.strategy,
        direction: Direction::Lower,
        copies: ensemble.copies(),
        ensemble: ensemble.clone(),
        eta,
        slack: Rational::zero(),
        bound,
        witnesses,
        transcript: Vec::new(),
    })
}

fn upper_projective(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    let Witness::Projective { omega } = &solution.witness else {
        return Err(CertifyError::WrongWitness {
            expected: "a projective dual witness",
        });
    };
    let dual = dual_projector(solution.strategy, ensemble.copies())?;
    let fixed = dual.apply(&rationalize(omega)?)?;
    let space = fixed.space().clone();
    let shape = normalize_to_dual_trace(&fixed)?;
    let white = dual_white(&space);
    let chois = weighted_chois_exact(ensemble)?;
    let base = ceil_micro(solution.dual_value.max(solution.value))?;
    let cap = Rational::new(BigInt::one(), BigInt::from(100));
    let mut slack = Rational::zero();
    loop {
        let bound = &base + &slack;
        for k in UPPER_LADDER {
            let eta = one_minus_pow2(k);
            let witness = scale_rational(&mix(&shape, &white, &eta)?, &bound);
            if dominates_all(&witness, &chois)? {
                return finalize(Certificate {
                    strategy: solution.strategy,
                    direction: Direction::Upper,
                    copies: ensemble.copies(),
                    ensemble: ensemble.clone(),
                    eta,
                    slack,
                    bound: RadicalSum::from_rational(bound),
                    witnesses: vec![NamedMatrix {
                        name: "witness".into(),
                        matrix: witness,
                    }],
                    transcript: Vec::new(),
                });
            }
        }
        slack = next_slack(&slack);
        if slack > cap {
            return Err(CertifyError::UpperSearchExhausted {
                base: rational_to_string(&base),
            });
        }
    }
}

fn upper_separable(
    ensemble: &Ensemble,
    solution: &Discrimination,
) -> Result<Certificate, CertifyError> {
    let Witness::Separable { h, v12, v21, .. } = &solution.witness else {
        return Err(CertifyError::WrongWitness {
            expected: "a separable witness with per-order duals",
        });
    };
    let dual12 = dual_projector(Strategy::Seq12, ensemble.copies())?;
    let dual21 = dual_projector(Strategy::Seq21, ensemble.copies())?;
    let bridge_raw = rationalize(h)?;
    let shape12 = normalize_to_dual_trace(&dual12.apply(&rationalize(v12)?)?)?;
    let shape21 = normalize_to_dual_trace(&dual21.apply(&rationalize(v21)?)?)?;
    let space = bridge_raw.space().clone();
    let white = dual_white(&space);
    let chois = weighted_chois_exact(ensemble)?;
    let base = ceil_micro(solution.dual_value.max(solution.value))?;
    let cap = Rational::new(BigInt::one(), BigInt::from(100));
    let eight = Rational::from_integer(BigInt::from(8));
    let mut slack = Rational::zero();
    loop {
        // Pad the bridge by slack/8: small enough to leave the per-order
        // domination margin at slack/8 near the white direction, large
        // enough to absorb the rounding error of `H ⪰ p_i C_i^{⊗k}`.
        let delta = slack.clone() / eight.clone();
        let bridge = bridge_raw.add(&scaled_identity(&space, &delta))?;
        if dominates_all(&bridge, &chois)? {
            let bound = &base + &slack;
            for k in UPPER_LADDER {
                let eta = one_minus_pow2(k);
                let block12 = scale_rational(&mix(&shape12, &white, &eta)?, &bound);
                if !dominates(&block12, &bridge)? {
                    continue;
                }
                let block21 = scale_rational(&mix(&shape21, &white, &eta)?, &bound);
                if !dominates(&block21, &bridge)? {
                    continue;
                }
                return finalize(Certificate {
                    strategy: solution.strategy,
                    direction: Direction::Upper,
                    copies: ensemble.copies(),
                    ensemble: ensemble.clone(),
                    eta,
                    slack,
                    bound: RadicalSum::from_rational(bound),
                    witnesses: vec![
                        NamedMatrix {
                            name: "bridge".into(),
                            matrix: bridge,
                        },
                        NamedMatrix {
                            name: "order[12]".into(),
                            matrix: block12,
                        },
                        NamedMatrix {
                            name: "order[21]".into(),
                            matrix: block21,
                        },
                    ],
                    transcript: Vec::new(),
                });
            }
        }
        slack = next_slack(&slack);
        if slack > cap {
            return Err(CertifyError::UpperSearchExhausted {
                base: rational_to_string(&base),
            });
        }
    }
}

/// Rounds the float Hermitian matrix entrywise to exact rationals and
/// restores Hermiticity exactly.
fn rationalize(lm: &LabeledMatrix<Complex64>) -> Result<LabeledMatrix<ExactComplex>, CertifyError> {
    let m = lm.mat();
    let mut out = Mat::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, ExactComplex::from_c64(*m.get(i, j))?);
        }
    }
    Ok(LabeledMatrix::new(lm.space().clone(), out.hermitize())?)
}

fn weighted_chois_exact(
    ensemble: &Ensemble,
) -> Result<Vec<LabeledMatrix<ExactComplex>>, CertifyError> {
    (0..ensemble.len())
        .map(|i| {
            ensemble
                .weighted_choi_exact(i)?
                .ok_or(CertifyError::MissingExactChoi(i))
        })
        .collect()
}

/// `η·endpoint + (1−η)·target` with exact coefficients.
fn mix(
    endpoint: &LabeledMatrix<ExactComplex>,
    target: &LabeledMatrix<ExactComplex>,
    eta: &Rational,
) -> Result<LabeledMatrix<ExactComplex>, CertifyError> {
    let omega = Rational::one() - eta;
    Ok(scale_rational(endpoint, eta).add(&scale_rational(target, &omega))?)
}

fn scale_rational(lm: &LabeledMatrix<ExactComplex>, r: &Rational) -> LabeledMatrix<ExactComplex> {
    lm.map(|z| z.scale(r))
}

fn scaled_identity(space: &Space, c: &Rational) -> LabeledMatrix<ExactComplex> {
    LabeledMatrix::<ExactComplex>::identity(space.clone()).map(|z| z.scale(c))
}

/// The depolarizing element of every dual affine span: `(d_I/d)·1`.
fn dual_white(space: &Space) -> LabeledMatrix<ExactComplex> {
    LabeledMatrix::<ExactComplex>::identity(space.clone())
        .scale_ratio(dual_trace(space), space.dim() as i64)
}

/// Rescales a span-projected witness to the exact dual trace `d_I`.
fn normalize_to_dual_trace(
    lm: &LabeledMatrix<ExactComplex>,
) -> Result<LabeledMatrix<ExactComplex>, CertifyError> {
    let trace = real_rational(&lm.trace(), "dual witness trace")?;
    if !trace.is_positive() {
        return Err(CertifyError::DegenerateTrace(rational_to_string(&trace)));
    }
    let want = Rational::from_integer(BigInt::from(dual_trace(lm.space())));
    Ok(scale_rational(lm, &(want / trace)))
}

fn sum_all(
    terms: &[&LabeledMatrix<ExactComplex>],
) -> Result<LabeledMatrix<ExactComplex>, CertifyError> {
    let (first, rest) = terms
        .split_first()
        .ok_or(CertifyError::Inconsistent("summing an empty tester family"))?;
    let mut sum = (*first).clone();
    for t in rest {
        sum = sum.add(t)?;
    }
    Ok(sum)
}

/// `Σ_i Tr(T_i · p_i C_i^{⊗k})` as an exact radical sum.
fn payoff(
    testers: &[&LabeledMatrix<ExactComplex>],
    chois: &[LabeledMatrix<ExactComplex>],
) -> Result<RadicalSum, CertifyError> {
    if testers.len() != chois.len() {
        return Err(CertifyError::Inconsistent(
            "tester and Choi counts differ in the payoff",
        ));
    }
    let mut sum = RadicalSum::zero();
    for (t, c) in testers.iter().zip(chois) {
        let z = t.trace_product(c)?;
        if !z.im.is_zero() {
            return Err(CertifyError::Inconsistent(
                "payoff trace has an imaginary part",
            ));
        }
        sum = sum.add_quad(&z.re);
    }
    Ok(sum)
}

fn real_rational(z: &ExactComplex, what: &'static str) -> Result<Rational, CertifyError> {
    if !z.im.is_zero() {
        return Err(CertifyError::Inconsistent(what));
    }
    z.re.as_rational()
        .cloned()
        .ok_or(CertifyError::Inconsistent(what))
}

/// PSD check that treats a non-Hermitian matrix as "not PSD" rather than
/// as an error, so corrupted certificates fail checks instead of verifying.
fn psd_check(m: &LabeledMatrix<ExactComplex>) -> Result<bool, CertifyError> {
    match is_psd_exact(m.mat()) {
        Ok(ok) => Ok(ok),
        Err(ExactError::NotHermitian) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

fn lm_is_zero(m: &LabeledMatrix<ExactComplex>) -> bool {
    let mat = m.mat();
    (0..mat.rows()).all(|i| (0..mat.cols()).all(|j| mat.get(i, j).is_zero()))
}

fn lm_equal(
    a: &LabeledMatrix<ExactComplex>,
    b: &LabeledMatrix<ExactComplex>,
) -> Result<bool, CertifyError> {
    if a.space() != b.space() {
        return Ok(false);
    }
    Ok(lm_is_zero(&a.sub(b)?))
}

fn trace_is(m: &LabeledMatrix<ExactComplex>, want: &Rational) -> bool {
    let t = m.trace();
    t.im.is_zero() && t.re.as_rational().is_some_and(|r| r == want)
}

/// `a ⪰ b`, decided exactly after a float pre-screen.
fn dominates(
    a: &LabeledMatrix<ExactComplex>,
    b: &LabeledMatrix<ExactComplex>,
) -> Result<bool, CertifyError> {
    let diff = a.sub(b)?;
    if float_min_eig(diff.mat()) < DOMINANCE_SCREEN {
        return Ok(false);
    }
    Ok(is_psd_exact(diff.mat())?)
}

fn dominates_all(
    witness: &LabeledMatrix<ExactComplex>,
    chois: &[LabeledMatrix<ExactComplex>],
) -> Result<bool, CertifyError> {
    for c in chois {
        if !dominates(witness, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rounds `x` up to the `10⁻⁶` grid.
fn ceil_micro(x: f64) -> Result<Rational, CertifyError> {
    if !x.is_finite() {
        return Err(CertifyError::Exact(ExactError::NonFinite(x)));
    }
    let grid = 1_000_000i64;
    let scaled = (x * grid as f64).ceil() as i64;
    Ok(Rational::new(BigInt::from(scaled), BigInt::from(grid)))
}

fn one_minus_pow2(k: u32) -> Rational {
    Rational::one() - Rational::new(BigInt::one(), BigInt::one() << k)
}

fn next_slack(slack: &Rational) -> Rational {
    if slack.is_zero() {
        Rational::new(BigInt::one(), BigInt::from(1_000_000))
    } else {
        slack + slack
    }
}

// --- JSON format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CertificateDto {
    format_version: u32,
    strategy: String,
    direction: String,
    copies: usize,
    description: String,
    ensemble: Vec<EnsembleItemDto>,
    eta: String,
    slack: String,
    bound: RadicalDto,
    witnesses: Vec<NamedMatrixDto>,
    transcript: Vec<CheckDto>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleItemDto {
    prior: String,
    spec: String,
    choi: MatrixDto,
}

#[derive(Serialize, Deserialize)]
struct NamedMatrixDto {
    name: String,
    matrix: MatrixDto,
}

/// Dense matrix on qubit wire labels `I1, O1, I2, O2` (in that order), with
/// one dimension entry per wire actually present.
#[derive(Serialize, Deserialize)]
struct MatrixDto {
    dims: Vec<usize>,
    entries: Vec<Vec<EntryDto>>,
}

#[derive(Serialize, Deserialize)]
struct EntryDto {
    re: QuadDto,
    #[serde(default = "QuadDto::zero", skip_serializing_if = "QuadDto::is_zero")]
    im: QuadDto,
}

/// `a + b·√d` with decimal-string rationals.
#[derive(Serialize, Deserialize)]
struct QuadDto {
    a: String,
    #[serde(default = "zero_string", skip_serializing_if = "is_zero_string")]
    b: String,
    #[serde(default = "zero_string", skip_serializing_if = "is_zero_string")]
    d: String,
}

#[derive(Serialize, Deserialize)]
struct RadicalDto {
    base: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    terms: Vec<RadicalTermDto>,
}

#[derive(Serialize, Deserialize)]
struct RadicalTermDto {
    coef: String,
    radicand: String,
}

#[derive(Serialize, Deserialize)]
struct CheckDto {
    name: String,
    ok: bool,
}

fn zero_string() -> String {
    "0".into()
}

fn is_zero_string(s: &str) -> bool {
    s == "0"
}

impl QuadDto {
    fn zero() -> Self {
        QuadDto {
            a: zero_string(),
            b: zero_string(),
            d: zero_string(),
        }
    }

    fn is_zero(&self) -> bool {
        is_zero_string(&self.a) && is_zero_string(&self.b)
    }

    fn from_quad(q: &QuadExt) -> Self {
        QuadDto {
            a: rational_to_string(q.rational_part()),
            b: rational_to_string(q.radical_part()),
            d: q.radicand().to_string(),
        }
    }

    fn to_quad(&self) -> Result<QuadExt, CertifyError> {
        let a = rational_from_str(&self.a)?;
        let b = rational_from_str(&self.b)?;
        let d: BigInt = self
            .d
            .parse()
            .map_err(|_| CertifyError::BadCertificate(format!("bad radicand {:?}", self.d)))?;
        Ok(QuadExt::from_parts(a, b, d)?)
    }
}

fn matrix_to_dto(lm: &LabeledMatrix<ExactComplex>) -> MatrixDto {
    let m = lm.mat();
    let entries = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    EntryDto {
                        re: QuadDto::from_quad(&z.re),
                        im: QuadDto::from_quad(&z.im),
                    }
                })
                .collect()
        })
        .collect();
    MatrixDto {
        dims: lm.space().parts().iter().map(|(_, d)| *d).collect(),
        entries,
    }
}

fn matrix_from_dto(dto: &MatrixDto) -> Result<LabeledMatrix<ExactComplex>, CertifyError> {
    let labels = [Label::I1, Label::O1, Label::I2, Label::O2];
    if dto.dims.is_empty() || dto.dims.len() > labels.len() || !dto.dims.len().is_multiple_of(2) {
        return Err(CertifyError::BadCertificate(format!(
            "unsupported wire count {}",
            dto.dims.len()
        )));
    }
    let parts: Vec<(Label, usize)> = labels
        .iter()
        .copied()
        .zip(dto.dims.iter().copied())
        .collect();
    let space = Space::of(&parts)?;
    let dim = space.dim();
    if dto.entries.len() != dim || dto.entries.iter().any(|row| row.len() != dim) {
        return Err(CertifyError::BadCertificate(format!(
            "matrix entries do not form a {dim}×{dim} grid"
        )));
    }
    let mut m = Mat::zeros(dim, dim);
    for (i, row) in dto.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m.set(i, j, ExactComplex::new(e.re.to_quad()?, e.im.to_quad()?));
        }
    }
    Ok(LabeledMatrix::new(space, m)?)
}

fn radical_to_dto(r: &RadicalSum) -> RadicalDto {
    RadicalDto {
        base: rational_to_string(r.base()),
        terms: r
            .terms()
            .iter()
            .map(|(coef, radicand)| RadicalTermDto {
                coef: rational_to_string(coef),
                radicand: radicand.to_string(),
            })
            .collect(),
    }
}

fn radical_from_dto(dto: &RadicalDto) -> Result<RadicalSum, CertifyError> {
    let mut sum = RadicalSum::from_rational(rational_from_str(&dto.base)?);
    for term in &dto.terms {
        let coef = rational_from_str(&term.coef)?;
        let radicand: BigInt = term.radicand.parse().map_err(|_| {
            CertifyError::BadCertificate(format!("bad radicand {:?}", term.radicand))
        })?;
        sum = sum.add_quad(&QuadExt::from_parts(Rational::zero(), coef, radicand)?);
    }
    Ok(sum)
}

impl Certificate {
    fn to_dto(&self) -> CertificateDto {
        CertificateDto {
            format_version: FORMAT_VERSION,
            strategy: self.strategy.to_string(),
            direction: self.direction.to_string(),
            copies: self.copies,
            description: self.ensemble.describe(),
            ensemble: self
                .ensemble
                .items()
                .iter()
                .map(|(prior, channel)| EnsembleItemDto {
                    prior: rational_to_string(prior),
                    spec: channel.spec().to_string(),
                    choi: matrix_to_dto(
                        channel
                            .choi_exact()
                            .expect("certificates always carry exact ensembles"),
                    ),
                })
                .collect(),
            eta: rational_to_string(&self.eta),
            slack: rational_to_string(&self.slack),
            bound: radical_to_dto(&self.bound),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| NamedMatrixDto {
                    name: w.name.clone(),
                    matrix: matrix_to_dto(&w.matrix),
                })
                .collect(),
            transcript: self
                .transcript
                .iter()
                .map(|c| CheckDto {
                    name: c.name.clone(),
                    ok: c.ok,
                })
                .collect(),
        }
    }

    fn from_dto(dto: &CertificateDto) -> Result<Self, CertifyError> {
        if dto.format_version != FORMAT_VERSION {
            return Err(CertifyError::BadCertificate(format!(
                "unsupported format version {}",
                dto.format_version
            )));
        }
        let strategy: Strategy = dto.strategy.parse()?;
        let direction = match dto.direction.as_str() {
            "lower" => Direction::Lower,
            "upper" => Direction::Upper,
            other => {
                return Err(CertifyError::BadCertificate(format!(
                    "unknown direction {other:?}"
                )));
            }
        };
        let mut items = Vec::with_capacity(dto.ensemble.len());
        for item in &dto.ensemble {
            let prior = rational_from_str(&item.prior)?;
            let exact = matrix_from_dto(&item.choi)?;
            let spec = item
                .spec
                .parse::<ChannelSpec>()
                .unwrap_or_else(|_| ChannelSpec::Custom(item.spec.clone()));
            let float = exact.map(|z| z.to_c64());
            let channel = Channel::from_choi(spec, float)?.with_exact_choi(exact)?;
            items.push((prior, channel));
        }
        let ensemble = Ensemble::new(dto.copies, items)?;
        let witnesses = dto
            .witnesses
            .iter()
            .map(|w| {
                Ok(NamedMatrix {
                    name: w.name.clone(),
                    matrix: matrix_from_dto(&w.matrix)?,
                })
            })
            .collect::<Result<_, CertifyError>>()?;
        Ok(Certificate {
            strategy,
            direction,
            copies: dto.copies,
            ensemble,
            eta: rational_from_str(&dto.eta)?,
            slack: rational_from_str(&dto.slack)?,
            bound: radical_from_dto(&dto.bound)?,
            witnesses,
            transcript: dto
                .transcript
                .iter()
                .map(|c| Check {
                    name: c.name.clone(),
                    ok: c.ok,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rational {
        rational_from_str(s).unwrap()
    }

    fn benchmark_pair() -> Ensemble {
        let ad = Channel::amplitude_damping(&rat("67/100")).unwrap();
        let bf = Channel::bit_flip(&rat("87/100")).unwrap();
        Ensemble::uniform_pair(ad, bf).unwrap()
    }

    fn one_copy_pair() -> Ensemble {
        let ad = Channel::amplitude_damping(&rat("1/3")).unwrap();
        let bf = Channel::bit_flip(&rat("3/4")).unwrap();
        let half = rat("1/2");
        Ensemble::new(1, vec![(half.clone(), ad), (half, bf)]).unwrap()
    }

    fn assert_enclosure(interval: &CertifiedInterval) {
        let lower = interval.lower.bound.to_f64();
        let upper = interval.upper.bound.to_f64();
        assert!(
            lower <= interval.float_value + 1e-9,
            "certified lower {lower} above float value {}",
            interval.float_value
        );
        assert!(
            interval.float_value <= upper + 1e-9,
            "certified upper {upper} below float value {}",
            interval.float_value
        );
        assert!(interval.lower.bound <= interval.upper.bound);
        assert!(interval.lower.transcript.iter().all(|c| c.ok));
        assert!(interval.upper.transcript.iter().all(|c| c.ok));
    }

    #[test]
    fn certifies_benchmark_pair_across_classes() {
        let ensemble = benchmark_pair();
        let config = SolverConfig::default();
        let cases = [
            (Strategy::Par, "8346/10000", "8347/10000"),
            (Strategy::Sep, "8486/10000", "8487/10000"),
            (Strategy::Gen, "8514/10000", "8515/10000"),
        ];
        for (strategy, lo, hi) in cases {
            let interval = certify_interval(&ensemble, strategy, &config).unwrap();
            assert_enclosure(&interval);
            assert!(
                interval.width() < 5e-5,
                "{strategy}: enclosure width {}",
                interval.width()
            );
            let lo = RadicalSum::from_rational(rat(lo));
            let hi = RadicalSum::from_rational(rat(hi));
            assert!(
                interval.lower.bound > lo && interval.upper.bound < hi,
                "{strategy}: certified [{}, {}] escapes its interval",
                interval.lower.bound.to_f64(),
                interval.upper.bound.to_f64()
            );
        }
    }

    #[test]
    fn certifies_a_one_copy_ensemble() {
        let interval =
            certify_interval(&one_copy_pair(), Strategy::Par, &SolverConfig::default()).unwrap();
        assert_enclosure(&interval);
        assert!(interval.width() < 1e-4, "width {}", interval.width());
    }

    #[test]
    fn exactifies_and_certifies_a_sampled_pair() {
        let (a, b) = Channel::random_pair(11, 0).unwrap();
        let ensemble = Ensemble::uniform_pair(a, b).unwrap();
        assert!(!ensemble.is_exact());
        let exact = exactify_ensemble(&ensemble).unwrap();
        assert!(exact.is_exact());
        let interval =
            certify_interval(&ensemble, Strategy::Gen, &SolverConfig::default()).unwrap();
        assert_enclosure(&interval);
        assert!(interval.width() < 1e-4, "width {}", interval.width());
        assert!(interval.lower.describes(&exact).unwrap());
        assert!(!interval.lower.describes(&benchmark_pair()).unwrap());
    }

    #[test]
    fn round_trips_certificates_through_json() {
        let ensemble = benchmark_pair();
        let config = SolverConfig::default();
        let solution = discriminate(&ensemble, Strategy::Par, &config).unwrap();
        for certificate in [
            certify_lower(&ensemble, &solution).unwrap(),
            certify_upper(&ensemble, &solution).unwrap(),
        ] {
            let text = certificate.to_json().unwrap();
            let parsed = Certificate::from_json(&text).unwrap();
            assert_eq!(parsed.strategy, certificate.strategy);
            assert_eq!(parsed.direction, certificate.direction);
            assert_eq!(parsed.bound, certificate.bound);
            assert_eq!(parsed.eta, certificate.eta);
            assert!(parsed.describes(&certificate.ensemble).unwrap());
            let checks = parsed.verify().unwrap();
            assert!(!checks.is_empty() && checks.iter().all(|c| c.ok));
        }
    }

    #[test]
    fn mutated_certificates_fail_verification() {
        let ensemble = one_copy_pair();
        let config = SolverConfig::default();
        let solution = discriminate(&ensemble, Strategy::Par, &config).unwrap();
        let lower = certify_lower(&ensemble, &solution).unwrap();
        let upper = certify_upper(&ensemble, &solution).unwrap();

        let mut inflated = lower.clone();
        inflated.bound = inflated.bound.add_rational(&rat("1/1000000"));
        let checks = inflated.verify().unwrap();
        assert!(
            checks
                .iter()
                .any(|c| !c.ok && c.name == "bound equals the ensemble payoff of the testers")
        );

        let mut tampered = lower.clone();
        let mut m = tampered.witnesses[0].matrix.mat().clone();
        let bumped = m.get(0, 0).add(&ExactComplex::one());
        m.set(0, 0, bumped);
        tampered.witnesses[0].matrix =
            LabeledMatrix::new(tampered.witnesses[0].matrix.space().clone(), m).unwrap();
        let checks = tampered.verify().unwrap();
        assert!(
            checks.iter().any(|c| !c.ok),
            "tampered tester still verifies"
        );

        let mut loosened = upper.clone();
        loosened.bound = loosened
            .bound
            .sub(&RadicalSum::from_rational(rat("1/1000000")));
        let checks = loosened.verify().unwrap();
        assert!(
            checks
                .iter()
                .any(|c| !c.ok && c.name == "witness trace equals the dual trace times the bound")
        );
    }

    #[test]
    fn rounds_values_up_to_the_micro_grid() {
        assert_eq!(ceil_micro(0.25).unwrap(), rat("1/4"));
        assert_eq!(ceil_micro(0.250000099).unwrap(), rat("250001/1000000"));
        assert!(ceil_micro(f64::NAN).is_err());
    }
}
