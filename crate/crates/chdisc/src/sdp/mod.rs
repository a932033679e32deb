//! Discrimination values as semidefinite programs.
//!
//! For an ensemble `{(p_i, C_i)}` and a strategy class, the maximal success
//! probability is the value of
//!
//! ```text
//!   maximize    Σ_i p_i ⟨T_i, C_i^{⊗k}⟩
//!   subject to  Σ_i T_i = W,   W in the strategy's process subspace,
//!               Tr W = Π d_O,  T_i ⪰ 0,
//! ```
//!
//! which this module phrases in the block standard form of [`solver`]: the
//! subspace membership of `W` becomes one linear row per orthonormal
//! direction of the subspace's orthogonal complement, plus a trace row. For
//! the causally separable class, `W` is additionally split as
//! `W = W^{12} + W^{21}` with each summand constrained to its own
//! fixed-order subspace (as a cone member, not a normalized process).
//!
//! Both sides of the optimum are extracted from one solve. The dual slack
//! of any tester block recovers the dual witness `Ω = Z_i + p_i C_i^{⊗k}`,
//! which satisfies `Ω ⪰ p_i C_i^{⊗k}` for every `i` and, after division by
//! the optimal value, lies in the strategy's dual affine space. For the
//! separable class the three witnesses `H ⪰ p_i C_i^{⊗k}`,
//! `V^{12} ⪰ H`, `V^{21} ⪰ H` come out of the tester and order-split
//! slacks the same way. These float witnesses are the raw material the
//! certification layer turns into exact bounds.

pub mod solver;

pub use solver::{BlockCoeff, SdpProblem, SdpSolution, SolveStatus, SolverConfig, SolverError};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{ChannelError, Ensemble};
use crate::strategies::{ProjectorMap, Strategy, StrategyError, process_projector, process_trace};
use crate::tensor::{Label, LabeledMatrix, Mat, Space, TensorError};

type C64 = Complex<f64>;
type CMat = DMatrix<C64>;

use solver::inner;

/// Errors from problem construction or solving.
#[derive(Debug, Error)]
pub enum SdpError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("orthogonal complement has {found} directions, expected {expected}")]
    ComplementMismatch { found: usize, expected: usize },
    #[error(
        "operator is outside the span of the general process subspace (residual {residual:.3e})"
    )]
    OutsideGeneralSpan { residual: f64 },
    #[error("unsupported problem shape: {0}")]
    Unsupported(String),
}

fn to_dmatrix(m: &Mat<Complex64>) -> CMat {
    CMat::from_fn(m.rows(), m.cols(), |i, j| *m.get(i, j))
}

fn from_dmatrix(space: &Space, m: &CMat) -> Result<LabeledMatrix<Complex64>, TensorError> {
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.set(i, j, m[(i, j)]);
        }
    }
    LabeledMatrix::new(space.clone(), out)
}

/// Orthonormal basis of Hermitian `n×n` matrices under `⟨A,B⟩ = Re Tr(AB)`:
/// the diagonal units followed by the symmetric and antisymmetric pairs.
fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = CMat::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        out.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = CMat::zeros(n, n);
            m[(i, j)] = C64::new(s, 0.0);
            m[(j, i)] = C64::new(s, 0.0);
            out.push(m);
            let mut m = CMat::zeros(n, n);
            m[(i, j)] = C64::new(0.0, s);
            m[(j, i)] = C64::new(0.0, -s);
            out.push(m);
        }
    }
    out
}

type RowCacheKey = (Vec<(i64, Vec<Label>)>, Vec<(Label, usize)>);

fn row_cache() -> &'static Mutex<HashMap<RowCacheKey, Arc<Vec<CMat>>>> {
    static CACHE: OnceLock<Mutex<HashMap<RowCacheKey, Arc<Vec<CMat>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Orthonormal Hermitian rows spanning the orthogonal complement of the
/// projector's image, computed by Gram–Schmidt over `(1 − P)` applied to
/// the Hermitian basis. The row count is checked against the symbolic
/// subspace dimension; results are cached per projector and space.
fn complement_rows(map: &ProjectorMap, space: &Space) -> Result<Arc<Vec<CMat>>, SdpError> {
    let key: RowCacheKey = (map.terms().to_vec(), space.parts().to_vec());
    if let Some(hit) = row_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let d = space.dim();
    let expected = (d * d) as i64 - map.subspace_dimension(space)?;
    let mut rows: Vec<CMat> = Vec::new();
    for e in hermitian_basis(d) {
        let lm = from_dmatrix(space, &e)?;
        let projected = map.apply(&lm)?;
        let mut f = e - to_dmatrix(projected.mat());
        // Two Gram–Schmidt passes keep the rows orthonormal to roundoff.
        for _ in 0..2 {
            for q in &rows {
                let c = inner(q, &f);
                f -= q * C64::new(c, 0.0);
            }
        }
        let norm = inner(&f, &f).sqrt();
        if norm > 1e-7 {
            rows.push(f / C64::new(norm, 0.0));
        }
    }
    if rows.len() as i64 != expected {
        return Err(SdpError::ComplementMismatch {
            found: rows.len(),
            expected: expected.max(0) as usize,
        });
    }
    let arc = Arc::new(rows);
    row_cache().lock().unwrap().insert(key, arc.clone());
    Ok(arc)
}

/// Result of one discrimination solve: the optimal value, solver
/// diagnostics, and the float witnesses for both bound directions.
#[derive(Clone, Debug)]
pub struct Discrimination {
    pub strategy: Strategy,
    /// Success probability from the primal side (a float lower estimate).
    pub value: f64,
    /// Success probability from the dual side (a float upper estimate).
    pub dual_value: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Optimal testers `T_i`, one per ensemble member.
    pub testers: Vec<LabeledMatrix<Complex64>>,
    pub witness: Witness,
}

/// Dual (and, for the separable class, order-split primal) witnesses.
// One value exists per solve, so the variant size gap costs nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum Witness {
    /// `Ω ⪰ p_i C_i^{⊗k}` with `Ω / value` in the dual affine space.
    Projective { omega: LabeledMatrix<Complex64> },
    /// `V^{12} ⪰ H`, `V^{21} ⪰ H`, `H ⪰ p_i C_i^{⊗k}`, with `V^{o}` in the
    /// dual affine span of the fixed order `o`; `w12`/`w21` are the primal
    /// order split `W = W^{12} + W^{21}` used for lower-bound repair.
    Separable {
        h: LabeledMatrix<Complex64>,
        v12: LabeledMatrix<Complex64>,
        v21: LabeledMatrix<Complex64>,
        w12: LabeledMatrix<Complex64>,
        w21: LabeledMatrix<Complex64>,
    },
}

/// Computes the optimal success probability of discriminating the ensemble
/// under the given strategy class, together with primal and dual witnesses.
pub fn discriminate(
    ensemble: &Ensemble,
    strategy: Strategy,
    config: &SolverConfig,
) -> Result<Discrimination, SdpError> {
    match strategy {
        Strategy::Sep => discriminate_separable(ensemble, config),
        _ => discriminate_projective(ensemble, strategy, config),
    }
}

fn weighted_chois(ensemble: &Ensemble) -> Result<Vec<CMat>, SdpError> {
    (0..ensemble.len())
        .map(|i| Ok(to_dmatrix(ensemble.weighted_choi(i)?.mat())))
        .collect()
}

fn discriminate_projective(
    ensemble: &Ensemble,
    strategy: Strategy,
    config: &SolverConfig,
) -> Result<Discrimination, SdpError> {
    let space = ensemble.tester_space()?;
    let d = space.dim();
    let n = ensemble.len();
    let proj = process_projector(strategy, ensemble.copies())?;
    let comp = complement_rows(&proj, &space)?;
    let chois = weighted_chois(ensemble)?;

    let mut rows: Vec<Vec<BlockCoeff>> = Vec::with_capacity(comp.len() + 1);
    let mut b = Vec::with_capacity(comp.len() + 1);
    for r in comp.iter() {
        rows.push(
            (0..n)
                .map(|k| BlockCoeff {
                    block: k,
                    matrix: r.clone(),
                })
                .collect(),
        );
        b.push(0.0);
    }
    rows.push(
        (0..n)
            .map(|k| BlockCoeff {
                block: k,
                matrix: CMat::identity(d, d),
            })
            .collect(),
    );
    b.push(process_trace(&space) as f64);

    let problem = SdpProblem {
        block_dims: vec![d; n],
        costs: chois.iter().map(|c| -c.clone()).collect(),
        rows,
        b: DVector::from_vec(b),
    };
    let sol = solver::solve(&problem, config)?;

    let omega = herm(&(&sol.z[0] + &chois[0]));
    let testers = sol
        .x
        .iter()
        .map(|x| from_dmatrix(&space, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Discrimination {
        strategy,
        value: -sol.primal_objective,
        dual_value: -sol.dual_objective,
        relative_gap: sol.relative_gap,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        iterations: sol.iterations,
        status: sol.status,
        testers,
        witness: Witness::Projective {
            omega: from_dmatrix(&space, &omega)?,
        },
    })
}

fn herm(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn discriminate_separable(
    ensemble: &Ensemble,
    config: &SolverConfig,
) -> Result<Discrimination, SdpError> {
    if ensemble.copies() != 2 {
        return Err(SdpError::Unsupported(
            "the causally separable class needs two copies (one copy has a single tester class)"
                .into(),
        ));
    }
    let space = ensemble.tester_space()?;
    let d = space.dim();
    let n = ensemble.len();
    let comp12 = complement_rows(&process_projector(Strategy::Seq12, 2)?, &space)?;
    let comp21 = complement_rows(&process_projector(Strategy::Seq21, 2)?, &space)?;
    let chois = weighted_chois(ensemble)?;
    let basis = hermitian_basis(d);

    // Blocks: T_0..T_{n-1}, then W^{12} at n and W^{21} at n+1.
    let b12 = n;
    let b21 = n + 1;
    let mut rows: Vec<Vec<BlockCoeff>> = Vec::new();
    let mut b = Vec::new();
    // Σ_i T_i − W^{12} − W^{21} = 0, one row per Hermitian direction.
    for e in &basis {
        let mut row: Vec<BlockCoeff> = (0..n)
            .map(|k| BlockCoeff {
                block: k,
                matrix: e.clone(),
            })
            .collect();
        row.push(BlockCoeff {
            block: b12,
            matrix: -e.clone(),
        });
        row.push(BlockCoeff {
            block: b21,
            matrix: -e.clone(),
        });
        rows.push(row);
        b.push(0.0);
    }
    for r in comp12.iter() {
        rows.push(vec![BlockCoeff {
            block: b12,
            matrix: r.clone(),
        }]);
        b.push(0.0);
    }
    for r in comp21.iter() {
        rows.push(vec![BlockCoeff {
            block: b21,
            matrix: r.clone(),
        }]);
        b.push(0.0);
    }
    rows.push(vec![
        BlockCoeff {
            block: b12,
            matrix: CMat::identity(d, d),
        },
        BlockCoeff {
            block: b21,
            matrix: CMat::identity(d, d),
        },
    ]);
    b.push(process_trace(&space) as f64);

    let mut costs: Vec<CMat> = chois.iter().map(|c| -c.clone()).collect();
    costs.push(CMat::zeros(d, d));
    costs.push(CMat::zeros(d, d));

    let problem = SdpProblem {
        block_dims: vec![d; n + 2],
        costs,
        rows,
        b: DVector::from_vec(b),
    };
    let sol = solver::solve(&problem, config)?;

    let h = herm(&(&sol.z[0] + &chois[0]));
    let v12 = herm(&(&sol.z[b12] + &h));
    let v21 = herm(&(&sol.z[b21] + &h));
    let testers = sol.x[..n]
        .iter()
        .map(|x| from_dmatrix(&space, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Discrimination {
        strategy: Strategy::Sep,
        value: -sol.primal_objective,
        dual_value: -sol.dual_objective,
        relative_gap: sol.relative_gap,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        iterations: sol.iterations,
        status: sol.status,
        testers,
        witness: Witness::Separable {
            h: from_dmatrix(&space, &h)?,
            v12: from_dmatrix(&space, &v12)?,
            v21: from_dmatrix(&space, &v21)?,
            w12: from_dmatrix(&space, &sol.x[b12])?,
            w21: from_dmatrix(&space, &sol.x[b21])?,
        },
    })
}

/// Verdict of the causal-separability membership program.
#[derive(Clone, Debug)]
pub struct SepMembership {
    /// Minimal white-noise fraction `ν ∈ [0, 1]` such that
    /// `(1−ν)·W + ν·(1/4)·1` splits into fixed-order cone members. Zero
    /// (up to solver accuracy) means `W` is causally separable.
    pub robustness: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Decides how far a two-copy process matrix is from the causally separable
/// cone, as a white-noise robustness. The input must lie in the span of the
/// general process subspace (every valid process matrix does).
pub fn sep_membership(
    w: &LabeledMatrix<Complex64>,
    config: &SolverConfig,
) -> Result<SepMembership, SdpError> {
    let space = w.space().clone();
    if space.labels() != vec![Label::I1, Label::O1, Label::I2, Label::O2] {
        return Err(SdpError::Unsupported(format!(
            "membership needs a two-copy process space, got {}",
            space.describe()
        )));
    }
    let d = space.dim();
    let wm = to_dmatrix(w.mat());
    let span = process_projector(Strategy::Gen, 2)?;
    let projected = to_dmatrix(span.apply(w)?.mat());
    let residual = inner(&(&wm - &projected), &(&wm - &projected)).sqrt();
    if residual > 1e-8 {
        return Err(SdpError::OutsideGeneralSpan { residual });
    }

    let comp12 = complement_rows(&process_projector(Strategy::Seq12, 2)?, &space)?;
    let comp21 = complement_rows(&process_projector(Strategy::Seq21, 2)?, &space)?;
    let basis = hermitian_basis(d);
    let tr_w = wm.diagonal().sum().re;
    let noise = CMat::identity(d, d) * C64::new(tr_w / d as f64, 0.0);

    // Blocks: W^{12}, W^{21}, and the 1×1 noise weight ν.
    let mut rows: Vec<Vec<BlockCoeff>> = Vec::new();
    let mut b = Vec::new();
    for e in &basis {
        let drift = inner(e, &(&wm - &noise));
        rows.push(vec![
            BlockCoeff {
                block: 0,
                matrix: e.clone(),
            },
            BlockCoeff {
                block: 1,
                matrix: e.clone(),
            },
            BlockCoeff {
                block: 2,
                matrix: CMat::identity(1, 1) * C64::new(drift, 0.0),
            },
        ]);
        b.push(inner(e, &wm));
    }
    for r in comp12.iter() {
        rows.push(vec![BlockCoeff {
            block: 0,
            matrix: r.clone(),
        }]);
        b.push(0.0);
    }
    for r in comp21.iter() {
        rows.push(vec![BlockCoeff {
            block: 1,
            matrix: r.clone(),
        }]);
        b.push(0.0);
    }

    let problem = SdpProblem {
        block_dims: vec![d, d, 1],
        costs: vec![CMat::zeros(d, d), CMat::zeros(d, d), CMat::identity(1, 1)],
        rows,
        b: DVector::from_vec(b),
    };
    let sol = solver::solve(&problem, config)?;
    Ok(SepMembership {
        robustness: sol.primal_objective,
        relative_gap: sol.relative_gap,
        iterations: sol.iterations,
        status: sol.status,
    })
}

/// Closed-form two-state discrimination value
/// `(1 + ‖p_1 ρ_1 − p_2 ρ_2‖₁) / 2` for a one-copy ensemble of two
/// preparations (trivial input space). Serves as an analytic oracle for the
/// solver.
pub fn state_pair_helstrom(ensemble: &Ensemble) -> Result<f64, SdpError> {
    if ensemble.copies() != 1 || ensemble.len() != 2 {
        return Err(SdpError::Unsupported(
            "the closed form covers exactly two one-copy hypotheses".into(),
        ));
    }
    for (_, c) in ensemble.items() {
        if c.d_in() != 1 {
            return Err(SdpError::Unsupported(
                "the closed form needs preparations (trivial input space)".into(),
            ));
        }
    }
    let m =
        to_dmatrix(ensemble.weighted_choi(0)?.mat()) - to_dmatrix(ensemble.weighted_choi(1)?.mat());
    let trace_norm: f64 = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum();
    Ok(0.5 * (1.0 + trace_norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Channel, ChannelSpec};
    use crate::exact::rational_from_str;
    use crate::strategies::{dual_projector, dual_trace, white_noise};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rat(s: &str) -> crate::exact::Rational {
        rational_from_str(s).unwrap()
    }

    fn min_eig(m: &CMat) -> f64 {
        m.clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    fn preparation(rho: CMat) -> Channel {
        let space = Space::of(&[(Label::I1, 1), (Label::O1, 2)]).unwrap();
        let lm = from_dmatrix(&space, &rho).unwrap();
        Channel::from_choi(ChannelSpec::Custom("prep".into()), lm).unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng) -> CMat {
        let g = CMat::from_fn(2, 2, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let a = &g * g.adjoint();
        let tr = a.diagonal().sum().re;
        a / C64::new(tr, 0.0)
    }

    /// The benchmark ensemble: amplitude damping (γ = 67/100) vs bit flip
    /// (η = 87/100), equal priors, two copies.
    fn benchmark_ensemble() -> Ensemble {
        let ad = Channel::amplitude_damping(&rat("67/100")).unwrap();
        let bf = Channel::bit_flip(&rat("87/100")).unwrap();
        Ensemble::uniform_pair(ad, bf).unwrap()
    }

    #[test]
    fn complement_row_counts_match_symbolic_dimensions() {
        let space = Space::two_copy_qubit();
        for (strategy, expected) in [
            (Strategy::Par, 240usize),
            (Strategy::Seq12, 204),
            (Strategy::Seq21, 204),
            (Strategy::Gen, 168),
        ] {
            let rows = complement_rows(&process_projector(strategy, 2).unwrap(), &space).unwrap();
            assert_eq!(rows.len(), expected, "{strategy}");
            // Orthonormality spot check.
            for (i, a) in rows.iter().enumerate() {
                for (j, b) in rows.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((inner(a, b) - want).abs() < 1e-10);
                }
                // Each row is orthogonal to the subspace (hits the kernel).
                let lm = from_dmatrix(&space, a).unwrap();
                let back = process_projector(strategy, 2).unwrap().apply(&lm).unwrap();
                assert!(inner(&to_dmatrix(back.mat()), &to_dmatrix(back.mat())) < 1e-18);
            }
        }
    }

    /// The general subspace is the linear span of the two fixed-order
    /// subspaces: P12 ∘ P21 = P_par and P12 + P21 − P_par = P_gen as
    /// symbolic maps. Causal nonseparability is therefore a property of the
    /// cone, not of the span, which is what the membership program checks.
    #[test]
    fn general_span_is_sum_of_orders() {
        let p12 = process_projector(Strategy::Seq12, 2).unwrap();
        let p21 = process_projector(Strategy::Seq21, 2).unwrap();
        let par = process_projector(Strategy::Par, 2).unwrap();
        let general = process_projector(Strategy::Gen, 2).unwrap();
        assert_eq!(p12.compose(&p21).terms(), par.terms());
        assert_eq!(p21.compose(&p12).terms(), par.terms());
        // Assemble P12 + P21 − P_par term-by-term and canonicalize.
        let mut combined: Vec<(i64, Vec<Label>)> = Vec::new();
        combined.extend(p12.terms().iter().cloned());
        combined.extend(p21.terms().iter().cloned());
        combined.extend(par.terms().iter().map(|(c, s)| (-c, s.clone())));
        let refs: Vec<(i64, &[Label])> = combined.iter().map(|(c, s)| (*c, s.as_slice())).collect();
        assert_eq!(ProjectorMap::new(&refs).terms(), general.terms());
    }

    #[test]
    fn helstrom_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let config = SolverConfig::default();
        for trial in 0..12 {
            let rho = random_density(&mut rng);
            let tau = random_density(&mut rng);
            let e = Ensemble::uniform_pair(preparation(rho), preparation(tau)).unwrap();
            let e = Ensemble::new(1, e.items().to_vec()).unwrap();
            let analytic = state_pair_helstrom(&e).unwrap();
            let sdp = discriminate(&e, Strategy::Par, &config).unwrap();
            assert_eq!(sdp.status, SolveStatus::Optimal, "trial {trial}");
            assert!(
                (sdp.value - analytic).abs() < 1e-8,
                "trial {trial}: sdp {} vs analytic {analytic}",
                sdp.value
            );
            assert!(sdp.relative_gap < 1e-9);
        }
        // Orthogonal pure states are perfectly distinguishable.
        let up = CMat::from_fn(2, 2, |i, j| {
            C64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        let down = CMat::from_fn(2, 2, |i, j| {
            C64::new(if i == 1 && j == 1 { 1.0 } else { 0.0 }, 0.0)
        });
        let e = Ensemble::new(
            1,
            vec![
                (rat("1/2"), preparation(up.clone())),
                (rat("1/2"), preparation(down)),
            ],
        )
        .unwrap();
        let sdp = discriminate(&e, Strategy::Par, &SolverConfig::default()).unwrap();
        assert!((sdp.value - 1.0).abs() < 1e-9);
        // Identical states leave only the prior guess.
        let e = Ensemble::new(
            1,
            vec![
                (rat("3/4"), preparation(up.clone())),
                (rat("1/4"), preparation(up)),
            ],
        )
        .unwrap();
        let sdp = discriminate(&e, Strategy::Par, &SolverConfig::default()).unwrap();
        assert!((sdp.value - 0.75).abs() < 1e-9);
    }

    /// Float sanity of the extracted dual witness: Ω dominates every
    /// weighted Choi, and Ω / value sits in the dual affine space with the
    /// right trace.
    fn check_projective_witness(e: &Ensemble, d: &Discrimination) {
        let Witness::Projective { omega } = &d.witness else {
            panic!("expected a projective witness");
        };
        let om = to_dmatrix(omega.mat());
        for i in 0..e.len() {
            let c = to_dmatrix(e.weighted_choi(i).unwrap().mat());
            assert!(
                min_eig(&(&om - &c)) > -1e-8,
                "Ω fails to dominate hypothesis {i}"
            );
        }
        let scaled = omega.scale(&Complex64::new(1.0 / d.value, 0.0));
        let dp = dual_projector(d.strategy, e.copies()).unwrap();
        let fixed = dp.apply(&scaled).unwrap();
        let drift = to_dmatrix(fixed.sub(&scaled).unwrap().mat());
        assert!(inner(&drift, &drift).sqrt() < 1e-7, "Ω/p leaves dual space");
        let want_trace = dual_trace(scaled.space()) as f64;
        assert!((scaled.trace().re - want_trace).abs() < 1e-7);
    }

    /// The benchmark ensemble reproduces the reference four-strategy values
    /// and the strict hierarchy between them.
    #[test]
    fn benchmark_ensemble_brackets() {
        let e = benchmark_ensemble();
        let config = SolverConfig::default();
        let par = discriminate(&e, Strategy::Par, &config).unwrap();
        let seq = discriminate(&e, Strategy::Seq12, &config).unwrap();
        let sep = discriminate(&e, Strategy::Sep, &config).unwrap();
        let general = discriminate(&e, Strategy::Gen, &config).unwrap();
        for d in [&par, &seq, &sep, &general] {
            assert_eq!(d.status, SolveStatus::Optimal, "{}", d.strategy);
            assert!(
                d.relative_gap < 1e-9,
                "{} gap {}",
                d.strategy,
                d.relative_gap
            );
        }
        assert!(
            par.value > 0.8346 && par.value < 0.8347,
            "par = {}",
            par.value
        );
        assert!(
            seq.value > 0.8446 && seq.value < 0.8447,
            "seq = {}",
            seq.value
        );
        assert!(
            sep.value > 0.8486 && sep.value < 0.8487,
            "sep = {}",
            sep.value
        );
        assert!(
            general.value > 0.8514 && general.value < 0.8515,
            "gen = {}",
            general.value
        );
        check_projective_witness(&e, &par);
        check_projective_witness(&e, &seq);
        check_projective_witness(&e, &general);
        // Swapping the order labels cannot matter for two copies of the
        // same pair of hypotheses.
        let seq21 = discriminate(&e, Strategy::Seq21, &config).unwrap();
        assert!((seq21.value - seq.value).abs() < 1e-9);

        // Separable witnesses: V^o ⪰ H ⪰ p_i C_i, V^o in the fixed-order
        // dual span, and the order split reassembles the optimal W.
        let Witness::Separable {
            h,
            v12,
            v21,
            w12,
            w21,
        } = &sep.witness
        else {
            panic!("expected a separable witness");
        };
        let hm = to_dmatrix(h.mat());
        for i in 0..e.len() {
            let c = to_dmatrix(e.weighted_choi(i).unwrap().mat());
            assert!(min_eig(&(&hm - &c)) > -1e-8);
        }
        for (v, strat) in [(v12, Strategy::Seq12), (v21, Strategy::Seq21)] {
            let vm = to_dmatrix(v.mat());
            assert!(min_eig(&(&vm - &hm)) > -1e-8);
            let scaled = v.scale(&Complex64::new(1.0 / sep.value, 0.0));
            let dp = dual_projector(strat, 2).unwrap();
            let drift = to_dmatrix(dp.apply(&scaled).unwrap().sub(&scaled).unwrap().mat());
            assert!(inner(&drift, &drift).sqrt() < 1e-7);
            assert!((v.trace().re / sep.value - 4.0).abs() < 1e-6);
        }
        let wsum = w12.add(w21).unwrap();
        let tsum = sep.testers[0].add(&sep.testers[1]).unwrap();
        let diff = to_dmatrix(wsum.sub(&tsum).unwrap().mat());
        assert!(inner(&diff, &diff).sqrt() < 1e-7);
        for (w, strat) in [(w12, Strategy::Seq12), (w21, Strategy::Seq21)] {
            assert!(min_eig(&to_dmatrix(w.mat())) > -1e-8);
            let p = process_projector(strat, 2).unwrap();
            let drift = to_dmatrix(p.apply(w).unwrap().sub(w).unwrap().mat());
            assert!(inner(&drift, &drift).sqrt() < 1e-7);
        }
    }

    /// A random two-copy ensemble obeys the weak ordering of the classes.
    #[test]
    fn random_pair_respects_hierarchy() {
        let (a, b) = Channel::random_pair(5, 0).unwrap();
        let e = Ensemble::uniform_pair(a, b).unwrap();
        let config = SolverConfig::default();
        let mut last = 0.0;
        for strategy in Strategy::HIERARCHY {
            let d = discriminate(&e, strategy, &config).unwrap();
            assert_eq!(d.status, SolveStatus::Optimal, "{strategy}");
            assert!(
                d.value >= last - 1e-9,
                "{strategy}: {} < previous {last}",
                d.value
            );
            last = d.value;
        }
    }

    #[test]
    fn membership_accepts_white_noise_and_fixed_orders() {
        let space = Space::two_copy_qubit();
        let config = SolverConfig::default();
        let noise: LabeledMatrix<Complex64> = white_noise(&space);
        let m = sep_membership(&noise, &config).unwrap();
        assert!(
            m.robustness.abs() < 1e-7,
            "noise robustness {}",
            m.robustness
        );

        // A process strictly inside the fixed-order-12 cone.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = CMat::from_fn(16, 16, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = from_dmatrix(&space, &herm(&g)).unwrap();
        let p12 = process_projector(Strategy::Seq12, 2).unwrap();
        let inside = p12.apply(&h).unwrap();
        // Mix toward white noise until comfortably positive, then fix the trace.
        let shifted = noise
            .add(&inside.scale(&Complex64::new(0.02, 0.0)))
            .unwrap();
        let corrected = shifted.scale(&Complex64::new(4.0 / shifted.trace().re, 0.0));
        assert!(min_eig(&to_dmatrix(corrected.mat())) > 0.0);
        let m = sep_membership(&corrected, &config).unwrap();
        assert!(
            m.robustness.abs() < 1e-7,
            "order-12 robustness {}",
            m.robustness
        );
    }

    /// The switch-like process with indefinite causal order is outside the
    /// separable cone by a macroscopic noise margin.
    #[test]
    fn membership_rejects_indefinite_order() {
        let space = Space::two_copy_qubit();
        let sz = CMat::from_fn(2, 2, |i, j| {
            C64::new(
                if i == j {
                    if i == 0 { 1.0 } else { -1.0 }
                } else {
                    0.0
                },
                0.0,
            )
        });
        let sx = CMat::from_fn(2, 2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let id = CMat::identity(2, 2);
        let kron4 = |a: &CMat, b: &CMat, c: &CMat, d: &CMat| -> CMat {
            a.kronecker(b).kronecker(c).kronecker(d)
        };
        let t1 = kron4(&id, &sz, &sz, &id);
        let t2 = kron4(&sz, &id, &sx, &sz);
        let w =
            (CMat::identity(16, 16) + (t1 + t2) / C64::new(2f64.sqrt(), 0.0)) * C64::new(0.25, 0.0);
        let lm = from_dmatrix(&space, &w).unwrap();
        let m = sep_membership(&lm, &SolverConfig::default()).unwrap();
        assert!(
            m.robustness > 1e-3,
            "switch-like process should be robustly nonseparable, got {}",
            m.robustness
        );
    }
}
