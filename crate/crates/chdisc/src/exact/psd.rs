//! Exact positive-semidefiniteness testing and η-mixing searches.
//!
//! [`is_psd_exact`] decides `M ⪰ 0` for a Hermitian matrix over ℚ(√d) with
//! no numerical error, by LDL-style elimination in natural order: a negative
//! pivot or a zero pivot with a nonzero residual row each certify a negative
//! eigenvalue direction, and elimination otherwise preserves the claim.
//!
//! [`binary_search_eta`] finds (a dyadic lower estimate of) the largest
//! mixing weight η ∈ [0, 1] such that every candidate `η·A + (1−η)·B` is
//! exactly PSD, for affine families whose η = 0 endpoint is feasible. The
//! feasible set is an interval because the PSD cone is convex, so binary
//! search is sound. A floating-point eigenvalue pre-screen may skip the
//! exact test only on the *infeasible* side; every accepted η has passed the
//! exact test, so the result is always a valid certificate weight.

use super::complex::ExactComplex;
use super::quad::{ExactError, Rational};
use crate::tensor::Mat;
use nalgebra::{Complex, DMatrix};
use num::{BigInt, One, Zero};

/// Dense matrix over ℚ(√d) + iℚ(√d′).
pub type ExactMat = Mat<ExactComplex>;

/// Decides exactly whether the Hermitian matrix `m` is positive
/// semidefinite. Returns an error if `m` is not square or not exactly
/// Hermitian entry-by-entry.
pub fn is_psd_exact(m: &ExactMat) -> Result<bool, ExactError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(ExactError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_hermitian() {
        return Err(ExactError::NotHermitian);
    }
    let mut a: Vec<ExactComplex> = m.entries().to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    for k in 0..n {
        let pivot = a[idx(k, k)].re.clone();
        match pivot.signum() {
            s if s < 0 => return Ok(false),
            0 => {
                // A PSD matrix with a zero diagonal entry must have a zero
                // row there; any survivor exhibits a negative 2×2 minor.
                for j in (k + 1)..n {
                    if !a[idx(k, j)].is_zero() {
                        return Ok(false);
                    }
                }
            }
            _ => {
                // Schur-complement update of the trailing block:
                // A[i][j] -= A[i][k]·A[k][j]/pivot, which keeps the block
                // exactly Hermitian because the pivot is real.
                let scaled: Vec<ExactComplex> = ((k + 1)..n)
                    .map(|j| a[idx(k, j)].div_real(&pivot))
                    .collect();
                for i in (k + 1)..n {
                    let lik = a[idx(i, k)].clone();
                    if lik.is_zero() {
                        continue;
                    }
                    for (j, s) in ((k + 1)..n).zip(scaled.iter()) {
                        if s.is_zero() {
                            continue;
                        }
                        let v = a[idx(i, j)].sub(&lik.mul(s));
                        a[idx(i, j)] = v;
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Nearest-double Hermitian copy of `m`, for diagnostics and pre-screens.
pub(crate) fn to_float(m: &ExactMat) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j).to_c64())
}

/// Floating-point minimum eigenvalue, used only to skip exact work on
/// clearly infeasible probes.
pub(crate) fn float_min_eig(m: &ExactMat) -> f64 {
    let f = to_float(m);
    let sym = f.clone().symmetric_eigen();
    sym.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// A probe is pre-screened away (declared infeasible without exact work)
/// only when the float minimum eigenvalue is below this. An exactly PSD
/// matrix of the sizes used here cannot drift this far, and even if the
/// screen misfired the search would merely return a smaller, still exactly
/// verified η.
const SCREEN_CUTOFF: f64 = -1e-7;

/// Total probe budget for one search; each probe tests every candidate.
const MAX_PROBES: usize = 60;

/// Descending ladder of exponents k for the first feasible η = 1 − 2⁻ᵏ.
const LADDER: [u32; 15] = [48, 40, 32, 28, 26, 24, 22, 20, 18, 16, 12, 8, 4, 2, 1];

fn mix(endpoint: &ExactMat, target: &ExactMat, eta: &Rational) -> ExactMat {
    if eta.is_one() {
        return endpoint.clone();
    }
    if eta.is_zero() {
        return target.clone();
    }
    let omega = Rational::one() - eta;
    endpoint
        .map(|z| z.scale(eta))
        .add(&target.map(|z| z.scale(&omega)))
}

fn probe(pairs: &[(ExactMat, ExactMat)], eta: &Rational) -> Result<bool, ExactError> {
    for (endpoint, target) in pairs {
        let m = mix(endpoint, target, eta);
        if float_min_eig(&m) < SCREEN_CUTOFF {
            return Ok(false);
        }
        if !is_psd_exact(&m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn eta_from_exponent(k: u32) -> Rational {
    Rational::one() - Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Finds a large exactly-feasible common mixing weight for the affine
/// candidate families `η·endpoint + (1−η)·target`.
///
/// Probes η = 1 first, then walks the ladder `1 − 2⁻ᵏ` downwards until a
/// feasible weight appears, then bisects between it and the last infeasible
/// weight. Errors with [`ExactError::NoFeasibleEta`] when even η = 0 (the
/// pure targets) fails, which signals an unusable witness rather than a
/// tolerance problem.
pub fn binary_search_eta(pairs: &[(ExactMat, ExactMat)]) -> Result<Rational, ExactError> {
    let mut probes = 0usize;
    let mut spend = |eta: &Rational| -> Result<Option<bool>, ExactError> {
        if probes >= MAX_PROBES {
            return Ok(None);
        }
        probes += 1;
        probe(pairs, eta).map(Some)
    };

    if let Some(true) = spend(&Rational::one())? {
        return Ok(Rational::one());
    }
    let mut hi = Rational::one(); // infeasible (or budget-exhausted) side
    let mut lo: Option<Rational> = None; // best exactly verified feasible η
    for k in LADDER {
        let eta = eta_from_exponent(k);
        match spend(&eta)? {
            Some(true) => {
                lo = Some(eta);
                break;
            }
            Some(false) => hi = eta,
            None => break,
        }
    }
    if lo.is_none() {
        match spend(&Rational::zero())? {
            Some(true) => {
                lo = Some(Rational::zero());
                hi = eta_from_exponent(*LADDER.last().unwrap());
            }
            _ => return Err(ExactError::NoFeasibleEta),
        }
    }
    let mut lo = lo.unwrap();
    // Dyadic bisection sharpens the estimate while the bracket is still
    // coarse; once the remaining gap cannot move a bound meaningfully the
    // budget is better left unspent.
    let floor = Rational::new(BigInt::one(), BigInt::one() << 40u32);
    for _ in 0..12 {
        let gap = &hi - &lo;
        if gap <= floor {
            break;
        }
        let mid = (&lo + &hi) / Rational::from_integer(BigInt::from(2));
        match spend(&mid)? {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => break,
        }
    }
    Ok(lo)
}
