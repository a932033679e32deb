//! Dense primal-dual interior-point solver for semidefinite programs over
//! complex Hermitian matrix blocks.
//!
//! Problems are given in the standard form
//!
//! ```text
//!   minimize    Σ_k ⟨C_k, X_k⟩
//!   subject to  Σ_k ⟨A_{jk}, X_k⟩ = b_j   (j = 1..m)
//!               X_k ⪰ 0,
//! ```
//!
//! with Hermitian data and the real inner product `⟨A, B⟩ = Re Tr(AB)`. The
//! method is an infeasible-start Mehrotra predictor-corrector with
//! Nesterov–Todd (NT) scaling. Per iteration and block, the NT scaling
//! point `W = G G†` is computed from Cholesky factors of `X` and `Z` via an
//! SVD, which makes the scaled iterate diagonal and the Schur complement
//! `M_{jl} = Σ_k ⟨A_{jk}, W_k A_{lk} W_k⟩` symmetric positive definite; both
//! Newton solves of an iteration reuse one Cholesky factorization of `M`.
//!
//! The solver is deterministic: no randomization, no pivoting choices that
//! depend on memory layout, and a fixed iteration cap. The discrimination
//! problems it is used for are strictly feasible on both sides, so the
//! central path exists and `Optimal` is the expected status.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

type C64 = Complex<f64>;
type CMat = DMatrix<C64>;

/// Errors surfaced by the solver (data validation; numerical trouble is
/// reported through [`SolveStatus`] instead).
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("constraint {0} references block {1}, but there are only {2} blocks")]
    BadBlockIndex(usize, usize, usize),
    #[error("matrix for block {0} has size {1}×{2}, expected {3}×{3}")]
    BadBlockSize(usize, usize, usize, usize),
    #[error("b has length {0}, expected one entry per constraint ({1})")]
    BadRhsLength(usize, usize),
    #[error("problem has no blocks or no constraints")]
    Empty,
}

/// One Hermitian coefficient of a constraint row, `⟨matrix, X_block⟩`.
#[derive(Clone, Debug)]
pub struct BlockCoeff {
    pub block: usize,
    pub matrix: CMat,
}

/// A semidefinite program in block standard form.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub costs: Vec<CMat>,
    /// Row-wise constraints; each row lists only the blocks it touches.
    pub rows: Vec<Vec<BlockCoeff>>,
    pub b: DVector<f64>,
}

/// Termination status of a solve.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveStatus {
    /// Feasibility and duality-gap tolerances met.
    Optimal,
    /// Iteration cap reached first.
    MaxIterations,
    /// Progress stalled or a factorization failed beyond recovery.
    Numerical,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Optimal => write!(f, "optimal"),
            SolveStatus::MaxIterations => write!(f, "max-iterations"),
            SolveStatus::Numerical => write!(f, "numerical"),
        }
    }
}

/// Solver tolerances and limits.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative duality gap `|pobj − dobj| / (1 + |pobj| + |dobj|)`.
    pub tol_gap: f64,
    /// Primal and dual feasibility tolerance (scaled residual norms).
    pub tol_feas: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 100,
            tol_gap: 1e-10,
            tol_feas: 1e-9,
        }
    }
}

/// Primal/dual solution pair with convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<CMat>,
    pub y: DVector<f64>,
    pub z: Vec<CMat>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

fn herk(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Real inner product ⟨A, B⟩ = Re Tr(A·B) for Hermitian A, B.
pub(crate) fn inner(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Nonzero entries `(row, col, value)` of a coefficient matrix. Constraint
/// rows built from Hermitian basis elements touch only one or two entries,
/// and the Schur assembly exploits that.
type SparseEntries = Vec<(usize, usize, C64)>;

/// Coefficient matrices at least this dense skip the sparse fast path.
const SPARSE_LIMIT: usize = 32;

fn nonzero_entries(a: &CMat) -> SparseEntries {
    let mut out = Vec::new();
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            let v = a[(r, c)];
            if v.re != 0.0 || v.im != 0.0 {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// `Re Tr(A·B)` evaluated over the nonzero entries of `A`.
fn sparse_inner(entries: &SparseEntries, b: &CMat) -> f64 {
    entries
        .iter()
        .map(|&(r, c, v)| {
            let y = b[(c, r)];
            v.re * y.re - v.im * y.im
        })
        .sum()
}

/// `W·A·W` as a sum of scaled outer products `v · W[:,r]·W[c,:]` over the
/// nonzero entries of `A`.
fn w_a_w_sparse(w: &CMat, entries: &SparseEntries) -> CMat {
    let d = w.nrows();
    let mut out = CMat::zeros(d, d);
    for &(r, c, v) in entries {
        for i in 0..d {
            let left = w[(i, r)] * v;
            if left.re == 0.0 && left.im == 0.0 {
                continue;
            }
            for j in 0..d {
                out[(i, j)] += left * w[(c, j)];
            }
        }
    }
    out
}

impl SdpProblem {
    pub fn validate(&self) -> Result<(), SolverError> {
        let k = self.block_dims.len();
        if k == 0 || self.rows.is_empty() {
            return Err(SolverError::Empty);
        }
        if self.costs.len() != k {
            return Err(SolverError::BadBlockSize(0, self.costs.len(), k, k));
        }
        for (i, c) in self.costs.iter().enumerate() {
            let n = self.block_dims[i];
            if c.nrows() != n || c.ncols() != n {
                return Err(SolverError::BadBlockSize(i, c.nrows(), c.ncols(), n));
            }
        }
        if self.b.len() != self.rows.len() {
            return Err(SolverError::BadRhsLength(self.b.len(), self.rows.len()));
        }
        for (j, row) in self.rows.iter().enumerate() {
            for coeff in row {
                if coeff.block >= k {
                    return Err(SolverError::BadBlockIndex(j, coeff.block, k));
                }
                let n = self.block_dims[coeff.block];
                if coeff.matrix.nrows() != n || coeff.matrix.ncols() != n {
                    return Err(SolverError::BadBlockSize(
                        coeff.block,
                        coeff.matrix.nrows(),
                        coeff.matrix.ncols(),
                        n,
                    ));
                }
            }
        }
        Ok(())
    }

    /// `A(X)` — evaluates every constraint row on the block iterate.
    fn apply_rows(&self, x: &[CMat]) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| {
                row.iter()
                    .map(|c| inner(&c.matrix, &x[c.block]))
                    .sum::<f64>()
            }),
        )
    }

    /// `A*(y)` restricted to one block.
    fn adjoint_block(&self, rows_of_block: &[(usize, usize)], y: &DVector<f64>, k: usize) -> CMat {
        let n = self.block_dims[k];
        let mut out = CMat::zeros(n, n);
        for &(j, pos) in rows_of_block {
            let a = &self.rows[j][pos].matrix;
            let w = y[j];
            if w != 0.0 {
                out += a * C64::new(w, 0.0);
            }
        }
        out
    }
}

/// Per-block NT scaling data for one iteration.
struct Scaling {
    /// `W = G G†` with `λ = G† Z G = G^{-1} X G^{-†}` diagonal.
    w: CMat,
    g: CMat,
    g_inv: CMat,
    lambda: DVector<f64>,
}

fn nt_scaling(x: &CMat, z: &CMat) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let lz = z.clone().cholesky()?.l();
    let m = lz.adjoint() * &lx;
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref()?;
    let sigma = &svd.singular_values;
    if sigma.iter().any(|s| *s <= 0.0 || !s.is_finite()) {
        return None;
    }
    let n = x.nrows();
    // G = L_x V Σ^{-1/2};  G^{-1} = Σ^{-1/2} V† L_x^{-1}.
    let v = vt.adjoint();
    let mut g = &lx * v;
    for j in 0..n {
        let s = sigma[j].sqrt().recip();
        for i in 0..n {
            g[(i, j)] *= C64::new(s, 0.0);
        }
    }
    // G^{-1} = Σ^{1/2} V† L_x^{-1} (the Σ power flips relative to G).
    let lx_inv = lx.solve_lower_triangular(&CMat::identity(n, n))?;
    let mut g_inv = vt * lx_inv;
    for i in 0..n {
        let s = sigma[i].sqrt();
        for j in 0..n {
            g_inv[(i, j)] *= C64::new(s, 0.0);
        }
    }
    let w = &g * g.adjoint();
    Some(Scaling {
        w: herk(&w),
        g,
        g_inv,
        lambda: sigma.clone(),
    })
}

/// Largest `α ∈ (0, 1]` with `X + α·dX ⪰ (1−γ)·boundary`, via the minimum
/// eigenvalue of `L^{-1} dX L^{-†}`.
fn step_length(x: &CMat, dx: &CMat, gamma: f64) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    // U = L^{-1} dX L^{-†} = (L^{-1} (L^{-1} dX)†)†.
    let Some(s) = l.solve_lower_triangular(&t.adjoint()) else {
        return 0.0;
    };
    let u = herk(&s.adjoint());
    let min_eig = u
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig >= -1e-300 {
        1.0
    } else {
        (gamma / -min_eig).min(1.0)
    }
}

/// Solves the SDP; see the module docs for the algorithm outline.
pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution, SolverError> {
    problem.validate()?;
    let nblocks = problem.block_dims.len();
    let m = problem.rows.len();

    // Index: for each block, the rows touching it as (row, position-in-row).
    let mut rows_of_block: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nblocks];
    for (j, row) in problem.rows.iter().enumerate() {
        for (pos, coeff) in row.iter().enumerate() {
            rows_of_block[coeff.block].push((j, pos));
        }
    }
    // Nonzero lists for coefficient matrices sparse enough to profit,
    // aligned with `rows_of_block`.
    let sparse_of_block: Vec<Vec<Option<SparseEntries>>> = rows_of_block
        .iter()
        .map(|touch| {
            touch
                .iter()
                .map(|&(j, pos)| {
                    let entries = nonzero_entries(&problem.rows[j][pos].matrix);
                    (entries.len() <= SPARSE_LIMIT).then_some(entries)
                })
                .collect()
        })
        .collect();

    // SDPT3-style cold start: X = ξ I, Z = η I sized from the data.
    let b_inf = problem
        .b
        .iter()
        .cloned()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let mut x: Vec<CMat> = Vec::with_capacity(nblocks);
    let mut z: Vec<CMat> = Vec::with_capacity(nblocks);
    for (k, touching) in rows_of_block.iter().enumerate() {
        let n = problem.block_dims[k];
        let mut xi: f64 = (n as f64).sqrt().max(10.0);
        let mut eta: f64 = (n as f64).sqrt().max(10.0).max(frob(&problem.costs[k]));
        for &(j, pos) in touching {
            let anorm = frob(&problem.rows[j][pos].matrix);
            xi = xi.max(n as f64 * (1.0 + b_inf) / (1.0 + anorm));
            eta = eta.max(anorm);
        }
        x.push(CMat::identity(n, n) * C64::new(xi.min(1e4), 0.0));
        z.push(CMat::identity(n, n) * C64::new(eta.min(1e4), 0.0));
    }
    let mut y = DVector::<f64>::zeros(m);

    let total_dim: usize = problem.block_dims.iter().sum();
    let b_norm = problem.b.norm();
    let c_norm = problem.costs.iter().map(frob).fold(0.0f64, f64::max);
    let gamma = 0.99;

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalls = 0usize;

    let metrics = |x: &[CMat], y: &DVector<f64>, z: &[CMat]| {
        let pobj: f64 = (0..nblocks).map(|k| inner(&problem.costs[k], &x[k])).sum();
        let dobj: f64 = problem.b.dot(y);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let rp = &problem.b - problem.apply_rows(x);
        let pinf = rp.norm() / (1.0 + b_norm);
        let mut dinf = 0.0f64;
        for k in 0..nblocks {
            let rd = &problem.costs[k] - &z[k] - problem.adjoint_block(&rows_of_block[k], y, k);
            dinf = dinf.max(frob(&rd) / (1.0 + c_norm));
        }
        (pobj, dobj, rel_gap, pinf, dinf)
    };

    for it in 0..config.max_iterations {
        iterations = it;
        let (pobj, dobj, rel_gap, pinf, dinf) = metrics(&x, &y, &z);
        log::trace!(
            "it {it}: pobj {pobj:+.9e} dobj {dobj:+.9e} gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}"
        );
        if rel_gap <= config.tol_gap && pinf <= config.tol_feas && dinf <= config.tol_feas {
            status = SolveStatus::Optimal;
            break;
        }

        // NT scaling per block.
        let mut scalings = Vec::with_capacity(nblocks);
        let mut scale_failed = false;
        for k in 0..nblocks {
            match nt_scaling(&x[k], &z[k]) {
                Some(s) => scalings.push(s),
                None => {
                    scale_failed = true;
                    break;
                }
            }
        }
        if scale_failed {
            status = SolveStatus::Numerical;
            break;
        }

        // Residuals.
        let rp = &problem.b - problem.apply_rows(&x);
        let rd: Vec<CMat> = (0..nblocks)
            .map(|k| &problem.costs[k] - &z[k] - problem.adjoint_block(&rows_of_block[k], &y, k))
            .collect();
        let mu: f64 = (0..nblocks).map(|k| inner(&x[k], &z[k])).sum::<f64>() / total_dim as f64;

        // Schur complement M_{jl} = Σ_k ⟨A_{jk}, W_k A_{lk} W_k⟩, assembled
        // per block from B_j = W A_j W. Since ⟨A_j, B_l⟩ = ⟨A_l, B_j⟩,
        // whichever side of a pair is sparse can carry the contraction.
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for k in 0..nblocks {
            let touch = &rows_of_block[k];
            if touch.is_empty() {
                continue;
            }
            let sparse = &sparse_of_block[k];
            let w = &scalings[k].w;
            let bs: Vec<CMat> = touch
                .iter()
                .zip(sparse)
                .map(|(&(j, pos), nz)| match nz {
                    Some(entries) => w_a_w_sparse(w, entries),
                    None => w * &problem.rows[j][pos].matrix * w,
                })
                .collect();
            for (a_idx, &(j, pos_j)) in touch.iter().enumerate() {
                let aj = &problem.rows[j][pos_j].matrix;
                for (b_idx, &(l, _)) in touch.iter().enumerate() {
                    if l > j {
                        continue;
                    }
                    let v = match (&sparse[a_idx], &sparse[b_idx]) {
                        (Some(entries), _) => sparse_inner(entries, &bs[b_idx]),
                        (None, Some(entries)) => sparse_inner(entries, &bs[a_idx]),
                        (None, None) => inner(aj, &bs[b_idx]),
                    };
                    schur[(j, l)] += v;
                }
            }
        }
        for j in 0..m {
            for l in (j + 1)..m {
                schur[(j, l)] = schur[(l, j)];
            }
        }

        // Factor M with escalating jitter if needed.
        let mean_diag = schur.diagonal().sum() / m as f64;
        let mut chol = None;
        let mut jitter = 0.0f64;
        for attempt in 0..4 {
            let trial = if jitter == 0.0 {
                schur.clone()
            } else {
                &schur + DMatrix::<f64>::identity(m, m) * jitter
            };
            if let Some(c) = trial.cholesky() {
                chol = Some(c);
                break;
            }
            jitter = mean_diag * 1e-14 * 100f64.powi(attempt);
        }
        let Some(schur_chol) = chol else {
            status = SolveStatus::Numerical;
            break;
        };

        // Shared pieces: A(W R_d W) enters both solves' right-hand sides.
        let wrdw: Vec<CMat> = (0..nblocks)
            .map(|k| herk(&(&scalings[k].w * &rd[k] * &scalings[k].w)))
            .collect();
        let a_of = |mats: &[CMat]| -> DVector<f64> {
            DVector::from_iterator(
                m,
                problem.rows.iter().map(|row| {
                    row.iter()
                        .map(|c| inner(&c.matrix, &mats[c.block]))
                        .sum::<f64>()
                }),
            )
        };
        let a_wrdw = a_of(&wrdw);

        let solve_direction = |rc: &[CMat]| -> (Vec<CMat>, DVector<f64>, Vec<CMat>) {
            let rhs = &rp - a_of(rc) + &a_wrdw;
            let mut dy = schur_chol.solve(&rhs);
            // One round of iterative refinement recovers accuracy lost to
            // the Schur system's growing condition number near the optimum.
            let resid = &rhs - &schur * &dy;
            dy += schur_chol.solve(&resid);
            let mut dz = Vec::with_capacity(nblocks);
            let mut dx = Vec::with_capacity(nblocks);
            for k in 0..nblocks {
                let dzk = &rd[k] - problem.adjoint_block(&rows_of_block[k], &dy, k);
                let dxk = &rc[k] - herk(&(&scalings[k].w * &dzk * &scalings[k].w));
                dz.push(herk(&dzk));
                dx.push(herk(&dxk));
            }
            (dx, dy, dz)
        };

        // Predictor: R_c = −X.
        let rc_aff: Vec<CMat> = x.iter().map(|xk| -xk.clone()).collect();
        let (dx_aff, _dy_aff, dz_aff) = solve_direction(&rc_aff);
        let mut ap = 1.0f64;
        let mut ad = 1.0f64;
        for k in 0..nblocks {
            ap = ap.min(step_length(&x[k], &dx_aff[k], gamma));
            ad = ad.min(step_length(&z[k], &dz_aff[k], gamma));
        }
        let mut mu_aff = 0.0;
        for k in 0..nblocks {
            let xa = &x[k] + &dx_aff[k] * C64::new(ap, 0.0);
            let za = &z[k] + &dz_aff[k] * C64::new(ad, 0.0);
            mu_aff += inner(&xa, &za);
        }
        mu_aff = (mu_aff / total_dim as f64).max(0.0);
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-6, 1.0);

        // Corrector in the scaled space, where the iterate is diag(λ):
        // R̂_ij = (σμ δ_ij − λ_i λ_j δ_ij − herm(dX̂·dẐ)_ij) · 2/(λ_i + λ_j),
        // then R_c = G R̂ G†.
        let rc_corr: Vec<CMat> = (0..nblocks)
            .map(|k| {
                let s = &scalings[k];
                let n = problem.block_dims[k];
                let dxh = &s.g_inv * &dx_aff[k] * s.g_inv.adjoint();
                let dzh = s.g.adjoint() * &dz_aff[k] * &s.g;
                let cross = herk(&(&dxh * &dzh));
                let mut rhat = CMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let li = s.lambda[i];
                        let lj = s.lambda[j];
                        let diag = if i == j {
                            C64::new(sigma * mu - li * li, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        };
                        rhat[(i, j)] = (diag - cross[(i, j)]) * C64::new(2.0 / (li + lj), 0.0);
                    }
                }
                herk(&(&s.g * rhat * s.g.adjoint()))
            })
            .collect();
        let (dx, dy, dz) = solve_direction(&rc_corr);
        let mut ap = 1.0f64;
        let mut ad = 1.0f64;
        for k in 0..nblocks {
            ap = ap.min(step_length(&x[k], &dx[k], gamma));
            ad = ad.min(step_length(&z[k], &dz[k], gamma));
        }

        for k in 0..nblocks {
            x[k] = herk(&(&x[k] + &dx[k] * C64::new(ap, 0.0)));
            z[k] = herk(&(&z[k] + &dz[k] * C64::new(ad, 0.0)));
        }
        y += &dy * ad;

        if ap < 1e-3 && ad < 1e-3 {
            stalls += 1;
            if stalls >= 3 {
                status = SolveStatus::Numerical;
                break;
            }
        } else {
            stalls = 0;
        }
        iterations = it + 1;
    }

    let (pobj, dobj, rel_gap, pinf, dinf) = metrics(&x, &y, &z);
    // A run that stopped on the iteration cap or a stall may nevertheless
    // have met the tolerances; judge by the final metrics.
    if status != SolveStatus::Optimal
        && rel_gap <= config.tol_gap
        && pinf <= config.tol_feas
        && dinf <= config.tol_feas
    {
        status = SolveStatus::Optimal;
    }
    Ok(SdpSolution {
        x,
        y,
        z,
        primal_objective: pobj,
        dual_objective: dobj,
        relative_gap: rel_gap,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        iterations,
        status,
    })
}
