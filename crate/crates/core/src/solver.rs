//! Damped fixed-point (Picard) iteration for `(A + B(U)) U = g` with
//! Dirichlet elimination, on top of a sparse direct solver.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::Col;

use crate::assembly::AlgebraicSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{Pattern, SparseMatrix};
use crate::stab::{StabScheme, Stabilizer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative tolerance on the nonlinear residual, scaled by `max(1, |g|_inf)`.
    pub tol: T,
    pub max_iter: usize,
    /// Initial damping factor `ω`.
    pub damping: T,
    pub damping_floor: T,
    /// Normwise backward error required from each linear solve.
    pub linear_tol: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            tol: T::lit(1e-10).max(eps * T::lit(1e3)),
            max_iter: 10_000,
            damping: T::one(),
            damping_floor: T::lit(1.0 / 64.0),
            linear_tol: T::lit(1e-13).max(eps * T::lit(1e2)),
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero() && self.tol < T::one()) {
            return Err(Error::InvalidArgument(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidArgument(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.damping_floor > T::zero() && self.damping_floor <= self.damping) {
            return Err(Error::InvalidArgument(format!(
                "damping floor must lie in (0, damping], got {}",
                self.damping_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub u: Vec<T>,
    /// Number of linear solves performed by the fixed-point loop.
    pub iterations: usize,
    /// `|g - (A + B(U)) U|_inf` over interior rows at the returned `U`.
    pub final_residual: T,
    pub converged: bool,
    /// Damping factor used in each step.
    pub damping_history: Vec<T>,
    pub residual_history: Vec<T>,
}

/// Sparse LU of the leading `size x size` block of matrices sharing a pattern.
/// The symbolic factorization is computed once and reused.
pub struct LinearWorkspace<T> {
    size: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// For each CSC slot, the CSR position holding the value.
    source: Vec<usize>,
    symbolic: Option<SymbolicLu<usize>>,
    values: Vec<T>,
}

impl<T: Scalar> LinearWorkspace<T> {
    pub fn new(pattern: &Pattern, size: usize) -> Self {
        let mut col_ptr = Vec::with_capacity(size + 1);
        let mut row_idx = Vec::new();
        let mut source = Vec::new();
        col_ptr.push(0);
        for j in 0..size {
            // column j of the block = row j of the transpose (pattern is symmetric)
            for k in pattern.row_range(j) {
                let i = pattern.col(k);
                if i < size {
                    row_idx.push(i);
                    source.push(pattern.transpose(k));
                }
            }
            col_ptr.push(row_idx.len());
        }
        let values = vec![T::zero(); row_idx.len()];
        Self {
            size,
            col_ptr,
            row_idx,
            source,
            symbolic: None,
            values,
        }
    }

    /// Solves `K[..size, ..size] x = rhs`, refining until the normwise backward
    /// error `|r| / (|K| |x| + |rhs|)` is below `linear_tol`.
    pub fn solve(&mut self, k: &SparseMatrix<T>, rhs: &[T], linear_tol: T) -> Result<Vec<T>> {
        let n = self.size;
        if n == 0 {
            return Ok(Vec::new());
        }
        for (slot, &src) in self.source.iter().enumerate() {
            self.values[slot] = k.values()[src];
        }
        let symbolic = unsafe { SymbolicSparseColMat::new_unchecked(n, n, self.col_ptr.clone(), None, self.row_idx.clone()) };
        let mat = SparseColMatRef::new(symbolic.as_ref(), &self.values);
        if self.symbolic.is_none() {
            self.symbolic = Some(SymbolicLu::try_new(symbolic.as_ref()).map_err(|e| Error::LinearSolve {
                row: 0,
                msg: format!("symbolic factorization failed: {e:?}"),
            })?);
        }
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone().expect("set above"), mat).map_err(|e| Error::LinearSolve {
            row: 0,
            msg: format!("numeric factorization failed: {e:?}"),
        })?;

        let b = Col::<T>::from_fn(n, |i| rhs[i]);
        let mut x: Vec<T> = {
            let sol = lu.solve(&b);
            (0..n).map(|i| sol[i]).collect()
        };
        let rhs_norm = rhs[..n].iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let k_norm = self.block_inf_norm(k);
        for _refinement in 0..4 {
            if let Some(row) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::LinearSolve {
                    row,
                    msg: "matrix is singular to working precision".into(),
                });
            }
            let r = self.block_residual(k, &x, rhs);
            let (row, rmax) = r
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(bi, bm), (i, v)| if v.abs() > bm { (i, v.abs()) } else { (bi, bm) });
            let scale = (k_norm * inf_norm(&x) + rhs_norm).max(T::min_positive_value());
            if rmax <= linear_tol * scale {
                return Ok(x);
            }
            if _refinement == 3 {
                return Err(Error::LinearSolve {
                    row,
                    msg: format!("backward error {} above {}", rmax / scale, linear_tol),
                });
            }
            let rc = Col::<T>::from_fn(n, |i| r[i]);
            let dx = lu.solve(&rc);
            for i in 0..n {
                x[i] += dx[i];
            }
        }
        unreachable!()
    }

    fn block_inf_norm(&self, k: &SparseMatrix<T>) -> T {
        let p = k.pattern();
        (0..self.size)
            .map(|i| {
                p.row_range(i)
                    .filter(|&kk| p.col(kk) < self.size)
                    .fold(T::zero(), |s, kk| s + k.values()[kk].abs())
            })
            .fold(T::zero(), T::max)
    }

    fn block_residual(&self, k: &SparseMatrix<T>, x: &[T], rhs: &[T]) -> Vec<T> {
        let p = k.pattern();
        (0..self.size)
            .map(|i| {
                let mut s = rhs[i];
                for kk in p.row_range(i) {
                    let j = p.col(kk);
                    if j < self.size {
                        s -= k.values()[kk] * x[j];
                    }
                }
                s
            })
            .collect()
    }
}

/// Solves a square sparse system.
pub fn linear_solve<T: Scalar>(matrix: &SparseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != matrix.n() {
        return Err(Error::InvalidArgument(format!(
            "rhs length {} does not match matrix size {}",
            rhs.len(),
            matrix.n()
        )));
    }
    let mut ws = LinearWorkspace::new(matrix.pattern(), matrix.n());
    ws.solve(matrix, rhs, SolverOptions::<T>::default().linear_tol)
}

/// Interior residual `g_i - sum_j (a_ij + b_ij) u_j`, `i < M`.
pub fn residual<T: Scalar>(system: &AlgebraicSystem<T>, b: &SparseMatrix<T>, u: &[T]) -> Vec<T> {
    (0..system.m)
        .map(|i| system.g[i] - system.a.row_dot(i, u) - b.row_dot(i, u))
        .collect()
}

pub fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Solves `(A + B) Û = g` on interior rows with `Û = u_b` on the boundary.
fn dirichlet_solve<T: Scalar>(
    system: &AlgebraicSystem<T>,
    b: &SparseMatrix<T>,
    ws: &mut LinearWorkspace<T>,
    linear_tol: T,
) -> Result<Vec<T>> {
    let k = system.a.add(b)?;
    let m = system.m;
    let p = k.pattern();
    let mut rhs = system.g.clone();
    for (i, r) in rhs.iter_mut().enumerate() {
        for kk in p.row_range(i) {
            let j = p.col(kk);
            if j >= m {
                *r -= k.values()[kk] * system.ub[j - m];
            }
        }
    }
    let interior = ws.solve(&k, &rhs, linear_tol)?;
    Ok(system.with_boundary(&interior))
}

/// One damped step `U_{k+1} = U_k + ω (Û - U_k)` with `Û` the solution of
/// the system linearized at `U_k`.
pub fn fixed_point_step<T: Scalar>(
    system: &AlgebraicSystem<T>,
    stab: &Stabilizer<T>,
    u_k: &[T],
    omega: T,
    ws: &mut LinearWorkspace<T>,
    linear_tol: T,
) -> Result<Vec<T>> {
    let b = stab.matrix(u_k);
    let u_hat = dirichlet_solve(system, &b, ws, linear_tol)?;
    let m = system.m;
    let mut next = u_k.to_vec();
    for i in 0..m {
        next[i] = u_k[i] + omega * (u_hat[i] - u_k[i]);
    }
    next[m..].copy_from_slice(&system.ub);
    Ok(next)
}

/// Solves the stabilized problem for the given scheme.
pub fn solve<T: Scalar>(system: &AlgebraicSystem<T>, scheme: StabScheme, opts: &SolverOptions<T>) -> Result<SolveResult<T>> {
    opts.validate()?;
    let stab = Stabilizer::new(&system.a, system.m, scheme);
    let mut ws = LinearWorkspace::new(system.a.pattern(), system.m);
    let abs_tol = opts.tol * T::one().max(system.g_inf_norm());

    if scheme.is_linear() {
        let b = stab.matrix(&[]);
        let u = dirichlet_solve(system, &b, &mut ws, opts.linear_tol)?;
        let res = inf_norm(&residual(system, &b, &u));
        return Ok(SolveResult {
            u,
            iterations: 1,
            final_residual: res,
            converged: res <= abs_tol,
            damping_history: vec![T::one()],
            residual_history: vec![res],
        });
    }

    // start from the linear upwind solution, which already satisfies the DMP
    let mut u = dirichlet_solve(system, stab.d(), &mut ws, opts.linear_tol)?;
    let mut b = stab.matrix(&u);
    let mut res = inf_norm(&residual(system, &b, &u));
    let mut omega = opts.damping;
    // largest damping allowed; lowered whenever a step increases the residual
    let mut ceiling = opts.damping;
    let mut decreases = 0usize;
    let mut damping_history = Vec::new();
    let mut residual_history = vec![res];
    let mut iterations = 0;

    while res > abs_tol && iterations < opts.max_iter {
        let u_hat = dirichlet_solve(system, &b, &mut ws, opts.linear_tol)?;
        for i in 0..system.m {
            u[i] = u[i] + omega * (u_hat[i] - u[i]);
        }
        iterations += 1;
        damping_history.push(omega);
        b = stab.matrix(&u);
        let new_res = inf_norm(&residual(system, &b, &u));
        if new_res > res {
            ceiling = (omega * T::lit(0.75)).max(opts.damping_floor);
            omega = (omega / T::lit(2.0)).max(opts.damping_floor);
            decreases = 0;
        } else {
            decreases += 1;
            if decreases >= 3 {
                omega = (omega * T::lit(1.5)).min(ceiling);
                decreases = 0;
            }
        }
        res = new_res;
        residual_history.push(res);
    }

    Ok(SolveResult {
        u,
        iterations,
        final_residual: res,
        converged: res <= abs_tol,
        damping_history,
        residual_history,
    })
}
