//! Discrete maximum principle checks, error norms and convergence orders.

use serde::Serialize;

use crate::assembly::{basis_gradients, AlgebraicSystem};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{map_point, TriangleRule};
use crate::scalar::{neg, pos, Scalar};
use crate::sparse::SparseMatrix;
use crate::stab::Stabilizer;

/// Absolute tolerance used by the DMP checks on unit-scaled problems.
pub const DMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DmpKind {
    LocalWeak,
    LocalStrong,
    General,
    GlobalWeak,
    GlobalStrong,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmpViolation {
    pub index: usize,
    pub value: f64,
    pub bound: f64,
}

impl DmpViolation {
    pub fn magnitude(&self) -> f64 {
        (self.value - self.bound).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmpReport {
    pub kind: DmpKind,
    pub violations: Vec<DmpViolation>,
    pub satisfied: bool,
    /// `false` when the premises of the principle cannot be met (e.g. no sign
    /// condition on `g` holds, or `Q` is empty).
    pub applicable: bool,
    pub tolerance: f64,
}

impl DmpReport {
    fn new(kind: DmpKind, violations: Vec<DmpViolation>, applicable: bool, tolerance: f64) -> Self {
        Self {
            kind,
            satisfied: violations.is_empty(),
            violations,
            applicable,
            tolerance,
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().map(DmpViolation::magnitude).fold(0.0, f64::max)
    }
}

fn row_sum_vanishes<T: Scalar>(a: &SparseMatrix<T>, i: usize) -> bool {
    let scale = a.row(i).fold(T::zero(), |m, (_, v)| m.max(v.abs()));
    a.row_sum(i).abs() <= T::lit(1e-12) * scale.max(T::one())
}

fn violation<T: Scalar>(index: usize, value: T, bound: T) -> DmpViolation {
    DmpViolation {
        index,
        value: value.to_f64_lossy(),
        bound: bound.to_f64_lossy(),
    }
}

/// Local DMP at every interior vertex. With `strong`, rows with vanishing
/// row sum are checked against `max u_j` instead of `max u_j^+`.
pub fn check_local_dmp<T: Scalar>(system: &AlgebraicSystem<T>, u: &[T], s: &[Vec<usize>], strong: bool, tol: T) -> DmpReport {
    let mut violations = Vec::new();
    for i in 0..system.m {
        let nb = &s[i];
        if nb.is_empty() {
            continue;
        }
        let strong_row = strong && row_sum_vanishes(&system.a, i);
        let hi = nb.iter().map(|&j| u[j]).fold(T::neg_infinity(), T::max);
        let lo = nb.iter().map(|&j| u[j]).fold(T::infinity(), T::min);
        let (hi, lo) = if strong_row { (hi, lo) } else { (pos(hi), neg(lo)) };
        if system.g[i] <= T::zero() && u[i] > hi + tol {
            violations.push(violation(i, u[i], hi));
        }
        if system.g[i] >= T::zero() && u[i] < lo - tol {
            violations.push(violation(i, u[i], lo));
        }
    }
    let kind = if strong { DmpKind::LocalStrong } else { DmpKind::LocalWeak };
    DmpReport::new(kind, violations, true, tol.to_f64_lossy())
}

/// DMP on a set `R` of interior indices with `P = R ∪ ⋃ S_i` and `Q = P \ R`.
/// The strong form is used when all rows in `R` have vanishing row sums.
pub fn check_general_dmp<T: Scalar>(system: &AlgebraicSystem<T>, u: &[T], s: &[Vec<usize>], r: &[usize], tol: T) -> Result<DmpReport> {
    if r.is_empty() {
        return Err(Error::InvalidArgument("index set R must be nonempty".into()));
    }
    if let Some(&bad) = r.iter().find(|&&i| i >= system.m) {
        return Err(Error::InvalidArgument(format!("index {bad} in R is not interior")));
    }
    let mut in_r = vec![false; system.n];
    for &i in r {
        in_r[i] = true;
    }
    let mut in_p = in_r.clone();
    for &i in r {
        for &j in &s[i] {
            in_p[j] = true;
        }
    }
    let p: Vec<usize> = (0..system.n).filter(|&i| in_p[i]).collect();
    let q: Vec<usize> = p.iter().copied().filter(|&i| !in_r[i]).collect();
    let tol_f = tol.to_f64_lossy();
    if q.is_empty() {
        return Ok(DmpReport::new(DmpKind::General, Vec::new(), false, tol_f));
    }
    let strong = r.iter().all(|&i| row_sum_vanishes(&system.a, i));
    let nonpos = r.iter().all(|&i| system.g[i] <= T::zero());
    let nonneg = r.iter().all(|&i| system.g[i] >= T::zero());

    let (arg_max_p, max_p) = extreme(&p, u, |a, b| a > b);
    let (arg_min_p, min_p) = extreme(&p, u, |a, b| a < b);
    let (_, max_q) = extreme(&q, u, |a, b| a > b);
    let (_, min_q) = extreme(&q, u, |a, b| a < b);
    let (hi, lo) = if strong { (max_q, min_q) } else { (pos(max_q), neg(min_q)) };

    let mut violations = Vec::new();
    if nonpos && max_p > hi + tol {
        violations.push(violation(arg_max_p, max_p, hi));
    }
    if nonneg && min_p < lo - tol {
        violations.push(violation(arg_min_p, min_p, lo));
    }
    Ok(DmpReport::new(DmpKind::General, violations, nonpos || nonneg, tol_f))
}

fn extreme<T: Scalar>(idx: &[usize], u: &[T], better: impl Fn(T, T) -> bool) -> (usize, T) {
    let mut best = (idx[0], u[idx[0]]);
    for &i in &idx[1..] {
        if better(u[i], best.1) {
            best = (i, u[i]);
        }
    }
    best
}

/// Global DMP: interior values bounded by boundary values. With `strong`
/// (requires vanishing interior row sums) the bound is `max u_b`, otherwise
/// `max u_b^+`.
pub fn check_global_dmp<T: Scalar>(system: &AlgebraicSystem<T>, u: &[T], strong: bool, tol: T) -> DmpReport {
    let m = system.m;
    let all: Vec<usize> = (0..system.n).collect();
    let boundary: Vec<usize> = (m..system.n).collect();
    let strong_ok = strong && (0..m).all(|i| row_sum_vanishes(&system.a, i));
    let nonpos = system.g.iter().all(|&g| g <= T::zero());
    let nonneg = system.g.iter().all(|&g| g >= T::zero());
    let (arg_max, max_all) = extreme(&all, u, |a, b| a > b);
    let (arg_min, min_all) = extreme(&all, u, |a, b| a < b);
    let (_, max_b) = extreme(&boundary, u, |a, b| a > b);
    let (_, min_b) = extreme(&boundary, u, |a, b| a < b);
    let (hi, lo) = if strong_ok { (max_b, min_b) } else { (pos(max_b), neg(min_b)) };
    let mut violations = Vec::new();
    if nonpos && max_all > hi + tol {
        violations.push(violation(arg_max, max_all, hi));
    }
    if nonneg && min_all < lo - tol {
        violations.push(violation(arg_min, min_all, lo));
    }
    let kind = if strong { DmpKind::GlobalStrong } else { DmpKind::GlobalWeak };
    DmpReport::new(kind, violations, (nonpos || nonneg) && (strong_ok || !strong), tol.to_f64_lossy())
}

/// Interior indices `i` that are strict local extrema over `S_i` but have
/// `a_ij + b_ij > tol` for some `j ∈ S_i`.
pub fn a2_violations<T: Scalar>(a: &SparseMatrix<T>, b: &SparseMatrix<T>, u: &[T], s: &[Vec<usize>], tol: T) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, nb) in s.iter().enumerate() {
        if nb.is_empty() {
            continue;
        }
        let is_max = nb.iter().all(|&j| u[i] > u[j]);
        let is_min = nb.iter().all(|&j| u[i] < u[j]);
        if !(is_max || is_min) {
            continue;
        }
        for &j in nb {
            if a.get(i, j) + b.get(i, j) > tol {
                out.push((i, j));
            }
        }
    }
    out
}

/// `L2`, `H1`-seminorm and solution-dependent norm of `u - u_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h: f64,
}

/// Errors of the P1 function with nodal values `u_h` against `u_exact`.
///
/// The `h`-norm is `ε|e|_1² + σ0‖e‖_0² + b_h(u_h; e_h, e_h)` with
/// `e = u - u_h` and `e_h` the nodal values of `e`.
pub fn error_norms<T: Scalar>(
    mesh: &Mesh<T>,
    u_exact: impl Fn(T, T) -> T,
    grad_exact: impl Fn(T, T) -> [T; 2],
    u_h: &[T],
    b_at_solution: &SparseMatrix<T>,
    epsilon: T,
    sigma0: T,
) -> Result<ErrorNorms> {
    let rule = TriangleRule::<T>::new(12)?;
    let mut l2 = T::zero();
    let mut h1 = T::zero();
    for (t, tri_idx) in mesh.triangles().iter().enumerate() {
        let tri = mesh.triangle_coords(t);
        let (grad, area) = basis_gradients(&tri);
        let vals = [u_h[tri_idx[0]], u_h[tri_idx[1]], u_h[tri_idx[2]]];
        let gh = [
            vals[0] * grad[0][0] + vals[1] * grad[1][0] + vals[2] * grad[2][0],
            vals[0] * grad[0][1] + vals[1] * grad[1][1] + vals[2] * grad[2][1],
        ];
        let jac = area * T::lit(2.0);
        for (pt, &w) in rule.points.iter().zip(&rule.weights) {
            let (x, y) = map_point(&tri, pt[0], pt[1]);
            let uh = vals[0] * (T::one() - pt[0] - pt[1]) + vals[1] * pt[0] + vals[2] * pt[1];
            let e = u_exact(x, y) - uh;
            let ge = grad_exact(x, y);
            let (ex, ey) = (ge[0] - gh[0], ge[1] - gh[1]);
            l2 += w * jac * e * e;
            h1 += w * jac * (ex * ex + ey * ey);
        }
    }
    let nodal: Vec<T> = mesh
        .vertices()
        .iter()
        .zip(u_h)
        .map(|(v, &uh)| u_exact(v[0], v[1]) - uh)
        .collect();
    let bh = b_at_solution.bilinear(&nodal, &nodal);
    let h2 = epsilon * h1 + sigma0 * l2 + bh;
    Ok(ErrorNorms {
        l2: l2.sqrt().to_f64_lossy(),
        h1_semi: h1.sqrt().to_f64_lossy(),
        h: h2.max(T::zero()).sqrt().to_f64_lossy(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTableRow {
    pub ne: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub err_h: f64,
    pub ord_l2: Option<f64>,
    pub ord_h1: Option<f64>,
    pub ord_h: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ErrorTableRow {
    pub fn new(ne: usize, norms: ErrorNorms, iterations: usize, converged: bool) -> Self {
        Self {
            ne,
            err_l2: norms.l2,
            err_h1: norms.h1_semi,
            err_h: norms.h,
            ord_l2: None,
            ord_h1: None,
            ord_h: None,
            iterations,
            converged,
        }
    }
}

/// Fills in `log2(err_prev / err_curr)` for rows whose `ne` doubles.
pub fn convergence_orders(rows: &mut [ErrorTableRow]) -> Result<()> {
    for k in 1..rows.len() {
        if rows[k].ne != 2 * rows[k - 1].ne {
            return Err(Error::InvalidArgument(format!(
                "ne must double between rows, got {} then {}",
                rows[k - 1].ne,
                rows[k].ne
            )));
        }
    }
    if let Some(first) = rows.first_mut() {
        first.ord_l2 = None;
        first.ord_h1 = None;
        first.ord_h = None;
    }
    for k in 1..rows.len() {
        let (prev, cur) = (rows[k - 1].clone(), &mut rows[k]);
        cur.ord_l2 = Some((prev.err_l2 / cur.err_l2).log2());
        cur.ord_h1 = Some((prev.err_h1 / cur.err_h1).log2());
        cur.ord_h = Some((prev.err_h / cur.err_h).log2());
    }
    Ok(())
}

/// Largest `|b_ij(U)|` for `U` the nodal values of `c0 + c1 x + c2 y`.
pub fn linearity_preservation_probe<T: Scalar>(mesh: &Mesh<T>, stab: &Stabilizer<T>, coeffs: [T; 3]) -> T {
    let u: Vec<T> = mesh
        .vertices()
        .iter()
        .map(|v| coeffs[0] + coeffs[1] * v[0] + coeffs[2] * v[1])
        .collect();
    stab.matrix(&u).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, ProblemSpec};
    use crate::mesh::{generate_mesh, MeshFamily};
    use std::sync::Arc;

    fn laplace_system(ne: usize) -> (Mesh<f64>, AlgebraicSystem<f64>) {
        let mesh = generate_mesh::<f64>(MeshFamily::left(), ne).unwrap();
        let p = ProblemSpec::constant(1.0, [0.0, 0.0], 0.0, 0.0, Arc::new(|_, _| 0.0)).unwrap();
        let sys = assemble(&mesh, &p, false).unwrap();
        (mesh, sys)
    }

    #[test]
    fn constant_u_satisfies_everything() {
        let (mesh, sys) = laplace_system(4);
        let u = vec![0.3; sys.n];
        let s = mesh.neighborhoods();
        assert!(check_local_dmp(&sys, &u, s, false, 1e-10).satisfied);
        assert!(check_local_dmp(&sys, &u, s, true, 1e-10).satisfied);
        assert!(check_global_dmp(&sys, &u, true, 1e-10).satisfied);
    }

    #[test]
    fn strict_interior_max_is_flagged() {
        let (mesh, sys) = laplace_system(4);
        let mut u = vec![0.0; sys.n];
        u[4] = 0.5;
        let r = check_local_dmp(&sys, &u, mesh.neighborhoods(), true, 1e-10);
        assert!(!r.satisfied);
        assert_eq!(r.violations[0].index, 4);
        let r = check_local_dmp(&sys, &u, mesh.neighborhoods(), false, 1e-10);
        assert!(!r.satisfied);
    }

    #[test]
    fn general_dmp_with_single_index_matches_local() {
        let (mesh, sys) = laplace_system(4);
        let s = mesh.neighborhoods();
        let u: Vec<f64> = (0..sys.n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.3).collect();
        let local = check_local_dmp(&sys, &u, s, true, 1e-10);
        for i in 0..sys.m {
            let g = check_general_dmp(&sys, &u, s, &[i], 1e-10).unwrap();
            let local_i = local.violations.iter().any(|v| v.index == i);
            assert_eq!(g.satisfied, !local_i, "vertex {i}");
        }
    }

    #[test]
    fn general_dmp_rejects_bad_sets() {
        let (mesh, sys) = laplace_system(3);
        let u = vec![0.0; sys.n];
        assert!(check_general_dmp(&sys, &u, mesh.neighborhoods(), &[], 1e-10).is_err());
        assert!(check_general_dmp(&sys, &u, mesh.neighborhoods(), &[sys.m], 1e-10).is_err());
    }

    #[test]
    fn general_dmp_without_q_is_inapplicable() {
        // two interior nodes connected only to each other
        let a = SparseMatrix::from_dense(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let sys = AlgebraicSystem::new(a, vec![0.0, 0.0], vec![]).unwrap();
        let r = check_general_dmp(&sys, &[1.0, 1.0], &[vec![1], vec![0]], &[0, 1], 1e-10).unwrap();
        assert!(!r.applicable);
    }

    #[test]
    fn local_does_not_imply_global() {
        // 4x4 vertices, interior 2x2 block at 1, boundary at 0
        let mesh = generate_mesh::<f64>(MeshFamily::left(), 3).unwrap();
        assert_eq!((mesh.n_interior(), mesh.n_total()), (4, 16));
        let p = ProblemSpec::constant(1.0, [0.0, 0.0], 0.0, 0.0, Arc::new(|_, _| 0.0)).unwrap();
        let sys = assemble(&mesh, &p, false).unwrap();
        let u: Vec<f64> = (0..16).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
        assert!(check_local_dmp(&sys, &u, mesh.neighborhoods(), true, 1e-10).satisfied);
        let g = check_global_dmp(&sys, &u, true, 1e-10);
        assert!(!g.satisfied);
        let all: Vec<usize> = (0..4).collect();
        assert!(!check_general_dmp(&sys, &u, mesh.neighborhoods(), &all, 1e-10).unwrap().satisfied);
    }

    #[test]
    fn orders() {
        let mk = |ne, e| ErrorTableRow::new(ne, ErrorNorms { l2: e, h1_semi: e, h: e }, 1, true);
        let mut rows = vec![mk(4, 0.4), mk(8, 0.2), mk(16, 0.1), mk(32, 0.1)];
        convergence_orders(&mut rows).unwrap();
        assert_eq!(rows[0].ord_l2, None);
        assert!((rows[1].ord_l2.unwrap() - 1.0).abs() < 1e-15);
        assert!((rows[2].ord_h.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rows[3].ord_h1, Some(0.0));
        let mut bad = vec![mk(4, 0.4), mk(12, 0.2)];
        assert!(convergence_orders(&mut bad).is_err());
    }

    #[test]
    fn table_order_arithmetic() {
        let v: f64 = (2.206e-2f64 / 6.967e-3).log2();
        assert_eq!(format!("{v:.2}"), "1.66");
    }

    #[test]
    fn norms_vanish_for_p1_exact_solution() {
        let mesh = generate_mesh::<f64>(MeshFamily::shifted(0.5).unwrap(), 4).unwrap();
        let u: Vec<f64> = mesh.vertices().iter().map(|v| 1.0 + 2.0 * v[0] - v[1]).collect();
        let b = SparseMatrix::zeros(Arc::new(crate::sparse::Pattern::from_neighbors(&vec![vec![]; mesh.n_total()]).unwrap()));
        let e = error_norms(&mesh, |x, y| 1.0 + 2.0 * x - y, |_, _| [2.0, -1.0], &u, &b, 1.0, 1.0).unwrap();
        assert!(e.l2 < 1e-14 && e.h1_semi < 1e-13 && e.h < 1e-13);
    }

    #[test]
    fn h_norm_without_b_is_a_norm() {
        let mesh = generate_mesh::<f64>(MeshFamily::left(), 4).unwrap();
        let u = vec![0.0; mesh.n_total()];
        let b = SparseMatrix::zeros(Arc::new(crate::sparse::Pattern::from_neighbors(&vec![vec![]; mesh.n_total()]).unwrap()));
        // u = x y: ‖u‖² = 1/9, |u|_1² = 2/3
        let e = error_norms(&mesh, |x, y| x * y, |x, y| [y, x], &u, &b, 0.5, 2.0).unwrap();
        assert!((e.l2 - (1.0f64 / 9.0).sqrt()).abs() < 1e-14);
        assert!((e.h1_semi - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((e.h - (0.5 * 2.0 / 3.0 + 2.0 / 9.0f64).sqrt()).abs() < 1e-14);
    }
}
