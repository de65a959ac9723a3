//! Assembly of the extended P1 Galerkin matrix, load vector and Dirichlet data.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;
use crate::scalar::Scalar;
use crate::sparse::{Pattern, SparseMatrix};

pub type ScalarFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(T, T) -> [T; 2] + Send + Sync>;

/// Data of a steady convection-diffusion-reaction problem on the unit square:
/// `-eps Δu + b·∇u + c u = g` in the domain, `u = u_b` on its boundary.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub epsilon: T,
    pub b: VectorFn<T>,
    pub c: ScalarFn<T>,
    pub g: ScalarFn<T>,
    pub u_b: ScalarFn<T>,
    /// Lower bound of `c`.
    pub sigma0: T,
}

impl<T: Scalar> std::fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("epsilon", &self.epsilon)
            .field("sigma0", &self.sigma0)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(epsilon: T, b: VectorFn<T>, c: ScalarFn<T>, g: ScalarFn<T>, u_b: ScalarFn<T>, sigma0: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(sigma0 >= T::zero()) {
            return Err(Error::InvalidArgument(format!("sigma0 must be nonnegative, got {sigma0}")));
        }
        Ok(Self {
            epsilon,
            b,
            c,
            g,
            u_b,
            sigma0,
        })
    }

    /// Problem with constant convection, reaction and source.
    pub fn constant(epsilon: T, b: [T; 2], c: T, g: T, u_b: ScalarFn<T>) -> Result<Self> {
        Self::new(
            epsilon,
            Arc::new(move |_, _| b),
            Arc::new(move |_, _| c),
            Arc::new(move |_, _| g),
            u_b,
            c,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Replace the reaction mass matrix by its row sums on the diagonal.
    pub lump_reaction: bool,
    /// Quadrature degree for convection and reaction terms.
    pub matrix_degree: usize,
    /// Quadrature degree for the load vector.
    pub source_degree: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            lump_reaction: false,
            matrix_degree: 2,
            source_degree: 7,
        }
    }
}

/// The extended `N x N` matrix `A`, interior loads `g` and boundary values.
#[derive(Debug, Clone)]
pub struct AlgebraicSystem<T> {
    pub a: SparseMatrix<T>,
    /// `g_i` for the `M` interior vertices.
    pub g: Vec<T>,
    /// `u_b(x_i)` for the `N - M` boundary vertices, in vertex order.
    pub ub: Vec<T>,
    pub m: usize,
    pub n: usize,
}

impl<T: Scalar> AlgebraicSystem<T> {
    pub fn new(a: SparseMatrix<T>, g: Vec<T>, ub: Vec<T>) -> Result<Self> {
        let n = a.n();
        let m = g.len();
        if m + ub.len() != n {
            return Err(Error::InvalidArgument(format!(
                "load ({m}) and boundary ({}) lengths do not add up to N = {n}",
                ub.len()
            )));
        }
        Ok(Self { a, g, ub, m, n })
    }

    /// Full vector with the given interior values and exact boundary data.
    pub fn with_boundary(&self, interior: &[T]) -> Vec<T> {
        let mut u = Vec::with_capacity(self.n);
        u.extend_from_slice(&interior[..self.m]);
        u.extend_from_slice(&self.ub);
        u
    }

    pub fn g_inf_norm(&self) -> T {
        self.g.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Gradients of the three barycentric basis functions on a triangle.
pub(crate) fn basis_gradients<T: Scalar>(tri: &[[T; 2]; 3]) -> ([[T; 2]; 3], T) {
    let [p0, p1, p2] = *tri;
    let two_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let grads = [
        [(p1[1] - p2[1]) / two_area, (p2[0] - p1[0]) / two_area],
        [(p2[1] - p0[1]) / two_area, (p0[0] - p2[0]) / two_area],
        [(p0[1] - p1[1]) / two_area, (p1[0] - p0[0]) / two_area],
    ];
    (grads, two_area / T::lit(2.0))
}

/// Assembles `a_ij = a_h(φ_j, φ_i)` for all `i, j`, together with `g` and `u_b`.
pub fn assemble<T: Scalar>(mesh: &Mesh<T>, problem: &ProblemSpec<T>, lump_reaction: bool) -> Result<AlgebraicSystem<T>> {
    assemble_with(
        mesh,
        problem,
        &AssemblyOptions {
            lump_reaction,
            ..Default::default()
        },
    )
}

pub fn assemble_with<T: Scalar>(mesh: &Mesh<T>, problem: &ProblemSpec<T>, opts: &AssemblyOptions) -> Result<AlgebraicSystem<T>> {
    let n = mesh.n_total();
    let m = mesh.n_interior();
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| mesh.adjacency(i).to_vec()).collect();
    let pattern = Arc::new(Pattern::from_neighbors(&neighbors)?);
    let mut a = SparseMatrix::zeros(pattern.clone());
    let mut g = vec![T::zero(); m];

    let mrule = TriangleRule::<T>::new(opts.matrix_degree)?;
    let srule = TriangleRule::<T>::new(opts.source_degree)?;
    let eps = problem.epsilon;

    for (t, &verts) in mesh.triangles().iter().enumerate() {
        let tri = mesh.triangle_coords(t);
        let (grad, area) = basis_gradients(&tri);
        let jac = area * T::lit(2.0);
        let mut local = [[T::zero(); 3]; 3];
        for a_ in 0..3 {
            for b_ in 0..3 {
                let gg = grad[a_][0] * grad[b_][0] + grad[a_][1] * grad[b_][1];
                local[a_][b_] = eps * gg * area;
            }
        }
        let mut lumped = [T::zero(); 3];
        for (pt, &w) in mrule.points.iter().zip(&mrule.weights) {
            let lam = [T::one() - pt[0] - pt[1], pt[0], pt[1]];
            let (x, y) = crate::quadrature::map_point(&tri, pt[0], pt[1]);
            let bv = (problem.b)(x, y);
            let cv = (problem.c)(x, y);
            if !(bv[0].is_finite() && bv[1].is_finite() && cv.is_finite()) {
                return Err(Error::Assembly {
                    triangle: t,
                    msg: format!("non-finite coefficient at ({x}, {y})"),
                });
            }
            if cv < problem.sigma0 {
                return Err(Error::Assembly {
                    triangle: t,
                    msg: format!("reaction {cv} below sigma0 = {} at ({x}, {y})", problem.sigma0),
                });
            }
            let wj = w * jac;
            for i_ in 0..3 {
                for j_ in 0..3 {
                    // row i (test function), column j (trial function)
                    let conv = (bv[0] * grad[j_][0] + bv[1] * grad[j_][1]) * lam[i_];
                    local[i_][j_] += wj * conv;
                    if !opts.lump_reaction {
                        local[i_][j_] += wj * cv * lam[j_] * lam[i_];
                    }
                }
                lumped[i_] += wj * cv * lam[i_];
            }
        }
        if opts.lump_reaction {
            for i_ in 0..3 {
                local[i_][i_] += lumped[i_];
            }
        }
        for i_ in 0..3 {
            for j_ in 0..3 {
                a.add_to(verts[i_], verts[j_], local[i_][j_])?;
            }
        }

        let mut gl = [T::zero(); 3];
        for (pt, &w) in srule.points.iter().zip(&srule.weights) {
            let lam = [T::one() - pt[0] - pt[1], pt[0], pt[1]];
            let (x, y) = crate::quadrature::map_point(&tri, pt[0], pt[1]);
            let gv = (problem.g)(x, y);
            if !gv.is_finite() {
                return Err(Error::Assembly {
                    triangle: t,
                    msg: format!("non-finite source at ({x}, {y})"),
                });
            }
            for i_ in 0..3 {
                gl[i_] += w * jac * gv * lam[i_];
            }
        }
        for i_ in 0..3 {
            if verts[i_] < m {
                g[verts[i_]] += gl[i_];
            }
        }
    }

    let mut ub = Vec::with_capacity(n - m);
    for i in m..n {
        let [x, y] = mesh.vertices()[i];
        let v = (problem.u_b)(x, y);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite boundary value at vertex {i}")));
        }
        ub.push(v);
    }
    AlgebraicSystem::new(a, g, ub)
}

/// `min{a_ij, a_ji} <= 0` for all interior `i` and `j != i`; returns the
/// offending pairs `(i, j)`.
pub fn min_condition_violations<T: Scalar>(a: &SparseMatrix<T>, m: usize) -> Vec<(usize, usize)> {
    let p = a.pattern();
    let mut out = Vec::new();
    for i in 0..m {
        for k in p.row_range(i) {
            let j = p.col(k);
            if j != i && a.values()[k].min(a.values()[p.transpose(k)]) > T::zero() {
                out.push((i, j));
            }
        }
    }
    out
}
