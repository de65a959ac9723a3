//! The three model problems on the unit square used in the numerical study.

use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::{error_norms, ErrorNorms};
use crate::assembly::{assemble, AlgebraicSystem, ProblemSpec};
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, Mesh, MeshFamily};
use crate::scalar::Scalar;
use crate::solver::{solve, SolveResult, SolverOptions};
use crate::sparse::SparseMatrix;
use crate::stab::{StabScheme, Stabilizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    /// Reaction dominated: `ε = 1e-8`, `b = (0.004, 0.012)`, `c = g = 1`, `u_b = 0`.
    Reaction,
    /// Convection dominated with discontinuous boundary data:
    /// `ε = 1e-2`, `b = (cos(-π/3), sin(-π/3))`, `c = g = 0`.
    Convection,
    /// Diffusion dominated with the smooth manufactured solution
    /// `u = 100 x²(1-x)² y(1-y)(1-2y)`: `ε = 10`, `b = (3, 2)`, `c = 1`.
    Smooth,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Reaction => "reaction",
            Example::Convection => "convection",
            Example::Smooth => "smooth",
        }
    }

    pub fn problem<T: Scalar>(self) -> ProblemSpec<T> {
        let zero: Arc<dyn Fn(T, T) -> T + Send + Sync> = Arc::new(|_, _| T::zero());
        let spec = match self {
            Example::Reaction => ProblemSpec::constant(T::lit(1e-8), [T::lit(0.004), T::lit(0.012)], T::one(), T::one(), zero),
            Example::Convection => {
                let angle = -T::PI() / T::lit(3.0);
                ProblemSpec::constant(
                    T::lit(1e-2),
                    [angle.cos(), angle.sin()],
                    T::zero(),
                    T::zero(),
                    Arc::new(convection_boundary::<T>),
                )
            }
            Example::Smooth => ProblemSpec::new(
                T::lit(10.0),
                Arc::new(|_, _| [T::lit(3.0), T::lit(2.0)]),
                Arc::new(|_, _| T::one()),
                Arc::new(smooth_source::<T>),
                zero,
                T::one(),
            ),
        };
        spec.expect("example coefficients are valid")
    }

    /// Exact solution and gradient, when known in closed form.
    pub fn exact<T: Scalar>(self) -> Option<(fn(T, T) -> T, fn(T, T) -> [T; 2])> {
        match self {
            Example::Smooth => Some((smooth_solution::<T>, smooth_gradient::<T>)),
            _ => None,
        }
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reaction" => Ok(Example::Reaction),
            "convection" => Ok(Example::Convection),
            "smooth" => Ok(Example::Smooth),
            other => Err(Error::InvalidArgument(format!(
                "unknown example '{other}' (expected reaction, convection or smooth)"
            ))),
        }
    }
}

/// Everything produced by solving one example on one mesh.
pub struct CaseRun<T> {
    pub mesh: Mesh<T>,
    pub problem: ProblemSpec<T>,
    pub system: AlgebraicSystem<T>,
    pub result: SolveResult<T>,
    /// `B(U)` at the returned solution.
    pub b: SparseMatrix<T>,
    /// Errors against the exact solution, when it is known.
    pub norms: Option<ErrorNorms>,
}

impl<T: Scalar> CaseRun<T> {
    pub fn min_max(&self) -> (T, T) {
        self.result
            .u
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Generates the mesh, assembles, solves and evaluates the errors.
pub fn run_case<T: Scalar>(
    example: Example,
    family: MeshFamily,
    ne: usize,
    scheme: StabScheme,
    lump_reaction: bool,
    opts: &SolverOptions<T>,
) -> Result<CaseRun<T>> {
    let mesh = generate_mesh::<T>(family, ne)?;
    let problem = example.problem::<T>();
    let system = assemble(&mesh, &problem, lump_reaction)?;
    let result = solve(&system, scheme, opts)?;
    let b = Stabilizer::new(&system.a, system.m, scheme).matrix(&result.u);
    let norms = match example.exact::<T>() {
        Some((u, grad)) => Some(error_norms(&mesh, u, grad, &result.u, &b, problem.epsilon, problem.sigma0)?),
        None => None,
    };
    Ok(CaseRun {
        mesh,
        problem,
        system,
        result,
        b,
        norms,
    })
}

/// Nodal boundary data: 0 on `x = 1` or `y = 0`, 1 elsewhere on the boundary.
pub fn convection_boundary<T: Scalar>(x: T, y: T) -> T {
    let tiny = T::lit(1e-12);
    if x >= T::one() - tiny || y <= tiny {
        T::zero()
    } else {
        T::one()
    }
}

pub fn smooth_solution<T: Scalar>(x: T, y: T) -> T {
    let one = T::one();
    T::lit(100.0) * x * x * (one - x) * (one - x) * y * (one - y) * (one - T::lit(2.0) * y)
}

pub fn smooth_gradient<T: Scalar>(x: T, y: T) -> [T; 2] {
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let xf = x * x * (one - x) * (one - x);
    let dxf = two * x * (one - x) * (one - two * x);
    let yf = y - T::lit(3.0) * y * y + two * y * y * y;
    let dyf = one - six * y + six * y * y;
    let h = T::lit(100.0);
    [h * dxf * yf, h * xf * dyf]
}

/// `-10 Δu + (3, 2)·∇u + u` for the manufactured solution, expanded.
pub fn smooth_source<T: Scalar>(x: T, y: T) -> T {
    let c = |v: f64| T::lit(v);
    let (x2, y2) = (x * x, y * y);
    let (x3, y3) = (x2 * x, y2 * y);
    let x4 = x2 * x2;
    let p = x4 * (c(2.0) * y3 + c(9.0) * y2 - c(131.0) * y + c(62.0))
        + x3 * (c(20.0) * y3 - c(54.0) * y2 + c(274.0) * y - c(124.0))
        + x2 * (c(-274.0) * y3 + c(423.0) * y2 - c(269.0) * y + c(62.0))
        + x * (c(252.0) * y3 - c(378.0) * y2 + c(126.0) * y)
        + (c(-40.0) * y3 + c(60.0) * y2 - c(20.0) * y);
    c(100.0) * p
}
