//! Artificial diffusion matrices: the linear upwind matrix `D`, the AFC
//! scheme with the Kuzmin limiter, and the monotone upwind-type scheme
//! (MUAS) with its nonsymmetric limiter `β`.
//!
//! All limiter vectors are indexed by the stored positions of the pattern of
//! `A`, so the value for `(i, j)` lives at `pattern.position(i, j)` and its
//! partner `(j, i)` at `pattern.transpose(k)`.

use serde::Serialize;

use crate::scalar::{max3, neg, pos, Scalar};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabScheme {
    /// No stabilization, `B = 0`.
    Galerkin,
    /// Linear full upwinding, `B = D`.
    UpwindD,
    /// Algebraic flux correction with the Kuzmin limiter.
    AfcKuzmin,
    /// Monotone upwind-type algebraic stabilization.
    Muas,
    /// MUAS with `q_ij` replaced by `|d_ij|` in `Q_i^±`.
    MuasDq,
}

impl StabScheme {
    pub fn is_linear(self) -> bool {
        matches!(self, StabScheme::Galerkin | StabScheme::UpwindD)
    }

    pub fn name(self) -> &'static str {
        match self {
            StabScheme::Galerkin => "galerkin",
            StabScheme::UpwindD => "upwind",
            StabScheme::AfcKuzmin => "afc-kuzmin",
            StabScheme::Muas => "muas",
            StabScheme::MuasDq => "muas-dq",
        }
    }
}

impl std::str::FromStr for StabScheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "galerkin" => StabScheme::Galerkin,
            "upwind" => StabScheme::UpwindD,
            "afc-kuzmin" | "afc" => StabScheme::AfcKuzmin,
            "muas" => StabScheme::Muas,
            "muas-dq" => StabScheme::MuasDq,
            other => return Err(crate::Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        })
    }
}

/// Per-row limiter sums. Rows `i >= M` carry `R_i^± = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterState<T> {
    pub p_plus: Vec<T>,
    pub p_minus: Vec<T>,
    pub q_plus: Vec<T>,
    pub q_minus: Vec<T>,
    pub r_plus: Vec<T>,
    pub r_minus: Vec<T>,
}

impl<T: Scalar> LimiterState<T> {
    fn new(n: usize) -> Self {
        Self {
            p_plus: vec![T::zero(); n],
            p_minus: vec![T::zero(); n],
            q_plus: vec![T::zero(); n],
            q_minus: vec![T::zero(); n],
            r_plus: vec![T::one(); n],
            r_minus: vec![T::one(); n],
        }
    }

    fn finish_row(&mut self, i: usize) {
        // no regularization: the ratio is only formed for nonzero P
        self.r_plus[i] = if self.p_plus[i] > T::zero() {
            T::one().min(self.q_plus[i] / self.p_plus[i])
        } else {
            T::one()
        };
        self.r_minus[i] = if self.p_minus[i] < T::zero() {
            T::one().min(self.q_minus[i] / self.p_minus[i])
        } else {
            T::one()
        };
    }
}

/// `d_ij = d_ji = -max{a_ij, 0, a_ji}` off the diagonal, zero row sums.
pub fn compute_d<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<T> {
    let p = a.pattern().clone();
    let av = a.values();
    let mut d = SparseMatrix::zeros(p.clone());
    let dv = d.values_mut();
    for i in 0..p.n() {
        let mut diag = T::zero();
        for k in p.row_range(i) {
            if p.col(k) != i {
                let v = -max3(av[k], T::zero(), av[p.transpose(k)]);
                dv[k] = v;
                diag -= v;
            }
        }
        dv[p.diag(i)] = diag;
    }
    d
}

#[derive(Debug, Clone)]
pub struct KuzminLimiter<T> {
    /// Symmetric limiter `α_ij = α_ji`, one value per stored entry.
    pub alpha: Vec<T>,
    /// Row-oriented `α̃_ij` before symmetrization.
    pub alpha_tilde: Vec<T>,
    pub state: LimiterState<T>,
    /// Pairs with `a_ij = a_ji` and `d_ij != 0`, where the scheme is not
    /// uniquely defined. The row of the smaller index is used there.
    pub ambiguous_pairs: usize,
}

/// Kuzmin limiter for the fluxes `f_ij = d_ij (u_j - u_i)`.
pub fn kuzmin_alpha<T: Scalar>(a: &SparseMatrix<T>, d: &SparseMatrix<T>, u: &[T], m: usize) -> KuzminLimiter<T> {
    let p = a.pattern();
    let (av, dv) = (a.values(), d.values());
    let n = p.n();
    let mut st = LimiterState::new(n);
    for i in 0..m {
        for k in p.row_range(i) {
            let j = p.col(k);
            if j == i {
                continue;
            }
            let f = dv[k] * (u[j] - u[i]);
            if av[p.transpose(k)] <= av[k] {
                st.p_plus[i] += pos(f);
                st.p_minus[i] += neg(f);
            }
            st.q_plus[i] -= neg(f);
            st.q_minus[i] -= pos(f);
        }
        st.finish_row(i);
    }

    let mut alpha_tilde = vec![T::one(); p.nnz()];
    for i in 0..n {
        for k in p.row_range(i) {
            let j = p.col(k);
            let f = dv[k] * (u[j] - u[i]);
            alpha_tilde[k] = if f > T::zero() {
                st.r_plus[i]
            } else if f < T::zero() {
                st.r_minus[i]
            } else {
                T::one()
            };
        }
    }

    let mut alpha = vec![T::one(); p.nnz()];
    let mut ambiguous_pairs = 0;
    for i in 0..n {
        for k in p.row_range(i) {
            let j = p.col(k);
            if j <= i {
                continue;
            }
            let kt = p.transpose(k);
            let v = if av[kt] < av[k] {
                alpha_tilde[k]
            } else if av[k] < av[kt] {
                alpha_tilde[kt]
            } else {
                if dv[k] != T::zero() {
                    ambiguous_pairs += 1;
                }
                alpha_tilde[k]
            };
            alpha[k] = v;
            alpha[kt] = v;
        }
    }
    KuzminLimiter {
        alpha,
        alpha_tilde,
        state: st,
        ambiguous_pairs,
    }
}

/// `b_ij = (1 - α_ij) d_ij` off the diagonal, zero row sums.
pub fn afc_b<T: Scalar>(d: &SparseMatrix<T>, alpha: &[T]) -> SparseMatrix<T> {
    let p = d.pattern().clone();
    let dv = d.values();
    let mut b = SparseMatrix::zeros(p.clone());
    let bv = b.values_mut();
    for i in 0..p.n() {
        let mut diag = T::zero();
        for k in p.row_range(i) {
            if p.col(k) != i {
                let v = (T::one() - alpha[k]) * dv[k];
                bv[k] = v;
                diag -= v;
            }
        }
        bv[p.diag(i)] = diag;
    }
    b
}

#[derive(Debug, Clone)]
pub struct MuasLimiter<T> {
    /// Row-oriented `β_ij`, one value per stored entry (not symmetric).
    pub beta: Vec<T>,
    pub state: LimiterState<T>,
}

/// Limiter `β` of the monotone upwind-type scheme. With `dq_variant` the
/// weights in `Q_i^±` are `|d_ij|` instead of `q_ij = max{|a_ij|, a_ji}`.
pub fn muas_beta<T: Scalar>(a: &SparseMatrix<T>, u: &[T], m: usize, dq_variant: bool) -> MuasLimiter<T> {
    let p = a.pattern();
    let av = a.values();
    let n = p.n();
    let mut st = LimiterState::new(n);
    for i in 0..m {
        for k in p.row_range(i) {
            let j = p.col(k);
            if j == i {
                continue;
            }
            let (aij, aji) = (av[k], av[p.transpose(k)]);
            let du = u[i] - u[j];
            if aij > T::zero() {
                st.p_plus[i] += aij * pos(du);
                st.p_minus[i] += aij * neg(du);
            }
            let q = if dq_variant {
                max3(aij, T::zero(), aji)
            } else {
                aij.abs().max(aji)
            };
            st.q_plus[i] += q * pos(-du);
            st.q_minus[i] += q * neg(-du);
        }
        st.finish_row(i);
    }

    let mut beta = vec![T::zero(); p.nnz()];
    for i in 0..n {
        for k in p.row_range(i) {
            let j = p.col(k);
            beta[k] = if u[i] > u[j] {
                T::one() - st.r_plus[i]
            } else if u[i] < u[j] {
                T::one() - st.r_minus[i]
            } else {
                T::zero()
            };
        }
    }
    MuasLimiter { beta, state: st }
}

/// `b_ij = -max{β_ij a_ij, 0, β_ji a_ji}` off the diagonal, zero row sums.
pub fn muas_b<T: Scalar>(a: &SparseMatrix<T>, beta: &[T]) -> SparseMatrix<T> {
    let p = a.pattern().clone();
    let av = a.values();
    let mut b = SparseMatrix::zeros(p.clone());
    let bv = b.values_mut();
    for i in 0..p.n() {
        let mut diag = T::zero();
        for k in p.row_range(i) {
            if p.col(k) != i {
                let kt = p.transpose(k);
                let v = -max3(beta[k] * av[k], T::zero(), beta[kt] * av[kt]);
                bv[k] = v;
                diag -= v;
            }
        }
        bv[p.diag(i)] = diag;
    }
    b
}

/// Evaluates `B(U)` for a fixed matrix `A` and scheme.
#[derive(Debug, Clone)]
pub struct Stabilizer<T> {
    scheme: StabScheme,
    a: SparseMatrix<T>,
    d: SparseMatrix<T>,
    m: usize,
}

impl<T: Scalar> Stabilizer<T> {
    pub fn new(a: &SparseMatrix<T>, m: usize, scheme: StabScheme) -> Self {
        Self {
            scheme,
            a: a.clone(),
            d: compute_d(a),
            m,
        }
    }

    pub fn scheme(&self) -> StabScheme {
        self.scheme
    }

    pub fn d(&self) -> &SparseMatrix<T> {
        &self.d
    }

    /// The artificial diffusion matrix `B(U)`.
    pub fn matrix(&self, u: &[T]) -> SparseMatrix<T> {
        match self.scheme {
            StabScheme::Galerkin => SparseMatrix::zeros(self.a.pattern().clone()),
            StabScheme::UpwindD => self.d.clone(),
            StabScheme::AfcKuzmin => {
                let lim = kuzmin_alpha(&self.a, &self.d, u, self.m);
                afc_b(&self.d, &lim.alpha)
            }
            StabScheme::Muas | StabScheme::MuasDq => {
                let lim = muas_beta(&self.a, u, self.m, self.scheme == StabScheme::MuasDq);
                muas_b(&self.a, &lim.beta)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(a: Vec<Vec<f64>>) -> SparseMatrix<f64> {
        SparseMatrix::from_dense(&a).unwrap()
    }

    /// Brute-force dense evaluation of `d_ij` over all index pairs.
    fn dense_d(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i][j] = -[a[i][j], 0.0, a[j][i]].into_iter().fold(f64::MIN, f64::max);
                }
            }
            d[i][i] = -(0..n).filter(|&j| j != i).map(|j| d[i][j]).sum::<f64>();
        }
        d
    }

    #[test]
    fn d_of_nonpositive_offdiagonals_is_zero() {
        let a = mat(vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert!(compute_d(&a).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn d_direct_formula() {
        let d = compute_d(&mat(vec![vec![1.0, 3.0], vec![-1.0, 1.0]]));
        assert_eq!(d.to_dense(), vec![vec![3.0, -3.0], vec![-3.0, 3.0]]);
    }

    #[test]
    fn d_three_by_three_matches_brute_force() {
        let a = vec![vec![5.0, 1.0, -1.0], vec![0.0, 5.0, 2.0], vec![1.0, -1.0, 5.0]];
        let d = compute_d(&mat(a.clone())).to_dense();
        assert_eq!(d, dense_d(&a));
        assert_eq!((d[0][1], d[0][2], d[1][2]), (-1.0, -1.0, -2.0));
        assert_eq!((d[0][0], d[1][1], d[2][2]), (2.0, 3.0, 3.0));
    }

    fn three_node() -> SparseMatrix<f64> {
        // a12 = 2, a21 = -1, a13 = 1, a31 = 0 (stored), nodes 2 and 3 unconnected
        mat(vec![vec![4.0, 2.0, 1.0], vec![-1.0, 4.0, 0.0], vec![0.0, 0.0, 4.0]])
    }

    #[test]
    fn kuzmin_constant_u_gives_unit_alpha() {
        let a = three_node();
        let d = compute_d(&a);
        let lim = kuzmin_alpha(&a, &d, &[3.0, 3.0, 3.0], 1);
        assert!(lim.alpha.iter().all(|&v| v == 1.0));
        assert!(afc_b(&d, &lim.alpha).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kuzmin_three_node_example() {
        let a = three_node();
        let d = compute_d(&a);
        assert_eq!((d.get(0, 1), d.get(0, 2)), (-2.0, -1.0));
        let lim = kuzmin_alpha(&a, &d, &[2.0, 0.0, 1.0], 1);
        // f12 = 4, f13 = 1, both counted in P1+, Q1+ = 0
        assert_eq!(lim.state.p_plus[0], 5.0);
        assert_eq!(lim.state.q_plus[0], 0.0);
        assert_eq!(lim.state.r_plus[0], 0.0);
        let k12 = a.pattern().position(0, 1).unwrap();
        let k13 = a.pattern().position(0, 2).unwrap();
        assert_eq!(lim.alpha_tilde[k12], 0.0);
        assert_eq!(lim.alpha_tilde[k13], 0.0);
        let b = afc_b(&d, &lim.alpha);
        assert_eq!(b.get(0, 1), -2.0);
        assert_eq!(b.get(1, 0), -2.0);
    }

    #[test]
    fn kuzmin_vanishing_p_sets_r_to_one() {
        let a = three_node();
        let d = compute_d(&a);
        // u1 below both neighbors: all f1j < 0, so P1+ = 0
        let lim = kuzmin_alpha(&a, &d, &[0.0, 2.0, 1.0], 1);
        assert_eq!(lim.state.p_plus[0], 0.0);
        assert_eq!(lim.state.r_plus[0], 1.0);
        // boundary rows are never limited
        assert_eq!(lim.state.r_plus[1], 1.0);
        assert_eq!(lim.state.r_minus[2], 1.0);
    }

    #[test]
    fn afc_b_limits() {
        let a = three_node();
        let d = compute_d(&a);
        let ones = vec![1.0; d.values().len()];
        let zeros = vec![0.0; d.values().len()];
        assert!(afc_b(&d, &ones).values().iter().all(|&v| v == 0.0));
        assert_eq!(afc_b(&d, &zeros), d);
    }

    #[test]
    fn muas_strict_local_max() {
        let a = three_node();
        let lim = muas_beta(&a, &[2.0, 0.0, 1.0], 1, false);
        assert_eq!(lim.state.p_plus[0], 5.0);
        assert_eq!(lim.state.q_plus[0], 0.0);
        assert_eq!(lim.state.r_plus[0], 0.0);
        let p = a.pattern();
        assert_eq!(lim.beta[p.position(0, 1).unwrap()], 1.0);
        assert_eq!(lim.beta[p.position(0, 2).unwrap()], 1.0);
        // β21 is irrelevant for b12 because a21 < 0
        for beta21 in [0.0, 0.3, 1.0] {
            let mut beta = lim.beta.clone();
            beta[p.position(1, 0).unwrap()] = beta21;
            let b = muas_b(&a, &beta);
            assert_eq!(b.get(0, 1), -2.0);
            assert_eq!(b.get(1, 0), -2.0);
        }
    }

    #[test]
    fn muas_constant_u_gives_zero_beta() {
        let a = three_node();
        let lim = muas_beta(&a, &[0.7, 0.7, 0.7], 1, false);
        assert!(lim.beta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn muas_b_special_cases() {
        let a = mat(vec![vec![3.0, -1.0, 2.0], vec![-2.0, 3.0, 0.5], vec![1.0, 4.0, 3.0]]);
        let ones = vec![1.0; a.values().len()];
        // β ≡ 1 reproduces D
        assert_eq!(muas_b(&a, &ones), compute_d(&a));
        // both entries nonpositive -> zero
        let b = muas_b(&a, &ones);
        assert_eq!(b.get(0, 1), 0.0);
    }

    #[test]
    fn muas_q_weights() {
        // u1 is a local min relative to node 2 only, check Q1- uses q12 = max{|a12|, a21}
        let a = mat(vec![vec![4.0, -3.0], vec![1.0, 4.0]]);
        let lim = muas_beta(&a, &[1.0, 0.0], 1, false);
        assert_eq!(lim.state.q_minus[0], -3.0);
        let lim = muas_beta(&a, &[1.0, 0.0], 1, true);
        assert_eq!(lim.state.q_minus[0], -1.0);
    }

    #[test]
    fn stabilizer_dispatch() {
        let a = three_node();
        let u = [2.0, 0.0, 1.0];
        assert!(Stabilizer::new(&a, 1, StabScheme::Galerkin).matrix(&u).values().iter().all(|&v| v == 0.0));
        assert_eq!(Stabilizer::new(&a, 1, StabScheme::UpwindD).matrix(&u), compute_d(&a));
        for s in ["galerkin", "upwind", "afc-kuzmin", "muas", "muas-dq"] {
            assert_eq!(s.parse::<StabScheme>().unwrap().name(), s);
        }
        assert!("bogus".parse::<StabScheme>().is_err());
    }
}
