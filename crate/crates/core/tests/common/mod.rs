#![allow(dead_code)]

use algstab::stab::{compute_d, kuzmin_alpha, muas_beta};
use algstab::{SparseMatrix, StabScheme, Stabilizer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random algebraic instance: structurally symmetric `A`, `M` interior
/// rows and a vector `U` with deliberate ties.
pub struct Instance {
    pub a: SparseMatrix<f64>,
    pub m: usize,
    pub u: Vec<f64>,
}

pub fn random_instance(seed: u64, max_n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=n);
    let density = rng.gen_range(0.1..0.6);
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        dense[i][i] = rng.gen_range(1.0..5.0);
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                let pick = |rng: &mut ChaCha8Rng| match rng.gen_range(0..6) {
                    0 => 0.0,
                    _ => rng.gen_range(-2.0..2.0),
                };
                let aij = pick(&mut rng);
                // occasional exact ties a_ij = a_ji
                let aji = if rng.gen_bool(0.15) { aij } else { pick(&mut rng) };
                dense[i][j] = aij;
                dense[j][i] = aji;
            }
        }
    }
    let a = SparseMatrix::from_dense(&dense).expect("square");
    let u = (0..n)
        .map(|_| if rng.gen_bool(0.3) { (rng.gen_range(-3..=3) as f64) / 2.0 } else { rng.gen_range(-1.5..1.5) })
        .collect();
    Instance { a, m, u }
}

/// Stored off-diagonal neighbors of row `i`.
pub fn neighbors(a: &SparseMatrix<f64>, i: usize) -> Vec<usize> {
    a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect()
}

pub struct Axioms {
    pub symmetric: bool,
    pub nonpositive_offdiag: bool,
    pub zero_row_sums: bool,
    pub sparsity: bool,
}

pub fn check_axioms(a: &SparseMatrix<f64>, b: &SparseMatrix<f64>) -> Axioms {
    let n = a.n();
    let dense_b = b.to_dense();
    let mut ax = Axioms { symmetric: true, nonpositive_offdiag: true, zero_row_sums: true, sparsity: true };
    for i in 0..n {
        let scale = dense_b[i].iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let sum: f64 = dense_b[i].iter().sum();
        if sum.abs() > 1e-14 * scale {
            ax.zero_row_sums = false;
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if dense_b[i][j] != dense_b[j][i] {
                ax.symmetric = false;
            }
            if dense_b[i][j] > 0.0 {
                ax.nonpositive_offdiag = false;
            }
            if dense_b[i][j] != 0.0 && a.get(i, j) == 0.0 && a.get(j, i) == 0.0 {
                ax.sparsity = false;
            }
        }
    }
    ax
}

/// Both sides of `sum_ij v_i b_ij (v_j - v_i) = -1/2 sum_ij b_ij (v_j - v_i)^2`.
pub fn psd_identity(b: &SparseMatrix<f64>, v: &[f64]) -> (f64, f64) {
    let n = b.n();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..n {
        for (j, bij) in b.row(i) {
            lhs += v[i] * bij * (v[j] - v[i]);
            rhs += -0.5 * bij * (v[j] - v[i]).powi(2);
        }
    }
    (lhs, rhs)
}

/// `(i, j)` with `a_ij + b_ij > tol` at a strict local extremum `i < M`.
pub fn a2_failures(a: &SparseMatrix<f64>, b: &SparseMatrix<f64>, u: &[f64], m: usize) -> Vec<(usize, usize)> {
    let s: Vec<Vec<usize>> = (0..m).map(|i| neighbors(a, i)).collect();
    algstab::analysis::a2_violations(a, b, u, &s, 1e-13)
}

pub fn beta_values(inst: &Instance, u: &[f64]) -> Vec<f64> {
    muas_beta(&inst.a, u, inst.m, false).beta
}

pub fn b_matrix(inst: &Instance, scheme: StabScheme, u: &[f64]) -> SparseMatrix<f64> {
    Stabilizer::new(&inst.a, inst.m, scheme).matrix(u)
}

pub fn afc_b_matrix(a: &SparseMatrix<f64>, m: usize, u: &[f64]) -> SparseMatrix<f64> {
    let d = compute_d(a);
    let lim = kuzmin_alpha(a, &d, u, m);
    algstab::stab::afc_b(&d, &lim.alpha)
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}
