//! Brute-force discrete least squares over the same quadrature inner product
//! the solvers use. Slow and dense; meant for validating small instances.

use nalgebra::{DMatrix, DVector};

use crate::domain::{GridFunction, RidgeComponent};
use crate::solution::ApproxSolution;
use crate::weighted::WeightedProblem;

/// Singular values below this fraction of the largest are dropped.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

/// Rows are tensor nodes scaled by the square root of their quadrature
/// weight; column `i * q + k` is `w_i*(y) e_ik(y_i)` with `e_ik` the
/// Lagrange cardinal function of node `k` on axis `i`.
#[derive(Debug, Clone)]
pub struct DiscreteLSModel {
    pub design: DMatrix<f64>,
    pub rhs: DVector<f64>,
    ridge_count: usize,
    order: usize,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub coefficients: Vec<f64>,
    pub components: Vec<RidgeComponent>,
    /// Discrete `||f* - approximant||_{L2(Y)}`.
    pub residual_norm: f64,
    /// `residual_norm * |det J|^{-1/2}`
    pub error: f64,
    pub approximant: GridFunction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub error_gap: f64,
    /// Sup-norm over the nodes of the difference of the combined approximants.
    pub approximant_gap: f64,
}

impl DiscreteLSModel {
    pub fn build(problem: &WeightedProblem) -> Self {
        let dom = problem.domain();
        let r = dom.ridge_count();
        let q = dom.order();
        let rows = dom.node_count();
        let f = problem.f_star().samples();
        let mut design = DMatrix::zeros(rows, r * q);
        let mut rhs = DVector::zeros(rows);
        for idx in 0..rows {
            let s = dom.tensor_weight(idx).sqrt();
            rhs[idx] = s * f[idx];
            for (i, w) in problem.weights().iter().enumerate() {
                design[(idx, i * q + dom.axis_position(idx, i))] = s * w.samples()[idx];
            }
        }
        Self {
            design,
            rhs,
            ridge_count: r,
            order: q,
        }
    }

    pub fn normal_matrix(&self) -> DMatrix<f64> {
        self.design.transpose() * &self.design
    }
}

/// Minimum-norm least-squares solution through a truncated SVD.
pub fn solve_ls(model: &DiscreteLSModel) -> (Vec<f64>, f64) {
    let svd = model.design.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = SINGULAR_CUTOFF * sigma_max;
    let coef = svd
        .solve(&model.rhs, eps)
        .expect("U and V^T were requested from the SVD");
    let residual = (&model.design * &coef - &model.rhs).norm();
    (coef.iter().copied().collect(), residual)
}

pub fn run_oracle(problem: &WeightedProblem) -> OracleResult {
    let model = DiscreteLSModel::build(problem);
    let (coefficients, residual_norm) = solve_ls(&model);
    let components: Vec<RidgeComponent> = (0..model.ridge_count)
        .map(|i| RidgeComponent {
            axis: i,
            values: coefficients[i * model.order..(i + 1) * model.order].to_vec(),
        })
        .collect();
    let approximant = problem.approximant(&components);
    OracleResult {
        error: residual_norm * problem.basis().det().abs().powf(-0.5),
        coefficients,
        components,
        residual_norm,
        approximant,
    }
}

/// Compares the error and the combined approximant of a solver solution
/// against the oracle. Individual components are never compared: they are
/// only determined up to terms that cancel in the sum.
pub fn compare(problem: &WeightedProblem, solution: &ApproxSolution, oracle: &OracleResult) -> CompareReport {
    let approximant = problem.approximant(&solution.components);
    CompareReport {
        error_gap: (solution.error - oracle.error).abs(),
        approximant_gap: approximant.max_abs_diff(&oracle.approximant),
    }
}
