//! Best approximation by unweighted ridge sums over an r-set, in closed form.
//!
//! With all weights equal to one the optimal components are scaled marginals
//! of `f*`:
//!
//! ```text
//! g_1(y_1) = f_1*(y_1) / |Y^(1)| - (r - 1) A / |Y|
//! g_j(y_j) = f_j*(y_j) / |Y^(j)|                      j = 2..r
//! ```
//!
//! where `A` is the integral of `f*` over `Y` and `f_j*` its marginal along
//! `y_j`. The error follows from the same quantities without forming the
//! approximant.

use crate::domain::{combine, ridge_norm_sq, GridFunction, RidgeComponent};
use crate::geometry::DirectionBasis;
use crate::solution::{clamped_sqrt, ApproxSolution, Defect, Method, SolveError};
use crate::weighted::extremality_defect;

pub(crate) fn check_dimensions(f_star: &GridFunction, basis: &DirectionBasis) -> Result<(), SolveError> {
    let dom = f_star.domain();
    if basis.dim() != dom.dim() {
        return Err(SolveError::Mismatch {
            what: "domain dimension",
            expected: basis.dim(),
            got: dom.dim(),
        });
    }
    if basis.ridge_count() != dom.ridge_count() {
        return Err(SolveError::Mismatch {
            what: "ridge interval count",
            expected: basis.ridge_count(),
            got: dom.ridge_count(),
        });
    }
    Ok(())
}

/// The optimal components, without error or diagnostics.
pub fn closed_form_components(f_star: &GridFunction) -> Vec<RidgeComponent> {
    let dom = f_star.domain();
    let r = dom.ridge_count();
    let mean = f_star.integrate_full() / dom.measure();
    (0..r)
        .map(|j| {
            let g = f_star.marginal(j).scaled(1.0 / dom.complement_measure(j));
            if j == 0 {
                g.shifted(-((r - 1) as f64) * mean)
            } else {
                g
            }
        })
        .collect()
}

pub fn solve_unweighted(f_star: &GridFunction, basis: &DirectionBasis) -> Result<ApproxSolution, SolveError> {
    check_dimensions(f_star, basis)?;
    let components = closed_form_components(f_star);
    let error = error_closed_form(f_star, basis)?;
    let approximant = combine(f_star.domain(), &components, None);
    let residual_error = residual_error(f_star, &approximant, basis);
    let orthogonality_defect = extremality_defect(f_star, None, &components).value;
    Ok(ApproxSolution {
        components,
        error,
        residual_error,
        orthogonality_defect,
        method: Method::ClosedForm,
        convergence: None,
    })
}

/// `|det J|^{-1/2} (||f*||^2 - sum_i ||f_i*||^2 / |Y^(i)|^2 + (r-1) A^2 / |Y|)^{1/2}`
pub fn error_closed_form(f_star: &GridFunction, basis: &DirectionBasis) -> Result<f64, SolveError> {
    check_dimensions(f_star, basis)?;
    let dom = f_star.domain();
    let r = dom.ridge_count();
    let a = f_star.integrate_full();
    let norm_sq = f_star.norm_sq();
    let marginal_terms: f64 = (0..r)
        .map(|i| {
            let c = dom.complement_measure(i);
            ridge_norm_sq(&f_star.marginal(i), dom) / (c * c)
        })
        .sum();
    let radicand = norm_sq - marginal_terms + (r - 1) as f64 * a * a / dom.measure();
    Ok(basis.det().abs().powf(-0.5) * clamped_sqrt(radicand, norm_sq)?)
}

/// `|det J|^{-1/2} ||f* - approximant||_{L2(Y)}`
pub fn residual_error(f_star: &GridFunction, approximant: &GridFunction, basis: &DirectionBasis) -> f64 {
    basis.det().abs().powf(-0.5) * f_star.sub(approximant).norm_sq().sqrt()
}

/// Largest violation of the unweighted optimality condition
/// `g_j(y_j) = |Y^(j)|^{-1} * integral over Y^(j) of (f* - sum_{i != j} g_i)`
/// over every node of every ridge axis.
pub fn characterization_defect(components: &[RidgeComponent], f_star: &GridFunction) -> Defect {
    let dom = f_star.domain();
    let f = f_star.samples();
    let mut worst = Defect::none();
    for (j, gj) in components.iter().enumerate() {
        let rhs = dom.marginal_by(gj.axis, |idx| {
            let others: f64 = components
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, gi)| gi.values[dom.axis_position(idx, gi.axis)])
                .sum();
            f[idx] - others
        });
        let scale = 1.0 / dom.complement_measure(gj.axis);
        for (node, (lhs, rhs)) in gj.values.iter().zip(&rhs).enumerate() {
            worst = worst.worst(Defect {
                value: (lhs - scale * rhs).abs(),
                axis: gj.axis,
                node,
            });
        }
    }
    worst
}
