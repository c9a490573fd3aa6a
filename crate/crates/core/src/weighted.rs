//! Weighted ridge approximation by block Gauss–Seidel.
//!
//! For fixed weights the best `g_j` given the other components is
//!
//! ```text
//! g_j(t) = integral over Y^(j) of (f* - sum_{i != j} w_i* g_i) w_j*
//!          / integral over Y^(j) of w_j*^2,      y_j = t
//! ```
//!
//! which is the orthogonal projection of the partial residual onto
//! `{ w_j*(y) h(y_j) }`. Cycling through `j = 1..r` is block coordinate
//! descent on a convex quadratic, so the residual norm never increases.

use std::sync::Arc;

use crate::closed_form::{check_dimensions, closed_form_components, residual_error};
use crate::domain::{combine, GridFunction, RSetDomain, RidgeComponent};
use crate::geometry::DirectionBasis;
use crate::solution::{clamped_sqrt, ApproxSolution, Convergence, Defect, Method, SolveError};

/// Slice masses below `MASS_FLOOR * |Y^(j)| * max w_j*^2` leave `g_j`
/// undetermined and are rejected.
pub const MASS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Zeros,
    ClosedForm,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::Zeros => "zeros",
            InitMode::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once the scaled sup-norm change of every component in a sweep is
    /// below this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// `g_j <- (1 - damping) g_j + damping * update`
    pub damping: f64,
    pub init: InitMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_sweeps: 10_000,
            damping: 1.0,
            init: InitMode::Zeros,
        }
    }
}

impl SolverConfig {
    pub fn is_valid(&self) -> bool {
        self.tolerance > 0.0 && self.max_sweeps >= 1 && self.damping > 0.0 && self.damping <= 1.0
    }
}

#[derive(Debug, Clone)]
pub struct WeightedProblem {
    f_star: GridFunction,
    weights: Vec<GridFunction>,
    basis: DirectionBasis,
    /// Per ridge axis and node, the integral of `w_j*^2` over `Y^(j)`.
    slice_mass: Vec<Vec<f64>>,
}

impl WeightedProblem {
    pub fn new(f_star: GridFunction, weights: Vec<GridFunction>, basis: DirectionBasis) -> Result<Self, SolveError> {
        check_dimensions(&f_star, &basis)?;
        let dom = Arc::clone(f_star.domain());
        if weights.len() != dom.ridge_count() {
            return Err(SolveError::Mismatch {
                what: "weight count",
                expected: dom.ridge_count(),
                got: weights.len(),
            });
        }
        for w in &weights {
            if w.samples().len() != dom.node_count() {
                return Err(SolveError::Mismatch {
                    what: "weight sample count",
                    expected: dom.node_count(),
                    got: w.samples().len(),
                });
            }
        }
        let mut slice_mass = Vec::with_capacity(weights.len());
        for (j, w) in weights.iter().enumerate() {
            let s = w.samples();
            let mass = dom.marginal_by(j, |idx| s[idx] * s[idx]);
            let peak = s.iter().fold(0.0f64, |m, v| m.max(v * v));
            let floor = MASS_FLOOR * dom.complement_measure(j) * peak;
            if let Some(node) = mass.iter().position(|&m| m.is_nan() || m <= floor) {
                return Err(SolveError::ZeroSliceMass {
                    axis: j,
                    node,
                    coordinate: dom.rule(j).nodes[node],
                });
            }
            slice_mass.push(mass);
        }
        Ok(Self {
            f_star,
            weights,
            basis,
            slice_mass,
        })
    }

    /// All weights identically one.
    pub fn unweighted(f_star: GridFunction, basis: DirectionBasis) -> Result<Self, SolveError> {
        let ones = (0..f_star.domain().ridge_count())
            .map(|_| GridFunction::constant(f_star.domain(), 1.0))
            .collect();
        Self::new(f_star, ones, basis)
    }

    pub fn domain(&self) -> &Arc<RSetDomain> {
        self.f_star.domain()
    }

    pub fn f_star(&self) -> &GridFunction {
        &self.f_star
    }

    pub fn weights(&self) -> &[GridFunction] {
        &self.weights
    }

    pub fn basis(&self) -> &DirectionBasis {
        &self.basis
    }

    pub fn slice_mass(&self, axis: usize) -> &[f64] {
        &self.slice_mass[axis]
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(GridFunction::is_identically_one)
    }

    pub fn approximant(&self, components: &[RidgeComponent]) -> GridFunction {
        combine(self.domain(), components, Some(&self.weights))
    }

    /// `||f* - sum w_i* g_i||_{L2(Y)}`
    pub fn residual_norm(&self, components: &[RidgeComponent]) -> f64 {
        self.f_star.sub(&self.approximant(components)).norm_sq().sqrt()
    }

    /// The exact minimizer over `g_j` with the other components held fixed.
    pub fn update_component(&self, current: &[RidgeComponent], j: usize) -> RidgeComponent {
        let dom = self.domain();
        let f = self.f_star.samples();
        let wj = self.weights[j].samples();
        let numerator = dom.marginal_by(j, |idx| {
            let others: f64 = current
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(i, gi)| self.weights[i].samples()[idx] * gi.values[dom.axis_position(idx, i)])
                .sum();
            (f[idx] - others) * wj[idx]
        });
        RidgeComponent {
            axis: j,
            values: numerator
                .iter()
                .zip(&self.slice_mass[j])
                .map(|(num, mass)| num / mass)
                .collect(),
        }
    }

    pub fn solve_fixed_point(&self, cfg: &SolverConfig) -> Result<ApproxSolution, SolveError> {
        let dom = self.domain();
        let r = dom.ridge_count();
        let q = dom.order();
        let mut components: Vec<RidgeComponent> = match cfg.init {
            InitMode::Zeros => (0..r).map(|j| RidgeComponent::zeros(j, q)).collect(),
            InitMode::ClosedForm => closed_form_components(&self.f_star),
        };
        let mut history = vec![self.residual_norm(&components)];
        let mut last_change = f64::INFINITY;
        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < cfg.max_sweeps {
            sweeps += 1;
            let mut change = 0.0f64;
            for j in 0..r {
                let update = self.update_component(&components, j);
                let old = &components[j];
                let next = RidgeComponent {
                    axis: j,
                    values: old
                        .values
                        .iter()
                        .zip(&update.values)
                        .map(|(o, u)| (1.0 - cfg.damping) * o + cfg.damping * u)
                        .collect(),
                };
                let diff = next
                    .values
                    .iter()
                    .zip(&old.values)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                change = change.max(diff / (1.0 + next.sup_norm()));
                components[j] = next;
            }
            history.push(self.residual_norm(&components));
            last_change = change;
            if change < cfg.tolerance {
                converged = true;
                break;
            }
        }

        let solution = self.finish(
            components,
            Method::FixedPoint,
            Some(Convergence {
                converged,
                sweeps,
                last_change,
                residual_history: history,
            }),
        )?;
        if converged {
            Ok(solution)
        } else {
            Err(SolveError::NotConverged {
                sweeps,
                last_change,
                solution: Box::new(solution),
            })
        }
    }

    /// Attaches the error and diagnostics to a set of components.
    pub(crate) fn finish(
        &self,
        components: Vec<RidgeComponent>,
        method: Method,
        convergence: Option<Convergence>,
    ) -> Result<ApproxSolution, SolveError> {
        let approximant = self.approximant(&components);
        let det = self.basis.det().abs();
        let residual_error = residual_error(&self.f_star, &approximant, &self.basis);
        // the norm identity only holds at the best approximation; an
        // unconverged iterate reports its actual distance instead
        let error = if convergence.as_ref().is_none_or(|c| c.converged) {
            error_from_norms(self.f_star.norm_sq() / det, approximant.norm_sq() / det)?
        } else {
            residual_error
        };
        let orthogonality_defect = self.verify_extremality(&components).value;
        Ok(ApproxSolution {
            components,
            error,
            residual_error,
            orthogonality_defect,
            method,
            convergence,
        })
    }

    pub fn verify_extremality(&self, components: &[RidgeComponent]) -> Defect {
        extremality_defect(&self.f_star, Some(&self.weights), components)
    }
}

/// `E = (||f||^2 - ||approximant||^2)^{1/2}`, both norms on `X`. Valid at the
/// best approximation, where the residual is orthogonal to the approximant.
pub fn error_from_norms(f_norm_sq: f64, approximant_norm_sq: f64) -> Result<f64, SolveError> {
    clamped_sqrt(f_norm_sq - approximant_norm_sq, f_norm_sq)
}

/// Largest normalized inner product of the residual `f* - sum w_i* g_i` with
/// `w_j*(y) h(y_j)`, where `h` runs over the Lagrange cardinal functions of
/// the axis-`j` nodes. Zero exactly at the best approximation.
pub fn extremality_defect(
    f_star: &GridFunction,
    weights: Option<&[GridFunction]>,
    components: &[RidgeComponent],
) -> Defect {
    let dom = f_star.domain();
    let residual = f_star.sub(&combine(dom, components, weights));
    let res = residual.samples();
    let f_norm = f_star.norm_sq().sqrt();
    let f_norm = if f_norm > 0.0 { f_norm } else { 1.0 };
    let mut worst = Defect::none();
    for (j, gj) in components.iter().enumerate() {
        let axis = gj.axis;
        let w = |idx: usize| weights.map_or(1.0, |w| w[j].samples()[idx]);
        let rule = dom.rule(axis);
        // h is 1 at node k and 0 at the other axis nodes, so both integrals
        // reduce to slice sums weighted by the axis-k Gauss weight
        let inner = dom.marginal_by(axis, |idx| res[idx] * w(idx));
        let mass = dom.marginal_by(axis, |idx| w(idx) * w(idx));
        for node in 0..dom.order() {
            let wk = rule.weights[node];
            let ip = wk * inner[node];
            let h_norm = (wk * mass[node]).sqrt();
            let value = if h_norm > 0.0 {
                ip.abs() / (f_norm * h_norm)
            } else {
                0.0
            };
            worst = worst.worst(Defect { value, axis, node });
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::solve_unweighted;

    fn square(q: usize) -> Arc<RSetDomain> {
        Arc::new(RSetDomain::new(&[(0.0, 1.0), (0.0, 1.0)], &[], q).unwrap())
    }

    fn weighted_product(q: usize) -> WeightedProblem {
        let dom = square(q);
        let f = GridFunction::sample_fn(&dom, |y| y[0] * y[1]).unwrap();
        let w1 = GridFunction::sample_fn(&dom, |y| 1.0 + y[1]).unwrap();
        let w2 = GridFunction::constant(&dom, 1.0);
        WeightedProblem::new(f, vec![w1, w2], DirectionBasis::identity(2)).unwrap()
    }

    #[test]
    fn slice_mass_of_one_plus_y2() {
        let p = weighted_product(4);
        for &m in p.slice_mass(0) {
            assert!((m - 7.0 / 3.0).abs() < 1e-14);
        }
        for &m in p.slice_mass(1) {
            assert!((m - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_weight_update_is_scaled_marginal() {
        let dom = square(4);
        let f = GridFunction::sample_fn(&dom, |y| (y[0] + 2.0 * y[1]).powi(2)).unwrap();
        let p = WeightedProblem::unweighted(f.clone(), DirectionBasis::identity(2)).unwrap();
        let zeros = vec![RidgeComponent::zeros(0, 4), RidgeComponent::zeros(1, 4)];
        let u = p.update_component(&zeros, 0);
        let m = f.marginal(0);
        for (a, b) in u.values.iter().zip(&m.values) {
            assert!((a - b / dom.complement_measure(0)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_solution_is_a_fixed_point() {
        let dom = square(4);
        let f = GridFunction::sample_fn(&dom, |y| y[0] * y[1]).unwrap();
        let exact = solve_unweighted(&f, &DirectionBasis::identity(2)).unwrap();
        let p = WeightedProblem::unweighted(f, DirectionBasis::identity(2)).unwrap();
        for j in 0..2 {
            let u = p.update_component(&exact.components, j);
            for (a, b) in u.values.iter().zip(&exact.components[j].values) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_weight_is_rejected() {
        let dom = square(3);
        let f = GridFunction::constant(&dom, 1.0);
        let err = WeightedProblem::new(
            f,
            vec![GridFunction::constant(&dom, 0.0), GridFunction::constant(&dom, 1.0)],
            DirectionBasis::identity(2),
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::ZeroSliceMass { axis: 0, .. }));
    }

    #[test]
    fn subspace_member_recovered() {
        let dom = square(5);
        let f = GridFunction::sample_fn(&dom, |y| (1.0 + y[1]) * (y[0] * y[0] - 0.3)).unwrap();
        let w1 = GridFunction::sample_fn(&dom, |y| 1.0 + y[1]).unwrap();
        let w2 = GridFunction::sample_fn(&dom, |y| 2.0 + y[0]).unwrap();
        let p = WeightedProblem::new(f, vec![w1, w2], DirectionBasis::identity(2)).unwrap();
        let sol = p.solve_fixed_point(&SolverConfig::default()).unwrap();
        assert!(sol.residual_error < 1e-9, "{}", sol.residual_error);
    }

    #[test]
    fn weighted_solve_descends_and_is_stationary() {
        let p = weighted_product(6);
        let cfg = SolverConfig::default();
        let sol = p.solve_fixed_point(&cfg).unwrap();
        let conv = sol.convergence.as_ref().unwrap();
        assert!(conv.converged);
        for w in conv.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(
            sol.orthogonality_defect < 10.0 * cfg.tolerance,
            "{}",
            sol.orthogonality_defect
        );
        for j in 0..2 {
            let u = p.update_component(&sol.components, j);
            for (a, b) in u.values.iter().zip(&sol.components[j].values) {
                assert!((a - b).abs() <= 10.0 * cfg.tolerance);
            }
        }
        assert!((sol.error - sol.residual_error).abs() < 1e-8);
    }

    #[test]
    fn zero_components_are_not_extremal() {
        let p = weighted_product(4);
        let zeros = vec![RidgeComponent::zeros(0, 4), RidgeComponent::zeros(1, 4)];
        assert!(p.verify_extremality(&zeros).value > 0.1);
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = weighted_product(4);
        let cfg = SolverConfig {
            max_sweeps: 1,
            ..SolverConfig::default()
        };
        match p.solve_fixed_point(&cfg) {
            Err(SolveError::NotConverged { sweeps, solution, .. }) => {
                assert_eq!(sweeps, 1);
                assert_eq!(solution.components.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unconverged_iterate_reports_its_distance() {
        // an iterate far past f, where the norm identity would go negative
        let p = weighted_product(4);
        let big = vec![
            RidgeComponent {
                axis: 0,
                values: vec![100.0; 4],
            },
            RidgeComponent::zeros(1, 4),
        ];
        let conv = Convergence {
            converged: false,
            sweeps: 1,
            last_change: 1.0,
            residual_history: vec![],
        };
        let sol = p.finish(big, Method::FixedPoint, Some(conv)).unwrap();
        assert_eq!(sol.error, sol.residual_error);
        assert!(sol.error > 50.0);
    }

    #[test]
    fn error_from_norms_cases() {
        assert_eq!(error_from_norms(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(error_from_norms(4.0, 0.0).unwrap(), 2.0);
        assert!(error_from_norms(1.0, 1.1).is_err());
    }
}
