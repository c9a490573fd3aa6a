//! Turns a parsed config into sampled grid data and dispatches to a solver.

use std::sync::Arc;

use crate::closed_form::solve_unweighted;
use crate::config::{Coordinates, FunctionSpec, ProblemConfig};
use crate::domain::{GridFunction, RSetDomain};
use crate::error::Error;
use crate::geometry::{variable_names, DirectionBasis};
use crate::solution::{ApproxSolution, SolveError};
use crate::weighted::WeightedProblem;

#[derive(Debug, Clone)]
pub struct Problem {
    config: ProblemConfig,
    weighted: WeightedProblem,
}

impl Problem {
    pub fn from_config(config: ProblemConfig) -> Result<Self, Error> {
        let basis = DirectionBasis::build(&config.directions, config.completion.as_deref())?;
        let domain = Arc::new(RSetDomain::new(&config.intervals, &config.box0, config.order)?);
        let f_star = sample(&config.f, "f", &basis, &domain)?;
        let weights = config
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| match w {
                Some(spec) => sample(spec, &format!("w{}", i + 1), &basis, &domain),
                None => Ok(GridFunction::constant(&domain, 1.0)),
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let weighted = WeightedProblem::new(f_star, weights, basis)?;
        Ok(Self { config, weighted })
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.config
    }

    pub fn weighted(&self) -> &WeightedProblem {
        &self.weighted
    }

    pub fn domain(&self) -> &Arc<RSetDomain> {
        self.weighted.domain()
    }

    pub fn basis(&self) -> &DirectionBasis {
        self.weighted.basis()
    }

    pub fn f_star(&self) -> &GridFunction {
        self.weighted.f_star()
    }

    /// Closed form when the weights are syntactically one and no override is
    /// requested; Gauss–Seidel otherwise.
    pub fn uses_closed_form(&self, force_fixed_point: bool) -> bool {
        !force_fixed_point && self.config.has_unit_weights()
    }

    pub fn solve(&self, force_fixed_point: bool) -> Result<ApproxSolution, SolveError> {
        if self.uses_closed_form(force_fixed_point) {
            solve_unweighted(self.f_star(), self.basis())
        } else {
            self.weighted.solve_fixed_point(&self.config.solver)
        }
    }
}

fn sample(
    spec: &FunctionSpec,
    label: &str,
    basis: &DirectionBasis,
    domain: &Arc<RSetDomain>,
) -> Result<GridFunction, Error> {
    let n = basis.dim();
    let unbound = |source| Error::Expression {
        label: label.to_string(),
        source,
    };
    let grid = match spec.coords {
        Coordinates::X => {
            let pullback = basis.pullback(&spec.expr).map_err(unbound)?;
            GridFunction::sample(domain, |y| pullback.eval(y))
        }
        Coordinates::Y => {
            let names = variable_names("y", n);
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let bound = spec.expr.bind(&refs).map_err(unbound)?;
            GridFunction::sample(domain, |y| bound.eval(y))
        }
    };
    grid.map_err(|source| Error::Sampling {
        label: label.to_string(),
        source,
    })
}
