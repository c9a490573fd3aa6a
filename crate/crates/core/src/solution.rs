use std::fmt;

use thiserror::Error;

use crate::domain::{DomainError, RidgeComponent};
use crate::geometry::GeometryError;

/// Radicands in `[-NEGATIVE_RADICAND_SLACK * scale, 0)` are rounding noise and
/// clamp to zero; anything more negative is reported.
pub const NEGATIVE_RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    FixedPoint,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::FixedPoint => "fixed_point",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Iteration diagnostics of a fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    pub sweeps: usize,
    pub last_change: f64,
    /// `||f* - sum w_i* g_i||_{L2(Y)}` before the first sweep and after each one.
    pub residual_history: Vec<f64>,
}

/// A location where an optimality condition is violated the most.
/// `axis` is zero-based, `node` indexes the Gauss nodes of that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect {
    pub value: f64,
    pub axis: usize,
    pub node: usize,
}

impl Defect {
    pub(crate) fn none() -> Self {
        Defect {
            value: 0.0,
            axis: 0,
            node: 0,
        }
    }

    pub fn worst(self, other: Defect) -> Defect {
        if other.value > self.value || other.value.is_nan() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSolution {
    /// `g_1^0 .. g_r^0` at the Gauss nodes of their axes.
    pub components: Vec<RidgeComponent>,
    /// `E(f)`, the L2(X) distance from `f` to the approximating set. For an
    /// unconverged fixed-point iterate this is the distance to that iterate.
    pub error: f64,
    /// `|det J|^{-1/2} ||f* - approximant||_{L2(Y)}`, computed directly.
    pub residual_error: f64,
    /// Normalized orthogonality defect of the residual against every
    /// `w_j* h(y_j)`.
    pub orthogonality_defect: f64,
    pub method: Method,
    pub convergence: Option<Convergence>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("negative radicand {value:e} in error formula; quadrature is inconsistent")]
    NegativeRadicand { value: f64 },
    #[error("{what}: expected {expected}, got {got}")]
    Mismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("slice mass of weight {} vanishes at node {node} (y = {coordinate})", axis + 1)]
    ZeroSliceMass { axis: usize, node: usize, coordinate: f64 },
    #[error("no convergence after {sweeps} sweeps (last relative change {last_change:e})")]
    NotConverged {
        sweeps: usize,
        last_change: f64,
        solution: Box<ApproxSolution>,
    },
}

/// Square root of a radicand that may carry rounding noise.
pub(crate) fn clamped_sqrt(radicand: f64, scale: f64) -> Result<f64, SolveError> {
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -NEGATIVE_RADICAND_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(SolveError::NegativeRadicand { value: radicand })
    }
}
