//! The r-set `Y = Y_1 x ... x Y_r x Y_0` with tensor Gauss–Legendre
//! quadrature, sampled functions on it and the integrals the solvers need.
//!
//! Axes `0..r` are the ridge variables `y_1..y_r`; axes `r..n` span the box
//! `Y_0`. Tensor nodes are stored row-major with the last axis fastest.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::EvalError;
use crate::quadrature::{pairwise_sum, Barycentric, GaussLegendre};

pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("at least one ridge interval is required")]
    NoRidgeAxes,
    #[error("quadrature order must be positive")]
    ZeroOrder,
    #[error("axis {axis} has non-positive length [{lower}, {upper}]")]
    DegenerateInterval { axis: usize, lower: f64, upper: f64 },
    #[error("{got} samples given, the grid has {expected} nodes")]
    SampleCount { got: usize, expected: usize },
    #[error("non-finite sample at node {node:?}")]
    NonFiniteSample { node: Vec<f64> },
    #[error("evaluation failed at node {node:?}: {source}")]
    Eval { node: Vec<f64>, source: EvalError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSetDomain {
    r: usize,
    /// Bounds for every axis: `Y_1..Y_r` then the `Y_0` box.
    bounds: Vec<(f64, f64)>,
    order: usize,
    rules: Vec<GaussLegendre>,
    strides: Vec<usize>,
    node_count: usize,
    tensor_weights: Vec<f64>,
}

impl RSetDomain {
    pub fn new(intervals: &[(f64, f64)], box0: &[(f64, f64)], order: usize) -> Result<Self, DomainError> {
        if intervals.is_empty() {
            return Err(DomainError::NoRidgeAxes);
        }
        if order == 0 {
            return Err(DomainError::ZeroOrder);
        }
        let bounds: Vec<(f64, f64)> = intervals.iter().chain(box0).copied().collect();
        for (axis, &(lower, upper)) in bounds.iter().enumerate() {
            if !(lower.is_finite() && upper.is_finite() && upper > lower) {
                return Err(DomainError::DegenerateInterval { axis, lower, upper });
            }
        }
        let n = bounds.len();
        let rules: Vec<GaussLegendre> = bounds
            .iter()
            .map(|&(l, u)| GaussLegendre::on_interval(order, l, u))
            .collect();
        let mut strides = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * order;
        }
        let node_count = strides[0] * order;
        let tensor_weights = (0..node_count)
            .map(|idx| (0..n).map(|k| rules[k].weights[(idx / strides[k]) % order]).product())
            .collect();
        Ok(Self {
            r: intervals.len(),
            bounds,
            order,
            rules,
            strides,
            node_count,
            tensor_weights,
        })
    }

    /// Total dimension `n = r + m`.
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn ridge_count(&self) -> usize {
        self.r
    }

    /// Dimension of `Y_0`.
    pub fn box0_dim(&self) -> usize {
        self.bounds.len() - self.r
    }

    /// Nodes per axis.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        self.bounds[axis]
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.bounds[..self.r]
    }

    pub fn box0(&self) -> &[(f64, f64)] {
        &self.bounds[self.r..]
    }

    pub fn rule(&self, axis: usize) -> &GaussLegendre {
        &self.rules[axis]
    }

    pub fn axis_length(&self, axis: usize) -> f64 {
        let (l, u) = self.bounds[axis];
        u - l
    }

    /// `|Y|`
    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|k| self.axis_length(k)).product()
    }

    /// `|Y_0|`, equal to 1 when `Y_0` has dimension zero.
    pub fn box0_measure(&self) -> f64 {
        (self.r..self.dim()).map(|k| self.axis_length(k)).product()
    }

    /// `|Y^{(j)}|`, the measure of every factor except `Y_j`.
    pub fn complement_measure(&self, axis: usize) -> f64 {
        (0..self.dim())
            .filter(|&k| k != axis)
            .map(|k| self.axis_length(k))
            .product()
    }

    /// Product of the per-axis quadrature weights at a tensor node.
    pub fn tensor_weight(&self, idx: usize) -> f64 {
        self.tensor_weights[idx]
    }

    pub fn tensor_weights(&self) -> &[f64] {
        &self.tensor_weights
    }

    /// Position along `axis` of the flat node index `idx`.
    pub fn axis_position(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.order
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.rules[k].nodes[self.axis_position(idx, k)])
            .collect()
    }

    /// Flat indices of the nodes whose position along `axis` is `pos`, in
    /// ascending order.
    pub fn slice_indices(&self, axis: usize, pos: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.strides[axis];
        let block = stride * self.order;
        let outer = self.node_count / block;
        (0..outer).flat_map(move |o| {
            let base = o * block + pos * stride;
            base..base + stride
        })
    }

    /// Quadrature weight of a node with the `axis` factor left out.
    fn complement_weight(&self, idx: usize, axis: usize) -> f64 {
        (0..self.dim())
            .filter(|&k| k != axis)
            .map(|k| self.rules[k].weights[self.axis_position(idx, k)])
            .product()
    }

    /// For every node `t` of `axis`, the quadrature value of
    /// `integral over Y^{(axis)} of value(idx)` with `y_axis = t`.
    pub fn marginal_by<F>(&self, axis: usize, value: F) -> Vec<f64>
    where
        F: Fn(usize) -> f64 + Sync,
    {
        (0..self.order)
            .into_par_iter()
            .map(|pos| {
                let terms: Vec<f64> = self
                    .slice_indices(axis, pos)
                    .map(|idx| self.complement_weight(idx, axis) * value(idx))
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    /// Full quadrature sum of `value(idx)` over `Y`.
    pub fn integrate_by<F>(&self, value: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        let terms: Vec<f64> = (0..self.node_count)
            .map(|idx| self.tensor_weights[idx] * value(idx))
            .collect();
        pairwise_sum(&terms)
    }

    /// One-dimensional quadrature along `axis` of per-node values.
    pub fn integrate_axis(&self, axis: usize, values: &[f64]) -> f64 {
        let terms: Vec<f64> = self.rules[axis]
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect();
        pairwise_sum(&terms)
    }
}

/// Samples of a function of `y` at every tensor node of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Arc<RSetDomain>,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn from_samples(domain: Arc<RSetDomain>, samples: Vec<f64>) -> Result<Self, DomainError> {
        if samples.len() != domain.node_count() {
            return Err(DomainError::SampleCount {
                got: samples.len(),
                expected: domain.node_count(),
            });
        }
        if let Some(idx) = samples.iter().position(|v| !v.is_finite()) {
            return Err(DomainError::NonFiniteSample { node: domain.node(idx) });
        }
        Ok(Self { domain, samples })
    }

    /// Evaluates `f` at every node. Nodes are visited in parallel.
    pub fn sample<F>(domain: &Arc<RSetDomain>, f: F) -> Result<Self, DomainError>
    where
        F: Fn(&[f64]) -> Result<f64, EvalError> + Sync,
    {
        let samples = (0..domain.node_count())
            .into_par_iter()
            .map(|idx| {
                let y = domain.node(idx);
                match f(&y) {
                    Ok(v) if v.is_finite() => Ok(v),
                    Ok(_) => Err(DomainError::NonFiniteSample { node: y }),
                    Err(source) => Err(DomainError::Eval { node: y, source }),
                }
            })
            .collect::<Result<Vec<f64>, DomainError>>()?;
        Ok(Self {
            domain: Arc::clone(domain),
            samples,
        })
    }

    /// Like [`GridFunction::sample`] for functions that cannot fail.
    pub fn sample_fn<F>(domain: &Arc<RSetDomain>, f: F) -> Result<Self, DomainError>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::sample(domain, |y| Ok(f(y)))
    }

    pub fn constant(domain: &Arc<RSetDomain>, value: f64) -> Self {
        Self {
            domain: Arc::clone(domain),
            samples: vec![value; domain.node_count()],
        }
    }

    pub fn domain(&self) -> &Arc<RSetDomain> {
        &self.domain
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn integrate_full(&self) -> f64 {
        self.domain.integrate_by(|idx| self.samples[idx])
    }

    pub fn marginal(&self, axis: usize) -> RidgeComponent {
        RidgeComponent {
            axis,
            values: self.domain.marginal_by(axis, |idx| self.samples[idx]),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.domain.integrate_by(|idx| self.samples[idx] * self.samples[idx])
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        debug_assert_eq!(self.samples.len(), other.samples.len());
        GridFunction {
            domain: Arc::clone(&self.domain),
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        debug_assert_eq!(self.samples.len(), other.samples.len());
        GridFunction {
            domain: Arc::clone(&self.domain),
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// True when every sample equals 1, as for a unit weight.
    pub fn is_identically_one(&self) -> bool {
        self.samples.iter().all(|&v| v == 1.0)
    }
}

/// Values of a univariate `g_i` at the Gauss nodes of its axis. `axis` is
/// zero-based (`axis = 0` is `g_1`).
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeComponent {
    pub axis: usize,
    pub values: Vec<f64>,
}

impl RidgeComponent {
    pub fn zeros(axis: usize, len: usize) -> Self {
        Self {
            axis,
            values: vec![0.0; len],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            axis: self.axis,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            axis: self.axis,
            values: self.values.iter().map(|v| v + offset).collect(),
        }
    }

    /// Resamples at `count` equispaced points of `[lower, upper]`, endpoints
    /// included, by barycentric interpolation through the axis nodes.
    pub fn resample(&self, nodes: &[f64], lower: f64, upper: f64, count: usize) -> Vec<(f64, f64)> {
        let interp = Barycentric::new(nodes);
        (0..count)
            .map(|k| {
                let t = if count == 1 { 0.5 } else { k as f64 / (count - 1) as f64 };
                let y = lower + t * (upper - lower);
                (y, interp.eval(&self.values, y))
            })
            .collect()
    }
}

/// `integral over Y of c(y_i)^2 = |Y^{(i)}| * integral over Y_i of c^2`.
pub fn ridge_norm_sq(component: &RidgeComponent, domain: &RSetDomain) -> f64 {
    let squares: Vec<f64> = component.values.iter().map(|v| v * v).collect();
    domain.complement_measure(component.axis) * domain.integrate_axis(component.axis, &squares)
}

/// Node-wise `sum_i w_i(y) g_i(y_i)`; `weights = None` means all weights are 1.
pub fn combine(
    domain: &Arc<RSetDomain>,
    components: &[RidgeComponent],
    weights: Option<&[GridFunction]>,
) -> GridFunction {
    let samples = (0..domain.node_count())
        .map(|idx| {
            components
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let g = c.values[domain.axis_position(idx, c.axis)];
                    match weights {
                        Some(w) => w[i].samples[idx] * g,
                        None => g,
                    }
                })
                .sum()
        })
        .collect();
    GridFunction {
        domain: Arc::clone(domain),
        samples,
    }
}
