//! Seeded random instances shared by the integration tests.

#![allow(dead_code)]

use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ridgeapprox::quadrature::GaussLegendre;
use ridgeapprox::{DirectionBasis, GridFunction, RSetDomain, WeightedProblem};

/// Sum of `coef * prod_k y_k^exp_k`.
#[derive(Debug, Clone)]
pub struct Poly {
    pub terms: Vec<(f64, Vec<i32>)>,
}

impl Poly {
    pub fn random(rng: &mut ChaCha8Rng, dim: usize, max_degree: i32, terms: RangeInclusive<usize>) -> Self {
        let count = rng.gen_range(terms);
        let terms = (0..count)
            .map(|_| {
                let exps = (0..dim).map(|_| rng.gen_range(0..=max_degree)).collect();
                (rng.gen_range(-1.0..1.0), exps)
            })
            .collect();
        Poly { terms }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * y.iter().zip(e).map(|(v, &k)| v.powi(k)).product::<f64>())
            .sum()
    }

    /// Exact integral over the box `bounds`.
    pub fn integral(&self, bounds: &[(f64, f64)]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * bounds
                    .iter()
                    .zip(e)
                    .map(|(&(l, u), &k)| (u.powi(k + 1) - l.powi(k + 1)) / (k + 1) as f64)
                    .product::<f64>()
            })
            .sum()
    }

    /// Rescales to unit root-mean-square over the domain.
    pub fn unit_rms(mut self, domain: &Arc<RSetDomain>) -> Self {
        let g = GridFunction::sample_fn(domain, |y| self.eval(y)).unwrap();
        let ms = g.norm_sq() / domain.measure();
        if ms > 0.0 {
            let s = ms.sqrt();
            for (c, _) in &mut self.terms {
                *c /= s;
            }
        }
        self
    }

    /// Upper bound of `|p|` on the box.
    pub fn bound(&self, bounds: &[(f64, f64)]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c.abs()
                    * bounds
                        .iter()
                        .zip(e)
                        .map(|(&(l, u), &k)| l.abs().max(u.abs()).powi(k))
                        .product::<f64>()
            })
            .sum()
    }
}

pub fn random_basis(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DirectionBasis {
    loop {
        let dirs: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..n).map(|_| rng.gen_range(-2..=2) as f64).collect())
            .collect();
        if let Ok(b) = DirectionBasis::build(&dirs, None) {
            return b;
        }
    }
}

pub fn random_interval(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let lower = rng.gen_range(-1.0..1.0);
    (lower, lower + rng.gen_range(0.5..2.0))
}

pub fn random_domain(rng: &mut ChaCha8Rng, n: usize, r: usize, order: usize) -> Arc<RSetDomain> {
    let intervals: Vec<_> = (0..r).map(|_| random_interval(rng)).collect();
    let box0: Vec<_> = (r..n).map(|_| random_interval(rng)).collect();
    Arc::new(RSetDomain::new(&intervals, &box0, order).unwrap())
}

pub fn all_bounds(domain: &RSetDomain) -> Vec<(f64, f64)> {
    (0..domain.dim()).map(|k| domain.bounds(k)).collect()
}

/// An unweighted instance whose `f*` has per-axis degree at most 3 and
/// always contains a product of two distinct coordinates, so it is never a
/// ridge sum and its error is bounded away from zero. `f*` has unit
/// root-mean-square over `Y`.
pub struct Instance {
    pub basis: DirectionBasis,
    pub domain: Arc<RSetDomain>,
    pub poly: Poly,
    pub f_star: GridFunction,
}

pub fn random_instance(rng: &mut ChaCha8Rng, order: usize) -> Instance {
    let n = rng.gen_range(2..=4);
    let r = rng.gen_range(1..=n);
    let basis = random_basis(rng, n, r);
    let domain = random_domain(rng, n, r, order);
    let mut poly = Poly::random(rng, n, 3, 1..=6);
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    let mut cross = vec![0; n];
    cross[a] = 1;
    cross[b] = 1;
    poly.terms.push((1.0, cross));
    let poly = poly.unit_rms(&domain);
    let f_star = GridFunction::sample_fn(&domain, |y| poly.eval(y)).unwrap();
    Instance {
        basis,
        domain,
        poly,
        f_star,
    }
}

/// A nonconstant polynomial of per-axis degree at most 2, shifted and scaled
/// so that its node values span exactly `[0.5, 2.5]`.
pub fn random_weight(rng: &mut ChaCha8Rng, domain: &Arc<RSetDomain>) -> GridFunction {
    let n = domain.dim();
    let mut p = Poly::random(rng, n, 2, 1..=3);
    let mut linear = vec![0; n];
    linear[rng.gen_range(0..n)] = 1;
    p.terms.push((1.0, linear));
    let raw = GridFunction::sample_fn(domain, |y| p.eval(y)).unwrap();
    let lo = raw.samples().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.samples().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let samples = raw.samples().iter().map(|v| 0.5 + 2.0 * (v - lo) / (hi - lo)).collect();
    GridFunction::from_samples(Arc::clone(domain), samples).unwrap()
}

/// Weighted instance with `n <= 3`, `r <= 2` and unit root-mean-square `f*`.
pub fn random_weighted(rng: &mut ChaCha8Rng, order: usize) -> WeightedProblem {
    let n = rng.gen_range(1..=3);
    let r = rng.gen_range(1..=n.min(2));
    let basis = random_basis(rng, n, r);
    let domain = random_domain(rng, n, r, order);
    let poly = Poly::random(rng, n, 3, 2..=6).unit_rms(&domain);
    let f_star = GridFunction::sample_fn(&domain, |y| poly.eval(y)).unwrap();
    let weights = (0..r).map(|_| random_weight(rng, &domain)).collect();
    WeightedProblem::new(f_star, weights, basis).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random polynomial in `x1..xn` of total degree at most 3 plus the
/// constant 5, as expression source text.
pub fn random_x_polynomial(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut text = String::from("5");
    for _ in 0..rng.gen_range(2..=6) {
        let c: f64 = rng.gen_range(-1.0..1.0);
        text.push_str(&format!(" + ({c})"));
        for _ in 0..rng.gen_range(1..=3) {
            text.push_str(&format!("*x{}", rng.gen_range(1..=n)));
        }
    }
    text
}

/// Tensor Gauss rule of `order` points per axis on the parallelepiped
/// `{B y : y in domain}`, built from the unit cube and its own determinant.
pub fn integrate_over_image(u: &dyn Fn(&[f64]) -> f64, b: &[Vec<f64>], domain: &RSetDomain, order: usize) -> f64 {
    let n = domain.dim();
    let bounds = all_bounds(domain);
    let m = nalgebra::DMatrix::from_fn(n, n, |i, k| b[i][k] * (bounds[k].1 - bounds[k].0));
    let offset: Vec<f64> = (0..n).map(|i| (0..n).map(|k| b[i][k] * bounds[k].0).sum()).collect();
    let rule = GaussLegendre::on_interval(order, 0.0, 1.0);
    let mut total = 0.0;
    let mut digits = vec![0usize; n];
    loop {
        let w: f64 = digits.iter().map(|&d| rule.weights[d]).product();
        let x: Vec<f64> = (0..n)
            .map(|i| offset[i] + (0..n).map(|k| m[(i, k)] * rule.nodes[digits[k]]).sum::<f64>())
            .collect();
        total += w * u(&x);
        let mut k = 0;
        while k < n {
            digits[k] += 1;
            if digits[k] < order {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    m.determinant().abs() * total
}
