//! Direction sets, their completion to a basis of `R^n`, and the linear
//! change of coordinates `y = J x` / `x = B y` built from them.

use thiserror::Error;

use crate::expr::{BoundExpr, EvalError, Expr};

/// Pivots below this fraction of the largest row norm count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no directions given")]
    NoDirections,
    #[error("{count} directions exceed the dimension {n}")]
    TooManyDirections { count: usize, n: usize },
    #[error("row {} has length {len}, expected {n}", index + 1)]
    WrongLength { index: usize, len: usize, n: usize },
    #[error("direction {} is zero", index + 1)]
    ZeroDirection { index: usize },
    #[error("direction {} is linearly dependent on the preceding directions", index + 1)]
    DependentDirection { index: usize },
    #[error("completion has {got} rows, expected {expected}")]
    CompletionCount { got: usize, expected: usize },
    #[error("basis row {} (completion) does not yield an invertible transform", index + 1)]
    SingularCompletion { index: usize },
    #[error("non-finite entry in row {}", index + 1)]
    NonFinite { index: usize },
}

/// The `r` ridge directions completed to a basis, with the forward matrix
/// `J` (rows `a^1..a^n`), its determinant and inverse `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBasis {
    n: usize,
    r: usize,
    /// Rows of `J`, directions first, then the completion.
    rows: Vec<Vec<f64>>,
    det: f64,
    /// Rows `b^1..b^n` of `B = J^{-1}`.
    inverse: Vec<Vec<f64>>,
}

impl DirectionBasis {
    /// Builds the basis. Without an explicit completion, standard basis
    /// vectors `e_1, e_2, ...` are appended whenever they raise the rank.
    pub fn build(directions: &[Vec<f64>], completion: Option<&[Vec<f64>]>) -> Result<Self, GeometryError> {
        let r = directions.len();
        if r == 0 {
            return Err(GeometryError::NoDirections);
        }
        let n = directions[0].len();
        if r > n {
            return Err(GeometryError::TooManyDirections { count: r, n });
        }
        for (index, row) in directions.iter().enumerate() {
            if row.len() != n {
                return Err(GeometryError::WrongLength {
                    index,
                    len: row.len(),
                    n,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::NonFinite { index });
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(GeometryError::ZeroDirection { index });
            }
        }

        let scale = directions.iter().map(|r| norm(r)).fold(0.0, f64::max);
        let mut echelon = Echelon::new(n, scale);
        for (index, row) in directions.iter().enumerate() {
            if !echelon.push(row) {
                return Err(GeometryError::DependentDirection { index });
            }
        }

        let mut rows = directions.to_vec();
        match completion {
            Some(extra) => {
                if extra.len() != n - r {
                    return Err(GeometryError::CompletionCount {
                        got: extra.len(),
                        expected: n - r,
                    });
                }
                for (k, row) in extra.iter().enumerate() {
                    let index = r + k;
                    if row.len() != n {
                        return Err(GeometryError::WrongLength {
                            index,
                            len: row.len(),
                            n,
                        });
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(GeometryError::NonFinite { index });
                    }
                    if !echelon.push(row) {
                        return Err(GeometryError::SingularCompletion { index });
                    }
                    rows.push(row.clone());
                }
            }
            None => {
                for k in 0..n {
                    if rows.len() == n {
                        break;
                    }
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    if echelon.push(&e) {
                        rows.push(e);
                    }
                }
                debug_assert_eq!(rows.len(), n);
            }
        }

        let (det, inverse) = invert(&rows).ok_or(GeometryError::SingularCompletion { index: n - 1 })?;
        Ok(Self {
            n,
            r,
            rows,
            det,
            inverse,
        })
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::build(&rows, None).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ridge_count(&self) -> usize {
        self.r
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.rows[..self.r]
    }

    pub fn completion(&self) -> &[Vec<f64>] {
        &self.rows[self.r..]
    }

    /// Rows of `J`.
    pub fn forward_matrix(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Rows of `B = J^{-1}`.
    pub fn inverse_matrix(&self) -> &[Vec<f64>] {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// `y_i = a^i . x`
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|a| dot(a, x)).collect()
    }

    /// `x_i = b^i . y`
    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        self.inverse.iter().map(|b| dot(b, y)).collect()
    }

    /// `u*(y) = u(B y)` for an expression in `x1..xn`.
    pub fn pullback(&self, u: &Expr) -> Result<Pullback, EvalError> {
        let names = variable_names("x", self.n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(Pullback {
            inner: u.bind(&refs)?,
            inverse: self.inverse.clone(),
        })
    }
}

/// An expression in x-coordinates evaluated at `x = B y`.
#[derive(Debug, Clone)]
pub struct Pullback {
    inner: BoundExpr,
    inverse: Vec<Vec<f64>>,
}

impl Pullback {
    pub fn eval(&self, y: &[f64]) -> Result<f64, EvalError> {
        let x: Vec<f64> = self.inverse.iter().map(|b| dot(b, y)).collect();
        self.inner.eval(&x)
    }
}

/// `prefix1 .. prefixN`
pub fn variable_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Incremental row-echelon form used for rank tests while building the basis.
struct Echelon {
    n: usize,
    scale: f64,
    /// Reduced rows with their pivot column.
    rows: Vec<(usize, Vec<f64>)>,
}

impl Echelon {
    fn new(n: usize, scale: f64) -> Self {
        Self {
            n,
            scale,
            rows: Vec::new(),
        }
    }

    /// Reduces `row` against the stored rows; keeps it and returns true if
    /// the rank increases.
    fn push(&mut self, row: &[f64]) -> bool {
        let mut v = row.to_vec();
        for (pivot, stored) in &self.rows {
            let factor = v[*pivot] / stored[*pivot];
            if factor != 0.0 {
                for (vi, si) in v.iter_mut().zip(stored) {
                    *vi -= factor * si;
                }
            }
        }
        let (col, mag) = (0..self.n)
            .map(|j| (j, v[j].abs()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag <= RANK_TOLERANCE * self.scale.max(norm(row)) {
            return false;
        }
        self.rows.push((col, v));
        true
    }
}

/// Determinant and inverse by Gauss–Jordan elimination with partial pivoting.
fn invert(rows: &[Vec<f64>]) -> Option<(f64, Vec<Vec<f64>>)> {
    let n = rows.len();
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let pivot = a[pivot_row][col];
        if pivot.abs() <= RANK_TOLERANCE * scale {
            return None;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            inv.swap(pivot_row, col);
            det = -det;
        }
        det *= pivot;
        for j in 0..n {
            a[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = a[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[i][j] -= factor * a[col][j];
                inv[i][j] -= factor * inv[col][j];
            }
        }
    }
    Some((det, inv))
}
