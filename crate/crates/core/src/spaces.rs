//! Signed scalar-product spaces and the dense linear algebra shared by the other modules.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("index {index} exceeds dimension {dim}")]
    IndexOutOfRange { dim: usize, index: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// ε_k^ν for a 1-based index `k`: −1 on the first `nu` directions, +1 afterwards.
pub fn sign_symbol(k: usize, nu: usize) -> f64 {
    if k <= nu {
        -1.0
    } else {
        1.0
    }
}

/// A real vector space with an orthonormal basis whose first `index` vectors are negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarSpace {
    dim: usize,
    index: usize,
}

impl ScalarSpace {
    pub fn new(dim: usize, index: usize) -> Result<Self, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        if index > dim {
            return Err(SpaceError::IndexOutOfRange { dim, index });
        }
        Ok(Self { dim, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Sign of the 0-based basis vector `k`.
    pub fn sign(&self, k: usize) -> f64 {
        sign_symbol(k + 1, self.index)
    }

    pub fn signs(&self) -> Vector {
        Vector::from_fn(self.dim, |k, _| self.sign(k))
    }

    /// Sum of the basis signs, `dim − 2·index`.
    pub fn sign_sum(&self) -> f64 {
        self.dim as f64 - 2.0 * self.index as f64
    }

    pub fn gram(&self) -> Matrix {
        Matrix::from_diagonal(&self.signs())
    }

    pub fn is_definite(&self) -> bool {
        self.index == 0 || self.index == self.dim
    }

    pub fn check(&self, a: &Vector) -> Result<(), SpaceError> {
        if a.len() != self.dim {
            return Err(SpaceError::DimensionMismatch { expected: self.dim, got: a.len() });
        }
        Ok(())
    }

    /// Unchecked product; callers guarantee matching lengths.
    pub(crate) fn dot(&self, a: &Vector, b: &Vector) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim {
            acc += self.sign(k) * a[k] * b[k];
        }
        acc
    }

    pub(crate) fn norm2(&self, a: &Vector) -> f64 {
        self.dot(a, a)
    }
}

pub fn scalar_product(space: &ScalarSpace, a: &Vector, b: &Vector) -> Result<f64, SpaceError> {
    space.check(a)?;
    space.check(b)?;
    Ok(space.dot(a, b))
}

/// Stable permutation putting negative signs first. `order[c]` is the natural index
/// placed at canonical position `c`.
pub fn canonical_order(signs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..signs.len()).collect();
    order.sort_by_key(|&k| if signs[k] < 0.0 { 0 } else { 1 });
    order
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn mat_exp(m: &Matrix) -> Result<Matrix, SpaceError> {
    if !m.is_square() {
        return Err(SpaceError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(SpaceError::NonFinite);
    }
    let n = m.nrows();
    let norm1 = (0..n).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m / 2f64.powi(s);

    let b = &PADE13;
    let id = Matrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(SpaceError::NonFinite)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Numerical rank with singular values below `rel * σ_max` treated as zero.
pub(crate) fn rank(m: &Matrix, rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Orthonormal (Euclidean) basis of the null space of `m`, one vector per column.
pub(crate) fn null_space(m: &Matrix, rel: f64) -> Matrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Matrix::identity(cols, cols);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = Matrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| smax == 0.0 || svd.singular_values[k] <= rel * smax)
        .collect();
    let mut out = Matrix::zeros(cols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(k).transpose());
    }
    out
}

pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
