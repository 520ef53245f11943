//! Compositions of quadratic forms `φ(μ(u,h)) = λ(u) φ(h)` and their relation to H-type algebras.

mod catalog;
mod search;

pub use catalog::{catalog, catalog_entry, CatalogName};
pub use search::{algebraic_obstruction, search_composition_2d, Obstruction, SearchOutcome, SearchVerdict};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{random_vector, validate_h_type, AlgebraError, HTypeAlgebra, ValidationReport, DEFAULT_SEED};
use crate::spaces::{Matrix, ScalarSpace, SpaceError, Vector};

const NORMALIZATION_TOL: f64 = 1e-14;
const VERIFY_TRIALS: usize = 256;
const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompositionError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("field `{field}`: {message}")]
    Shape { field: &'static str, message: String },
    #[error("slice {0} is not the identity")]
    NotNormalized(usize),
    #[error("map is not a composition of the given forms")]
    VerificationFailed,
    #[error("algebra is not H-type")]
    NotHType(Box<ValidationReport>),
    #[error("u0 sign {0} is not supported: an identity slice forces λ(u0) = +1")]
    UnsupportedU0Sign(i32),
    #[error("λ(u0) must be +1 for a normalized composition, found {0}")]
    NegativeU0(f64),
    #[error("composition has no directions besides u0")]
    EmptyVertical,
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// The quadratic form `x ↦ ⟨x,x⟩` of a signed space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub space: ScalarSpace,
}

impl QuadraticForm {
    pub fn eval(&self, x: &Vector) -> f64 {
        self.space.norm2(x)
    }

    pub fn polar(&self, x: &Vector, y: &Vector) -> f64 {
        self.space.dot(x, y)
    }
}

/// Bilinear `μ: U × H → H` with `μ(u_k, h_i) = Σ_j M[k][i][j] h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMap {
    u: ScalarSpace,
    h: ScalarSpace,
    m: Vec<Matrix>,
    u0_index: usize,
}

impl CompositionMap {
    pub fn new(
        u: ScalarSpace,
        h: ScalarSpace,
        m: Vec<Matrix>,
        u0_index: usize,
    ) -> Result<Self, CompositionError> {
        let n = h.dim();
        if m.len() != u.dim() {
            return Err(CompositionError::Shape {
                field: "M",
                message: format!("expected {} slices, got {}", u.dim(), m.len()),
            });
        }
        if let Some(k) = m.iter().position(|s| s.nrows() != n || s.ncols() != n) {
            return Err(CompositionError::Shape {
                field: "M",
                message: format!("slice {k} must be {n}x{n}"),
            });
        }
        if m.iter().any(|s| s.iter().any(|x| !x.is_finite())) {
            return Err(CompositionError::Shape { field: "M", message: "non-finite entry".into() });
        }
        if u0_index >= u.dim() {
            return Err(CompositionError::Shape {
                field: "u0_index",
                message: format!("{u0_index} out of range"),
            });
        }
        let id = Matrix::identity(n, n);
        if (&m[u0_index] - id).amax() > NORMALIZATION_TOL {
            return Err(CompositionError::NotNormalized(u0_index));
        }
        Ok(Self { u, h, m, u0_index })
    }

    pub fn u(&self) -> &ScalarSpace {
        &self.u
    }

    pub fn h(&self) -> &ScalarSpace {
        &self.h
    }

    pub fn slices(&self) -> &[Matrix] {
        &self.m
    }

    pub fn u0_index(&self) -> usize {
        self.u0_index
    }

    pub fn phi(&self) -> QuadraticForm {
        QuadraticForm { space: self.h }
    }

    pub fn lambda(&self) -> QuadraticForm {
        QuadraticForm { space: self.u }
    }

    pub fn apply(&self, u: &Vector, h: &Vector) -> Result<Vector, CompositionError> {
        self.u.check(u)?;
        self.h.check(h)?;
        Ok(self.apply_unchecked(u, h))
    }

    pub(crate) fn apply_unchecked(&self, u: &Vector, h: &Vector) -> Vector {
        let mut out = Vector::zeros(self.h.dim());
        for (k, slice) in self.m.iter().enumerate() {
            if u[k] != 0.0 {
                out += slice.tr_mul(h) * u[k];
            }
        }
        out
    }
}

/// Sampled check of the composition law and its polarization.
pub fn verify_composition(mu: &CompositionMap, trials: usize, tol: f64) -> bool {
    composition_residual(mu, trials, DEFAULT_SEED) <= tol
}

/// Largest relative residual of the composition law and its polarized form over sampled pairs.
pub fn composition_residual(mu: &CompositionMap, trials: usize, seed: u64) -> f64 {
    let (phi, lambda) = (mu.phi(), mu.lambda());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let u = random_vector(&mut rng, mu.u.dim());
        let u2 = random_vector(&mut rng, mu.u.dim());
        let h = random_vector(&mut rng, mu.h.dim());
        let muh = mu.apply_unchecked(&u, &h);
        let rhs = lambda.eval(&u) * phi.eval(&h);
        worst = worst.max((phi.eval(&muh) - rhs).abs() / (1.0 + rhs.abs()));
        let rhs = lambda.polar(&u, &u2) * phi.eval(&h);
        let lhs = phi.polar(&muh, &mu.apply_unchecked(&u2, &h));
        worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// `Φ(h, h2)`, the vector of `U` with `⟨u, Φ(h,h2)⟩_λ = ⟨μ(u,h), h2⟩_φ`.
pub fn phi_map(mu: &CompositionMap, h: &Vector, h2: &Vector) -> Result<Vector, CompositionError> {
    mu.h.check(h)?;
    mu.h.check(h2)?;
    Ok(Vector::from_fn(mu.u.dim(), |k, _| {
        let muh = mu.m[k].tr_mul(h);
        mu.u.sign(k) * mu.h.dot(&muh, h2)
    }))
}

/// Build the H-type algebra on `H ⊕ u0^⊥` determined by a normalized composition.
pub fn algebra_from_composition(mu: &CompositionMap) -> Result<HTypeAlgebra, CompositionError> {
    let lam_u0 = mu.u.sign(mu.u0_index);
    if lam_u0 < 0.0 {
        return Err(CompositionError::NegativeU0(lam_u0));
    }
    if mu.u.dim() < 2 {
        return Err(CompositionError::EmptyVertical);
    }
    if !verify_composition(mu, VERIFY_TRIALS, VERIFY_TOL) {
        return Err(CompositionError::VerificationFailed);
    }
    let n = mu.h.dim();
    let vertical: Vec<usize> = (0..mu.u.dim()).filter(|&k| k != mu.u0_index).collect();
    let v = ScalarSpace::new(vertical.len(), mu.u.index())?;
    let mut slices = Vec::with_capacity(vertical.len());
    for &k in &vertical {
        let eps_u = mu.u.sign(k);
        let mut b = Matrix::from_fn(n, n, |i, j| eps_u * mu.m[k][(i, j)] * mu.h.sign(j));
        // An exact composition gives an exactly skew B; absorb rounding from numerical maps.
        let asym = (&b + b.transpose()).amax();
        if asym > VERIFY_TOL * b.amax().max(1.0) {
            return Err(CompositionError::VerificationFailed);
        }
        if asym > 0.0 {
            b = (&b - b.transpose()) * 0.5;
        }
        slices.push(b);
    }
    Ok(HTypeAlgebra::new(mu.h, v, slices, "custom")?)
}

/// Extend an H-type algebra to the composition `μ̃(v + a·u0, h) = μ(v,h) + a·h` on `U = V ⊕ ℝu0`.
pub fn composition_from_algebra(
    alg: &HTypeAlgebra,
    u0_sign: i32,
) -> Result<CompositionMap, CompositionError> {
    if u0_sign != 1 {
        return Err(CompositionError::UnsupportedU0Sign(u0_sign));
    }
    let report = validate_h_type(alg, VERIFY_TRIALS, VERIFY_TOL)?;
    if !report.passed {
        return Err(CompositionError::NotHType(Box::new(report)));
    }
    let nu_v = alg.v().index();
    let u = ScalarSpace::new(alg.m() + 1, nu_v)?;
    let n = alg.n();
    let mut slices = Vec::with_capacity(alg.m() + 1);
    for c in 0..=alg.m() {
        slices.push(match c.cmp(&nu_v) {
            std::cmp::Ordering::Less => alg.a_matrix(c),
            std::cmp::Ordering::Equal => Matrix::identity(n, n),
            std::cmp::Ordering::Greater => alg.a_matrix(c - 1),
        });
    }
    let map = CompositionMap::new(u, *alg.h(), slices, nu_v)?;
    if !verify_composition(&map, VERIFY_TRIALS, VERIFY_TOL) {
        return Err(CompositionError::VerificationFailed);
    }
    Ok(map)
}
