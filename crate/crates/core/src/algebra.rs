//! The algebra type, bracket and μ evaluation, and the H-type validator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::{max_abs, null_space, rank, Matrix, ScalarSpace, SpaceError, Vector};

const SKEW_TOL: f64 = 1e-14;
const RANK_REL: f64 = 1e-10;
pub(crate) const DEFAULT_SEED: u64 = 0x4854_5950_4531;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("field `{field}`: {message}")]
    Shape { field: &'static str, message: String },
    #[error("B[{alpha}] is not skew-symmetric at ({i},{j}): residual {residual:e}")]
    NotSkew { alpha: usize, i: usize, j: usize, residual: f64 },
    #[error("field `B` contains a non-finite entry")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Step-2 nilpotent algebra `H ⊕ V` with `[h_i, h_j] = Σ_α B^α_ij v_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeAlgebra {
    h: ScalarSpace,
    v: ScalarSpace,
    b: Vec<Matrix>,
    label: String,
    h_order: Vec<usize>,
    v_order: Vec<usize>,
}

/// On-disk description of an algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub n: usize,
    pub nu_h: usize,
    pub m: usize,
    pub nu_v: usize,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Natural index of each canonical horizontal basis vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_order: Option<Vec<usize>>,
}

impl HTypeAlgebra {
    pub fn new(
        h: ScalarSpace,
        v: ScalarSpace,
        b: Vec<Matrix>,
        label: impl Into<String>,
    ) -> Result<Self, AlgebraError> {
        let (n, m) = (h.dim(), v.dim());
        if b.len() != m {
            return Err(AlgebraError::Shape {
                field: "B",
                message: format!("expected {m} slices, got {}", b.len()),
            });
        }
        for (alpha, slice) in b.iter().enumerate() {
            if slice.nrows() != n || slice.ncols() != n {
                return Err(AlgebraError::Shape {
                    field: "B",
                    message: format!(
                        "slice {alpha} is {}x{}, expected {n}x{n}",
                        slice.nrows(),
                        slice.ncols()
                    ),
                });
            }
            if slice.iter().any(|x| !x.is_finite()) {
                return Err(AlgebraError::NonFinite);
            }
            for i in 0..n {
                for j in i..n {
                    let residual = (slice[(i, j)] + slice[(j, i)]).abs();
                    let scale = slice[(i, j)].abs().max(1.0);
                    if residual > SKEW_TOL * scale {
                        return Err(AlgebraError::NotSkew { alpha, i, j, residual });
                    }
                }
            }
        }
        Ok(Self {
            h,
            v,
            b,
            label: label.into(),
            h_order: (0..n).collect(),
            v_order: (0..m).collect(),
        })
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self, AlgebraError> {
        let h = ScalarSpace::new(spec.n, spec.nu_h).map_err(|e| AlgebraError::Shape {
            field: "nu_h",
            message: e.to_string(),
        })?;
        let v = ScalarSpace::new(spec.m, spec.nu_v).map_err(|e| AlgebraError::Shape {
            field: "nu_v",
            message: e.to_string(),
        })?;
        let mut slices = Vec::with_capacity(spec.b.len());
        for (alpha, rows) in spec.b.iter().enumerate() {
            if rows.len() != spec.n || rows.iter().any(|r| r.len() != spec.n) {
                return Err(AlgebraError::Shape {
                    field: "B",
                    message: format!("slice {alpha} must be {0}x{0}", spec.n),
                });
            }
            slices.push(Matrix::from_fn(spec.n, spec.n, |i, j| rows[i][j]));
        }
        let mut alg = Self::new(h, v, slices, spec.label.clone().unwrap_or_else(|| "custom".into()))?;
        if let Some(order) = &spec.h_order {
            check_permutation("h_order", order, spec.n)?;
            alg.h_order = order.clone();
        }
        if let Some(order) = &spec.v_order {
            check_permutation("v_order", order, spec.m)?;
            alg.v_order = order.clone();
        }
        Ok(alg)
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        let identity = |o: &[usize]| o.iter().enumerate().all(|(k, &x)| k == x);
        AlgebraSpec {
            n: self.n(),
            nu_h: self.h.index(),
            m: self.m(),
            nu_v: self.v.index(),
            b: self
                .b
                .iter()
                .map(|s| s.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
            label: Some(self.label.clone()),
            h_order: (!identity(&self.h_order)).then(|| self.h_order.clone()),
            v_order: (!identity(&self.v_order)).then(|| self.v_order.clone()),
        }
    }

    pub(crate) fn with_presentation(mut self, h_order: Vec<usize>, v_order: Vec<usize>) -> Self {
        self.h_order = h_order;
        self.v_order = v_order;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn h(&self) -> &ScalarSpace {
        &self.h
    }

    pub fn v(&self) -> &ScalarSpace {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.h.dim()
    }

    pub fn m(&self) -> usize {
        self.v.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn slices(&self) -> &[Matrix] {
        &self.b
    }

    pub fn slice(&self, alpha: usize) -> &Matrix {
        &self.b[alpha]
    }

    /// Natural index of each canonical horizontal basis vector.
    pub fn h_order(&self) -> &[usize] {
        &self.h_order
    }

    pub fn v_order(&self) -> &[usize] {
        &self.v_order
    }

    /// `A^α = ε_α B^α J_H`, so that `μ(v_α, h_i) = Σ_j A^α_ij h_j`.
    pub fn a_matrix(&self, alpha: usize) -> Matrix {
        let mut a = &self.b[alpha] * self.v.sign(alpha);
        for j in 0..self.n() {
            let s = self.h.sign(j);
            a.column_mut(j).scale_mut(s);
        }
        a
    }

    /// `J_H B^α`.
    pub fn jb_matrix(&self, alpha: usize) -> Matrix {
        let mut m = self.b[alpha].clone();
        for i in 0..self.n() {
            let s = self.h.sign(i);
            m.row_mut(i).scale_mut(s);
        }
        m
    }

    pub fn bracket(&self, h1: &Vector, h2: &Vector) -> Result<Vector, AlgebraError> {
        self.h.check(h1)?;
        self.h.check(h2)?;
        Ok(self.bracket_unchecked(h1, h2))
    }

    pub(crate) fn bracket_unchecked(&self, h1: &Vector, h2: &Vector) -> Vector {
        Vector::from_fn(self.m(), |alpha, _| h1.dot(&(&self.b[alpha] * h2)))
    }

    pub fn mu(&self, v: &Vector, h: &Vector) -> Result<Vector, AlgebraError> {
        self.v.check(v)?;
        self.h.check(h)?;
        Ok(self.mu_unchecked(v, h))
    }

    pub(crate) fn mu_unchecked(&self, v: &Vector, h: &Vector) -> Vector {
        self.mu_operator_unchecked(v) * h
    }

    /// Matrix of `h ↦ μ(v, h)` acting on column vectors.
    pub fn mu_operator(&self, v: &Vector) -> Result<Matrix, AlgebraError> {
        self.v.check(v)?;
        Ok(self.mu_operator_unchecked(v))
    }

    pub(crate) fn mu_operator_unchecked(&self, v: &Vector) -> Matrix {
        let n = self.n();
        let mut op = Matrix::zeros(n, n);
        for alpha in 0..self.m() {
            if v[alpha] != 0.0 {
                op += self.a_matrix(alpha).transpose() * v[alpha];
            }
        }
        op
    }

    /// The `m × n` matrix of `ad_h = [h, ·]` restricted to `H`.
    pub fn ad_matrix(&self, h: &Vector) -> Result<Matrix, AlgebraError> {
        self.h.check(h)?;
        let mut ad = Matrix::zeros(self.m(), self.n());
        for alpha in 0..self.m() {
            let row = h.transpose() * &self.b[alpha];
            ad.set_row(alpha, &row);
        }
        Ok(ad)
    }
}

fn check_permutation(field: &'static str, order: &[usize], len: usize) -> Result<(), AlgebraError> {
    let mut seen = vec![false; len];
    if order.len() != len || order.iter().any(|&k| k >= len || std::mem::replace(&mut seen[k], true)) {
        return Err(AlgebraError::Shape {
            field,
            message: format!("must be a permutation of 0..{len}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, max_residual: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            threshold,
            passed: max_residual <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub sampled_vectors: usize,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub(crate) fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0))
}

/// Random vector rescaled to `⟨h,h⟩ = ±1`, rejecting draws with `|⟨h,h⟩| < 0.1`.
pub(crate) fn random_unit<R: Rng>(rng: &mut R, space: &ScalarSpace) -> Vector {
    loop {
        let h = random_vector(rng, space.dim());
        let q = space.norm2(&h);
        if q.abs() >= 0.1 {
            return h / q.abs().sqrt();
        }
    }
}

/// Validate with the default seed.
pub fn validate_h_type(
    alg: &HTypeAlgebra,
    trials: usize,
    tol: f64,
) -> Result<ValidationReport, AlgebraError> {
    validate_h_type_seeded(alg, trials, tol, DEFAULT_SEED)
}

pub fn validate_h_type_seeded(
    alg: &HTypeAlgebra,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<ValidationReport, AlgebraError> {
    if trials < 1 {
        return Err(AlgebraError::InvalidArgument("trials must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(AlgebraError::InvalidArgument("tol must be positive".into()));
    }
    let (hs, vs) = (alg.h(), alg.v());
    let (n, m) = (alg.n(), alg.m());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0;

    let (mut defining, mut image, mut composition) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let v = random_vector(&mut rng, m);
        let v2 = random_vector(&mut rng, m);
        let h = random_vector(&mut rng, n);
        let h2 = random_vector(&mut rng, n);
        sampled += 4;
        let muvh = alg.mu_unchecked(&v, &h);
        let lhs = hs.dot(&muvh, &h2);
        let rhs = vs.dot(&v, &alg.bracket_unchecked(&h, &h2));
        defining = defining.max((lhs - rhs).abs());

        let img = alg.bracket_unchecked(&h, &muvh) - &v * hs.norm2(&h);
        image = image.max(img.amax());

        let lhs = hs.dot(&muvh, &alg.mu_unchecked(&v2, &h));
        let rhs = vs.dot(&v, &v2) * hs.norm2(&h);
        composition = composition.max((lhs - rhs).abs());
    }

    let id = Matrix::identity(n, n);
    let (mut a_sq, mut jb_sq, mut anti) = (0.0f64, 0.0f64, 0.0f64);
    let jb: Vec<Matrix> = (0..m).map(|a| alg.jb_matrix(a)).collect();
    for alpha in 0..m {
        let eps = vs.sign(alpha);
        let a = alg.a_matrix(alpha);
        a_sq = a_sq.max(max_abs(&(&a * &a + &id * eps)));
        jb_sq = jb_sq.max(max_abs(&(&jb[alpha] * &jb[alpha] + &id * eps)));
        for beta in alpha + 1..m {
            let ac = &jb[alpha] * &jb[beta] + &jb[beta] * &jb[alpha];
            anti = anti.max(max_abs(&ac));
        }
    }

    let (mut iso, mut onto) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let h = random_unit(&mut rng, hs);
        sampled += 1;
        let (r_iso, r_onto) = ad_isometry_residual(alg, &h);
        iso = iso.max(r_iso);
        onto = onto.max(r_onto);
    }

    let checks = vec![
        Check::new("defining_identity", defining, tol),
        Check::new("image_identity", image, tol),
        Check::new("composition_formula", composition, tol),
        Check::new("clifford_a_square", a_sq, tol),
        Check::new("clifford_jb_square", jb_sq, tol),
        Check::new("clifford_anticommutator", anti, tol),
        Check::new("ad_isometry", iso, tol),
        Check::new("ad_onto", onto, 0.5),
    ];
    Ok(ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        sampled_vectors: sampled,
    })
}

/// Residual of `ad_h` being an isometry or anti-isometry from the scalar-product
/// complement of its kernel, and the rank deficit of `ad_h`.
fn ad_isometry_residual(alg: &HTypeAlgebra, h: &Vector) -> (f64, f64) {
    let ad = alg.ad_matrix(h).expect("sampled in H");
    let r = rank(&ad, RANK_REL);
    let onto = (alg.m() as f64 - r as f64).abs();
    let kernel = null_space(&ad, RANK_REL);
    // x ⟂ ker ⇔ kᵀ J_H x = 0 for every kernel basis vector k.
    let constraints = kernel.transpose() * alg.h().gram();
    let comp = if constraints.nrows() == 0 {
        Matrix::identity(alg.n(), alg.n())
    } else {
        null_space(&constraints, RANK_REL)
    };
    if comp.ncols() == 0 {
        return (f64::INFINITY, onto);
    }
    let g_h = comp.transpose() * alg.h().gram() * &comp;
    let img = &ad * &comp;
    let g_v = img.transpose() * alg.v().gram() * &img;
    let plus = max_abs(&(&g_v - &g_h));
    let minus = max_abs(&(&g_v + &g_h));
    (plus.min(minus), onto)
}

/// True iff the centre of the algebra meets `H` only in zero.
pub fn center_check(alg: &HTypeAlgebra) -> bool {
    let n = alg.n();
    let mut stacked = Matrix::zeros(n * alg.m(), n);
    for (alpha, slice) in alg.slices().iter().enumerate() {
        stacked.view_mut((alpha * n, 0), (n, n)).copy_from(slice);
    }
    rank(&stacked, RANK_REL) == n
}
