//! Levi-Civita connection of the left-invariant metric and the curvature it produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{random_vector, HTypeAlgebra};
use crate::composition::CatalogName;
use crate::spaces::{null_space, rank, Matrix, SpaceError, Vector};

const DEGENERACY_REL: f64 = 1e-12;
const ABELIAN_TOL: f64 = 1e-12;
const STABLE_TOL: f64 = 1e-10;
const RICCI_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("degenerate plane: discriminant {discriminant:e}")]
    DegeneratePlane { discriminant: f64 },
    #[error("Ricci tensor differs from its closed form by {deviation:e}; the algebra is not H-type")]
    RicciMismatch { deviation: f64 },
}

/// Left-invariant vector field `h + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentElement {
    pub h: Vector,
    pub v: Vector,
}

impl TangentElement {
    pub fn new(h: Vector, v: Vector) -> Self {
        Self { h, v }
    }

    pub fn zero(alg: &HTypeAlgebra) -> Self {
        Self { h: Vector::zeros(alg.n()), v: Vector::zeros(alg.m()) }
    }

    pub fn horizontal(alg: &HTypeAlgebra, h: Vector) -> Self {
        Self { h, v: Vector::zeros(alg.m()) }
    }

    pub fn vertical(alg: &HTypeAlgebra, v: Vector) -> Self {
        Self { h: Vector::zeros(alg.n()), v }
    }

    /// The `k`-th basis vector of `H ⊕ V`.
    pub fn basis(alg: &HTypeAlgebra, k: usize) -> Self {
        let mut e = Self::zero(alg);
        if k < alg.n() {
            e.h[k] = 1.0;
        } else {
            e.v[k - alg.n()] = 1.0;
        }
        e
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { h: &self.h + &other.h, v: &self.v + &other.v }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { h: &self.h - &other.h, v: &self.v - &other.v }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { h: &self.h * c, v: &self.v * c }
    }

    pub fn inner(&self, alg: &HTypeAlgebra, other: &Self) -> f64 {
        alg.h().dot(&self.h, &other.h) + alg.v().dot(&self.v, &other.v)
    }

    pub fn norm2(&self, alg: &HTypeAlgebra) -> f64 {
        self.inner(alg, self)
    }

    pub fn max_abs(&self) -> f64 {
        self.h.amax().max(self.v.amax())
    }

    fn euclidean2(&self) -> f64 {
        self.h.norm_squared() + self.v.norm_squared()
    }

    fn check(&self, alg: &HTypeAlgebra) -> Result<(), CurvatureError> {
        alg.h().check(&self.h)?;
        alg.v().check(&self.v)?;
        Ok(())
    }
}

/// `∇_a b` for left-invariant fields.
pub fn covariant_derivative(
    alg: &HTypeAlgebra,
    a: &TangentElement,
    b: &TangentElement,
) -> Result<TangentElement, CurvatureError> {
    a.check(alg)?;
    b.check(alg)?;
    Ok(nabla(alg, a, b))
}

fn nabla(alg: &HTypeAlgebra, a: &TangentElement, b: &TangentElement) -> TangentElement {
    let h = (alg.mu_unchecked(&b.v, &a.h) + alg.mu_unchecked(&a.v, &b.h)) * -0.5;
    let v = alg.bracket_unchecked(&a.h, &b.h) * 0.5;
    TangentElement { h, v }
}

fn lie_bracket(alg: &HTypeAlgebra, a: &TangentElement, b: &TangentElement) -> TangentElement {
    TangentElement::vertical(alg, alg.bracket_unchecked(&a.h, &b.h))
}

/// `R(x,y)z = ∇_x∇_y z − ∇_y∇_x z − ∇_{[x,y]} z`.
pub fn curvature_endomorphism(
    alg: &HTypeAlgebra,
    x: &TangentElement,
    y: &TangentElement,
    z: &TangentElement,
) -> Result<TangentElement, CurvatureError> {
    x.check(alg)?;
    y.check(alg)?;
    z.check(alg)?;
    Ok(riemann(alg, x, y, z))
}

fn riemann(alg: &HTypeAlgebra, x: &TangentElement, y: &TangentElement, z: &TangentElement) -> TangentElement {
    let xy = nabla(alg, x, &nabla(alg, y, z));
    let yx = nabla(alg, y, &nabla(alg, x, z));
    let br = nabla(alg, &lie_bracket(alg, x, y), z);
    xy.sub(&yx).sub(&br)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub a: TangentElement,
    pub b: TangentElement,
    /// `‖a‖²‖b‖² − ⟨a,b⟩²`.
    pub discriminant: f64,
}

impl Plane {
    pub fn new(alg: &HTypeAlgebra, a: TangentElement, b: TangentElement) -> Result<Self, CurvatureError> {
        a.check(alg)?;
        b.check(alg)?;
        let ab = a.inner(alg, &b);
        let discriminant = a.norm2(alg) * b.norm2(alg) - ab * ab;
        Ok(Self { a, b, discriminant })
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = (self.a.euclidean2() * self.b.euclidean2()).max(1.0);
        self.discriminant.abs() < DEGENERACY_REL * scale
    }
}

/// `⟨R(a,b)a, b⟩ / (‖a‖²‖b‖² − ⟨a,b⟩²)`.
pub fn sectional_curvature(alg: &HTypeAlgebra, plane: &Plane) -> Result<f64, CurvatureError> {
    if plane.is_degenerate() {
        return Err(CurvatureError::DegeneratePlane { discriminant: plane.discriminant });
    }
    let r = riemann(alg, &plane.a, &plane.b, &plane.a);
    Ok(r.inner(alg, &plane.b) / plane.discriminant)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneClass {
    Stable,
    Abelian,
    Generic,
    Mixed,
    Vertical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneClassification {
    pub class: PlaneClass,
    /// Set when both horizontal basis vectors are null and stability was decided by the fallback.
    pub null_basis: bool,
}

fn span_rank(x: &Vector, y: &Vector) -> usize {
    let mut m = Matrix::zeros(x.len(), 2);
    m.set_column(0, x);
    m.set_column(1, y);
    if m.amax() == 0.0 {
        return 0;
    }
    rank(&m, 1e-12)
}

pub fn classify_plane(alg: &HTypeAlgebra, plane: &Plane) -> PlaneClassification {
    let plain = |class| PlaneClassification { class, null_basis: false };
    if plane.is_degenerate() {
        return plain(PlaneClass::Degenerate);
    }
    let (a, b) = (&plane.a, &plane.b);
    let rank_h = span_rank(&a.h, &b.h);
    let rank_v = span_rank(&a.v, &b.v);
    if rank_h == 0 {
        return plain(PlaneClass::Vertical);
    }
    if rank_v > 0 {
        return plain(if rank_h == 1 && rank_v == 1 { PlaneClass::Mixed } else { PlaneClass::Generic });
    }
    let (h1, h2) = (&a.h, &b.h);
    let br = alg.bracket_unchecked(h1, h2);
    let scale = (h1.norm() * h2.norm()).max(1.0);
    if br.amax() <= ABELIAN_TOL * scale {
        return plain(PlaneClass::Abelian);
    }
    let (n1, n2) = (alg.h().norm2(h1), alg.h().norm2(h2));
    let null = |q: f64, h: &Vector| q.abs() <= 1e-12 * h.norm_squared().max(1.0);
    let v = if !null(n1, h1) {
        Some(&br / n1)
    } else if !null(n2, h2) {
        Some(&br / -n2)
    } else {
        None
    };
    match v {
        Some(v) => plain(if preserves(alg, &v, h1, h2) { PlaneClass::Stable } else { PlaneClass::Generic }),
        None => PlaneClassification {
            class: if null_basis_stable(alg, h1, h2) { PlaneClass::Stable } else { PlaneClass::Generic },
            null_basis: true,
        },
    }
}

// Residual of μ(v, h_k) after projecting onto span{h1, h2}.
fn escape(alg: &HTypeAlgebra, v: &Vector, h1: &Vector, h2: &Vector) -> f64 {
    let mut basis = Matrix::zeros(h1.len(), 2);
    basis.set_column(0, h1);
    basis.set_column(1, h2);
    let q = basis.qr().q();
    [h1, h2]
        .iter()
        .map(|h| {
            let w = alg.mu_unchecked(v, h);
            let proj = &q * (q.transpose() * &w);
            (&w - proj).amax() / (1.0 + w.amax())
        })
        .fold(0.0, f64::max)
}

fn preserves(alg: &HTypeAlgebra, v: &Vector, h1: &Vector, h2: &Vector) -> bool {
    escape(alg, v, h1, h2) <= STABLE_TOL
}

/// Looks for a non-null `v` with `μ(v, P) ⊂ P` by solving the linear invariance conditions.
fn null_basis_stable(alg: &HTypeAlgebra, h1: &Vector, h2: &Vector) -> bool {
    let n = alg.n();
    let mut basis = Matrix::zeros(n, 2);
    basis.set_column(0, h1);
    basis.set_column(1, h2);
    let q = basis.qr().q();
    let project_out = Matrix::identity(n, n) - &q * q.transpose();
    let mut system = Matrix::zeros(2 * n, alg.m());
    for alpha in 0..alg.m() {
        let a_t = alg.a_matrix(alpha).transpose();
        system.view_mut((0, alpha), (n, 1)).copy_from(&(&project_out * (&a_t * h1)));
        system.view_mut((n, alpha), (n, 1)).copy_from(&(&project_out * (&a_t * h2)));
    }
    let kernel = null_space(&system, 1e-10);
    if kernel.ncols() == 0 {
        return false;
    }
    // Non-null vectors exist unless the kernel is totally null.
    let g = kernel.transpose() * alg.v().gram() * &kernel;
    g.amax() > 1e-10
}

/// Ricci tensor of the left-invariant metric together with its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Ricci {
    /// Metric contraction `Ric(X,Y) = Σ_a ε_a ⟨R(e_a, X)Y, e_a⟩`.
    pub matrix: Matrix,
    /// `diag(−½ m J_H, ¼ n J_V)`.
    pub closed_form: Matrix,
    pub deviation: f64,
}

/// Basis-sum Ricci tensor checked against `diag(−½ m J_H, ¼ n J_V)`.
pub fn ricci_tensor(alg: &HTypeAlgebra) -> Result<Ricci, CurvatureError> {
    let matrix = ricci_contraction(alg);
    let closed_form = ricci_closed_form(alg);
    let deviation = (&matrix - &closed_form).amax();
    if deviation.is_nan() || deviation > RICCI_TOL {
        return Err(CurvatureError::RicciMismatch { deviation });
    }
    Ok(Ricci { matrix, closed_form, deviation })
}

/// `Ric(e_a, e_b) = Σ_c ε_c ⟨R(e_c, e_a) e_b, e_c⟩` over the orthonormal basis of `H ⊕ V`.
pub fn ricci_contraction(alg: &HTypeAlgebra) -> Matrix {
    let d = alg.n() + alg.m();
    let basis: Vec<TangentElement> = (0..d).map(|k| TangentElement::basis(alg, k)).collect();
    let sign = |k: usize| if k < alg.n() { alg.h().sign(k) } else { alg.v().sign(k - alg.n()) };
    let entries: Vec<f64> = (0..d * d)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / d, idx % d);
            (0..d)
                .map(|c| sign(c) * riemann(alg, &basis[c], &basis[a], &basis[b]).inner(alg, &basis[c]))
                .sum()
        })
        .collect();
    Matrix::from_row_slice(d, d, &entries)
}

/// `diag(−½ m J_H, ¼ n J_V)`.
pub fn ricci_closed_form(alg: &HTypeAlgebra) -> Matrix {
    let (n, m) = (alg.n(), alg.m());
    Matrix::from_fn(n + m, n + m, |a, b| match (a == b, a < n) {
        (false, _) => 0.0,
        (true, true) => -0.5 * m as f64 * alg.h().sign(a),
        (true, false) => 0.25 * n as f64 * alg.v().sign(a - n),
    })
}

/// Scalar curvature from the metric trace of the Ricci tensor, with the sign-sum formula beside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCurvature {
    /// `Σ_a ε_a Ric(e_a, e_a)`.
    pub trace: f64,
    /// `−¼ (Σ_α ε_α)(Σ_i ε_i)`.
    pub formula: f64,
    /// Value stated for the catalog family, when the algebra came from the catalog.
    pub listed: Option<f64>,
    /// True when trace, formula and (if present) listed value agree within `1e-10`.
    pub consistent: bool,
}

pub fn scalar_curvature(alg: &HTypeAlgebra) -> Result<ScalarCurvature, CurvatureError> {
    let ric = ricci_tensor(alg)?;
    let n = alg.n();
    let trace: f64 = (0..n + alg.m())
        .map(|a| {
            let s = if a < n { alg.h().sign(a) } else { alg.v().sign(a - n) };
            s * ric.matrix[(a, a)]
        })
        .sum();
    let formula = -0.25 * alg.v().sign_sum() * alg.h().sign_sum();
    let listed = listed_value(alg.label());
    let close = |x: f64| (x - trace).abs() <= 1e-10;
    let consistent = close(formula) && listed.is_none_or(close);
    Ok(ScalarCurvature { trace, formula, listed, consistent })
}

fn listed_value(label: &str) -> Option<f64> {
    let (name, n) = label.split_once(':')?;
    let name: CatalogName = name.parse().ok()?;
    Some(name.listed_scalar_curvature(n.parse().ok()?))
}

/// Random planes cycling through horizontal, mixed, vertical and `span{h, μ(v,h)}` kinds.
pub fn random_planes(alg: &HTypeAlgebra, count: usize, seed: u64) -> Vec<Plane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (alg.n(), alg.m());
    (0..count)
        .map(|i| {
            let kind = if i % 4 == 2 && m < 2 { 0 } else { i % 4 };
            let (a, b) = match kind {
                0 => (
                    TangentElement::horizontal(alg, random_vector(&mut rng, n)),
                    TangentElement::horizontal(alg, random_vector(&mut rng, n)),
                ),
                1 => (
                    TangentElement::horizontal(alg, random_vector(&mut rng, n)),
                    TangentElement::vertical(alg, random_vector(&mut rng, m)),
                ),
                2 => (
                    TangentElement::vertical(alg, random_vector(&mut rng, m)),
                    TangentElement::vertical(alg, random_vector(&mut rng, m)),
                ),
                _ => {
                    let h = random_vector(&mut rng, n);
                    let v = random_vector(&mut rng, m);
                    let h2 = alg.mu_unchecked(&v, &h);
                    (TangentElement::horizontal(alg, h), TangentElement::horizontal(alg, h2))
                }
            };
            Plane::new(alg, a, b).expect("dimensions match")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSample {
    /// The two spanning vectors as `(h, v)` coordinates.
    pub basis: [Vec<f64>; 2],
    pub class: PlaneClass,
    pub null_basis: bool,
    /// Sectional curvature; absent for degenerate planes.
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub algebra: String,
    pub ricci: Vec<Vec<f64>>,
    /// Metric trace of the Ricci tensor.
    pub scalar: f64,
    pub scalar_formula: f64,
    pub scalar_listed: Option<f64>,
    pub scalar_consistent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub sample_planes: Vec<PlaneSample>,
}

pub fn curvature_report(alg: &HTypeAlgebra, planes: usize, seed: u64) -> Result<CurvatureReport, CurvatureError> {
    let ric = ricci_tensor(alg)?;
    let sc = scalar_curvature(alg)?;
    let note = (!sc.consistent).then(|| {
        let listed = sc.listed.map(|x| format!(", listed value {x}")).unwrap_or_default();
        format!(
            "scalar curvature from the Ricci trace is {}; sign-sum formula gives {}{listed}",
            sc.trace, sc.formula
        )
    });
    let coords = |t: &TangentElement| t.h.iter().chain(t.v.iter()).copied().collect::<Vec<f64>>();
    let sample_planes = random_planes(alg, planes, seed)
        .iter()
        .map(|p| {
            let c = classify_plane(alg, p);
            PlaneSample {
                basis: [coords(&p.a), coords(&p.b)],
                class: c.class,
                null_basis: c.null_basis,
                k: sectional_curvature(alg, p).ok(),
            }
        })
        .collect();
    Ok(CurvatureReport {
        algebra: alg.label().to_string(),
        ricci: ric.matrix.row_iter().map(|r| r.iter().copied().collect()).collect(),
        scalar: sc.trace,
        scalar_formula: sc.formula,
        scalar_listed: sc.listed,
        scalar_consistent: sc.consistent,
        note,
        sample_planes,
    })
}
