//! Multistart least-squares search for compositions of two binary quadratic forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CompositionError, CompositionMap};
use crate::spaces::{Matrix, ScalarSpace};

const FOUND_TOL: f64 = 1e-10;
const MAX_ITER: usize = 400;

/// Monomial pairs `(0,0), (1,1), (0,1)` for both the `y` and the `x` variables.
const PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        map: CompositionMap,
        residual: f64,
        coefficients: [f64; 8],
    },
    Infeasible {
        residual_floor: f64,
        coefficients: [f64; 8],
        obstruction: Option<Obstruction>,
    },
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }

    pub fn residual(&self) -> f64 {
        match self {
            SearchOutcome::Found { residual, .. } => *residual,
            SearchOutcome::Infeasible { residual_floor, .. } => *residual_floor,
        }
    }

    pub fn verdict(&self) -> SearchVerdict {
        match self {
            SearchOutcome::Found { residual, coefficients, .. } => SearchVerdict {
                verdict: "found".into(),
                residual: *residual,
                coefficients: coefficients.to_vec(),
                obstruction: None,
            },
            SearchOutcome::Infeasible { residual_floor, coefficients, obstruction } => SearchVerdict {
                verdict: "infeasible".into(),
                residual: *residual_floor,
                coefficients: coefficients.to_vec(),
                obstruction: obstruction.clone(),
            },
        }
    }
}

/// Serializable summary of a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchVerdict {
    pub verdict: String,
    pub residual: f64,
    /// `(a, b, c, d, α, β, γ, δ)` with `μ = (a y1x1 + b y1x2 + c y2x1 + d y2x2, α y1x1 + …)`.
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
}

/// Exact reason no composition exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub phi_index: usize,
    pub lambda_index: usize,
    /// φ-norms of the vectors `(μ(u_k, h_1)_1, μ(u_k, h_1)_2)` for `k = 1, 2`.
    pub column_norms: [f64; 2],
    pub statement: String,
}

fn signs(index: usize) -> [f64; 2] {
    [if index >= 1 { -1.0 } else { 1.0 }, if index >= 2 { -1.0 } else { 1.0 }]
}

/// The exact obstruction for a split `φ` and a definite `λ`.
///
/// The coefficients of `y_k² x_1²` and `y_1 y_2 x_1²` force the vectors
/// `w_k = μ(u_k, h_1)` to be φ-orthogonal with φ-norms `λ_k φ_1` of equal sign.
/// A split plane has no such pair.
pub fn algebraic_obstruction(phi_index: usize, lambda_index: usize) -> Option<Obstruction> {
    if phi_index > 2 || lambda_index > 2 {
        return None;
    }
    let s = signs(phi_index);
    let t = signs(lambda_index);
    let phi_split = s[0] * s[1] < 0.0;
    let lambda_definite = t[0] * t[1] > 0.0;
    if !(phi_split && lambda_definite) {
        return None;
    }
    let column_norms = [t[0] * s[0], t[1] * s[0]];
    Some(Obstruction {
        phi_index,
        lambda_index,
        column_norms,
        statement: format!(
            "w1, w2 must be phi-orthogonal with phi(w1) = {}, phi(w2) = {}; \
             in a split plane the orthogonal complement of a non-null vector has norm of opposite sign",
            column_norms[0], column_norms[1]
        ),
    })
}

fn p_index(k: usize, i: usize) -> usize {
    2 * k + i
}

fn q_index(k: usize, i: usize) -> usize {
    4 + 2 * k + i
}

/// The nine residuals `r_e(c) = cᵀ S_e c − rhs_e`.
struct System {
    forms: Vec<Matrix>,
    rhs: Vec<f64>,
}

impl System {
    fn new(s: [f64; 2], t: [f64; 2]) -> Self {
        let pair = |a: usize, b: usize| PAIRS.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
        let mut forms = vec![Matrix::zeros(8, 8); 9];
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let e = 3 * pair(k, l) + pair(i, j);
                        forms[e][(p_index(k, i), p_index(l, j))] += s[0];
                        forms[e][(q_index(k, i), q_index(l, j))] += s[1];
                    }
                }
            }
        }
        for f in &mut forms {
            *f = (&*f + f.transpose()) * 0.5;
        }
        let mut rhs = vec![0.0; 9];
        for k in 0..2 {
            for i in 0..2 {
                rhs[3 * k + i] = t[k] * s[i];
            }
        }
        Self { forms, rhs }
    }

    fn residuals(&self, c: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_fn(9, |e, _| c.dot(&(&self.forms[e] * c)) - self.rhs[e])
    }

    fn jacobian(&self, c: &nalgebra::DVector<f64>) -> Matrix {
        let mut jac = Matrix::zeros(9, 8);
        for e in 0..9 {
            let g = &self.forms[e] * c * 2.0;
            jac.set_row(e, &g.transpose());
        }
        jac
    }

    /// Levenberg–Marquardt descent; returns the final point and its sum of squares.
    fn descend(&self, mut c: nalgebra::DVector<f64>) -> (nalgebra::DVector<f64>, f64) {
        let mut r = self.residuals(&c);
        let mut f = r.norm_squared();
        let mut damping = 1e-3;
        for _ in 0..MAX_ITER {
            if f < 1e-30 {
                break;
            }
            let jac = self.jacobian(&c);
            let jtj = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut improved = false;
            for _ in 0..30 {
                let mut a = jtj.clone();
                for d in 0..8 {
                    a[(d, d)] += damping * (1.0 + jtj[(d, d)]);
                }
                let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                    damping *= 10.0;
                    continue;
                };
                let trial = &c + step;
                let rt = self.residuals(&trial);
                let ft = rt.norm_squared();
                if ft < f {
                    c = trial;
                    r = rt;
                    let gain = f - ft;
                    f = ft;
                    damping = (damping / 3.0).max(1e-15);
                    improved = gain > f64::EPSILON * f.max(1e-300);
                    break;
                }
                damping *= 4.0;
            }
            if !improved {
                break;
            }
        }
        (c, f)
    }
}

/// Search for a composition of `φ` (index `phi_index`) by `λ` (index `lambda_index`) on `ℝ²`.
///
/// Every restart draws a start from `[−2, 2]⁸` using stream `restart` of a ChaCha generator seeded
/// with `seed`, so results do not depend on the thread count. `found` means the best sum of
/// squared coefficient residuals is at most `1e-10`; `infeasible` is a numerical verdict unless
/// an exact obstruction is attached.
pub fn search_composition_2d(
    phi_index: usize,
    lambda_index: usize,
    restarts: usize,
    seed: u64,
) -> Result<SearchOutcome, CompositionError> {
    if phi_index > 2 || lambda_index > 2 {
        return Err(CompositionError::InvalidParameter("indices must lie in 0..=2".into()));
    }
    if restarts < 1 {
        return Err(CompositionError::InvalidParameter("restarts must be at least 1".into()));
    }
    let s = signs(phi_index);
    let t = signs(lambda_index);
    let system = System::new(s, t);

    let runs: Vec<(nalgebra::DVector<f64>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let c = nalgebra::DVector::from_fn(8, |_, _| rng.random_range(-2.0..=2.0));
            system.descend(c)
        })
        .collect();
    let (best, f) = runs
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("at least one restart");

    let coefficients: [f64; 8] = std::array::from_fn(|k| best[k]);
    if f <= FOUND_TOL {
        if let Some(map) = normalize(&coefficients, phi_index, lambda_index) {
            let coefficients = map_coefficients(&map);
            return Ok(SearchOutcome::Found { map, residual: f, coefficients });
        }
    }
    Ok(SearchOutcome::Infeasible {
        residual_floor: f,
        coefficients,
        obstruction: algebraic_obstruction(phi_index, lambda_index),
    })
}

fn slices_of(c: &[f64; 8]) -> [Matrix; 2] {
    std::array::from_fn(|k| {
        Matrix::from_fn(2, 2, |i, j| if j == 0 { c[p_index(k, i)] } else { c[q_index(k, i)] })
    })
}

fn map_coefficients(map: &CompositionMap) -> [f64; 8] {
    let mut c = [0.0; 8];
    for k in 0..2 {
        for i in 0..2 {
            c[p_index(k, i)] = map.slices()[k][(i, 0)];
            c[q_index(k, i)] = map.slices()[k][(i, 1)];
        }
    }
    c
}

/// Rescale so that `μ(u0, ·)` is the identity: `μ'(u,h) = μ(u, μ(u0,·)⁻¹ h)`.
fn normalize(c: &[f64; 8], phi_index: usize, lambda_index: usize) -> Option<CompositionMap> {
    let u = ScalarSpace::new(2, lambda_index).ok()?;
    let h = ScalarSpace::new(2, phi_index).ok()?;
    let u0 = u.index();
    if u0 >= 2 {
        return None;
    }
    let slices = slices_of(c);
    let inv = slices[u0].clone().try_inverse()?;
    let mut normalized: Vec<Matrix> = slices.iter().map(|s| &inv * s).collect();
    normalized[u0] = Matrix::identity(2, 2);
    CompositionMap::new(u, h, normalized, u0).ok()
}
