//! Group law in exponential coordinates, the metric Hamiltonian and its geodesics.

mod quadrature;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::HTypeAlgebra;
use crate::spaces::{Matrix, SpaceError, Vector};

/// Θ² below this magnitude counts as null.
pub const NULL_THETA_TOL: f64 = 1e-14;
const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite state at s = {s}")]
    NonFinite { s: f64 },
}

/// Point `exp(x + t)` of the group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub x: Vector,
    pub t: Vector,
}

impl GroupPoint {
    pub fn identity(alg: &HTypeAlgebra) -> Self {
        Self { x: Vector::zeros(alg.n()), t: Vector::zeros(alg.m()) }
    }

    pub fn inverse(&self) -> Self {
        Self { x: -&self.x, t: -&self.t }
    }

    fn check(&self, alg: &HTypeAlgebra) -> Result<(), GeodesicError> {
        alg.h().check(&self.x)?;
        alg.v().check(&self.t)?;
        Ok(())
    }
}

/// Momenta `(ξ, θ)` dual to `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    pub xi: Vector,
    pub theta: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    ZeroTheta,
    NullTheta,
    NonNull,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub point: GroupPoint,
    pub covector: Covector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub regime: Regime,
    pub theta2: f64,
    pub v0: Vector,
    pub theta: Vector,
}

/// JSON sidecar written next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub algebra: String,
    pub n: usize,
    pub m: usize,
    pub regime: Regime,
    pub theta2: f64,
    pub v0: Vec<f64>,
    pub theta: Vec<f64>,
    pub samples: usize,
    pub method: String,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (n, m) = (self.v0.len(), self.theta.len());
        let mut header = vec!["s".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|a| format!("t{a}")));
        writeln!(w, "{}", header.join(","))?;
        for sample in &self.samples {
            let row: Vec<String> = std::iter::once(sample.s)
                .chain(sample.point.x.iter().copied())
                .chain(sample.point.t.iter().copied())
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn meta(&self, alg: &HTypeAlgebra, method: &str) -> TrajectoryMeta {
        TrajectoryMeta {
            algebra: alg.label().to_string(),
            n: alg.n(),
            m: alg.m(),
            regime: self.regime,
            theta2: self.theta2,
            v0: self.v0.iter().copied().collect(),
            theta: self.theta.iter().copied().collect(),
            samples: self.samples.len(),
            method: method.to_string(),
        }
    }

    /// Largest coordinate difference between samples of two trajectories taken at the same `s`.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        let mut j = 0;
        let mut worst = 0.0f64;
        for a in &self.samples {
            while j < other.samples.len() && other.samples[j].s < a.s - 1e-12 {
                j += 1;
            }
            if let Some(b) = other.samples.get(j).filter(|b| (b.s - a.s).abs() <= 1e-12) {
                worst = worst
                    .max((&a.point.x - &b.point.x).amax())
                    .max((&a.point.t - &b.point.t).amax());
            }
        }
        worst
    }
}

/// `(x, t)·(x', t') = (x + x', t + t' + ½[x, x'])`.
pub fn group_mul(alg: &HTypeAlgebra, g: &GroupPoint, g2: &GroupPoint) -> Result<GroupPoint, GeodesicError> {
    g.check(alg)?;
    g2.check(alg)?;
    let br = alg.bracket_unchecked(&g.x, &g2.x);
    Ok(GroupPoint { x: &g.x + &g2.x, t: &g.t + &g2.t + br * 0.5 })
}

/// `X_i(g) = ∂_{x_i} + ½ Σ_α Σ_j B^α_ij x_j ∂_{t_α}`.
pub fn left_frame(alg: &HTypeAlgebra, g: &GroupPoint) -> Result<Vec<Vector>, GeodesicError> {
    g.check(alg)?;
    let (n, m) = (alg.n(), alg.m());
    let bx: Vec<Vector> = alg.slices().iter().map(|b| b * &g.x).collect();
    Ok((0..n)
        .map(|i| {
            let mut x = Vector::zeros(n + m);
            x[i] = 1.0;
            for alpha in 0..m {
                x[n + alpha] = 0.5 * bx[alpha][i];
            }
            x
        })
        .collect())
}

/// `Ω = Σ_α θ_α B^α`.
pub fn omega(alg: &HTypeAlgebra, theta: &Vector) -> Result<Matrix, GeodesicError> {
    alg.v().check(theta)?;
    let n = alg.n();
    let mut om = Matrix::zeros(n, n);
    for (alpha, b) in alg.slices().iter().enumerate() {
        om += b * theta[alpha];
    }
    Ok(om)
}

/// `Θ² = Σ_α ε_α θ_α²`.
pub fn theta2(alg: &HTypeAlgebra, theta: &Vector) -> Result<f64, GeodesicError> {
    alg.v().check(theta)?;
    Ok(alg.v().norm2(theta))
}

pub fn regime(alg: &HTypeAlgebra, theta: &Vector) -> Result<Regime, GeodesicError> {
    let t2 = theta2(alg, theta)?;
    Ok(if theta.iter().all(|&x| x == 0.0) {
        Regime::ZeroTheta
    } else if t2.abs() <= NULL_THETA_TOL {
        Regime::NullTheta
    } else {
        Regime::NonNull
    })
}

fn check_covector(alg: &HTypeAlgebra, lam: &Covector) -> Result<(), GeodesicError> {
    alg.h().check(&lam.xi)?;
    alg.v().check(&lam.theta)?;
    Ok(())
}

/// `½ Σ_i ε_i λ(X_i)²` evaluated through the frame.
pub fn hamiltonian(alg: &HTypeAlgebra, g: &GroupPoint, lam: &Covector) -> Result<f64, GeodesicError> {
    check_covector(alg, lam)?;
    let frame = left_frame(alg, g)?;
    let n = alg.n();
    let mut h = 0.0;
    for (i, x) in frame.iter().enumerate() {
        let pairing = x.rows(0, n).dot(&lam.xi) + x.rows(n, alg.m()).dot(&lam.theta);
        h += 0.5 * alg.h().sign(i) * pairing * pairing;
    }
    Ok(h)
}

/// `½⟨ξ,ξ⟩ + ½⟨ξ,Ωx⟩ + ⅛⟨Ωx,Ωx⟩`.
pub fn hamiltonian_expanded(alg: &HTypeAlgebra, g: &GroupPoint, lam: &Covector) -> Result<f64, GeodesicError> {
    check_covector(alg, lam)?;
    g.check(alg)?;
    let hs = alg.h();
    let ox = omega(alg, &lam.theta)? * &g.x;
    Ok(0.5 * hs.dot(&lam.xi, &lam.xi) + 0.5 * hs.dot(&lam.xi, &ox) + 0.125 * hs.dot(&ox, &ox))
}

/// Coefficients `(c0, c1)` with `exp(sK) = c0·I + c1·K` for `K = J_HΩ`, `K² = −Θ² I`.
///
/// For `Θ² ≠ 0` the trigonometric and hyperbolic series are combined and the sign of `Θ²`
/// selects which pair survives.
pub fn four_series_coefficients(theta2: f64, s: f64) -> (f64, f64) {
    if theta2.abs() <= NULL_THETA_TOL {
        return (1.0, s);
    }
    let th = theta2.abs().sqrt();
    let sgn = theta2.signum();
    let (c, ch) = ((s * th).cos(), (s * th).cosh());
    let (sn, sh) = ((s * th).sin(), (s * th).sinh());
    let c0 = 0.5 * ((c + ch) - sgn * (ch - c));
    let c1 = 0.5 * ((sn + sh) - sgn * (sh - sn)) / th;
    (c0, c1)
}

/// `exp(s J_HΩ)` from the closed form.
pub fn exp_four_series(alg: &HTypeAlgebra, theta: &Vector, s: f64) -> Result<Matrix, GeodesicError> {
    let k = alg.h().gram() * omega(alg, theta)?;
    let (c0, c1) = four_series_coefficients(theta2(alg, theta)?, s);
    let n = alg.n();
    Ok(Matrix::identity(n, n) * c0 + k * c1)
}

/// Coefficients `(a, b)` with `x(s) = a·v0 + b·K v0`.
fn position_coefficients(regime: Regime, theta2: f64, s: f64) -> (f64, f64) {
    match regime {
        Regime::ZeroTheta => (s, 0.0),
        Regime::NullTheta => (s, 0.5 * s * s),
        Regime::NonNull => {
            let th = theta2.abs().sqrt();
            let half = (0.5 * s * th).sin();
            if theta2 > 0.0 {
                ((s * th).sin() / th, 2.0 * half * half / theta2)
            } else {
                let half = (0.5 * s * th).sinh();
                ((s * th).sinh() / th, -2.0 * half * half / theta2)
            }
        }
    }
}

/// Corrected quartic for the vertical part of a null-θ geodesic:
/// `t_α(s) = −s³/12 · v0ᵀB^αKv0 + s⁴/16 · (Kv0)ᵀB^α(Kv0)` with `K = J_HΩ`.
pub fn null_theta_vertical(alg: &HTypeAlgebra, v0: &Vector, theta: &Vector, s: f64) -> Result<Vector, GeodesicError> {
    alg.h().check(v0)?;
    let w = alg.h().gram() * omega(alg, theta)? * v0;
    Ok(Vector::from_fn(alg.m(), |alpha, _| {
        let b = alg.slice(alpha);
        -s.powi(3) / 12.0 * v0.dot(&(b * &w)) + s.powi(4) / 16.0 * w.dot(&(b * &w))
    }))
}

/// Geodesic from the identity with initial velocity `v0` and vertical momentum `theta`.
pub fn geodesic_closed_form(
    alg: &HTypeAlgebra,
    v0: &Vector,
    theta: &Vector,
    s_values: &[f64],
) -> Result<Trajectory, GeodesicError> {
    alg.h().check(v0)?;
    let t2 = theta2(alg, theta)?;
    let reg = regime(alg, theta)?;
    if s_values.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(GeodesicError::InvalidArgument("s values must be finite and non-negative".into()));
    }
    if s_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeodesicError::InvalidArgument("s values must be strictly increasing".into()));
    }
    let mut grid: Vec<f64> = Vec::with_capacity(s_values.len() + 1);
    if s_values.first() != Some(&0.0) {
        grid.push(0.0);
    }
    grid.extend_from_slice(s_values);

    let om = omega(alg, theta)?;
    let jh = alg.h().gram();
    let w = &jh * &om * v0;
    let m = alg.m();
    let position = |s: f64| {
        let (a, b) = position_coefficients(reg, t2, s);
        v0 * a + &w * b
    };
    let velocity = |s: f64| {
        let (c0, c1) = four_series_coefficients(t2, s);
        v0 * c0 + &w * c1
    };
    let bxs: Vec<&Matrix> = alg.slices().iter().collect();

    let mut t = Vector::zeros(m);
    let mut samples = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    for &s in &grid {
        if reg != Regime::ZeroTheta && s > prev {
            let inc = quadrature::integrate(
                |r, out| {
                    let x = position(r);
                    let xd = velocity(r);
                    for (alpha, b) in bxs.iter().enumerate() {
                        out[alpha] = 0.5 * xd.dot(&(*b * &x));
                    }
                },
                prev,
                s,
                m,
                QUAD_TOL,
            );
            for alpha in 0..m {
                t[alpha] += inc[alpha];
            }
        }
        prev = s;
        let x = position(s);
        let xd = velocity(s);
        // ẋ = J_H(ξ + ½Ωx)
        let xi = &jh * &xd - (&om * &x) * 0.5;
        if x.iter().chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(GeodesicError::NonFinite { s });
        }
        samples.push(Sample {
            s,
            point: GroupPoint { x, t: t.clone() },
            covector: Covector { xi, theta: theta.clone() },
        });
    }
    Ok(Trajectory { samples, regime: reg, theta2: t2, v0: v0.clone(), theta: theta.clone() })
}

/// Classical RK4 on the Hamiltonian system, started at the identity with `ξ(0) = J_H v0`.
///
/// The step is shrunk if needed so that `s_max` is a whole number of steps.
pub fn integrate_hamiltonian(
    alg: &HTypeAlgebra,
    v0: &Vector,
    theta: &Vector,
    s_max: f64,
    dt: f64,
) -> Result<Trajectory, GeodesicError> {
    alg.h().check(v0)?;
    let t2 = theta2(alg, theta)?;
    let reg = regime(alg, theta)?;
    if !(dt > 0.0 && dt.is_finite()) || !(s_max > 0.0 && s_max.is_finite()) {
        return Err(GeodesicError::InvalidArgument("dt and s_max must be positive".into()));
    }
    let (n, m) = (alg.n(), alg.m());
    let steps = (s_max / dt - 1e-9).ceil().max(1.0) as usize;
    let h = s_max / steps as f64;
    let eps: Vec<f64> = (0..n).map(|i| alg.h().sign(i)).collect();
    let om = omega(alg, theta)?;
    let b: Vec<&Matrix> = alg.slices().iter().collect();

    // State layout: x (n), t (m), ξ (n).
    let dim = 2 * n + m;
    let rhs = |y: &[f64], out: &mut [f64], xd: &mut [f64]| {
        let (x, xi) = (&y[..n], &y[n + m..]);
        for i in 0..n {
            let mut ox = 0.0;
            for j in 0..n {
                ox += om[(i, j)] * x[j];
            }
            xd[i] = eps[i] * (xi[i] + 0.5 * ox);
        }
        out[..n].copy_from_slice(xd);
        for alpha in 0..m {
            let mut acc = 0.0;
            for i in 0..n {
                let mut bx = 0.0;
                for j in 0..n {
                    bx += b[alpha][(i, j)] * x[j];
                }
                acc += xd[i] * bx;
            }
            out[n + alpha] = 0.5 * acc;
        }
        for i in 0..n {
            let mut oxd = 0.0;
            for j in 0..n {
                oxd += om[(i, j)] * xd[j];
            }
            out[n + m + i] = 0.5 * oxd;
        }
    };

    let mut y = vec![0.0; dim];
    for i in 0..n {
        y[n + m + i] = eps[i] * v0[i];
    }
    let sample = |s: f64, y: &[f64]| Sample {
        s,
        point: GroupPoint {
            x: Vector::from_column_slice(&y[..n]),
            t: Vector::from_column_slice(&y[n..n + m]),
        },
        covector: Covector { xi: Vector::from_column_slice(&y[n + m..]), theta: theta.clone() },
    };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(sample(0.0, &y));
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut xd = vec![0.0; n];
    for step in 1..=steps {
        rhs(&y, &mut k1, &mut xd);
        for d in 0..dim {
            tmp[d] = y[d] + 0.5 * h * k1[d];
        }
        rhs(&tmp, &mut k2, &mut xd);
        for d in 0..dim {
            tmp[d] = y[d] + 0.5 * h * k2[d];
        }
        rhs(&tmp, &mut k3, &mut xd);
        for d in 0..dim {
            tmp[d] = y[d] + h * k3[d];
        }
        rhs(&tmp, &mut k4, &mut xd);
        for d in 0..dim {
            y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        let s = s_max * step as f64 / steps as f64;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GeodesicError::NonFinite { s });
        }
        samples.push(sample(s, &y));
    }
    Ok(Trajectory { samples, regime: reg, theta2: t2, v0: v0.clone(), theta: theta.clone() })
}
