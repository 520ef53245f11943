//! Adaptive Gauss–Legendre quadrature for vector-valued integrands.

use std::sync::OnceLock;

const ORDER: usize = 10;
const MAX_DEPTH: usize = 24;

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for k in 0..ORDER {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_{n-1}(x).
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=ORDER {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn gauss<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Vec<f64> {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; dim];
    for k in 0..ORDER {
        f(mid + half * nodes[k], buf);
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += weights[k] * half * v;
        }
    }
    acc
}

/// `∫_a^b f`, splitting intervals until halves agree with the whole within `tol` (absolute,
/// max-norm) or within round-off of the result.
pub fn integrate<F: FnMut(f64, &mut [f64])>(mut f: F, a: f64, b: f64, dim: usize, tol: f64) -> Vec<f64> {
    let mut buf = vec![0.0; dim];
    let whole = gauss(&mut f, a, b, dim, &mut buf);
    refine(&mut f, a, b, whole, dim, tol, 0, &mut buf)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    dim: usize,
    tol: f64,
    depth: usize,
    buf: &mut [f64],
) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let left = gauss(f, a, mid, dim, buf);
    let right = gauss(f, mid, b, dim, buf);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).abs())
        .fold(0.0, f64::max);
    let sum: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    // Below round-off of the running value no further splitting helps.
    let floor = 8.0 * f64::EPSILON * sum.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    if err <= tol.max(floor) || depth >= MAX_DEPTH {
        return sum;
    }
    let l = refine(f, a, mid, left, dim, 0.5 * tol, depth + 1, buf);
    let r = refine(f, mid, b, right, dim, 0.5 * tol, depth + 1, buf);
    l.iter().zip(&r).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let (nodes, weights) = rule();
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(nodes.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn integrates_smooth_functions() {
        let r = integrate(|s, out| {
            out[0] = s.sin();
            out[1] = s.exp();
            out[2] = s.powi(19);
        }, 0.0, 3.0, 3, 1e-12);
        assert!((r[0] - (1.0 - 3f64.cos())).abs() < 1e-12);
        assert!((r[1] - (3f64.exp() - 1.0)).abs() < 1e-11);
        assert!((r[2] - 3f64.powi(20) / 20.0).abs() / (3f64.powi(20) / 20.0) < 1e-13);
    }
}
