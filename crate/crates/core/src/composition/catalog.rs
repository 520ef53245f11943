//! Named families of H-type algebras with their composition witnesses.

use std::fmt;
use std::str::FromStr;

use super::{algebra_from_composition, CompositionError, CompositionMap};
use crate::algebra::HTypeAlgebra;
use crate::spaces::{canonical_order, Matrix, ScalarSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogName {
    /// Heisenberg `ℋ^{2n,0,1}`.
    Heis,
    /// Split Heisenberg `ℋ^{2n,n,1}`.
    HeisSplit,
    /// Quaternionic `ℋ^{4n,0,3}`.
    Quat,
    /// Split quaternionic `ℋ^{4n,2n,3}`.
    QuatSplit,
}

impl CatalogName {
    pub const ALL: [CatalogName; 4] =
        [CatalogName::Heis, CatalogName::HeisSplit, CatalogName::Quat, CatalogName::QuatSplit];

    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogName::Heis => "heis",
            CatalogName::HeisSplit => "heis_split",
            CatalogName::Quat => "quat",
            CatalogName::QuatSplit => "quat_split",
        }
    }

    /// Scalar curvature stated for this family in the literature, as a function of `n`.
    pub fn listed_scalar_curvature(&self, n: usize) -> f64 {
        match self {
            CatalogName::Heis => -(n as f64) / 2.0,
            CatalogName::Quat => -3.0 * n as f64,
            CatalogName::HeisSplit | CatalogName::QuatSplit => -0.25,
        }
    }

    // Block size, the parameters (a, b) and the basic map.
    fn block(&self) -> (usize, f64, f64, BlockMu) {
        match self {
            CatalogName::Heis => (2, 1.0, 0.0, complex_mu),
            CatalogName::HeisSplit => (2, -1.0, 0.0, complex_mu),
            CatalogName::Quat => (4, 1.0, 1.0, quaternion_mu),
            CatalogName::QuatSplit => (4, 1.0, -1.0, quaternion_mu),
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogName {
    type Err = CompositionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CompositionError::UnknownCatalog(s.to_string()))
    }
}

type BlockMu = fn(f64, f64, &[f64], &[f64]) -> Vec<f64>;

// (y1x1 + a y2x2, y1x2 − y2x1), a composition of x1² + a x2².
fn complex_mu(a: f64, _b: f64, y: &[f64], x: &[f64]) -> Vec<f64> {
    vec![y[0] * x[0] + a * y[1] * x[1], y[0] * x[1] - y[1] * x[0]]
}

// conj(y)·x in the quaternion algebra with i² = −a, j² = −b; composes x1² + a x2² + b x3² + ab x4².
fn quaternion_mu(a: f64, b: f64, y: &[f64], x: &[f64]) -> Vec<f64> {
    vec![
        y[0] * x[0] + a * y[1] * x[1] + b * y[2] * x[2] + a * b * y[3] * x[3],
        y[0] * x[1] - y[1] * x[0] + b * y[3] * x[2] - b * y[2] * x[3],
        y[0] * x[2] - y[2] * x[0] + a * y[1] * x[3] - a * y[3] * x[1],
        y[0] * x[3] - y[3] * x[0] + y[2] * x[1] - y[1] * x[2],
    ]
}

/// Catalog lookup by name.
pub fn catalog(name: &str, n: usize) -> Result<(HTypeAlgebra, CompositionMap), CompositionError> {
    catalog_entry(name.parse()?, n)
}

/// `n` orthogonal copies of the family's basic composition, reordered to canonical signs.
pub fn catalog_entry(
    name: CatalogName,
    n: usize,
) -> Result<(HTypeAlgebra, CompositionMap), CompositionError> {
    if n < 1 {
        return Err(CompositionError::InvalidParameter("n must be at least 1".into()));
    }
    let (d, a, b, mu) = name.block();
    let form: Vec<f64> = if d == 2 { vec![1.0, a] } else { vec![1.0, a, b, a * b] };
    let u_signs = form.clone();
    let h_signs: Vec<f64> = (0..n).flat_map(|_| form.iter().copied()).collect();
    let dim_h = d * n;

    // Natural slices, block diagonal over the n copies.
    let mut natural = vec![Matrix::zeros(dim_h, dim_h); d];
    for (k, slice) in natural.iter_mut().enumerate() {
        let mut y = vec![0.0; d];
        y[k] = 1.0;
        for i in 0..d {
            let mut x = vec![0.0; d];
            x[i] = 1.0;
            let out = mu(a, b, &y, &x);
            for blk in 0..n {
                for j in 0..d {
                    slice[(blk * d + i, blk * d + j)] = out[j];
                }
            }
        }
    }

    let ou = canonical_order(&u_signs);
    let oh = canonical_order(&h_signs);
    let slices: Vec<Matrix> = ou
        .iter()
        .map(|&k| Matrix::from_fn(dim_h, dim_h, |i, j| natural[k][(oh[i], oh[j])]))
        .collect();
    let nu_u = u_signs.iter().filter(|&&s| s < 0.0).count();
    let nu_h = h_signs.iter().filter(|&&s| s < 0.0).count();
    let u0 = ou.iter().position(|&k| k == 0).expect("u0 present");
    let map = CompositionMap::new(
        ScalarSpace::new(d, nu_u)?,
        ScalarSpace::new(dim_h, nu_h)?,
        slices,
        u0,
    )?;
    let v_order: Vec<usize> = ou.iter().filter(|&&k| k != 0).map(|&k| k - 1).collect();
    let alg = algebra_from_composition(&map)?
        .with_label(format!("{name}:{n}"))
        .with_presentation(oh, v_order);
    Ok((alg, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_h_type;
    use crate::spaces::Vector;

    #[test]
    fn signatures() {
        let cases = [
            ("heis", 1, (2, 0, 1, 0)),
            ("heis", 3, (6, 0, 1, 0)),
            ("heis_split", 2, (4, 2, 1, 1)),
            ("quat", 1, (4, 0, 3, 0)),
            ("quat_split", 1, (4, 2, 3, 2)),
            ("quat_split", 2, (8, 4, 3, 2)),
        ];
        for (name, n, want) in cases {
            let (alg, map) = catalog(name, n).unwrap();
            assert_eq!((alg.n(), alg.h().index(), alg.m(), alg.v().index()), want, "{name}:{n}");
            assert_eq!(alg.label(), format!("{name}:{n}"));
            // u0 is the first positive direction of U.
            assert_eq!(map.u0_index(), map.u().index());
            assert!(validate_h_type(&alg, 64, 1e-9).unwrap().passed, "{name}:{n}");
        }
    }

    #[test]
    fn unknown_and_bad_parameters() {
        assert_eq!(catalog("octonion", 1).unwrap_err(), CompositionError::UnknownCatalog("octonion".into()));
        assert!(matches!(catalog("heis", 0), Err(CompositionError::InvalidParameter(_))));
    }

    #[test]
    fn split_quaternion_bracket_table() {
        let (alg, _) = catalog("quat_split", 1).unwrap();
        // Natural X_k sits at the canonical position where h_order maps to k.
        let x = |k: usize| {
            let c = alg.h_order().iter().position(|&o| o == k).unwrap();
            let mut e = Vector::zeros(4);
            e[c] = 1.0;
            e
        };
        let z = |k: usize| alg.v_order().iter().position(|&o| o == k).unwrap();
        let table = [
            ((0, 1), 0, -1.0),
            ((2, 3), 0, 1.0),
            ((0, 2), 1, -1.0),
            ((1, 3), 1, 1.0),
            ((0, 3), 2, -1.0),
            ((1, 2), 2, -1.0),
        ];
        for ((i, j), a, sign) in table {
            let br = alg.bracket(&x(i), &x(j)).unwrap();
            let mut want = Vector::zeros(3);
            want[z(a)] = sign;
            assert_eq!(br, want, "[X{}, X{}]", i + 1, j + 1);
        }
    }
}
