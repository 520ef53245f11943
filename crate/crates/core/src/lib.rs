//! General H-type Lie algebras and groups over indefinite scalar products.
//!
//! An algebra is stored as a horizontal space `H`, a vertical space `V` and the
//! structure constants `B[α][i][j]` of `[h_i, h_j] = Σ_α B^α_ij v_α`. Bases are
//! orthonormal and ordered with the negative directions first.
//!
//! ```
//! use htype_core::{catalog, validate_h_type};
//!
//! let (alg, _mu) = catalog("heis_split", 1).unwrap();
//! assert!(validate_h_type(&alg, 64, 1e-9).unwrap().passed);
//! ```

pub mod algebra;
pub mod composition;
pub mod curvature;
pub mod geodesics;
pub mod spaces;

pub use algebra::{
    center_check, validate_h_type, validate_h_type_seeded, AlgebraError, AlgebraSpec, Check,
    HTypeAlgebra, ValidationReport,
};
pub use composition::{
    algebra_from_composition, algebraic_obstruction, catalog, catalog_entry, composition_from_algebra, phi_map,
    search_composition_2d, verify_composition, CatalogName, CompositionError, CompositionMap,
    Obstruction, QuadraticForm, SearchOutcome,
};
pub use curvature::{
    classify_plane, covariant_derivative, curvature_endomorphism, curvature_report, ricci_tensor,
    scalar_curvature, sectional_curvature, CurvatureError, CurvatureReport, Plane, PlaneClass,
    PlaneClassification, Ricci, ScalarCurvature, TangentElement,
};
pub use geodesics::{
    geodesic_closed_form, group_mul, hamiltonian, integrate_hamiltonian, left_frame, omega,
    theta2, Covector, GeodesicError, GroupPoint, Regime, Sample, Trajectory,
};
pub use spaces::{mat_exp, scalar_product, sign_symbol, Matrix, ScalarSpace, SpaceError, Vector};
