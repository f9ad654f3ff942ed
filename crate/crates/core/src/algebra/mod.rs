//! Rank-1 algebra representations and the dense linear-algebra primitives
//! they are built on.

mod dense;
mod expm;
mod generators;
mod labels;

pub use dense::{commutator, Ket, Operator};
pub(crate) use dense::ZERO;
pub use expm::{apply_exp_nilpotent, matrix_exponential};
pub use generators::{
    casimir_su2, su11_generators, su2_generators, verify_structure, weyl_heisenberg_generators,
    AlgebraRep, RelationResidual, StructureReport, DEFAULT_TOL, REL_DIAG_HERMITIAN,
    REL_DIAG_LOWER, REL_DIAG_RAISE, REL_LOWER_ADJOINT, REL_LOWEST_ANNIHILATED, REL_LOWEST_EIGEN,
    REL_RAISE_LOWER,
};
pub use labels::{AlgebraKind, BargmannIndex, SpinLabel};
pub(crate) use labels::parse_fraction;
