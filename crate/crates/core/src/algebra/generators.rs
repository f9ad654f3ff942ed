//! Matrix representations of su(2), truncated su(1,1) and the truncated
//! Weyl-Heisenberg algebra, and structure-relation checks for them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::dense::{commutator, Ket, Operator, ZERO};
use super::labels::{AlgebraKind, BargmannIndex, SpinLabel};
use crate::error::{Error, Result};

/// Pass/fail tolerance used when callers do not supply one.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A represented rank-1 algebra: one Cartan generator, one raising and one
/// lowering generator, and the lowest-weight reference vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraRep {
    pub kind: AlgebraKind,
    /// Cartan generator (J₀, K₀ or a†a).
    pub diag: Operator,
    /// Raising generator (J₊, K₊ or a†).
    pub raise: Operator,
    /// Lowering generator (J₋, K₋ or a).
    pub lower: Operator,
    /// Basis vector annihilated by `lower`.
    pub lowest_weight: Ket,
    /// Eigenvalue of `diag` on the lowest weight.
    pub weight: f64,
    /// `c` in `[raise, lower] = c·X`, with `X = diag` for su(2) and su(1,1)
    /// and `X = I` for Weyl-Heisenberg.
    pub structure_constant: f64,
    /// Basis levels on which the structure relations hold exactly. Truncated
    /// representations exclude their top level.
    pub reliable: Vec<bool>,
}

impl AlgebraRep {
    pub fn dim(&self) -> usize {
        self.diag.dim()
    }

    /// The operator appearing on the right of `[raise, lower] = c·X`.
    pub fn bracket_target(&self) -> Operator {
        match self.kind {
            AlgebraKind::Su2 | AlgebraKind::Su11 => self.diag.clone(),
            AlgebraKind::WeylHeisenberg => Operator::identity(self.dim()),
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.reliable.iter().any(|r| !r)
    }
}

fn raising_from_couplings(dim: usize, coupling: impl Fn(usize) -> f64) -> Operator {
    // Entry (n+1, n) carries the amplitude of raise|n⟩ on |n+1⟩.
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c + 1 {
            Complex64::new(coupling(c), 0.0)
        } else {
            ZERO
        }
    });
    Operator::from_matrix_unchecked(m)
}

/// Spin-j representation in the m-ascending basis (index 0 is `|j,−j⟩`).
pub fn su2_generators(j: SpinLabel) -> AlgebraRep {
    let dim = j.dim();
    let tj = j.twice_j() as u64;
    // (j − m)(j + m + 1) = (2j − i)(i + 1) with i = j + m, all integers.
    let raise = raising_from_couplings(dim, |i| (((tj - i as u64) * (i as u64 + 1)) as f64).sqrt());
    let lower = raise.adjoint();
    let diag_entries: Vec<f64> = (0..dim).map(|i| j.twice_m(i) as f64 / 2.0).collect();
    AlgebraRep {
        kind: AlgebraKind::Su2,
        diag: Operator::from_diagonal(&diag_entries),
        raise,
        lower,
        lowest_weight: Ket::basis(dim, 0),
        weight: -j.j(),
        structure_constant: 2.0,
        reliable: vec![true; dim],
    }
}

/// Discrete-series su(1,1) representation truncated to `k.dim()` number states.
pub fn su11_generators(k: BargmannIndex) -> AlgebraRep {
    let dim = k.dim();
    let kk = k.k();
    let raise = raising_from_couplings(dim, |n| {
        let n = n as f64;
        ((n + 1.0) * (2.0 * kk + n)).sqrt()
    });
    let lower = raise.adjoint();
    let diag_entries: Vec<f64> = (0..dim).map(|n| kk + n as f64).collect();
    let mut reliable = vec![true; dim];
    reliable[dim - 1] = false;
    AlgebraRep {
        kind: AlgebraKind::Su11,
        diag: Operator::from_diagonal(&diag_entries),
        raise,
        lower,
        lowest_weight: Ket::basis(dim, 0),
        weight: kk,
        structure_constant: -2.0,
        reliable,
    }
}

/// Single boson mode truncated to `dim` Fock states.
pub fn weyl_heisenberg_generators(dim: usize) -> Result<AlgebraRep> {
    if dim < 2 {
        return Err(Error::InvalidLabel(format!("Fock truncation must be >= 2, got {dim}")));
    }
    let raise = raising_from_couplings(dim, |n| ((n + 1) as f64).sqrt());
    let lower = raise.adjoint();
    let diag_entries: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    let mut reliable = vec![true; dim];
    reliable[dim - 1] = false;
    Ok(AlgebraRep {
        kind: AlgebraKind::WeylHeisenberg,
        diag: Operator::from_diagonal(&diag_entries),
        raise,
        lower,
        lowest_weight: Ket::basis(dim, 0),
        weight: 0.0,
        structure_constant: -1.0,
        reliable,
    })
}

/// Residual of one structure relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResidual {
    pub relation: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub kind: AlgebraKind,
    pub tol: f64,
    pub relations: Vec<RelationResidual>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.relations.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Names of the violated relations.
    pub fn failures(&self) -> Vec<&'static str> {
        self.relations.iter().filter(|r| !r.pass).map(|r| r.relation).collect()
    }
}

pub const REL_DIAG_RAISE: &str = "[diag, raise] = +raise";
pub const REL_DIAG_LOWER: &str = "[diag, lower] = -lower";
pub const REL_RAISE_LOWER: &str = "[raise, lower] = c*X";
pub const REL_LOWER_ADJOINT: &str = "lower = raise^dagger";
pub const REL_DIAG_HERMITIAN: &str = "diag hermitian";
pub const REL_LOWEST_ANNIHILATED: &str = "lower |lowest> = 0";
pub const REL_LOWEST_EIGEN: &str = "diag |lowest> = weight |lowest>";

/// Checks the rank-1 commutation relations, the lowest-weight conditions and
/// generator adjointness. Operator relations on truncated representations are
/// evaluated only on the reliable levels.
pub fn verify_structure(rep: &AlgebraRep, tol: f64) -> StructureReport {
    let mask = &rep.reliable;
    let mut relations = Vec::new();
    let mut push = |relation: &'static str, residual: f64| {
        let pass = residual.is_finite() && residual <= tol;
        relations.push(RelationResidual { relation, residual, pass });
    };
    let masked = |op: Result<Operator>| op.map(|o| o.max_abs_masked(mask)).unwrap_or(f64::INFINITY);

    push(
        REL_DIAG_RAISE,
        masked(commutator(&rep.diag, &rep.raise).and_then(|c| c.sub(&rep.raise))),
    );
    push(
        REL_DIAG_LOWER,
        masked(commutator(&rep.diag, &rep.lower).and_then(|c| c.add(&rep.lower))),
    );
    let target = rep.bracket_target().scale(Complex64::new(rep.structure_constant, 0.0));
    push(
        REL_RAISE_LOWER,
        masked(commutator(&rep.raise, &rep.lower).and_then(|c| c.sub(&target))),
    );
    push(
        REL_DIAG_HERMITIAN,
        rep.diag.sub(&rep.diag.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY),
    );
    if matches!(rep.kind, AlgebraKind::Su2 | AlgebraKind::Su11) {
        push(
            REL_LOWER_ADJOINT,
            rep.lower.sub(&rep.raise.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY),
        );
    }
    let vec_max = |k: Result<Ket>| {
        k.map(|k| k.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY)
    };
    push(REL_LOWEST_ANNIHILATED, vec_max(rep.lower.apply(&rep.lowest_weight)));
    push(
        REL_LOWEST_EIGEN,
        vec_max(
            rep.diag
                .apply(&rep.lowest_weight)
                .and_then(|v| v.sub(&rep.lowest_weight.scale(Complex64::new(rep.weight, 0.0)))),
        ),
    );

    StructureReport { kind: rep.kind, tol, relations }
}

/// `J₀² + (J₊J₋ + J₋J₊)/2`.
pub fn casimir_su2(rep: &AlgebraRep) -> Result<Operator> {
    if rep.kind != AlgebraKind::Su2 {
        return Err(Error::WrongKind {
            expected: AlgebraKind::Su2.name(),
            actual: rep.kind.name(),
        });
    }
    let j0sq = rep.diag.matmul(&rep.diag)?;
    let anti = rep.raise.matmul(&rep.lower)?.add(&rep.lower.matmul(&rep.raise)?)?;
    j0sq.add(&anti.scale(Complex64::new(0.5, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn spin_half_generators() {
        let rep = su2_generators(SpinLabel::from_twice(1));
        assert_eq!(rep.diag, Operator::from_diagonal(&[-0.5, 0.5]));
        let up = rep.raise.apply(&Ket::basis(2, 0)).unwrap();
        assert_eq!(up, Ket::basis(2, 1));
        assert_eq!(rep.weight, -0.5);
    }

    #[test]
    fn spin_one_raising_coefficient() {
        let rep = su2_generators(SpinLabel::from_twice(2));
        let v = rep.raise.apply(&Ket::basis(3, 0)).unwrap();
        assert!((v.get(1) - c(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(v.get(0), ZERO);
        assert_eq!(v.get(2), ZERO);
    }

    #[test]
    fn singlet_is_zero() {
        let rep = su2_generators(SpinLabel::from_twice(0));
        assert_eq!(rep.dim(), 1);
        for op in [&rep.diag, &rep.raise, &rep.lower] {
            assert_eq!(*op, Operator::zeros(1));
        }
        let cas = casimir_su2(&rep).unwrap();
        assert_eq!(cas, Operator::zeros(1));
        assert!(verify_structure(&rep, 1e-12).passed());
    }

    #[test]
    fn commutators_of_spin_generators() {
        let half = su2_generators(SpinLabel::from_twice(1));
        let c1 = commutator(&half.diag, &half.raise).unwrap();
        assert!(c1.sub(&half.raise).unwrap().max_abs() < 1e-15);
        let one = su2_generators(SpinLabel::from_twice(2));
        let c2 = commutator(&one.raise, &one.lower).unwrap();
        assert!(c2.sub(&one.diag.scale(c(2.0))).unwrap().max_abs() < 1e-14);
        let ident = Operator::identity(3);
        assert_eq!(commutator(&ident, &one.raise).unwrap().max_abs(), 0.0);
        assert!(commutator(&ident, &half.raise).is_err());
    }

    #[test]
    fn su2_structure_and_casimir_up_to_j20() {
        for tj in 0..=40 {
            let j = SpinLabel::from_twice(tj);
            let rep = su2_generators(j);
            let report = verify_structure(&rep, 1e-12);
            assert!(report.passed(), "2j={tj}: {:?}", report.failures());
            let expected = Operator::identity(j.dim()).scale(c(j.j() * (j.j() + 1.0)));
            let dev = casimir_su2(&rep).unwrap().sub(&expected).unwrap().max_abs();
            assert!(dev < 1e-11, "2j={tj}: casimir deviation {dev:e}");
            // Exact zeros by construction.
            assert!(rep.lower.apply(&rep.lowest_weight).unwrap().amplitudes().iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn casimir_examples() {
        let cas = casimir_su2(&su2_generators(SpinLabel::from_twice(3))).unwrap();
        assert!(cas.sub(&Operator::identity(4).scale(c(3.75))).unwrap().max_abs() < 1e-14);
        let cas = casimir_su2(&su2_generators(SpinLabel::from_twice(20))).unwrap();
        assert!(cas.sub(&Operator::identity(21).scale(c(110.0))).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn casimir_rejects_other_kinds() {
        let rep = weyl_heisenberg_generators(4).unwrap();
        assert!(matches!(casimir_su2(&rep), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn su11_matrix_elements() {
        let rep = su11_generators(BargmannIndex::new(1.0, 8).unwrap());
        let v = rep.raise.apply(&rep.lowest_weight).unwrap();
        assert!((v.get(1) - c(2f64.sqrt())).norm() < 1e-15);
        let half = su11_generators(BargmannIndex::new(0.5, 5).unwrap());
        for n in 0..5 {
            assert_eq!(half.diag.get(n, n), c(0.5 + n as f64));
        }
        assert!(rep.lower.apply(&rep.lowest_weight).unwrap().amplitudes().iter().all(|z| *z == ZERO));
        assert_eq!(rep.weight, 1.0);
    }

    #[test]
    fn su11_truncated_structure() {
        for &k in &[0.25, 0.5, 1.0, 1.5, 3.0] {
            let rep = su11_generators(BargmannIndex::new(k, 64).unwrap());
            let report = verify_structure(&rep, 1e-12);
            assert!(report.passed(), "k={k}: {:?}", report.relations);
        }
    }

    #[test]
    fn su11_top_level_artifact_is_real() {
        // The bracket fails at the top level, which is why it is masked.
        let mut rep = su11_generators(BargmannIndex::new(1.0, 6).unwrap());
        rep.reliable = vec![true; 6];
        let report = verify_structure(&rep, 1e-12);
        assert_eq!(report.failures(), vec![REL_RAISE_LOWER]);
    }

    #[test]
    fn weyl_heisenberg_qubit_truncation() {
        let rep = weyl_heisenberg_generators(2).unwrap();
        let expected = Operator::new(DMatrix::from_row_slice(2, 2, &[ZERO, c(1.0), ZERO, ZERO])).unwrap();
        assert_eq!(rep.lower, expected);
        assert!(weyl_heisenberg_generators(1).is_err());
    }

    #[test]
    fn weyl_heisenberg_number_operator_and_ccr() {
        let rep = weyl_heisenberg_generators(32).unwrap();
        let number = rep.raise.matmul(&rep.lower).unwrap();
        for n in 0..32 {
            assert!((number.get(n, n) - c(n as f64)).norm() < 1e-13);
        }
        assert!(number.sub(&rep.diag).unwrap().max_abs() < 1e-13);
        let report = verify_structure(&rep, 1e-12);
        assert!(report.passed(), "{:?}", report.relations);
        // [a, a†] = I on levels 0..30.
        let ccr = commutator(&rep.lower, &rep.raise).unwrap().sub(&Operator::identity(32)).unwrap();
        assert!(ccr.max_abs_masked(&rep.reliable) < 1e-12);
    }

    #[test]
    fn corrupted_raise_is_flagged() {
        let mut rep = su2_generators(SpinLabel::from_twice(4));
        rep.raise.set(2, 1, c(5.0));
        let report = verify_structure(&rep, DEFAULT_TOL);
        assert!(!report.passed());
        let failures = report.failures();
        assert!(failures.contains(&REL_DIAG_RAISE) || failures.contains(&REL_RAISE_LOWER));
        assert!(failures.contains(&REL_LOWER_ADJOINT));
    }
}
