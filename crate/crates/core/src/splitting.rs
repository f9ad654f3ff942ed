//! Splitting a system A into subsystems B and C of the same symmetry: the
//! coproduct `E_A = E_B ⊗ I + I ⊗ E_C`, the embedding of H_A into H_B ⊗ H_C,
//! and bipartite entanglement of the split state.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{
    matrix_exponential, su11_generators, su2_generators, weyl_heisenberg_generators, AlgebraKind,
    AlgebraRep, BargmannIndex, Ket, Operator, SpinLabel, ZERO,
};
use crate::coherent::GlauberParam;
use crate::error::{Error, Result};

/// Default second-Schmidt-value threshold for product/entangled classification.
pub const DEFAULT_SCHMIDT_TOL: f64 = 1e-8;

/// A declared decomposition A → B ⊗ C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    Su2 {
        a: SpinLabel,
        b: SpinLabel,
        c: SpinLabel,
    },
    Su11 {
        a: BargmannIndex,
        b: BargmannIndex,
        c: BargmannIndex,
    },
    /// One mode split by a beamsplitter with transmission `cos θ` into two
    /// modes, each truncated at `dim_out`.
    WeylHeisenberg {
        dim_a: usize,
        dim_out: usize,
        theta_bs: f64,
    },
}

impl SplitSpec {
    /// Only the top irrep `j_A = j_B + j_C` is supported: its lowest weight
    /// is the product of the subsystem lowest weights.
    pub fn su2(a: SpinLabel, b: SpinLabel, c: SpinLabel) -> Result<Self> {
        if a.twice_j() != b.twice_j() + c.twice_j() {
            return Err(Error::SplitConstraint(format!(
                "j_A = {a} must equal j_B + j_C = {b} + {c}; only the top irrep, whose lowest weight factorizes, is supported"
            )));
        }
        Ok(SplitSpec::Su2 { a, b, c })
    }

    /// SU(2) split with `j_A = j_B + j_C` implied.
    pub fn su2_parts(b: SpinLabel, c: SpinLabel) -> Self {
        SplitSpec::Su2 {
            a: SpinLabel::from_twice(b.twice_j() + c.twice_j()),
            b,
            c,
        }
    }

    pub fn su11(a: BargmannIndex, b: BargmannIndex, c: BargmannIndex) -> Result<Self> {
        if (a.k() - (b.k() + c.k())).abs() > 1e-12 {
            return Err(Error::SplitConstraint(format!(
                "k_A = {} must equal k_B + k_C = {} + {}",
                a.k(),
                b.k(),
                c.k()
            )));
        }
        let need = a.dim();
        if b.dim() < need || c.dim() < need {
            return Err(Error::SplitConstraint(format!(
                "subsystem truncations ({}, {}) must be >= the system truncation; need dimension >= {need}",
                b.dim(),
                c.dim()
            )));
        }
        Ok(SplitSpec::Su11 { a, b, c })
    }

    pub fn weyl_heisenberg(dim_a: usize, dim_out: usize, theta_bs: f64) -> Result<Self> {
        if dim_a < 2 {
            return Err(Error::InvalidLabel(format!("Fock truncation must be >= 2, got {dim_a}")));
        }
        if dim_out < dim_a {
            return Err(Error::SplitConstraint(format!(
                "output truncation {dim_out} must be >= input truncation {dim_a}"
            )));
        }
        if !theta_bs.is_finite() {
            return Err(Error::NonFinite("theta_bs"));
        }
        Ok(SplitSpec::WeylHeisenberg { dim_a, dim_out, theta_bs })
    }

    pub fn kind(&self) -> AlgebraKind {
        match self {
            SplitSpec::Su2 { .. } => AlgebraKind::Su2,
            SplitSpec::Su11 { .. } => AlgebraKind::Su11,
            SplitSpec::WeylHeisenberg { .. } => AlgebraKind::WeylHeisenberg,
        }
    }

    /// `(dim_A, dim_B, dim_C)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        match *self {
            SplitSpec::Su2 { a, b, c } => (a.dim(), b.dim(), c.dim()),
            SplitSpec::Su11 { a, b, c } => (a.dim(), b.dim(), c.dim()),
            SplitSpec::WeylHeisenberg { dim_a, dim_out, .. } => (dim_a, dim_out, dim_out),
        }
    }

    /// Representations of A, B and C.
    pub fn reps(&self) -> Result<(AlgebraRep, AlgebraRep, AlgebraRep)> {
        Ok(match *self {
            SplitSpec::Su2 { a, b, c } => (su2_generators(a), su2_generators(b), su2_generators(c)),
            SplitSpec::Su11 { a, b, c } => (su11_generators(a), su11_generators(b), su11_generators(c)),
            SplitSpec::WeylHeisenberg { dim_a, dim_out, .. } => (
                weyl_heisenberg_generators(dim_a)?,
                weyl_heisenberg_generators(dim_out)?,
                weyl_heisenberg_generators(dim_out)?,
            ),
        })
    }
}

/// Tensor-space generators `X_B ⊗ I + I ⊗ X_C`.
pub fn coproduct(rep_b: &AlgebraRep, rep_c: &AlgebraRep) -> Result<AlgebraRep> {
    if rep_b.kind != rep_c.kind {
        return Err(Error::KindMismatch(rep_b.kind.name(), rep_c.kind.name()));
    }
    let ib = Operator::identity(rep_b.dim());
    let ic = Operator::identity(rep_c.dim());
    let lift = |xb: &Operator, xc: &Operator| xb.kron(&ic).add(&ib.kron(xc));
    let reliable = rep_b
        .reliable
        .iter()
        .flat_map(|&rb| rep_c.reliable.iter().map(move |&rc| rb && rc))
        .collect();
    // The Weyl-Heisenberg bracket is central, so its constant adds.
    let structure_constant = match rep_b.kind {
        AlgebraKind::WeylHeisenberg => rep_b.structure_constant + rep_c.structure_constant,
        _ => rep_b.structure_constant,
    };
    Ok(AlgebraRep {
        kind: rep_b.kind,
        diag: lift(&rep_b.diag, &rep_c.diag)?,
        raise: lift(&rep_b.raise, &rep_c.raise)?,
        lower: lift(&rep_b.lower, &rep_c.lower)?,
        lowest_weight: rep_b.lowest_weight.kron(&rep_c.lowest_weight),
        weight: rep_b.weight + rep_c.weight,
        structure_constant,
        reliable,
    })
}

/// Embedding of H_A into H_B ⊗ H_C, stored as a `(dim_B·dim_C) × dim_A`
/// matrix with tensor index `index_B · dim_C + index_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: DMatrix<Complex64>,
    dim_b: usize,
    dim_c: usize,
}

impl Isometry {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    /// `max |V†V − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.dim_a();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum of `|X_BC·V − V·X_A|` over the reliable columns of A, for the
    /// raising and the diagonal generator. `x_bc` must be the (possibly
    /// weighted) coproduct the embedding intertwines.
    pub fn intertwining_residuals(&self, rep_a: &AlgebraRep, rep_bc: &AlgebraRep) -> Result<(f64, f64)> {
        if rep_bc.dim() != self.matrix.nrows() || rep_a.dim() != self.dim_a() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                actual: rep_bc.dim(),
            });
        }
        let residual = |x_bc: &Operator, x_a: &Operator| {
            let d = x_bc.matrix() * &self.matrix - &self.matrix * x_a.matrix();
            d.column_iter()
                .zip(&rep_a.reliable)
                .filter(|(_, ok)| **ok)
                .flat_map(|(col, _)| col.iter().map(|z| z.norm()).collect::<Vec<_>>())
                .fold(0.0, f64::max)
        };
        Ok((residual(&rep_bc.raise, &rep_a.raise), residual(&rep_bc.diag, &rep_a.diag)))
    }
}

fn nonzero_entries(op: &Operator) -> Vec<(usize, usize, Complex64)> {
    let m = op.matrix();
    let mut out = Vec::new();
    for k in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, k)] != ZERO {
                out.push((i, k, m[(i, k)]));
            }
        }
    }
    out
}

/// Builds the embedding of H_A into H_B ⊗ H_C.
///
/// For SU(2) and SU(1,1), column p is the normalized raising orbit
/// `(raise_B ⊗ I + I ⊗ raise_C)^p (lowest_B ⊗ lowest_C)`; for the top irrep
/// these vectors have distinct total weight and so are orthonormal, which is
/// checked rather than assumed. For Weyl-Heisenberg, column n is the
/// beamsplitter image of `|n⟩ ⊗ |0⟩`.
pub fn build_isometry(spec: &SplitSpec) -> Result<Isometry> {
    let (dim_a, dim_b, dim_c) = spec.dims();
    let matrix = match *spec {
        SplitSpec::Su2 { .. } | SplitSpec::Su11 { .. } => {
            let (_, rep_b, rep_c) = spec.reps()?;
            let (rb, rc) = (nonzero_entries(&rep_b.raise), nonzero_entries(&rep_c.raise));
            let mut m = DMatrix::<Complex64>::zeros(dim_b * dim_c, dim_a);
            let mut col = rep_b.lowest_weight.kron(&rep_c.lowest_weight).vector().clone();
            m.set_column(0, &col);
            for p in 1..dim_a {
                // (raise_B ⊗ I + I ⊗ raise_C)·col without forming the dense tensor operator.
                let mut next = DVector::<Complex64>::zeros(dim_b * dim_c);
                for &(i, k, x) in &rb {
                    for c in 0..dim_c {
                        next[i * dim_c + c] += x * col[k * dim_c + c];
                    }
                }
                for &(i, k, x) in &rc {
                    for b in 0..dim_b {
                        next[b * dim_c + i] += x * col[b * dim_c + k];
                    }
                }
                col = Ket::from_vector_unchecked(next).normalized()?.vector().clone();
                m.set_column(p, &col);
            }
            m
        }
        SplitSpec::WeylHeisenberg { theta_bs, .. } => {
            let (nu, mu) = theta_bs.sin_cos();
            let mut m = DMatrix::<Complex64>::zeros(dim_b * dim_c, dim_a);
            // a†ⁿ/√n! |00⟩ ↦ (μ a† + ν b†)ⁿ/√n! |00⟩ = Σ_k C(n,k)^{1/2} μ^k ν^{n−k} |k, n−k⟩
            for n in 0..dim_a {
                let mut binom = 1.0f64;
                for k in 0..=n {
                    if k > 0 {
                        binom *= (n - k + 1) as f64 / k as f64;
                    }
                    let amp = binom.sqrt() * mu.powi(k as i32) * nu.powi((n - k) as i32);
                    m[(k * dim_c + (n - k), n)] = Complex64::new(amp, 0.0);
                }
            }
            m
        }
    };
    let iso = Isometry { matrix, dim_b, dim_c };
    let resid = iso.orthonormality_residual();
    if resid > 1e-12 {
        return Err(Error::Consistency(format!(
            "embedding columns are not orthonormal (max |V†V − I| = {resid:e})"
        )));
    }
    Ok(iso)
}

/// Coproduct generators that the Weyl-Heisenberg beamsplitter embedding
/// intertwines: `μ a† ⊗ I + ν I ⊗ b†` and the total number operator.
pub fn weighted_wh_coproduct(spec: &SplitSpec) -> Result<AlgebraRep> {
    let SplitSpec::WeylHeisenberg { theta_bs, .. } = *spec else {
        return Err(Error::WrongKind {
            expected: AlgebraKind::WeylHeisenberg.name(),
            actual: spec.kind().name(),
        });
    };
    let (_, rep_b, rep_c) = spec.reps()?;
    let mut bc = coproduct(&rep_b, &rep_c)?;
    let (nu, mu) = theta_bs.sin_cos();
    let ib = Operator::identity(rep_b.dim());
    let ic = Operator::identity(rep_c.dim());
    bc.raise = rep_b
        .raise
        .kron(&ic)
        .scale(Complex64::new(mu, 0.0))
        .add(&ib.kron(&rep_c.raise).scale(Complex64::new(nu, 0.0)))?;
    bc.lower = bc.raise.adjoint();
    bc.structure_constant = -(mu * mu + nu * nu);
    Ok(bc)
}

/// `V·ψ_A`, renormalized.
pub fn split_state(psi_a: &Ket, v: &Isometry) -> Result<Ket> {
    if psi_a.dim() != v.dim_a() {
        return Err(Error::DimensionMismatch {
            expected: v.dim_a(),
            actual: psi_a.dim(),
        });
    }
    Ket::from_vector_unchecked(&v.matrix * psi_a.vector()).normalized()
}

fn coefficient_matrix(psi: &Ket, dim_b: usize, dim_c: usize) -> Result<Mat<Complex64>> {
    if dim_b * dim_c != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim_b * dim_c,
            actual: psi.dim(),
        });
    }
    // Row-major reshape: entry (b, c) is amplitude b·dim_C + c.
    let amps = psi.amplitudes();
    Ok(Mat::from_fn(dim_b, dim_c, |b, c| amps[b * dim_c + c]))
}

fn svd_failed(_: faer::linalg::svd::SvdError) -> Error {
    Error::Consistency("SVD of the coefficient matrix did not converge".into())
}

/// Singular values of the `dim_B × dim_C` coefficient matrix, descending.
pub fn schmidt_values(psi: &Ket, dim_b: usize, dim_c: usize) -> Result<Vec<f64>> {
    coefficient_matrix(psi, dim_b, dim_c)?.singular_values().map_err(svd_failed)
}

/// Von Neumann entropy of the reduced state, `−Σ λ² ln λ²` (natural log).
pub fn entropy_from_schmidt(values: &[f64]) -> f64 {
    let s: f64 = values
        .iter()
        .map(|v| v * v)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

pub fn entanglement_entropy(psi: &Ket, dim_b: usize, dim_c: usize) -> Result<f64> {
    Ok(entropy_from_schmidt(&schmidt_values(psi, dim_b, dim_c)?))
}

/// Leading Schmidt pair when the second Schmidt value is below `tol`.
/// The phase is fixed by making the first nonzero amplitude of ψ_B real
/// and positive.
pub fn factor_state(psi: &Ket, dim_b: usize, dim_c: usize, tol: f64) -> Result<Option<(Ket, Ket)>> {
    let svd = coefficient_matrix(psi, dim_b, dim_c)?.thin_svd().map_err(svd_failed)?;
    let sv = svd.S().column_vector();
    if sv.nrows() > 1 && sv[1].re >= tol {
        return Ok(None);
    }
    // M = σ u v† with M = ψ_B ψ_Cᵀ, so ψ_C is the conjugate of v.
    let (u, v) = (svd.U().col(0), svd.V().col(0));
    let mut psi_b = Ket::from_vector_unchecked(DVector::from_iterator(dim_b, u.iter().copied())).normalized()?;
    let psi_c = Ket::from_vector_unchecked(DVector::from_iterator(dim_c, v.iter().map(|z| z.conj())));
    let phase = psi_b.fix_gauge(1e-12);
    let psi_c = psi_c.scale(phase.conj()).normalized()?;
    Ok(Some((psi_b, psi_c)))
}

/// Sends `|α⟩ ⊗ |0⟩` through the beamsplitter `exp[θ(a b† − a† b)]`, which
/// maps it to `|cos θ·α⟩ ⊗ |sin θ·α⟩`. Both output modes are truncated at
/// `dim`. The generator conserves total photon number, so it is
/// exponentiated one number sector at a time; every sector reached from a
/// truncated input fits in the output truncation, so no further truncation
/// error is introduced.
pub fn beamsplitter_split(alpha: Complex64, theta_bs: f64, dim: usize) -> Result<Ket> {
    if !theta_bs.is_finite() {
        return Err(Error::NonFinite("theta_bs"));
    }
    let input = GlauberParam::new(alpha, dim)?;
    let (nu, mu) = theta_bs.sin_cos();
    GlauberParam::new(alpha * mu, dim)?;
    GlauberParam::new(alpha * nu, dim)?;
    let psi = crate::coherent::glauber_coherent(input);

    let mut out = DVector::<Complex64>::zeros(dim * dim);
    for total in 0..dim {
        let cn = psi.get(total);
        if cn == ZERO {
            continue;
        }
        // Sector basis |k, N−k⟩ indexed by k, the photon count in mode a.
        let size = total + 1;
        let mut g = DMatrix::<Complex64>::zeros(size, size);
        for k in 0..size {
            let (kf, rest) = (k as f64, (total - k) as f64);
            if k > 0 {
                // a b† |k, N−k⟩ = √k √(N−k+1) |k−1, N−k+1⟩
                g[(k - 1, k)] += Complex64::new(theta_bs * (kf * (rest + 1.0)).sqrt(), 0.0);
            }
            if k < total {
                // −a† b |k, N−k⟩ = −√(k+1) √(N−k) |k+1, N−k−1⟩
                g[(k + 1, k)] -= Complex64::new(theta_bs * ((kf + 1.0) * rest).sqrt(), 0.0);
            }
        }
        let u = matrix_exponential(&Operator::new(g)?)?;
        for k in 0..size {
            out[k * dim + (total - k)] = u.get(k, total) * cn;
        }
    }
    Ket::from_vector_unchecked(out).normalized()
}

/// `⟨ψ|a|ψ⟩` for a single truncated mode; equals α on a Glauber state.
pub fn mean_annihilation(psi: &Ket) -> Complex64 {
    (1..psi.dim())
        .map(|n| psi.get(n - 1).conj() * psi.get(n) * (n as f64).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::verify_structure;
    use crate::coherent::{glauber_coherent, su2_coherent, CoherentParam};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, LN_2};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half() -> SpinLabel {
        SpinLabel::from_twice(1)
    }

    fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> Ket {
        let amps = (0..dim)
            .map(|_| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Ket::new(amps).unwrap().normalized().unwrap()
    }

    #[test]
    fn coproduct_of_two_qubits() {
        let rep = su2_generators(half());
        let bc = coproduct(&rep, &rep).unwrap();
        let spectrum: Vec<f64> = (0..4).map(|i| bc.diag.get(i, i).re).collect();
        assert_eq!(spectrum, vec![-1.0, 0.0, 0.0, 1.0]);
        assert!(verify_structure(&bc, 1e-12).passed());
        let annihilated = bc.lower.apply(&bc.lowest_weight).unwrap();
        assert_eq!(annihilated.norm(), 0.0);
        assert_eq!(bc.weight, -1.0);
    }

    #[test]
    fn coproduct_structure_all_kinds() {
        let s = coproduct(&su2_generators(SpinLabel::from_twice(3)), &su2_generators(SpinLabel::from_twice(2))).unwrap();
        assert!(verify_structure(&s, 1e-12).passed());
        let k = |kk| su11_generators(BargmannIndex::new(kk, 10).unwrap());
        let s = coproduct(&k(0.5), &k(1.5)).unwrap();
        assert!(verify_structure(&s, 1e-12).passed(), "{:?}", verify_structure(&s, 1e-12).relations);
        let w = weyl_heisenberg_generators(8).unwrap();
        let s = coproduct(&w, &w).unwrap();
        assert_eq!(s.structure_constant, -2.0);
        assert!(verify_structure(&s, 1e-12).passed());
    }

    #[test]
    fn coproduct_rejects_mixed_kinds() {
        let err = coproduct(&su2_generators(half()), &weyl_heisenberg_generators(2).unwrap());
        assert!(matches!(err, Err(Error::KindMismatch(_, _))));
    }

    #[test]
    fn spin_one_embedding() {
        let spec = SplitSpec::su2(SpinLabel::from_twice(2), half(), half()).unwrap();
        let v = build_isometry(&spec).unwrap();
        let low = split_state(&Ket::basis(3, 0), &v).unwrap();
        assert_eq!(low, Ket::basis(4, 0));
        let mid = split_state(&Ket::basis(3, 1), &v).unwrap();
        let expected = [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((mid.get(i) - cx(*e, 0.0)).norm() < 1e-15);
        }
        let v2 = build_isometry(&SplitSpec::su2_parts(SpinLabel::from_twice(2), SpinLabel::from_twice(2))).unwrap();
        assert!(v2.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn split_constraints() {
        assert!(matches!(
            SplitSpec::su2(SpinLabel::from_twice(0), half(), half()),
            Err(Error::SplitConstraint(_))
        ));
        let k = |kk, d| BargmannIndex::new(kk, d).unwrap();
        assert!(SplitSpec::su11(k(2.0, 8), k(1.0, 8), k(0.5, 8)).is_err());
        match SplitSpec::su11(k(2.0, 16), k(1.0, 8), k(1.0, 16)) {
            Err(Error::SplitConstraint(msg)) => assert!(msg.contains(">= 16")),
            other => panic!("{other:?}"),
        }
        assert!(SplitSpec::weyl_heisenberg(8, 4, 0.3).is_err());
    }

    #[test]
    fn intertwining_all_supported_splits() {
        // SU(2) splits with dim_A ≤ 64.
        for ta in 1..=20u32 {
            for tb in 0..=ta {
                let spec = SplitSpec::su2_parts(SpinLabel::from_twice(tb), SpinLabel::from_twice(ta - tb));
                let v = build_isometry(&spec).unwrap();
                let (rep_a, rep_b, rep_c) = spec.reps().unwrap();
                let bc = coproduct(&rep_b, &rep_c).unwrap();
                let (r, d) = v.intertwining_residuals(&rep_a, &bc).unwrap();
                assert!(r < 1e-10 && d < 1e-10, "2j_A={ta}, 2j_B={tb}: {r:e} {d:e}");
                assert_eq!(v.matrix().column(0), bc.lowest_weight.vector().column(0));
            }
        }
        let k = |kk, d| BargmannIndex::new(kk, d).unwrap();
        let spec = SplitSpec::su11(k(2.0, 24), k(0.5, 24), k(1.5, 24)).unwrap();
        let v = build_isometry(&spec).unwrap();
        let (rep_a, rep_b, rep_c) = spec.reps().unwrap();
        let (r, d) = v.intertwining_residuals(&rep_a, &coproduct(&rep_b, &rep_c).unwrap()).unwrap();
        assert!(r < 1e-10 && d < 1e-10, "{r:e} {d:e}");

        let spec = SplitSpec::weyl_heisenberg(12, 12, 0.4).unwrap();
        let v = build_isometry(&spec).unwrap();
        let rep_a = weyl_heisenberg_generators(12).unwrap();
        let (r, d) = v.intertwining_residuals(&rep_a, &weighted_wh_coproduct(&spec).unwrap()).unwrap();
        assert!(r < 1e-10 && d < 1e-10, "{r:e} {d:e}");
    }

    #[test]
    fn schmidt_examples() {
        let product = Ket::basis(2, 0).kron(&Ket::basis(3, 2));
        let sv = schmidt_values(&product, 2, 3).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-15 && sv[1].abs() < 1e-15);
        assert_eq!(entanglement_entropy(&product, 2, 3).unwrap(), 0.0);

        let bell = Ket::new(vec![ZERO, cx(FRAC_1_SQRT_2, 0.0), cx(FRAC_1_SQRT_2, 0.0), ZERO]).unwrap();
        let sv = schmidt_values(&bell, 2, 2).unwrap();
        assert!(sv.iter().all(|s| (s - FRAC_1_SQRT_2).abs() < 1e-15));
        assert!((entanglement_entropy(&bell, 2, 2).unwrap() - LN_2).abs() < 1e-15);
        assert!(schmidt_values(&bell, 3, 2).is_err());
    }

    #[test]
    fn split_coherent_state_is_product() {
        let spec = SplitSpec::su2(SpinLabel::from_twice(6), SpinLabel::from_twice(4), SpinLabel::from_twice(2)).unwrap();
        let v = build_isometry(&spec).unwrap();
        let zeta = cx(0.7, 0.0);
        let psi = su2_coherent(SpinLabel::from_twice(6), CoherentParam::new(zeta).unwrap());
        let split = split_state(&psi, &v).unwrap();
        let sv = schmidt_values(&split, 5, 3).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-10 && sv[1] < 1e-10 && sv[2] < 1e-10);
        assert!(entanglement_entropy(&split, 5, 3).unwrap() < 1e-10);
    }

    #[test]
    fn factor_state_examples() {
        let spec = SplitSpec::su2_parts(half(), half());
        let v = build_isometry(&spec).unwrap();
        let zeta = cx(-0.4, 1.1);
        let psi = su2_coherent(SpinLabel::from_twice(2), CoherentParam::new(zeta).unwrap());
        let (b, c) = factor_state(&split_state(&psi, &v).unwrap(), 2, 2, DEFAULT_SCHMIDT_TOL).unwrap().unwrap();
        let target = su2_coherent(half(), CoherentParam::new(zeta).unwrap());
        assert!(b.fidelity(&target).unwrap() > 1.0 - 1e-10);
        assert!(c.fidelity(&target).unwrap() > 1.0 - 1e-10);
        assert!(b.get(0).im == 0.0 && b.get(0).re > 0.0);

        let mid = split_state(&Ket::basis(3, 1), &v).unwrap();
        assert!(factor_state(&mid, 2, 2, DEFAULT_SCHMIDT_TOL).unwrap().is_none());

        let (b, c) = factor_state(&split_state(&Ket::basis(3, 0), &v).unwrap(), 2, 2, DEFAULT_SCHMIDT_TOL)
            .unwrap()
            .unwrap();
        assert_eq!(b, Ket::basis(2, 0));
        assert!((c.fidelity(&Ket::basis(2, 0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn factors_reassemble_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_ket(&mut rng, 3);
        let c = random_ket(&mut rng, 4);
        let psi = b.kron(&c);
        let (fb, fc) = factor_state(&psi, 3, 4, 1e-8).unwrap().unwrap();
        assert!(fb.kron(&fc).fidelity(&psi).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn wide_nearly_rank_one_split() {
        // A 2×6 coefficient matrix with a second singular value near 4e-16,
        // where a naive complex bidiagonal SVD loses the right factor.
        let (b, c) = (half(), SpinLabel::from_twice(5));
        let p = CoherentParam::new(cx(-1.77812916114602, -0.9846071975104465)).unwrap();
        let v = build_isometry(&SplitSpec::su2_parts(b, c)).unwrap();
        let out = split_state(&su2_coherent(SpinLabel::from_twice(6), p), &v).unwrap();
        let sv = schmidt_values(&out, 2, 6).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-14 && sv[1] < 1e-14, "{sv:?}");
        let (fb, fc) = factor_state(&out, 2, 6, DEFAULT_SCHMIDT_TOL).unwrap().unwrap();
        assert!(fb.fidelity(&su2_coherent(b, p)).unwrap() > 1.0 - 1e-14);
        assert!(fc.fidelity(&su2_coherent(c, p)).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn entropy_invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random_ket(&mut rng, 12);
        let s0 = entanglement_entropy(&psi, 3, 4).unwrap();
        let random_unitary = |rng: &mut ChaCha8Rng, d: usize| {
            let h = DMatrix::from_fn(d, d, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let herm = (&h + h.adjoint()) * cx(0.0, 0.5);
            matrix_exponential(&Operator::new(herm).unwrap()).unwrap()
        };
        for _ in 0..10 {
            let u = random_unitary(&mut rng, 3).kron(&random_unitary(&mut rng, 4));
            let s = entanglement_entropy(&u.apply(&psi).unwrap(), 3, 4).unwrap();
            assert!((s - s0).abs() < 1e-10);
        }
    }

    #[test]
    fn beamsplitter_output_is_product_of_scaled_amplitudes() {
        let alpha = cx(1.0, 0.0);
        let out = beamsplitter_split(alpha, FRAC_PI_4, 64).unwrap();
        let s = FRAC_1_SQRT_2;
        let expected = glauber_coherent(GlauberParam::new(alpha * s, 64).unwrap())
            .kron(&glauber_coherent(GlauberParam::new(alpha * s, 64).unwrap()));
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-8);
        assert!(entanglement_entropy(&out, 64, 64).unwrap() < 1e-8);

        let id = beamsplitter_split(cx(0.6, 0.3), 0.0, 16).unwrap();
        let expected = glauber_coherent(GlauberParam::new(cx(0.6, 0.3), 16).unwrap()).kron(&Ket::basis(16, 0));
        assert!(id.sub(&expected).unwrap().norm() < 1e-14);
    }

    #[test]
    fn beamsplitter_sectors_match_full_exponential() {
        let dim = 8;
        let (alpha, theta) = (cx(0.2, 0.1), 0.7);
        let a = weyl_heisenberg_generators(dim).unwrap().lower;
        let id = Operator::identity(dim);
        let (a1, b1) = (a.kron(&id), id.kron(&a));
        let gen = a1.matmul(&b1.adjoint()).unwrap().sub(&a1.adjoint().matmul(&b1).unwrap()).unwrap();
        let u = matrix_exponential(&gen.scale(cx(theta, 0.0))).unwrap();
        let psi = glauber_coherent(GlauberParam::new(alpha, dim).unwrap()).kron(&Ket::basis(dim, 0));
        let full = u.apply(&psi).unwrap();
        let sectors = beamsplitter_split(alpha, theta, dim).unwrap();
        assert!(full.sub(&sectors).unwrap().norm() < 1e-12);
    }

    #[test]
    fn beamsplitter_embedding_matches_unitary() {
        let spec = SplitSpec::weyl_heisenberg(10, 10, 0.5).unwrap();
        let v = build_isometry(&spec).unwrap();
        let alpha = cx(0.2, -0.1);
        let p = GlauberParam::new(alpha, 10).unwrap();
        let via_iso = split_state(&glauber_coherent(p), &v).unwrap();
        let via_bs = beamsplitter_split(alpha, 0.5, 10).unwrap();
        assert!(via_iso.sub(&via_bs).unwrap().norm() < 1e-13);
    }

    #[test]
    fn mean_annihilation_recovers_amplitude() {
        let p = GlauberParam::auto(cx(1.2, -0.5)).unwrap();
        let m = mean_annihilation(&glauber_coherent(p));
        assert!((m - cx(1.2, -0.5)).norm() < 1e-9);
    }
}
