//! CHSH evaluation for split states: dichotomic spin observables, a
//! multi-start optimizer over measurement directions, and the closed-form
//! two-qubit maximum used as its oracle.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{su2_generators, Ket, Operator, SpinLabel};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

pub type Direction = [f64; 3];

/// Local measurement directions `a, a′` for side B and `b, b′` for side C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

fn norm3(v: &Direction) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Unit vector at polar angle θ and azimuth φ.
pub fn direction(theta: f64, phi: f64) -> Direction {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

impl MeasurementSetting {
    pub fn new(a: Direction, a_prime: Direction, b: Direction, b_prime: Direction) -> Result<Self> {
        for v in [&a, &a_prime, &b, &b_prime] {
            if (norm3(v) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("measurement direction {v:?} is not a unit vector")));
            }
        }
        Ok(MeasurementSetting { a, a_prime, b, b_prime })
    }

    /// From eight spherical angles `(θ_a, φ_a, θ_a′, φ_a′, θ_b, φ_b, θ_b′, φ_b′)`.
    pub fn from_angles(x: &[f64; 8]) -> Self {
        MeasurementSetting {
            a: direction(x[0], x[1]),
            a_prime: direction(x[2], x[3]),
            b: direction(x[4], x[5]),
            b_prime: direction(x[6], x[7]),
        }
    }

    fn flat(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (i, v) in [self.a, self.a_prime, self.b, self.b_prime].iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BellMethod {
    Optimized,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellResult {
    pub chsh: f64,
    pub settings: Option<MeasurementSetting>,
    pub method: BellMethod,
    /// Starts whose simplex met the convergence criterion (optimizer only).
    pub converged_starts: usize,
}

/// Spin matrices `(J_x, J_y, J_z)` in the m-ascending basis.
pub fn spin_matrices(j: SpinLabel) -> [Operator; 3] {
    let rep = su2_generators(j);
    let half = Complex64::new(0.5, 0.0);
    let jx = rep.raise.add(&rep.lower).expect("same dim").scale(half);
    let jy = rep.raise.sub(&rep.lower).expect("same dim").scale(Complex64::new(0.0, -0.5));
    [jx, jy, rep.diag]
}

fn spin_label_for_dim(dim: usize) -> Result<SpinLabel> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    u32::try_from(dim - 1)
        .map(SpinLabel::from_twice)
        .map_err(|_| Error::InvalidArgument(format!("dimension {dim} too large")))
}

/// Local frame for building `sign(n·J)` without a matrix exponential:
/// `exp(−iθJ_y) = V e^{−iθΛ} V†` from the eigendecomposition of `J_y`.
struct SpinFrame {
    j: SpinLabel,
    jy_vecs: DMatrix<Complex64>,
    jy_vals: Vec<f64>,
    signs: Vec<f64>,
}

impl SpinFrame {
    fn new(j: SpinLabel) -> Self {
        let [_, jy, _] = spin_matrices(j);
        let eig = jy.into_matrix().symmetric_eigen();
        SpinFrame {
            j,
            jy_vecs: eig.eigenvectors,
            jy_vals: eig.eigenvalues.iter().copied().collect(),
            signs: (0..j.dim()).map(|i| if j.twice_m(i) < 0 { -1.0 } else { 1.0 }).collect(),
        }
    }

    /// `R sign(J_z) R†` with `R = exp(−iφJ_z) exp(−iθJ_y)`.
    fn sign_observable(&self, n: &Direction) -> DMatrix<Complex64> {
        let d = self.j.dim();
        let theta = n[2].clamp(-1.0, 1.0).acos();
        let phi = n[1].atan2(n[0]);
        let ry_phase = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.jy_vals.iter().map(|l| Complex64::from_polar(1.0, -theta * l)),
        ));
        let mut r = &self.jy_vecs * ry_phase * self.jy_vecs.adjoint();
        for row in 0..d {
            let phase = Complex64::from_polar(1.0, -phi * 0.5 * self.j.twice_m(row) as f64);
            for col in 0..d {
                r[(row, col)] *= phase;
            }
        }
        let mut rs = r.clone();
        for (col, s) in self.signs.iter().enumerate() {
            rs.column_mut(col).scale_mut(*s);
        }
        rs * r.adjoint()
    }
}

fn unit(n: &Direction) -> Result<Direction> {
    let len = norm3(n);
    if !(len.is_finite() && len > 0.0) {
        return Err(Error::InvalidArgument("measurement direction must be a nonzero finite vector".into()));
    }
    Ok([n[0] / len, n[1] / len, n[2] / len])
}

/// ±1-valued observable along `n`: `n·σ` for spin ½ and `sign(n·J)` for
/// higher spin, with the `m = 0` eigenspace of integer spin assigned +1.
pub fn dichotomic_observable(n: &Direction, j: SpinLabel) -> Result<Operator> {
    let n = unit(n)?;
    if j.twice_j() == 1 {
        let [jx, jy, jz] = spin_matrices(j);
        let two = |c: f64| Complex64::new(2.0 * c, 0.0);
        return jx.scale(two(n[0])).add(&jy.scale(two(n[1])))?.add(&jz.scale(two(n[2])));
    }
    Operator::new(SpinFrame::new(j).sign_observable(&n))
}

fn coefficient_matrix(psi: &Ket, dim_b: usize, dim_c: usize) -> Result<DMatrix<Complex64>> {
    if dim_b * dim_c != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim_b * dim_c,
            actual: psi.dim(),
        });
    }
    Ok(DMatrix::from_row_slice(dim_b, dim_c, psi.amplitudes()))
}

/// `⟨ψ| A ⊗ B |ψ⟩ = tr(M† A M Bᵀ)` for the coefficient matrix M.
fn correlation(m: &DMatrix<Complex64>, a: &Operator, b: &Operator) -> f64 {
    let amb = a.matrix() * m * b.matrix().transpose();
    m.iter().zip(amb.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// For two qubits `⟨(a·σ)⊗(b·σ)⟩ = aᵀ T b`, so only `T` is needed.
fn correlation_tensor(m: &DMatrix<Complex64>) -> Matrix3<f64> {
    let sigma = spin_matrices(SpinLabel::from_twice(1)).map(|op| op.scale(Complex64::new(2.0, 0.0)));
    Matrix3::from_fn(|i, k| correlation(m, &sigma[i], &sigma[k]))
}

enum ChshEvaluator {
    Qubits(Matrix3<f64>),
    General {
        m: DMatrix<Complex64>,
        frame_b: SpinFrame,
        frame_c: SpinFrame,
    },
}

impl ChshEvaluator {
    fn new(psi: &Ket, dim_b: usize, dim_c: usize) -> Result<Self> {
        let m = coefficient_matrix(psi, dim_b, dim_c)?;
        let (j_b, j_c) = (spin_label_for_dim(dim_b)?, spin_label_for_dim(dim_c)?);
        if dim_b == 2 && dim_c == 2 {
            return Ok(ChshEvaluator::Qubits(correlation_tensor(&m)));
        }
        Ok(ChshEvaluator::General {
            m,
            frame_b: SpinFrame::new(j_b),
            frame_c: SpinFrame::new(j_c),
        })
    }

    fn value(&self, s: &MeasurementSetting) -> Result<f64> {
        let (a, ap, b, bp) = (unit(&s.a)?, unit(&s.a_prime)?, unit(&s.b)?, unit(&s.b_prime)?);
        let v = match self {
            ChshEvaluator::Qubits(t) => {
                let e = |x: &Direction, y: &Direction| {
                    (0..3).map(|i| (0..3).map(|k| x[i] * t[(i, k)] * y[k]).sum::<f64>()).sum::<f64>()
                };
                e(&a, &b) + e(&a, &bp) + e(&ap, &b) - e(&ap, &bp)
            }
            ChshEvaluator::General { m, frame_b, frame_c } => {
                let am = frame_b.sign_observable(&a) * m;
                let apm = frame_b.sign_observable(&ap) * m;
                let bt = frame_c.sign_observable(&b).transpose();
                let bpt = frame_c.sign_observable(&bp).transpose();
                let e = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| -> f64 {
                    let xy = x * y;
                    m.iter().zip(xy.iter()).map(|(p, q)| (p.conj() * q).re).sum()
                };
                e(&am, &bt) + e(&am, &bpt) + e(&apm, &bt) - e(&apm, &bpt)
            }
        };
        Ok(v.abs())
    }
}

/// `|E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)|` with `E = ⟨A(a) ⊗ B(b)⟩`.
pub fn chsh_value(psi: &Ket, dim_b: usize, dim_c: usize, s: &MeasurementSetting) -> Result<f64> {
    ChshEvaluator::new(psi, dim_b, dim_c)?.value(s)
}

/// `2√(t₁ + t₂)` for the two largest eigenvalues of `TᵀT`,
/// `T_ij = ⟨σ_i ⊗ σ_j⟩`: the maximal CHSH value of a two-qubit state.
pub fn horodecki_bound(psi: &Ket) -> Result<f64> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, actual: psi.dim() });
    }
    let t = correlation_tensor(&coefficient_matrix(psi, 2, 2)?);
    let mut eig: Vec<f64> = (t.transpose() * t).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (eig[0] + eig[1]).max(0.0).sqrt())
}

/// Closed-form CHSH maximum wrapped as a [`BellResult`].
pub fn horodecki_result(psi: &Ket) -> Result<BellResult> {
    Ok(BellResult {
        chsh: horodecki_bound(psi)?,
        settings: None,
        method: BellMethod::ClosedForm,
        converged_starts: 0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ChshOptions {
    pub starts: usize,
    pub seed: u64,
    /// Constrain `a′ = a` and `b′ = b`.
    pub tied_settings: bool,
    pub nelder_mead: NelderMeadOptions,
}

impl ChshOptions {
    pub fn with_seed(seed: u64) -> Self {
        ChshOptions {
            starts: 32,
            seed,
            tied_settings: false,
            nelder_mead: NelderMeadOptions {
                initial_step: 0.4,
                x_tol: 1e-9,
                max_evals: 8_000,
                restarts: 2,
                restart_gain: 1e-13,
            },
        }
    }
}

fn expand_angles(x: &[f64], tied: bool) -> [f64; 8] {
    if tied {
        [x[0], x[1], x[0], x[1], x[2], x[3], x[2], x[3]]
    } else {
        let mut out = [0.0; 8];
        out.copy_from_slice(x);
        out
    }
}

/// Higher value first, then lexicographically smaller settings.
fn better(a: &(f64, MeasurementSetting), b: &(f64, MeasurementSetting)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| {
        a.1.flat()
            .iter()
            .zip(b.1.flat().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Maximizes the CHSH value over measurement directions with seeded,
/// independent Nelder-Mead starts. The result does not depend on how the
/// starts are scheduled across threads.
pub fn optimize_chsh(psi: &Ket, dim_b: usize, dim_c: usize, opts: &ChshOptions) -> Result<BellResult> {
    let eval = ChshEvaluator::new(psi, dim_b, dim_c)?;
    if opts.starts == 0 {
        return Err(Error::InvalidArgument("at least one optimizer start is required".into()));
    }
    let n_params = if opts.tied_settings { 4 } else { 8 };
    let runs: Vec<(f64, MeasurementSetting, bool)> = (0..opts.starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(start as u64);
            let x0: Vec<f64> = (0..n_params)
                .map(|i| if i % 2 == 0 { rng.random_range(0.0..PI) } else { rng.random_range(0.0..2.0 * PI) })
                .collect();
            let objective = |x: &[f64]| {
                let s = MeasurementSetting::from_angles(&expand_angles(x, opts.tied_settings));
                -eval.value(&s).unwrap_or(f64::NEG_INFINITY)
            };
            let r = nelder_mead(objective, &x0, &opts.nelder_mead);
            let settings = MeasurementSetting::from_angles(&expand_angles(&r.x, opts.tied_settings));
            (-r.f, settings, r.converged)
        })
        .collect();
    let converged_starts = runs.iter().filter(|r| r.2).count();
    let best = runs
        .into_iter()
        .map(|(v, s, _)| (v, s))
        .min_by(better)
        .expect("at least one start");
    Ok(BellResult {
        chsh: best.0,
        settings: Some(best.1),
        method: BellMethod::Optimized,
        converged_starts,
    })
}
