//! Numerical certificates that the states factorizing on splitting are
//! exactly the coherent states: distance to the spin coherent manifold,
//! the rank-1 test on the split coefficient matrix, seeded random scans and
//! entropy minimization.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraKind, Ket, SpinLabel};
use crate::coherent::{angles_to_zeta, su2_coherent_angles};
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::splitting::{build_isometry, entropy_from_schmidt, schmidt_values, split_state, Isometry, SplitSpec};

pub const DEFAULT_ENTROPY_EPS: f64 = 1e-8;
pub const DEFAULT_FIDELITY_DELTA: f64 = 1e-6;
pub const GRID_THETA: usize = 64;
pub const GRID_PHI: usize = 128;
const REFINE_CANDIDATES: usize = 4;

/// Closest spin coherent state, located by polar angles on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestCoherent {
    pub theta: f64,
    pub phi: f64,
    /// `None` at the antipode θ = π, the ζ → ∞ state `|j, +j⟩`.
    pub zeta: Option<Complex64>,
    pub fidelity: f64,
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `|⟨θ,φ|ψ⟩|²` evaluated in the angle chart, with `w_i = C(2j,i)^{1/2} ψ_i`.
fn chart_fidelity(weighted: &[Complex64], theta: f64, phi: f64) -> f64 {
    let n = weighted.len() - 1;
    let (s, c) = (theta / 2.0).sin_cos();
    // ⟨θ,φ| has coefficients conj(c_i) = C^{1/2} c^{2j−i} (−s e^{iφ})^i.
    let z = -s * Complex64::from_polar(1.0, phi);
    let mut acc = Complex64::new(0.0, 0.0);
    // Horner in z/c would divide by zero at θ = π; accumulate powers instead.
    let mut zp = Complex64::new(1.0, 0.0);
    for (i, w) in weighted.iter().enumerate() {
        acc += w * zp * c.powi((n - i) as i32);
        zp *= z;
    }
    acc.norm_sqr()
}

/// Maps any `(θ, φ)` to the same ray with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(2.0 * PI);
    let mut p = phi;
    if t > PI {
        t = 2.0 * PI - t;
        p += PI;
    }
    (t, p.rem_euclid(2.0 * PI))
}

/// Maximizes `|⟨j,ζ|ψ⟩|²` over the whole sphere, antipode included: a
/// `64 × 128` grid in `(θ, φ)` followed by simplex refinement from the best
/// grid-local maxima.
pub fn nearest_coherent(psi: &Ket, j: SpinLabel) -> Result<NearestCoherent> {
    if psi.dim() != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: j.dim(),
            actual: psi.dim(),
        });
    }
    if !psi.is_normalized() {
        return Err(Error::InvalidArgument("nearest_coherent needs a normalized state".into()));
    }
    let tj = j.twice_j();
    let weighted: Vec<Complex64> = (0..=tj)
        .map(|i| psi.get(i as usize) * (0.5 * ln_binomial(tj, i)).exp())
        .collect();
    if tj == 0 {
        return Ok(NearestCoherent {
            theta: 0.0,
            phi: 0.0,
            zeta: Some(Complex64::new(0.0, 0.0)),
            fidelity: psi.get(0).norm_sqr(),
        });
    }

    let theta_at = |t: usize| PI * t as f64 / (GRID_THETA - 1) as f64;
    let phi_at = |p: usize| 2.0 * PI * p as f64 / GRID_PHI as f64;
    let grid: Vec<Vec<f64>> = (0..GRID_THETA)
        .map(|t| (0..GRID_PHI).map(|p| chart_fidelity(&weighted, theta_at(t), phi_at(p))).collect())
        .collect();

    // Grid-local maxima; each pole row is a single point.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for t in 0..GRID_THETA {
        let pole = t == 0 || t == GRID_THETA - 1;
        for p in 0..if pole { 1 } else { GRID_PHI } {
            let v = grid[t][p];
            let is_max = (t.saturating_sub(1)..=(t + 1).min(GRID_THETA - 1)).all(|tt| {
                [GRID_PHI - 1, 0, 1].iter().all(|dp| grid[tt][(p + dp) % GRID_PHI] <= v)
            });
            if is_max || pole {
                candidates.push((v, t, p));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let opts = NelderMeadOptions {
        initial_step: PI / (GRID_THETA - 1) as f64,
        x_tol: 1e-11,
        max_evals: 4_000,
        restarts: 2,
        restart_gain: 0.0,
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &(_, t, p) in candidates.iter().take(REFINE_CANDIDATES) {
        let r = nelder_mead(|x: &[f64]| -chart_fidelity(&weighted, x[0], x[1]), &[theta_at(t), phi_at(p)], &opts);
        if -r.f > best.0 {
            best = (-r.f, r.x[0], r.x[1]);
        }
    }
    let (theta, phi) = canonical_angles(best.1, best.2);
    let zeta = if theta < PI { angles_to_zeta(theta, phi).ok() } else { None };
    Ok(NearestCoherent {
        theta,
        phi,
        zeta,
        fidelity: best.0.min(1.0),
    })
}

fn spin_of(spec: &SplitSpec) -> Result<SpinLabel> {
    match spec {
        SplitSpec::Su2 { a, .. } => Ok(*a),
        other => Err(Error::WrongKind {
            expected: AlgebraKind::Su2.name(),
            actual: other.kind().name(),
        }),
    }
}

/// Second singular value of the split coefficient matrix.
pub fn rank1_residual_with(psi_a: &Ket, v: &Isometry) -> Result<f64> {
    let sv = schmidt_values(&split_state(psi_a, v)?, v.dim_b(), v.dim_c())?;
    Ok(sv.get(1).copied().unwrap_or(0.0))
}

/// Zero exactly when the split state is a product, i.e. when the function
/// of the raising operators generating ψ_A factorizes across the split.
pub fn rank1_residual(psi_a: &Ket, spec: &SplitSpec) -> Result<f64> {
    rank1_residual_with(psi_a, &build_isometry(spec)?)
}

/// Weight-basis coefficients of a state on a spin-j irrep.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    pub j: SpinLabel,
    pub c: Vec<Complex64>,
}

impl CoefficientProfile {
    pub fn new(psi: &Ket, j: SpinLabel) -> Result<Self> {
        if psi.dim() != j.dim() {
            return Err(Error::DimensionMismatch {
                expected: j.dim(),
                actual: psi.dim(),
            });
        }
        let psi = psi.normalized()?;
        Ok(CoefficientProfile {
            j,
            c: psi.amplitudes().to_vec(),
        })
    }

    /// Coefficients `f_n` of `ψ = Σ f_n J₊ⁿ |j,−j⟩`, using
    /// `‖J₊ⁿ|j,−j⟩‖² = n! (2j)! / (2j−n)!`.
    pub fn raising_coefficients(&self) -> Vec<Complex64> {
        let tj = self.j.twice_j();
        self.c
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let log_norm: f64 = (0..n as u32).map(|i| (((i + 1) * (tj - i)) as f64).ln()).sum::<f64>();
                c * (-0.5 * log_norm).exp()
            })
            .collect()
    }

    /// Relative distance of `c` from the binomial law
    /// `c_i ∝ C(2j,i)^{1/2} cos(θ/2)^{2j−i} (−sin(θ/2) e^{−iφ})^i`
    /// after removing the best global phase.
    pub fn law_residual(&self, theta: f64, phi: f64) -> f64 {
        let g = su2_coherent_angles(self.j, theta, phi);
        let overlap: Complex64 = g.amplitudes().iter().zip(&self.c).map(|(a, b)| a.conj() * b).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        let diff: f64 = g.amplitudes().iter().zip(&self.c).map(|(a, b)| (b - a * phase).norm_sqr()).sum();
        let norm: f64 = self.c.iter().map(|z| z.norm_sqr()).sum();
        (diff / norm).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Coherent,
    Entangling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanSource {
    Haar,
    CoherentManifold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub entropy_eps: f64,
    pub fidelity_delta: f64,
    pub source: ScanSource,
}

impl ScanOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        ScanOptions {
            n_samples,
            seed,
            entropy_eps: DEFAULT_ENTROPY_EPS,
            fidelity_delta: DEFAULT_FIDELITY_DELTA,
            source: ScanSource::Haar,
        }
    }
}

/// One sample of a scan. `classification` is manifold membership by
/// fidelity; `factorizes` is the entropy test; `agreement` compares them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    pub sample_id: u64,
    pub entropy: f64,
    pub rank1_residual: f64,
    pub nearest_cs_fidelity: f64,
    pub nearest_theta: f64,
    pub nearest_phi: f64,
    pub nearest_zeta: Option<Complex64>,
    pub classification: Classification,
    pub factorizes: bool,
    pub agreement: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSummary {
    pub n_samples: usize,
    pub coherent: usize,
    pub entangling: usize,
    pub factorizing: usize,
    pub disagreements: usize,
    pub min_entropy: f64,
    pub max_entropy: f64,
    pub min_fidelity: f64,
    pub max_fidelity: f64,
}

impl ScanSummary {
    pub fn from_records(records: &[ScanRecord]) -> Self {
        let fold = |f: fn(&ScanRecord) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
            records.iter().map(f).fold(init, pick)
        };
        ScanSummary {
            n_samples: records.len(),
            coherent: records.iter().filter(|r| r.classification == Classification::Coherent).count(),
            entangling: records.iter().filter(|r| r.classification == Classification::Entangling).count(),
            factorizing: records.iter().filter(|r| r.factorizes).count(),
            disagreements: records.iter().filter(|r| !r.agreement).count(),
            min_entropy: fold(|r| r.entropy, f64::INFINITY, f64::min),
            max_entropy: fold(|r| r.entropy, f64::NEG_INFINITY, f64::max),
            min_fidelity: fold(|r| r.nearest_cs_fidelity, f64::INFINITY, f64::min),
            max_fidelity: fold(|r| r.nearest_cs_fidelity, f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Complex Gaussian amplitudes, normalized: Haar-distributed on the sphere.
pub fn haar_state(rng: &mut impl Rng, dim: usize) -> Ket {
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(k) = Ket::new(amps).and_then(|k| k.normalized()) {
            return k;
        }
    }
}

fn sample_rng(seed: u64, sample_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_id);
    rng
}

/// Classifies seeded random states of H_A both by split entropy and by
/// distance to the coherent manifold. Sample `i` draws from its own
/// generator stream, so records do not depend on scheduling.
pub fn haar_scan(spec: &SplitSpec, opts: &ScanOptions) -> Result<(Vec<ScanRecord>, ScanSummary)> {
    let j = spin_of(spec)?;
    if opts.n_samples == 0 {
        return Err(Error::InvalidArgument("a scan needs at least one sample".into()));
    }
    if !(opts.entropy_eps > 0.0 && opts.fidelity_delta > 0.0) {
        return Err(Error::InvalidArgument("scan thresholds must be positive".into()));
    }
    let v = build_isometry(spec)?;
    let records: Vec<ScanRecord> = (0..opts.n_samples as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = sample_rng(opts.seed, id);
            let psi = match opts.source {
                ScanSource::Haar => haar_state(&mut rng, j.dim()),
                ScanSource::CoherentManifold => {
                    let theta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
                    let phi = 2.0 * PI * rng.random::<f64>();
                    su2_coherent_angles(j, theta, phi)
                }
            };
            classify(id, &psi, j, &v, opts)
        })
        .collect::<Result<_>>()?;
    let summary = ScanSummary::from_records(&records);
    Ok((records, summary))
}

fn classify(id: u64, psi: &Ket, j: SpinLabel, v: &Isometry, opts: &ScanOptions) -> Result<ScanRecord> {
    let sv = schmidt_values(&split_state(psi, v)?, v.dim_b(), v.dim_c())?;
    let entropy = entropy_from_schmidt(&sv);
    let near = nearest_coherent(psi, j)?;
    let classification = if near.fidelity > 1.0 - opts.fidelity_delta {
        Classification::Coherent
    } else {
        Classification::Entangling
    };
    let factorizes = entropy < opts.entropy_eps;
    Ok(ScanRecord {
        sample_id: id,
        entropy,
        rank1_residual: sv.get(1).copied().unwrap_or(0.0),
        nearest_cs_fidelity: near.fidelity,
        nearest_theta: near.theta,
        nearest_phi: near.phi,
        nearest_zeta: near.zeta,
        classification,
        factorizes,
        agreement: factorizes == (classification == Classification::Coherent),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyMinimum {
    pub start: usize,
    pub state: Ket,
    pub entropy: f64,
    pub nearest_cs_fidelity: f64,
    pub converged: bool,
    pub evals: usize,
}

/// `ψ` with `ψ_0 = x_0` real and `ψ_i = x_{2i−1} + i x_{2i}`.
fn unpack(x: &[f64]) -> Option<Ket> {
    let dim = x.len().div_ceil(2);
    let amps = (0..dim)
        .map(|i| if i == 0 { Complex64::new(x[0], 0.0) } else { Complex64::new(x[2 * i - 1], x[2 * i]) })
        .collect();
    Ket::new(amps).ok()?.normalized().ok()
}

fn pack(psi: &Ket) -> Vec<f64> {
    let mut psi = psi.clone();
    psi.fix_gauge(0.0);
    let mut x = vec![psi.get(0).re];
    for z in &psi.amplitudes()[1..] {
        x.extend([z.re, z.im]);
    }
    x
}

fn minimize_from(start: usize, psi0: &Ket, j: SpinLabel, v: &Isometry) -> Result<EntropyMinimum> {
    let entropy = |psi: &Ket| -> f64 {
        split_state(psi, v)
            .and_then(|s| schmidt_values(&s, v.dim_b(), v.dim_c()))
            .map(|sv| entropy_from_schmidt(&sv))
            .unwrap_or(f64::INFINITY)
    };
    let opts = NelderMeadOptions {
        initial_step: 0.25,
        x_tol: 1e-9,
        max_evals: 40_000,
        restarts: 3,
        restart_gain: 1e-14,
    };
    let r = nelder_mead(|x: &[f64]| unpack(x).map_or(f64::INFINITY, |p| entropy(&p)), &pack(psi0), &opts);
    let state = unpack(&r.x).ok_or_else(|| Error::Consistency("entropy minimizer left the sphere".into()))?;
    let near = nearest_coherent(&state, j)?;
    Ok(EntropyMinimum {
        start,
        entropy: entropy(&state),
        state,
        nearest_cs_fidelity: near.fidelity,
        converged: r.converged,
        evals: r.evals,
    })
}

/// Local minimization of the split entropy over the unit sphere of H_A from
/// a given state.
pub fn minimize_entropy_from(spec: &SplitSpec, psi0: &Ket) -> Result<EntropyMinimum> {
    let j = spin_of(spec)?;
    if psi0.dim() != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: j.dim(),
            actual: psi0.dim(),
        });
    }
    minimize_from(0, &psi0.normalized()?, j, &build_isometry(spec)?)
}

/// Entropy minimization from `n_starts` seeded Haar-random states.
pub fn minimize_entropy(spec: &SplitSpec, n_starts: usize, seed: u64) -> Result<Vec<EntropyMinimum>> {
    let j = spin_of(spec)?;
    if n_starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let v = build_isometry(spec)?;
    (0..n_starts)
        .into_par_iter()
        .map(|start| {
            let psi0 = haar_state(&mut sample_rng(seed, start as u64), j.dim());
            minimize_from(start, &psi0, j, &v)
        })
        .collect()
}
