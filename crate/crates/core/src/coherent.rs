//! Coherent states built three ways: by exponentiating the displacement
//! generator, by the disentangled product `N·exp(τ·raise)|lowest⟩`, and from
//! closed-form coefficients. Also the isotropy-subgroup phase check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::{
    apply_exp_nilpotent, matrix_exponential, AlgebraKind, AlgebraRep, BargmannIndex, Ket, Operator, SpinLabel, ZERO,
};
use crate::error::{Error, Result};

/// Tail weight above which a truncated SU(1,1) or Weyl-Heisenberg coherent
/// state is rejected.
pub const GENERALIZED_TAIL_LIMIT: f64 = 1e-8;
/// Tail weight allowed for a truncated Glauber state.
pub const GLAUBER_TAIL_LIMIT: f64 = 1e-10;
/// Tail weight for the default truncation of derived quantities. Amplitude
/// errors scale as the square root of the discarded weight.
pub const GLAUBER_PRECISE_TAIL: f64 = 1e-24;

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Stereographic coherent-state amplitude ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentParam {
    zeta: Complex64,
}

impl CoherentParam {
    pub fn new(zeta: Complex64) -> Result<Self> {
        if !finite(zeta) {
            return Err(Error::NonFinite("zeta"));
        }
        Ok(CoherentParam { zeta })
    }

    /// From polar angles on the sphere; θ = π (the ζ → ∞ pole) is rejected.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        CoherentParam::new(angles_to_zeta(theta, phi)?)
    }

    pub fn zeta(self) -> Complex64 {
        self.zeta
    }

    /// Displacement amplitude ξ with ζ = (ξ/|ξ|)·tan|ξ| and |ξ| < π/2.
    pub fn xi(self) -> Complex64 {
        zeta_to_xi(self.zeta)
    }
}

/// ζ = −tan(θ/2)·e^{−iφ}.
pub fn angles_to_zeta(theta: f64, phi: f64) -> Result<Complex64> {
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::NonFinite("angles"));
    }
    if !(0.0..PI).contains(&theta) {
        return Err(Error::OutOfDomain(format!(
            "theta must lie in [0, pi); theta = {theta} is the zeta = infinity pole or beyond"
        )));
    }
    Ok(-(theta / 2.0).tan() * Complex64::from_polar(1.0, -phi))
}

/// Inverse of ζ = (ξ/|ξ|)·tan|ξ| on the chart |ξ| < π/2.
pub fn zeta_to_xi(zeta: Complex64) -> Complex64 {
    let r = zeta.norm();
    if r == 0.0 {
        ZERO
    } else {
        zeta * (r.atan() / r)
    }
}

/// `exp(ξ·raise − ξ*·lower)`.
pub fn displacement(rep: &AlgebraRep, xi: Complex64) -> Result<Operator> {
    if !finite(xi) {
        return Err(Error::NonFinite("xi"));
    }
    let generator = rep.raise.scale(xi).sub(&rep.lower.scale(xi.conj()))?;
    matrix_exponential(&generator)
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Closed-form spin coherent state
/// `c_{j+m} = (1+|ζ|²)^{−j} · C(2j, j+m)^{1/2} · ζ^{j+m}`.
pub fn su2_coherent(j: SpinLabel, p: CoherentParam) -> Ket {
    let zeta = p.zeta();
    let tj = j.twice_j();
    if zeta == ZERO {
        return Ket::basis(j.dim(), 0);
    }
    let log_prefactor = -j.j() * zeta.norm_sqr().ln_1p();
    let (log_r, arg) = (zeta.norm().ln(), zeta.arg());
    let amps = (0..=tj)
        .map(|i| {
            let log_mag = log_prefactor + 0.5 * ln_binomial(tj, i) + f64::from(i) * log_r;
            Complex64::from_polar(log_mag.exp(), f64::from(i) * arg)
        })
        .collect();
    Ket::new(amps).expect("finite amplitudes for finite zeta")
}

/// Spin coherent state on the full sphere, including the antipode θ = π:
/// `c_i = C(2j,i)^{1/2} cos(θ/2)^{2j−i} (−sin(θ/2) e^{−iφ})^i`.
pub fn su2_coherent_angles(j: SpinLabel, theta: f64, phi: f64) -> Ket {
    let tj = j.twice_j();
    let (s, c) = (theta / 2.0).sin_cos();
    let z = -s * Complex64::from_polar(1.0, -phi);
    let amps = (0..=tj)
        .map(|i| (0.5 * ln_binomial(tj, i)).exp() * c.powi((tj - i) as i32) * z.powi(i as i32))
        .collect();
    Ket::from_vector_unchecked(nalgebra::DVector::from_vec(amps))
}

/// Recovers ζ from a state assumed to lie on the spin coherent manifold,
/// using `c_{n+1}/c_n = ζ·√((2j−n)/(n+1))` at the adjacent pair of largest
/// magnitude, where relative rounding error is smallest.
pub fn su2_zeta_estimate(psi: &Ket, j: SpinLabel) -> Option<Complex64> {
    let twice_j = j.twice_j() as usize;
    if twice_j == 0 || psi.dim() != j.dim() {
        return None;
    }
    let n = (0..twice_j).max_by(|&a, &b| {
        let w = |i: usize| psi.get(i).norm() * psi.get(i + 1).norm();
        w(a).total_cmp(&w(b))
    })?;
    let cn = psi.get(n);
    if cn.norm() == 0.0 {
        return None;
    }
    Some(psi.get(n + 1) / cn * (((n + 1) as f64) / ((twice_j - n) as f64)).sqrt())
}

type LevelWeight = Box<dyn Fn(usize, f64) -> f64>;

/// Squared norm of the untruncated `exp(τ·raise)|lowest⟩` and the weight of
/// its level-n component, for the kinds with infinite-dimensional irreps.
fn untruncated_weights(rep: &AlgebraRep, tau: Complex64) -> Option<(f64, LevelWeight)> {
    let t2 = tau.norm_sqr();
    match rep.kind {
        AlgebraKind::Su2 => None,
        AlgebraKind::Su11 => {
            let k = rep.weight;
            let total = (1.0 - t2).powf(-2.0 * k);
            Some((total, Box::new(move |n, w| w * (2.0 * k + n as f64) / (n as f64 + 1.0) * t2)))
        }
        AlgebraKind::WeylHeisenberg => Some((t2.exp(), Box::new(move |n, w| w * t2 / (n as f64 + 1.0)))),
    }
}

/// Relative weight outside the first `dim` levels of the untruncated
/// `exp(τ·raise)|lowest⟩`, and the smallest dimension meeting `limit`.
pub fn truncation_tail(rep: &AlgebraRep, tau: Complex64, dim: usize, limit: f64) -> (f64, usize) {
    let Some((total, next)) = untruncated_weights(rep, tau) else {
        return (0.0, rep.dim());
    };
    let mut w = 1.0;
    let mut acc = 0.0;
    let mut tail_at_dim = None;
    let mut required = None;
    let mut n = 0usize;
    while tail_at_dim.is_none() || required.is_none() {
        if n == dim {
            tail_at_dim = Some(((total - acc) / total).max(0.0));
        }
        if required.is_none() && ((total - acc) / total) < limit {
            required = Some(n.max(2));
        }
        acc += w;
        w = next(n, w);
        n += 1;
        if n > 1_000_000 {
            break;
        }
    }
    (tail_at_dim.unwrap_or(1.0), required.unwrap_or(usize::MAX))
}

/// Normalized `exp(τ·raise)|lowest⟩`; the normalization plays the role of the
/// Cartan factor `N`.
pub fn generalized_coherent(rep: &AlgebraRep, tau: Complex64) -> Result<Ket> {
    if !finite(tau) {
        return Err(Error::NonFinite("tau"));
    }
    if rep.kind == AlgebraKind::Su11 && tau.norm() >= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "SU(1,1) coherent amplitude must lie in the unit disk, |tau| = {}",
            tau.norm()
        )));
    }
    if rep.kind != AlgebraKind::Su2 {
        let (tail, required) = truncation_tail(rep, tau, rep.dim(), GENERALIZED_TAIL_LIMIT);
        if tail > GENERALIZED_TAIL_LIMIT {
            return Err(Error::TruncationTooSmall { tail, limit: GENERALIZED_TAIL_LIMIT, required });
        }
    }
    apply_exp_nilpotent(&rep.raise, tau, &rep.lowest_weight)?.normalized()
}

/// Inverse of τ = (η/|η|)·tanh|η| on the unit disk.
pub fn su11_tau_to_eta(tau: Complex64) -> Result<Complex64> {
    let r = tau.norm();
    if !finite(tau) {
        return Err(Error::NonFinite("tau"));
    }
    if r >= 1.0 {
        return Err(Error::OutOfDomain(format!("|tau| = {r} is outside the unit disk")));
    }
    Ok(if r == 0.0 { ZERO } else { tau * (r.atanh() / r) })
}

/// Closed-form SU(1,1) coherent state
/// `c_n = (1−|τ|²)^k (Γ(2k+n) / (n! Γ(2k)))^{1/2} τⁿ`, truncated to the
/// index's dimension. Not renormalized, so its norm shows the truncation.
pub fn su11_coherent(k: BargmannIndex, tau: Complex64) -> Result<Ket> {
    su11_tau_to_eta(tau)?;
    let rep = crate::algebra::su11_generators(k);
    let (tail, required) = truncation_tail(&rep, tau, k.dim(), GENERALIZED_TAIL_LIMIT);
    if tail > GENERALIZED_TAIL_LIMIT {
        return Err(Error::TruncationTooSmall { tail, limit: GENERALIZED_TAIL_LIMIT, required });
    }
    let two_k = 2.0 * k.k();
    let mut c = Complex64::new((1.0 - tau.norm_sqr()).powf(k.k()), 0.0);
    let mut amps = Vec::with_capacity(k.dim());
    for n in 0..k.dim() {
        amps.push(c);
        c *= tau * ((two_k + n as f64) / (n as f64 + 1.0)).sqrt();
    }
    Ket::new(amps)
}

/// Glauber amplitude together with the Fock truncation it is expanded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlauberParam {
    alpha: Complex64,
    dim: usize,
}

/// Poisson tail `Σ_{n≥dim} e^{−|α|²}|α|^{2n}/n!`, summed term by term.
pub fn glauber_tail(alpha: Complex64, dim: usize) -> f64 {
    let mean = alpha.norm_sqr();
    if mean == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    let log_mean = mean.ln();
    let mut log_fact = 0.0;
    for n in 1..=dim {
        log_fact += (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let term = (-mean + n as f64 * log_mean - log_fact).exp();
        tail += term;
        n += 1;
        log_fact += (n as f64).ln();
        if (n as f64) > mean && term < 1e-300_f64.max(tail * 1e-17) {
            break;
        }
    }
    tail
}

impl GlauberParam {
    pub fn new(alpha: Complex64, dim: usize) -> Result<Self> {
        if !finite(alpha) {
            return Err(Error::NonFinite("alpha"));
        }
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("Fock truncation must be >= 2, got {dim}")));
        }
        let tail = glauber_tail(alpha, dim);
        if tail > GLAUBER_TAIL_LIMIT {
            return Err(Error::TruncationTooSmall {
                tail,
                limit: GLAUBER_TAIL_LIMIT,
                required: GlauberParam::required_dim(alpha),
            });
        }
        Ok(GlauberParam { alpha, dim })
    }

    /// Smallest truncation (at least 2) whose Poisson tail meets the limit.
    pub fn required_dim(alpha: Complex64) -> usize {
        (2..).find(|&d| glauber_tail(alpha, d) <= GLAUBER_TAIL_LIMIT).unwrap()
    }

    /// Smallest truncation whose Poisson tail meets `GLAUBER_PRECISE_TAIL`.
    pub fn precise_dim(alpha: Complex64) -> usize {
        (2..).find(|&d| glauber_tail(alpha, d) <= GLAUBER_PRECISE_TAIL).unwrap()
    }

    pub fn auto(alpha: Complex64) -> Result<Self> {
        if !finite(alpha) {
            return Err(Error::NonFinite("alpha"));
        }
        GlauberParam::new(alpha, GlauberParam::required_dim(alpha))
    }

    pub fn alpha(self) -> Complex64 {
        self.alpha
    }

    pub fn dim(self) -> usize {
        self.dim
    }
}

/// Truncated Fock expansion `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, renormalized.
pub fn glauber_coherent(p: GlauberParam) -> Ket {
    let alpha = p.alpha();
    let mut amps = Vec::with_capacity(p.dim());
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..p.dim() {
        amps.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    Ket::new(amps)
        .and_then(|k| k.normalized())
        .expect("Glauber amplitudes are finite and nonzero")
}

/// Distance between `exp(η·raise − η*·lower)|lowest⟩` and the disentangled
/// form `N·exp(τ·raise)|lowest⟩`, with τ and N taken from the closed-form
/// reparametrization of each kind:
///
/// * SU(2): τ = (η/|η|)·tan|η|, N = cos^{2j}|η|
/// * SU(1,1): τ = (η/|η|)·tanh|η|, N = cosh^{−2k}|η|
/// * Weyl-Heisenberg: τ = η, N = e^{−|η|²/2}
pub fn bch_residual(rep: &AlgebraRep, eta: Complex64) -> Result<f64> {
    if !finite(eta) {
        return Err(Error::NonFinite("eta"));
    }
    let r = eta.norm();
    let unit = if r == 0.0 { ZERO } else { eta / r };
    let (tau, norm_factor) = match rep.kind {
        AlgebraKind::Su2 => {
            let cos = r.cos();
            if cos.abs() < 1e-12 {
                return Err(Error::OutOfDomain(format!(
                    "|eta| = {r} is at the SU(2) pole pi/2 (mod pi)"
                )));
            }
            let twice_j = (-2.0 * rep.weight).round() as i32;
            (unit * r.tan(), cos.powi(twice_j))
        }
        AlgebraKind::Su11 => (unit * r.tanh(), r.cosh().powf(-2.0 * rep.weight)),
        AlgebraKind::WeylHeisenberg => (eta, (-r * r / 2.0).exp()),
    };
    let lhs = displacement(rep, eta)?.apply(&rep.lowest_weight)?;
    let rhs = apply_exp_nilpotent(&rep.raise, tau, &rep.lowest_weight)?.scale(Complex64::new(norm_factor, 0.0));
    Ok(lhs.sub(&rhs)?.norm())
}

/// Acts with the isotropy element `exp(iδ·diag)` on the lowest weight.
/// Returns the extracted phase and the deviation from a pure phase
/// `e^{iδ·weight}` times the lowest weight.
pub fn isotropy_phase_check(rep: &AlgebraRep, delta: f64) -> Result<(Complex64, f64)> {
    if !delta.is_finite() {
        return Err(Error::NonFinite("delta"));
    }
    let u = matrix_exponential(&rep.diag.scale(Complex64::new(0.0, delta)))?;
    let v = u.apply(&rep.lowest_weight)?;
    let phase = rep.lowest_weight.inner(&v)?;
    let off_ray = v.sub(&rep.lowest_weight.scale(phase))?.norm();
    let expected = Complex64::from_polar(1.0, delta * rep.weight);
    Ok((phase, off_ray.max((phase - expected).norm())))
}
