//! Matrix exponential by scaling and squaring with Padé approximants
//! (Higham 2005 degree selection), plus a diagonal fast path and a
//! terminating Taylor series for applying `exp` of a nilpotent operator
//! to a vector.

use faer::MatRef;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{Ket, Operator, ZERO};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error thresholds on the 1-norm for each degree.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// `exp(x)` for a dense complex matrix.
pub fn matrix_exponential(x: &Operator) -> Result<Operator> {
    if x.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix_exponential input"));
    }
    let n = x.dim();
    if x.is_diagonal() {
        let m = DMatrix::from_fn(n, n, |r, c| if r == c { x.get(r, r).exp() } else { ZERO });
        return Ok(Operator::from_matrix_unchecked(m));
    }

    let a = x.matrix();
    let norm = x.one_norm();
    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return Ok(Operator::from_matrix_unchecked(pade_low(a, coeffs)?));
        }
    }

    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    Operator::new(result).map_err(|_| Error::NonFinite("matrix_exponential result"))
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Dense product through faer's SIMD kernels; nalgebra's generic complex
/// product is several times slower at the sizes used for truncated reps.
fn mul(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let fx = MatRef::from_column_major_slice(x.as_slice(), x.nrows(), x.ncols());
    let fy = MatRef::from_column_major_slice(y.as_slice(), y.nrows(), y.ncols());
    let p = fx * fy;
    DMatrix::from_fn(x.nrows(), y.ncols(), |r, k| p[(r, k)])
}

fn solve_pade(u: DMatrix<Complex64>, v: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let p = &v + &u;
    let q = &v - &u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Consistency("singular Padé denominator".into()))
}

fn pade_low(a: &DMatrix<Complex64>, b: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let ident = DMatrix::<Complex64>::identity(n, n);
    let a2 = mul(a, a);
    // Even powers I, A², A⁴, ... up to the degree.
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() < b.len() / 2 {
        let next = mul(powers.last().unwrap(), &a2);
        powers.push(next);
    }
    let mut u_inner = DMatrix::<Complex64>::zeros(n, n);
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    for (k, pw) in powers.iter().enumerate() {
        u_inner += pw * c(b[2 * k + 1]);
        v += pw * c(b[2 * k]);
    }
    let u = mul(a, &u_inner);
    solve_pade(u, v)
}

fn pade13(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let b = &PADE13;
    let n = a.nrows();
    let ident = DMatrix::<Complex64>::identity(n, n);
    let a2 = mul(a, a);
    let a4 = mul(&a2, &a2);
    let a6 = mul(&a2, &a4);
    let u_hi = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u_inner =
        mul(&a6, &u_hi) + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &ident * c(b[1]);
    let u = mul(a, &u_inner);
    let v_hi = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v = mul(&a6, &v_hi) + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &ident * c(b[0]);
    solve_pade(u, v)
}

/// `exp(scale · op) · ket` for a nilpotent `op`, summed as a Taylor series
/// that terminates after at most `dim` terms. Exact up to rounding; avoids
/// forming the full exponential, whose entries can be many orders of
/// magnitude larger than the vector being produced.
pub fn apply_exp_nilpotent(op: &Operator, scale: Complex64, ket: &Ket) -> Result<Ket> {
    if op.dim() != ket.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            actual: ket.dim(),
        });
    }
    let a = op.matrix();
    let mut term = ket.vector().clone();
    let mut sum = term.clone();
    for p in 1..=op.dim() {
        term = (a * &term) * (scale / c(p as f64));
        if term.iter().all(|z| *z == ZERO) {
            break;
        }
        sum += &term;
    }
    if term.iter().any(|z| *z != ZERO) {
        return Err(Error::InvalidArgument("operator is not nilpotent".into()));
    }
    Ket::new(sum.iter().copied().collect())
}
