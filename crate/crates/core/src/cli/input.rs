use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{CliError, CliResult, StateArg, StateSelect};
use crate::algebra::{parse_fraction, BargmannIndex, Ket, SpinLabel};

/// `"RE,IM"` or a bare real `"RE"`.
pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("cannot parse '{p}' as a number"));
    let v = match parts.as_slice() {
        [re] => [num(re)?, 0.0],
        [re, im] => [num(re)?, num(im)?],
        _ => return Err(format!("expected RE,IM, got '{s}'")),
    };
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(format!("non-finite amplitude '{s}'"))
    }
}

pub fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Splits `"B/C"`, `"B,C"` or `"p/q/r/s"` into two label strings.
pub fn parse_pair(s: &str) -> CliResult<(String, String)> {
    if let Some((b, c)) = s.split_once(',') {
        return Ok((b.trim().to_string(), c.trim().to_string()));
    }
    let parts: Vec<&str> = s.split('/').map(str::trim).collect();
    match parts.as_slice() {
        [b, c] => Ok((b.to_string(), c.to_string())),
        [p, q, r, t] => Ok((format!("{p}/{q}"), format!("{r}/{t}"))),
        _ => Err(CliError::Validation(format!(
            "cannot read split '{s}'; write it as B/C or, with fractions, B,C (e.g. 1/2,1)"
        ))),
    }
}

pub fn spin(s: &str) -> CliResult<SpinLabel> {
    s.parse::<SpinLabel>().map_err(CliError::from)
}

pub fn spin_pair(s: &str) -> CliResult<(SpinLabel, SpinLabel)> {
    let (b, c) = parse_pair(s)?;
    Ok((spin(&b)?, spin(&c)?))
}

pub fn bargmann(s: &str, dim: usize) -> CliResult<BargmannIndex> {
    BargmannIndex::parse(s, dim).map_err(CliError::from)
}

/// Index of `m` in the m-ascending basis of spin `j`.
pub fn weight_index(m: &str, j: SpinLabel) -> CliResult<usize> {
    let (p, q) = parse_fraction(m)?;
    if (2 * p) % q != 0 {
        return Err(CliError::Validation(format!("m = {m} is not an integer or half-integer")));
    }
    j.index_of_twice_m(2 * p / q)
        .ok_or_else(|| CliError::Validation(format!("m = {m} is not a weight of spin {j}")))
}

/// Fock or discrete-series level `n`.
pub fn level_index(m: &str, dim: usize) -> CliResult<usize> {
    let n: usize = m
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("level '{m}' must be a non-negative integer")))?;
    if n >= dim {
        return Err(CliError::Validation(format!("level {n} is outside the truncation {dim}")));
    }
    Ok(n)
}

/// Reads one `re im` amplitude per line; blank lines and `#` comments are
/// skipped. The state is normalized, with a warning when its norm was off
/// by more than 1e-6.
pub fn read_state_file(path: &Path, dim: usize) -> CliResult<Ket> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
    let mut amps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || CliError::Validation(format!("{}:{}: expected 're im'", path.display(), lineno + 1));
        if fields.len() != 2 {
            return Err(bad());
        }
        let re: f64 = fields[0].parse().map_err(|_| bad())?;
        let im: f64 = fields[1].parse().map_err(|_| bad())?;
        amps.push(Complex64::new(re, im));
    }
    if amps.len() != dim {
        return Err(CliError::Validation(format!(
            "{} holds {} amplitudes; the state space has dimension {dim}",
            path.display(),
            amps.len()
        )));
    }
    let ket = Ket::new(amps)?;
    if (ket.norm() - 1.0).abs() > 1e-6 {
        eprintln!("warning: state norm {} normalized to 1", ket.norm());
    }
    Ok(ket.normalized()?)
}

/// The non-coherent state choices shared by every kind.
pub fn basis_or_file(sel: &StateSelect, dim: usize, index: impl Fn(&str) -> CliResult<usize>) -> CliResult<Ket> {
    match sel.state {
        StateArg::Weight => {
            let m = sel
                .m
                .as_deref()
                .ok_or_else(|| CliError::Validation("--state weight needs --m".into()))?;
            Ok(Ket::basis(dim, index(m)?))
        }
        StateArg::File => {
            let path = sel
                .state_file
                .as_deref()
                .ok_or_else(|| CliError::Validation("--state file needs --state-file".into()))?;
            read_state_file(path, dim)
        }
        StateArg::Cs => unreachable!("coherent input is built by the caller"),
    }
}
