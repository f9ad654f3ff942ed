use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three rank-1 algebras supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    Su2,
    Su11,
    WeylHeisenberg,
}

impl AlgebraKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgebraKind::Su2 => "su2",
            AlgebraKind::Su11 => "su11",
            AlgebraKind::WeylHeisenberg => "wh",
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Spin label stored as `2j`, so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinLabel {
    twice_j: u32,
}

impl SpinLabel {
    pub const fn from_twice(twice_j: u32) -> Self {
        SpinLabel { twice_j }
    }

    pub const fn twice_j(self) -> u32 {
        self.twice_j
    }

    pub fn j(self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    /// Hilbert-space dimension `2j + 1`.
    pub const fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// Twice the magnetic quantum number of basis index `i` (m-ascending).
    pub fn twice_m(self, index: usize) -> i64 {
        2 * index as i64 - i64::from(self.twice_j)
    }

    /// Basis index of the state with the given `2m`, if it exists.
    pub fn index_of_twice_m(self, twice_m: i64) -> Option<usize> {
        let shifted = twice_m + i64::from(self.twice_j);
        if shifted < 0 || shifted % 2 != 0 || shifted / 2 > i64::from(self.twice_j) {
            None
        } else {
            Some((shifted / 2) as usize)
        }
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_j.is_multiple_of(2) {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Parses `p/q` or a plain number into a rational `(num, den)` with `den > 0`.
pub(crate) fn parse_fraction(s: &str) -> Result<(i64, i64)> {
    let s = s.trim();
    let bad = || Error::InvalidLabel(format!("cannot parse '{s}' as a fraction"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q <= 0 {
            return Err(bad());
        }
        Ok((p, q))
    } else if let Ok(n) = s.parse::<i64>() {
        Ok((n, 1))
    } else {
        // Accept decimals such as "1.5" by scaling to a power-of-ten denominator.
        let (int, frac) = s.split_once('.').ok_or_else(bad)?;
        if frac.is_empty() || frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let negative = int.trim_start().starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_part: i64 = frac.parse().map_err(|_| bad())?;
        let num = int_part.abs() * den + frac_part;
        Ok((if negative { -num } else { num }, den))
    }
}

impl FromStr for SpinLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = parse_fraction(s)?;
        // 2j = 2p/q must be a non-negative integer.
        if p < 0 || (2 * p) % q != 0 {
            return Err(Error::InvalidLabel(format!(
                "spin must be a non-negative integer or half-integer, got '{s}'"
            )));
        }
        let twice = 2 * p / q;
        u32::try_from(twice)
            .map(SpinLabel::from_twice)
            .map_err(|_| Error::InvalidLabel(format!("spin '{s}' too large")))
    }
}

/// SU(1,1) discrete-series label `k` with a finite truncation of the number basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BargmannIndex {
    k: f64,
    truncation_dim: usize,
}

impl BargmannIndex {
    pub fn new(k: f64, truncation_dim: usize) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidLabel(format!("Bargmann index must be > 0, got {k}")));
        }
        if truncation_dim < 2 {
            return Err(Error::InvalidLabel(format!(
                "truncation dimension must be >= 2, got {truncation_dim}"
            )));
        }
        Ok(BargmannIndex { k, truncation_dim })
    }

    /// Parses `k` as an exact fraction such as `3/2`.
    pub fn parse(k: &str, truncation_dim: usize) -> Result<Self> {
        let (p, q) = parse_fraction(k)?;
        BargmannIndex::new(p as f64 / q as f64, truncation_dim)
    }

    pub fn k(self) -> f64 {
        self.k
    }

    pub fn dim(self) -> usize {
        self.truncation_dim
    }
}
