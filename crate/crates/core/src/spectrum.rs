//! Energy spectra with degeneracies and a system/bath split, plus the JSON
//! spectrum file format.
//!
//! ```json
//! {"d_S": 2, "d_B": 4,
//!  "levels": [{"E": -0.25, "deg": 2}, {"E_num": 1, "E_den": 3, "deg": 6}]}
//! ```
//!
//! Energies given as `E_num/E_den` are kept exactly so that gap
//! coincidences are decided without rounding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for deciding `Δ_rs = Δ_jk` when either gap involves
/// a floating-point energy.
pub const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactEnergy {
    pub num: i64,
    pub den: i64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub exact: Option<ExactEnergy>,
    pub degeneracy: usize,
}

impl Level {
    pub fn new(energy: f64, degeneracy: usize) -> Self {
        Self {
            energy,
            exact: None,
            degeneracy,
        }
    }

    pub fn exact(num: i64, den: i64, degeneracy: usize) -> Self {
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        Self {
            energy: num as f64 / den as f64,
            exact: Some(ExactEnergy { num, den }),
            degeneracy,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    d_s: usize,
    d_b: usize,
    levels: Vec<Level>,
}

impl Spectrum {
    pub fn new(d_s: usize, d_b: usize, levels: Vec<Level>) -> Result<Self> {
        if d_s == 0 || d_b == 0 {
            return Err(Error::InvalidSpectrum("d_S and d_B must be positive".into()));
        }
        if levels.is_empty() {
            return Err(Error::InvalidSpectrum("no energy levels".into()));
        }
        for (i, l) in levels.iter().enumerate() {
            if l.degeneracy == 0 {
                return Err(Error::InvalidSpectrum(format!("levels[{i}].deg must be positive")));
            }
            if !l.energy.is_finite() {
                return Err(Error::InvalidSpectrum(format!("levels[{i}].E is not finite")));
            }
            if let Some(e) = l.exact {
                if e.den == 0 {
                    return Err(Error::InvalidSpectrum(format!("levels[{i}].E_den is zero")));
                }
            }
        }
        for (i, w) in levels.windows(2).enumerate() {
            if !energy_less(&w[0], &w[1]) {
                return Err(Error::InvalidSpectrum(format!(
                    "levels[{}].E must exceed levels[{i}].E (energies strictly increasing)",
                    i + 1
                )));
            }
        }
        let total: usize = levels.iter().map(|l| l.degeneracy).sum();
        if total != d_s * d_b {
            return Err(Error::InvalidSpectrum(format!(
                "degeneracies sum to {total}, expected d_S*d_B = {}",
                d_s * d_b
            )));
        }
        Ok(Self { d_s, d_b, levels })
    }

    /// Non-degenerate spectrum; energies are sorted.
    pub fn nondegenerate(d_s: usize, d_b: usize, energies: &[f64]) -> Result<Self> {
        let mut e = energies.to_vec();
        e.sort_by(f64::total_cmp);
        Self::new(d_s, d_b, e.into_iter().map(|x| Level::new(x, 1)).collect())
    }

    /// A single fully degenerate level (`H ∝ 1`).
    pub fn single_level(d_s: usize, d_b: usize, energy: f64) -> Result<Self> {
        Self::new(d_s, d_b, vec![Level::new(energy, d_s * d_b)])
    }

    pub fn system_dim(&self) -> usize {
        self.d_s
    }

    pub fn bath_dim(&self) -> usize {
        self.d_b
    }

    /// Total dimension `d = d_S d_B`.
    pub fn dim(&self) -> usize {
        self.d_s * self.d_b
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn degeneracies(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.degeneracy).collect()
    }

    /// Level index of each of the `d` basis states of `H₀`.
    pub fn level_of_state(&self) -> Vec<usize> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(j, l)| std::iter::repeat_n(j, l.degeneracy))
            .collect()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.levels.iter().all(|l| l.degeneracy == 1)
    }

    /// Uniform shift `E_j → E_j + c`; exact energies become floating-point.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            d_s: self.d_s,
            d_b: self.d_b,
            levels: self
                .levels
                .iter()
                .map(|l| Level::new(l.energy + c, l.degeneracy))
                .collect(),
        }
    }

    /// Same levels with a different system/bath split of the same total dimension.
    pub fn with_split(&self, d_s: usize, d_b: usize) -> Result<Self> {
        Self::new(d_s, d_b, self.levels.clone())
    }

    /// Gap `Δ_jk = E_j − E_k`.
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.levels[j].energy - self.levels[k].energy
    }

    /// Whether `Δ_jk = Δ_rs`: exactly when all four energies are exact,
    /// otherwise within [`GAP_TOLERANCE`].
    pub fn gaps_equal(&self, (j, k): (usize, usize), (r, s): (usize, usize)) -> bool {
        let l = &self.levels;
        match (l[j].exact, l[k].exact, l[r].exact, l[s].exact) {
            (Some(a), Some(b), Some(c), Some(d)) => {
                exact_difference(a, b) == exact_difference(c, d)
            }
            _ => (self.gap(j, k) - self.gap(r, s)).abs() <= GAP_TOLERANCE,
        }
    }

    pub fn to_file(&self) -> SpectrumFile {
        SpectrumFile {
            d_s: self.d_s,
            d_b: self.d_b,
            levels: self
                .levels
                .iter()
                .map(|l| match l.exact {
                    Some(e) => LevelEntry {
                        energy: None,
                        energy_num: Some(e.num),
                        energy_den: Some(e.den),
                        deg: l.degeneracy,
                    },
                    None => LevelEntry {
                        energy: Some(l.energy),
                        energy_num: None,
                        energy_den: None,
                        deg: l.degeneracy,
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spectrum serialises")
    }
}

fn energy_less(a: &Level, b: &Level) -> bool {
    match (a.exact, b.exact) {
        (Some(x), Some(y)) => (x.num as i128) * (y.den as i128) < (y.num as i128) * (x.den as i128),
        _ => a.energy < b.energy,
    }
}

/// `a − b` as a reduced fraction with positive denominator.
fn exact_difference(a: ExactEnergy, b: ExactEnergy) -> (i128, i128) {
    let num = a.num as i128 * b.den as i128 - b.num as i128 * a.den as i128;
    let den = a.den as i128 * b.den as i128;
    let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i128;
    (num / g, den / g)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Serialized form of a spectrum file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    #[serde(rename = "d_S")]
    pub d_s: usize,
    #[serde(rename = "d_B")]
    pub d_b: usize,
    pub levels: Vec<LevelEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LevelEntry {
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(rename = "E_num", default, skip_serializing_if = "Option::is_none")]
    pub energy_num: Option<i64>,
    #[serde(rename = "E_den", default, skip_serializing_if = "Option::is_none")]
    pub energy_den: Option<i64>,
    #[serde(default = "one")]
    pub deg: usize,
}

fn one() -> usize {
    1
}

/// A malformed spectrum file, located by line/column (syntax) or field path
/// (semantics).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumFileError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
}

impl fmt::Display for SpectrumFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.field, self.line, self.column) {
            (Some(field), _, _) => write!(f, "field {field}: {}", self.message),
            (None, Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for SpectrumFileError {}

impl SpectrumFile {
    pub fn parse(text: &str) -> std::result::Result<Spectrum, SpectrumFileError> {
        let file: SpectrumFile = serde_json::from_str(text).map_err(|e| SpectrumFileError {
            message: e.to_string(),
            line: Some(e.line()),
            column: Some(e.column()),
            field: None,
        })?;
        file.into_spectrum()
    }

    pub fn into_spectrum(self) -> std::result::Result<Spectrum, SpectrumFileError> {
        let field_err = |field: String, message: &str| SpectrumFileError {
            message: message.to_string(),
            line: None,
            column: None,
            field: Some(field),
        };
        let mut levels = Vec::with_capacity(self.levels.len());
        for (i, entry) in self.levels.iter().enumerate() {
            let level = match (entry.energy, entry.energy_num, entry.energy_den) {
                (Some(e), None, None) => Level::new(e, entry.deg),
                (None, Some(n), Some(d)) => {
                    if d == 0 {
                        return Err(field_err(format!("levels[{i}].E_den"), "denominator is zero"));
                    }
                    Level::exact(n, d, entry.deg)
                }
                (None, Some(_), None) => {
                    return Err(field_err(format!("levels[{i}].E_den"), "missing (E_num given)"))
                }
                (None, None, Some(_)) => {
                    return Err(field_err(format!("levels[{i}].E_num"), "missing (E_den given)"))
                }
                (None, None, None) => {
                    return Err(field_err(format!("levels[{i}].E"), "missing energy (E or E_num/E_den)"))
                }
                _ => {
                    return Err(field_err(
                        format!("levels[{i}].E"),
                        "give either E or E_num/E_den, not both",
                    ))
                }
            };
            levels.push(level);
        }
        Spectrum::new(self.d_s, self.d_b, levels).map_err(|e| {
            let msg = match e {
                Error::InvalidSpectrum(m) => m,
                other => other.to_string(),
            };
            let field = msg
                .split_whitespace()
                .find(|w| w.starts_with("levels[") || *w == "d_S" || *w == "d_B")
                .map(|w| w.trim_end_matches(|c: char| !c.is_alphanumeric() && c != ']').to_string())
                .unwrap_or_else(|| "levels".to_string());
            SpectrumFileError {
                message: msg,
                line: None,
                column: None,
                field: Some(field),
            }
        })
    }
}
