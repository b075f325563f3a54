use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One cell of the 2x2x2 factor design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FactorCondition {
    pub concentration: bool,
    pub strain: bool,
    pub energy: bool,
}

impl FactorCondition {
    pub const fn new(concentration: bool, strain: bool, energy: bool) -> Self {
        FactorCondition {
            concentration,
            strain,
            energy,
        }
    }

    /// All eight cells, in binary order (concentration is the high bit).
    pub fn all() -> [FactorCondition; 8] {
        std::array::from_fn(|i| FactorCondition::new(i & 4 != 0, i & 2 != 0, i & 1 != 0))
    }

    pub fn enabled_count(&self) -> usize {
        [self.concentration, self.strain, self.energy]
            .iter()
            .filter(|b| **b)
            .count()
    }

    /// True when every factor enabled in `self` is enabled in `other`.
    pub fn is_subset_of(&self, other: &FactorCondition) -> bool {
        (!self.concentration || other.concentration)
            && (!self.strain || other.strain)
            && (!self.energy || other.energy)
    }

    /// File-name friendly label, e.g. `c1_s0_e1`.
    pub fn slug(&self) -> String {
        format!(
            "c{}_s{}_e{}",
            self.concentration as u8, self.strain as u8, self.energy as u8
        )
    }
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for FactorCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "c={},s={},e={}",
            yn(self.concentration),
            yn(self.strain),
            yn(self.energy)
        )
    }
}

fn parse_level(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" | "on" | "1" => Some(true),
        "no" | "n" | "false" | "off" | "0" => Some(false),
        _ => None,
    }
}

impl FromStr for FactorCondition {
    type Err = Error;

    /// Parses `c=yes,s=no,e=yes`. Keys may be abbreviated (`c`, `s`, `e`) or
    /// spelled out; omitted factors default to `no`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut cond = FactorCondition::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("condition: expected key=value, got '{part}'")))?;
            let level = parse_level(value)
                .ok_or_else(|| Error::validation(format!("condition: bad level '{value}' for '{key}'")))?;
            match key.trim().to_ascii_lowercase().as_str() {
                "c" | "concentration" => cond.concentration = level,
                "s" | "strain" => cond.strain = level,
                "e" | "energy" | "se" => cond.energy = level,
                other => {
                    return Err(Error::validation(format!("condition: unknown key '{other}'")));
                }
            }
        }
        Ok(cond)
    }
}
