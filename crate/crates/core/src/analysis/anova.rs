use std::fmt;

use serde::{Deserialize, Serialize};

use super::fdist::f_upper_tail;
use super::table::ObservationTable;
use crate::error::{Error, Result};

/// Factorial terms of the 2x2x2 design. A = concentration, B = strain,
/// C = energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Effect {
    A,
    B,
    C,
    AB,
    AC,
    BC,
    ABC,
}

impl Effect {
    pub const ALL: [Effect; 7] = [
        Effect::A,
        Effect::B,
        Effect::C,
        Effect::AB,
        Effect::AC,
        Effect::BC,
        Effect::ABC,
    ];

    /// Which factors take part in the term.
    pub fn factors(self) -> [bool; 3] {
        match self {
            Effect::A => [true, false, false],
            Effect::B => [false, true, false],
            Effect::C => [false, false, true],
            Effect::AB => [true, true, false],
            Effect::AC => [true, false, true],
            Effect::BC => [false, true, true],
            Effect::ABC => [true, true, true],
        }
    }

    /// +1/-1 contrast coefficient of the term for a cell's levels.
    pub fn sign(self, levels: [bool; 3]) -> f64 {
        self.factors()
            .iter()
            .zip(levels)
            .filter(|(used, _)| **used)
            .map(|(_, yes)| if yes { 1.0 } else { -1.0 })
            .product()
    }

    pub fn label(self) -> &'static str {
        match self {
            Effect::A => "concentration",
            Effect::B => "strain",
            Effect::C => "energy",
            Effect::AB => "concentration:strain",
            Effect::AC => "concentration:energy",
            Effect::BC => "strain:energy",
            Effect::ABC => "concentration:strain:energy",
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub effect: Effect,
    pub label: String,
    pub ss: f64,
    pub df1: u32,
    pub df2: u32,
    #[serde(rename = "F")]
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub effects: Vec<EffectRow>,
    pub ss_error: f64,
    pub ss_total: f64,
    pub df_error: u32,
}

impl AnovaResult {
    pub fn row(&self, effect: Effect) -> &EffectRow {
        self.effects
            .iter()
            .find(|r| r.effect == effect)
            .expect("all seven effects present")
    }
}

/// Cell means of a balanced table, indexed by [`super::Observation::cell`].
pub(crate) fn cell_means(table: &ObservationTable, replicates: usize) -> [f64; 8] {
    let mut sums = [0.0; 8];
    for r in &table.rows {
        sums[r.cell()] += r.response;
    }
    sums.map(|s| s / replicates as f64)
}

/// Fixed-effects three-way ANOVA on a balanced 2x2x2 table with at least
/// two replicates per cell. Effect sums of squares come from the +/-1
/// contrasts; the error term is the within-cell variation.
pub fn anova3(table: &ObservationTable) -> Result<AnovaResult> {
    let r = table.replicates()?;
    if r < 2 {
        return Err(Error::Unbalanced(
            "ANOVA needs at least 2 replicates per cell".into(),
        ));
    }
    let n = table.len() as f64;
    let means = cell_means(table, r);
    let grand = table.responses().sum::<f64>() / n;
    let ss_total: f64 = table.responses().map(|y| (y - grand).powi(2)).sum();
    let ss_error: f64 = table
        .rows
        .iter()
        .map(|o| (o.response - means[o.cell()]).powi(2))
        .sum();
    let df_error = (table.len() - 8) as u32;

    if ss_error <= 1e-12 * ss_total || ss_error == 0.0 {
        return Err(Error::UndefinedF);
    }
    let ms_error = ss_error / df_error as f64;

    let effects = Effect::ALL
        .iter()
        .map(|&e| {
            let contrast: f64 = table.rows.iter().map(|o| e.sign(o.levels) * o.response).sum();
            let ss = contrast * contrast / n;
            let f = ss / ms_error;
            EffectRow {
                effect: e,
                label: e.label().to_string(),
                ss,
                df1: 1,
                df2: df_error,
                f,
                p: f_upper_tail(f, 1.0, df_error as f64),
            }
        })
        .collect();
    Ok(AnovaResult {
        effects,
        ss_error,
        ss_total,
        df_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Observation;

    fn table_from(f: impl Fn([bool; 3], usize) -> f64, r: usize) -> ObservationTable {
        let mut rows = Vec::new();
        for cell in 0..8 {
            let lv = [cell & 4 != 0, cell & 2 != 0, cell & 1 != 0];
            for i in 0..r {
                rows.push(Observation::new(format!("p{i}"), lv, f(lv, i)));
            }
        }
        ObservationTable::new(rows)
    }

    #[test]
    fn noise_free_effect_is_undefined() {
        let t = table_from(|lv, _| if lv[0] { 1.0 } else { 0.0 }, 3);
        assert!(matches!(anova3(&t), Err(Error::UndefinedF)));
        let c = table_from(|_, _| 4.0, 3);
        assert!(matches!(anova3(&c), Err(Error::UndefinedF)));
    }

    #[test]
    fn single_replicate_rejected() {
        let t = table_from(|_, i| i as f64, 1);
        assert!(anova3(&t).is_err());
    }

    #[test]
    fn hand_computed_main_effect() {
        // r = 2, within-cell values +/-0.5 around the cell mean; A shifts by 2.
        // SS_A = N * (d/2)^2 = 16 * 1 = 16; SS_E = 16 * 0.25 = 4; df2 = 8.
        let t = table_from(
            |lv, i| (if lv[0] { 2.0 } else { 0.0 }) + if i == 0 { 0.5 } else { -0.5 },
            2,
        );
        let res = anova3(&t).unwrap();
        let a = res.row(Effect::A);
        assert!((a.ss - 16.0).abs() < 1e-12);
        assert_eq!(a.df2, 8);
        assert!((a.f - 32.0).abs() < 1e-12);
        assert!(res.row(Effect::B).f.abs() < 1e-12);
        assert!((res.ss_error - 4.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariant() {
        let t = table_from(|lv, i| (lv[1] as u8 as f64) * 1.5 + ((i * 7 + lv[0] as usize) % 5) as f64, 4);
        let mut rev = t.clone();
        rev.rows.reverse();
        let a = anova3(&t).unwrap();
        let b = anova3(&rev).unwrap();
        for e in Effect::ALL {
            assert!((a.row(e).f - b.row(e).f).abs() < 1e-9 * (1.0 + a.row(e).f));
        }
    }
}
