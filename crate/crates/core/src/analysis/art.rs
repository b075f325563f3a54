//! Aligned rank transform for the 2x2x2 factorial.

use serde::{Deserialize, Serialize};

use super::anova::{anova3, cell_means, Effect, EffectRow};
use super::table::ObservationTable;
use crate::error::Result;

/// Marginal means of a balanced table over every subset of factors.
struct Marginals {
    grand: f64,
    // [factor][level]
    main: [[f64; 2]; 3],
    // [pair][level_i][level_j], pairs (0,1), (0,2), (1,2)
    pair: [[[f64; 2]; 2]; 3],
    cell: [f64; 8],
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn cell_index(lv: [usize; 3]) -> usize {
    lv[0] << 2 | lv[1] << 1 | lv[2]
}

impl Marginals {
    fn new(cell: [f64; 8]) -> Self {
        let grand = cell.iter().sum::<f64>() / 8.0;
        let mut main = [[0.0; 2]; 3];
        let mut pair = [[[0.0; 2]; 2]; 3];
        for (idx, &y) in cell.iter().enumerate() {
            let lv = [idx >> 2 & 1, idx >> 1 & 1, idx & 1];
            for (m, &level) in main.iter_mut().zip(&lv) {
                m[level] += y / 4.0;
            }
            for (p, &(i, j)) in PAIRS.iter().enumerate() {
                pair[p][lv[i]][lv[j]] += y / 2.0;
            }
        }
        Marginals {
            grand,
            main,
            pair,
            cell,
        }
    }

    fn pair_mean(&self, i: usize, j: usize, lv: [usize; 3]) -> f64 {
        let p = PAIRS.iter().position(|&q| q == (i, j)).expect("known pair");
        self.pair[p][lv[i]][lv[j]]
    }

    /// Estimated contribution of `effect` to the cell with levels `lv`.
    fn estimate(&self, effect: Effect, lv: [usize; 3]) -> f64 {
        let m = |f: usize| self.main[f][lv[f]];
        let g = self.grand;
        match effect {
            Effect::A => m(0) - g,
            Effect::B => m(1) - g,
            Effect::C => m(2) - g,
            Effect::AB => self.pair_mean(0, 1, lv) - m(0) - m(1) + g,
            Effect::AC => self.pair_mean(0, 2, lv) - m(0) - m(2) + g,
            Effect::BC => self.pair_mean(1, 2, lv) - m(1) - m(2) + g,
            Effect::ABC => {
                self.cell[cell_index(lv)]
                    - self.pair_mean(0, 1, lv)
                    - self.pair_mean(0, 2, lv)
                    - self.pair_mean(1, 2, lv)
                    + m(0)
                    + m(1)
                    + m(2)
                    - g
            }
        }
    }
}

/// Responses aligned for `effect`: the residual from the cell mean plus the
/// estimated effect, so every other factorial term is stripped out.
pub fn align(table: &ObservationTable, effect: Effect) -> Result<Vec<f64>> {
    let r = table.replicates()?;
    let marg = Marginals::new(cell_means(table, r));
    Ok(table
        .rows
        .iter()
        .map(|o| {
            let lv = o.levels.map(|b| b as usize);
            o.response - marg.cell[o.cell()] + marg.estimate(effect, lv)
        })
        .collect())
}

/// 1-based ranks with ties sharing their average rank. Values within a
/// relative `1e-10` of the data scale count as tied, so rounding noise in the
/// alignment does not break ties.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tol {
            end += 1;
        }
        // Positions start..end hold ranks start+1 ..= end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn align_rank(table: &ObservationTable, effect: Effect) -> Result<Vec<f64>> {
    Ok(average_ranks(&align(table, effect)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtAnovaResult {
    pub n: usize,
    pub effects: Vec<EffectRow>,
}

impl ArtAnovaResult {
    pub fn row(&self, effect: Effect) -> &EffectRow {
        self.effects
            .iter()
            .find(|r| r.effect == effect)
            .expect("all seven effects present")
    }
}

/// For each effect: align, rank, run the full-factorial ANOVA on the ranks and
/// keep that effect's row.
pub fn art_anova(table: &ObservationTable) -> Result<ArtAnovaResult> {
    let effects = Effect::ALL
        .iter()
        .map(|&e| {
            let ranks = align_rank(table, e)?;
            let res = anova3(&table.with_responses(&ranks))?;
            Ok(res.row(e).clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ArtAnovaResult {
        n: table.len(),
        effects,
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
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 1.0, 5.0]), vec![3.0, 3.0, 1.0, 3.0]);
        assert_eq!(average_ranks(&[2.0; 6]), vec![3.5; 6]);
    }

    #[test]
    fn constant_table_all_mid_rank() {
        let t = table_from(|_, _| 4.0, 3);
        for e in Effect::ALL {
            let ranks = align_rank(&t, e).unwrap();
            assert!(ranks.iter().all(|&r| r == 12.5));
        }
    }

    #[test]
    fn rank_sum_identity() {
        let t = table_from(|lv, i| (i * 13 % 7) as f64 + lv[0] as u8 as f64 * 2.0, 5);
        let n = t.len() as f64;
        for e in Effect::ALL {
            let s: f64 = align_rank(&t, e).unwrap().iter().sum();
            assert!((s - n * (n + 1.0) / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_table_errors() {
        assert!(align_rank(&ObservationTable::default(), Effect::A).is_err());
    }

    #[test]
    fn estimates_recover_additive_effects() {
        // Cell means built from known effects; the alignment oracle is the
        // construction itself.
        let a = 1.5;
        let ab = -0.75;
        let t = table_from(
            |lv, _| {
                let s = |b: bool| if b { 1.0 } else { -1.0 };
                10.0 + a * s(lv[0]) + ab * s(lv[0]) * s(lv[1])
            },
            2,
        );
        let aligned_a = align(&t, Effect::A).unwrap();
        for (o, v) in t.rows.iter().zip(&aligned_a) {
            let expect = if o.levels[0] { a } else { -a };
            assert!((v - expect).abs() < 1e-12);
        }
        let aligned_b = align(&t, Effect::B).unwrap();
        assert!(aligned_b.iter().all(|v| v.abs() < 1e-12));
        let aligned_ab = align(&t, Effect::AB).unwrap();
        for (o, v) in t.rows.iter().zip(&aligned_ab) {
            let same = o.levels[0] == o.levels[1];
            assert!((v - if same { ab } else { -ab }).abs() < 1e-12);
        }
    }
}
