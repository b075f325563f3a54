use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One response in long format. `levels` holds concentration, strain, energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub participant: String,
    pub levels: [bool; 3],
    pub response: f64,
}

impl Observation {
    pub fn new(participant: impl Into<String>, levels: [bool; 3], response: f64) -> Self {
        Observation {
            participant: participant.into(),
            levels,
            response,
        }
    }

    /// Cell index 0..8, concentration as the high bit.
    pub fn cell(&self) -> usize {
        (self.levels[0] as usize) << 2 | (self.levels[1] as usize) << 1 | self.levels[2] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservationTable {
    pub rows: Vec<Observation>,
}

const HEADER: [&str; 5] = ["participant", "concentration", "strain", "energy", "response"];

fn parse_level(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" | "1" => Some(true),
        "no" | "n" | "false" | "0" => Some(false),
        _ => None,
    }
}

impl ObservationTable {
    pub fn new(rows: Vec<Observation>) -> Self {
        ObservationTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn responses(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.response)
    }

    /// Same design, responses replaced.
    pub fn with_responses(&self, responses: &[f64]) -> ObservationTable {
        assert_eq!(responses.len(), self.rows.len());
        ObservationTable {
            rows: self
                .rows
                .iter()
                .zip(responses)
                .map(|(r, &y)| Observation { response: y, ..r.clone() })
                .collect(),
        }
    }

    pub fn cell_counts(&self) -> [usize; 8] {
        let mut counts = [0usize; 8];
        for r in &self.rows {
            counts[r.cell()] += 1;
        }
        counts
    }

    /// Replicates per cell when every cell holds the same positive count.
    pub fn replicates(&self) -> Result<usize> {
        if self.rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        let counts = self.cell_counts();
        let r = counts[0];
        if r == 0 || counts.iter().any(|&c| c != r) {
            return Err(Error::Unbalanced(format!("cell counts {counts:?}")));
        }
        Ok(r)
    }

    pub fn from_csv_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let parse_err = |line: usize, message: String| Error::Parse {
            path: name.to_string(),
            line,
            message,
        };
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(parse_err(1, format!("expected header '{}'", HEADER.join(","))));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let mut levels = [false; 3];
            for (i, lv) in levels.iter_mut().enumerate() {
                *lv = parse_level(&rec[i + 1]).ok_or_else(|| {
                    parse_err(line, format!("bad level '{}' for {}", &rec[i + 1], HEADER[i + 1]))
                })?;
            }
            let response: f64 = rec[4]
                .parse()
                .map_err(|_| parse_err(line, format!("bad response '{}'", &rec[4])))?;
            if !response.is_finite() {
                return Err(parse_err(line, "response must be finite".into()));
            }
            rows.push(Observation::new(&rec[0], levels, response));
        }
        Ok(ObservationTable { rows })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = HEADER.join(",");
        out.push('\n');
        let yn = |b: bool| if b { "yes" } else { "no" };
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.participant,
                yn(r.levels[0]),
                yn(r.levels[1]),
                yn(r.levels[2]),
                r.response
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_csv() {
        let text = "participant,concentration,strain,energy,response\np1,yes,no,yes,4.5\np2,no,no,no,3\n";
        let t = ObservationTable::from_csv_reader(text.as_bytes(), "mem").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.rows[0].levels, [true, false, true]);
        assert_eq!(t.rows[0].cell(), 5);
        assert_eq!(t.rows[1].response, 3.0);
        let again = ObservationTable::from_csv_reader(t.to_csv().as_bytes(), "mem").unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "participant,concentration,strain,energy,response\np1,yes,no,yes,4.5\np2,maybe,no,no,3\n";
        match ObservationTable::from_csv_reader(text.as_bytes(), "data.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "participant,concentration,strain,energy,response\np1,yes,no,yes,abc\n";
        assert!(matches!(
            ObservationTable::from_csv_reader(text.as_bytes(), "x"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(ObservationTable::from_csv_reader("a,b\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn balance_checks() {
        let mut rows = Vec::new();
        for cell in 0..8 {
            let lv = [cell & 4 != 0, cell & 2 != 0, cell & 1 != 0];
            rows.push(Observation::new("p", lv, 1.0));
            rows.push(Observation::new("q", lv, 2.0));
        }
        let t = ObservationTable::new(rows.clone());
        assert_eq!(t.replicates().unwrap(), 2);
        rows.pop();
        assert!(matches!(ObservationTable::new(rows).replicates(), Err(Error::Unbalanced(_))));
        assert!(matches!(ObservationTable::default().replicates(), Err(Error::EmptyTable)));
    }
}
