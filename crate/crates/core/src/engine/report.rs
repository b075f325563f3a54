use serde::{Deserialize, Serialize};

use super::snapshot::EngineSnapshot;
use crate::model::FactorCondition;

/// Fraction of ticks on which each gate conjunct (and the heater) was on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActivationStats {
    pub gaze_ok: f64,
    pub palm_ok: f64,
    pub open_ok: f64,
    pub conc_ok: f64,
    pub strain_ok: f64,
    pub active: f64,
    pub heater_on: f64,
}

/// Questionnaire item ids the run's subjective ratings map onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireSchema {
    pub sense_of_agency: Vec<String>,
    pub sense_of_telekinesis: Vec<String>,
    pub agency_scale: String,
    pub telekinesis_scale: String,
}

impl Default for QuestionnaireSchema {
    fn default() -> Self {
        QuestionnaireSchema {
            sense_of_agency: (1..=7).map(|i| format!("A{i}")).collect(),
            sense_of_telekinesis: (1..=7).map(|i| format!("T{i}")).collect(),
            agency_scale: "likert-7".into(),
            telekinesis_scale: "vas".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: u32,
    pub condition: FactorCondition,
    pub condition_label: String,
    pub complete: bool,
    pub completion_time: Option<f64>,
    pub ticks: usize,
    pub duration: f64,
    pub stacked: Vec<String>,
    pub activation: ActivationStats,
    pub questionnaire: QuestionnaireSchema,
}

/// Accumulates a report from a snapshot stream.
#[derive(Debug, Clone, Default)]
pub struct ReportBuilder {
    ticks: usize,
    counts: [usize; 7],
    first_t: Option<f64>,
    last: Option<EngineSnapshot>,
}

impl ReportBuilder {
    pub fn observe(&mut self, s: &EngineSnapshot) {
        self.ticks += 1;
        self.first_t.get_or_insert(s.t);
        let g = s.gate;
        for (c, on) in self.counts.iter_mut().zip([
            g.gaze_ok,
            g.palm_ok,
            g.open_ok,
            g.conc_ok,
            g.strain_ok,
            g.active,
            s.heater_on_any(),
        ]) {
            *c += on as usize;
        }
        self.last = Some(s.clone());
    }

    pub fn finish(&self, condition: FactorCondition, tick_period: f64) -> RunReport {
        let frac = |i: usize| {
            if self.ticks == 0 {
                0.0
            } else {
                self.counts[i] as f64 / self.ticks as f64
            }
        };
        let complete = self.last.as_ref().is_some_and(|s| s.task.complete);
        RunReport {
            version: 1,
            condition,
            condition_label: condition.to_string(),
            complete,
            completion_time: self
                .last
                .as_ref()
                .filter(|s| s.task.complete)
                .map(|s| s.task.elapsed),
            ticks: self.ticks,
            duration: self.ticks as f64 * tick_period,
            stacked: self
                .last
                .as_ref()
                .map(|s| s.task.stacked.clone())
                .unwrap_or_default(),
            activation: ActivationStats {
                gaze_ok: frac(0),
                palm_ok: frac(1),
                open_ok: frac(2),
                conc_ok: frac(3),
                strain_ok: frac(4),
                active: frac(5),
                heater_on: frac(6),
            },
            questionnaire: QuestionnaireSchema::default(),
        }
    }
}
