use serde::{Deserialize, Serialize};

use crate::biosignal::{angular_offset, gaze_on_target};
use crate::model::{FactorCondition, ObjectState, Vec3};

/// Per-tick conjuncts of the telekinetic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TelekinesisGate {
    pub gaze_ok: bool,
    pub palm_ok: bool,
    pub open_ok: bool,
    /// Concentration detector output (reported even when the factor is off).
    pub conc_ok: bool,
    /// Strain detector output (reported even when the factor is off).
    pub strain_ok: bool,
    pub active: bool,
}

impl TelekinesisGate {
    /// Combines the detector outputs under `condition`; disabled factors
    /// do not constrain activation.
    pub fn evaluate(
        condition: FactorCondition,
        gaze_ok: bool,
        palm_ok: bool,
        open_ok: bool,
        conc_ok: bool,
        strain_ok: bool,
    ) -> Self {
        let active = gaze_ok
            && palm_ok
            && open_ok
            && (conc_ok || !condition.concentration)
            && (strain_ok || !condition.strain);
        TelekinesisGate {
            gaze_ok,
            palm_ok,
            open_ok,
            conc_ok,
            strain_ok,
            active,
        }
    }
}

/// Palm faces the object when its normal points into the hand-to-object half space.
pub fn palm_facing(palm_normal: Vec3, hand_pos: Vec3, object: &ObjectState) -> bool {
    (object.position - hand_pos)
        .normalized()
        .is_some_and(|dir| palm_normal.dot(dir) > 0.0)
}

/// Index (into `objects`) of the gazed object with the smallest angular
/// offset, if any passes the gaze test.
pub fn gazed_object(
    gaze_origin: Vec3,
    gaze_dir: Vec3,
    objects: &[&ObjectState],
    half_angle: f64,
) -> Option<usize> {
    objects
        .iter()
        .enumerate()
        .filter(|(_, o)| gaze_on_target(gaze_origin, gaze_dir, o, half_angle))
        .map(|(i, o)| (i, angular_offset(gaze_origin, gaze_dir, o.position)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// The gazed object, provided the palm also faces it.
pub fn select_target(
    gaze_origin: Vec3,
    gaze_dir: Vec3,
    palm_normal: Vec3,
    hand_pos: Vec3,
    objects: &[&ObjectState],
    half_angle: f64,
) -> Option<usize> {
    gazed_object(gaze_origin, gaze_dir, objects, half_angle)
        .filter(|&i| palm_facing(palm_normal, hand_pos, objects[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(id: &str, at: Vec3) -> ObjectState {
        ObjectState::new(id, at, Vec3::new(0.05, 0.05, 0.05))
    }

    const FWD: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[test]
    fn dead_ahead_with_palm() {
        let o = cube("a", Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(select_target(Vec3::ZERO, FWD, FWD, Vec3::ZERO, &[&o], 5.0), Some(0));
    }

    #[test]
    fn palm_away_selects_nothing() {
        let o = cube("a", Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(select_target(Vec3::ZERO, FWD, -FWD, Vec3::ZERO, &[&o], 5.0), None);
    }

    #[test]
    fn nearest_angle_wins() {
        let at = |deg: f64| {
            let a = deg.to_radians();
            Vec3::new(20.0 * a.sin(), 0.0, 20.0 * a.cos())
        };
        let four = cube("four", at(4.0));
        let two = cube("two", at(-2.0));
        assert_eq!(select_target(Vec3::ZERO, FWD, FWD, Vec3::ZERO, &[&four, &two], 5.0), Some(1));
    }

    #[test]
    fn gate_truth_table() {
        let none = FactorCondition::default();
        assert!(TelekinesisGate::evaluate(none, true, true, true, false, false).active);
        assert!(!TelekinesisGate::evaluate(none, false, true, true, true, true).active);
        let strain = FactorCondition::new(false, true, false);
        assert!(!TelekinesisGate::evaluate(strain, true, true, true, true, false).active);
        assert!(TelekinesisGate::evaluate(strain, true, true, true, false, true).active);
        let conc = FactorCondition::new(true, false, false);
        assert!(TelekinesisGate::evaluate(conc, true, true, true, true, false).active);
        assert!(!TelekinesisGate::evaluate(conc, true, true, true, false, true).active);
        // Energy never gates.
        let energy = FactorCondition::new(false, false, true);
        assert!(TelekinesisGate::evaluate(energy, true, true, true, false, false).active);
    }
}
