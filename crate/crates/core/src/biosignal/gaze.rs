use crate::model::{ObjectState, Vec3};

/// Angle in degrees between the gaze ray and the direction to `target`.
/// Returns 180 when the target coincides with the gaze origin.
pub fn angular_offset(gaze_origin: Vec3, gaze_dir: Vec3, target: Vec3) -> f64 {
    let (Some(to), Some(dir)) = ((target - gaze_origin).normalized(), gaze_dir.normalized()) else {
        return 180.0;
    };
    to.dot(dir).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Gaze lands on the object when its center lies within the cone or the ray
/// hits its box.
pub fn gaze_on_target(
    gaze_origin: Vec3,
    gaze_dir: Vec3,
    object: &ObjectState,
    half_angle_deg: f64,
) -> bool {
    angular_offset(gaze_origin, gaze_dir, object.position) <= half_angle_deg
        || object.ray_hit(gaze_origin, gaze_dir).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(at: Vec3) -> ObjectState {
        ObjectState::new("b", at, Vec3::new(0.05, 0.05, 0.05))
    }

    #[test]
    fn straight_ahead() {
        let obj = cube(Vec3::new(0.0, 0.0, 2.0));
        assert!(gaze_on_target(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &obj, 5.0));
    }

    #[test]
    fn ninety_degrees_off() {
        let obj = cube(Vec3::new(2.0, 0.0, 0.0));
        assert!(!gaze_on_target(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &obj, 5.0));
    }

    #[test]
    fn four_degrees_inside_five_degree_cone() {
        // Center placed 4 degrees off the +z axis, far enough that the box
        // itself is missed by the ray.
        let a = 4.0f64.to_radians();
        let obj = cube(Vec3::new(10.0 * a.sin(), 0.0, 10.0 * a.cos()));
        let off = angular_offset(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), obj.position);
        assert!((off - 4.0).abs() < 1e-9);
        assert!(obj.ray_hit(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0)).is_none());
        assert!(gaze_on_target(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &obj, 5.0));
        assert!(!gaze_on_target(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &obj, 3.0));
    }

    #[test]
    fn box_hit_outside_cone() {
        // Close, wide object: center is 10 degrees off but the ray grazes the box.
        let obj = ObjectState::new("w", Vec3::new(0.176, 0.0, 1.0), Vec3::new(0.2, 0.05, 0.05));
        assert!(angular_offset(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), obj.position) > 5.0);
        assert!(gaze_on_target(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0), &obj, 5.0));
    }
}
