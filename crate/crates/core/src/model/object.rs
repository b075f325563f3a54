use serde::{Deserialize, Serialize};

use super::Vec3;

/// An axis-aligned block in the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: String,
    pub position: Vec3,
    pub half_extent: Vec3,
    pub selected: bool,
}

impl ObjectState {
    pub fn new(id: impl Into<String>, position: Vec3, half_extent: Vec3) -> Self {
        assert!(
            half_extent.x > 0.0 && half_extent.y > 0.0 && half_extent.z > 0.0,
            "half extents must be positive"
        );
        ObjectState {
            id: id.into(),
            position,
            half_extent,
            selected: false,
        }
    }

    pub fn height(&self) -> f64 {
        2.0 * self.half_extent.y
    }

    /// Slab test: distance along the ray to the box, if the ray hits it.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        let lo = self.position - self.half_extent;
        let hi = self.position + self.half_extent;
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        for (o, d, l, h) in [
            (origin.x, dir.x, lo.x, hi.x),
            (origin.y, dir.y, lo.y, hi.y),
            (origin.z, dir.z, lo.z, hi.z),
        ] {
            if d == 0.0 {
                if o < l || o > h {
                    return None;
                }
            } else {
                let (a, b) = ((l - o) / d, (h - o) / d);
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                t_near = t_near.max(a);
                t_far = t_far.min(b);
                if t_near > t_far {
                    return None;
                }
            }
        }
        if t_far < 0.0 {
            None
        } else {
            Some(t_near.max(0.0))
        }
    }
}
