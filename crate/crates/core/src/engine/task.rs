use serde::{Deserialize, Serialize};

use crate::model::{ObjectState, Vec3};

/// Fixed scene geometry of the stacking task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskLayout {
    pub blocks: Vec<ObjectState>,
    /// Center of the bottom block of the finished stack.
    pub target_base: Vec3,
    pub required_order: Vec<String>,
    /// Operator head position (gaze origin).
    pub head: Vec3,
    /// Hand rest position.
    pub hand_rest: Vec3,
}

impl Default for TaskLayout {
    /// Three 0.1 m cubes on a table top at 0.8 m, stack target to the right.
    fn default() -> Self {
        let half = Vec3::new(0.05, 0.05, 0.05);
        TaskLayout {
            blocks: vec![
                ObjectState::new("red", Vec3::new(-0.40, 0.85, 1.10), half),
                ObjectState::new("green", Vec3::new(-0.15, 0.85, 1.30), half),
                ObjectState::new("blue", Vec3::new(0.10, 0.85, 1.10), half),
            ],
            target_base: Vec3::new(0.40, 0.85, 1.20),
            required_order: vec!["blue".into(), "red".into(), "green".into()],
            head: Vec3::new(0.0, 1.6, 0.0),
            hand_rest: Vec3::new(0.15, 1.25, 0.35),
        }
    }
}

/// Progress of the stacking task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskState {
    pub blocks: Vec<ObjectState>,
    pub target_base: Vec3,
    pub required_order: Vec<String>,
    /// Always a prefix of `required_order`.
    pub stacked: Vec<String>,
    pub complete: bool,
    pub elapsed: f64,
}

impl TaskState {
    pub fn new(layout: &TaskLayout) -> Self {
        assert!(
            layout
                .required_order
                .iter()
                .all(|id| layout.blocks.iter().any(|b| &b.id == id)),
            "required order names unknown blocks"
        );
        TaskState {
            blocks: layout.blocks.clone(),
            target_base: layout.target_base,
            required_order: layout.required_order.clone(),
            stacked: Vec::new(),
            complete: false,
            elapsed: 0.0,
        }
    }

    pub fn is_snapped(&self, idx: usize) -> bool {
        self.stacked.contains(&self.blocks[idx].id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    /// Index of the block that must be stacked next.
    pub fn next_required(&self) -> Option<usize> {
        self.required_order
            .get(self.stacked.len())
            .and_then(|id| self.index_of(id))
    }

    /// Goal position of the next block: the base plus the heights already stacked.
    pub fn next_slot(&self) -> Option<Vec3> {
        let next = self.next_required()?;
        let below: f64 = self
            .stacked
            .iter()
            .filter_map(|id| self.index_of(id))
            .map(|i| self.blocks[i].height())
            .sum();
        let half = self.blocks[next].half_extent.y;
        let base_half = self
            .required_order
            .first()
            .and_then(|id| self.index_of(id))
            .map_or(half, |i| self.blocks[i].half_extent.y);
        Some(self.target_base + Vec3::new(0.0, below + half - base_half, 0.0))
    }
}

/// Snaps the next required block onto the stack when it lies within
/// `tolerance` of its slot and is not currently held by the gate. Returns the
/// id of the snapped block.
pub fn snap_check(task: &mut TaskState, held: Option<usize>, tolerance: f64) -> Option<String> {
    if task.complete {
        return None;
    }
    let next = task.next_required()?;
    let slot = task.next_slot()?;
    if held == Some(next) || task.blocks[next].position.distance(slot) > tolerance {
        return None;
    }
    task.blocks[next].position = slot;
    task.blocks[next].selected = false;
    let id = task.blocks[next].id.clone();
    task.stacked.push(id.clone());
    task.complete = task.stacked == task.required_order;
    Some(id)
}
