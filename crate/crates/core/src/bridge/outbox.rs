use std::collections::VecDeque;
use std::sync::Mutex;

use tokio::sync::Notify;

use super::session::StateMessage;

/// Queue between the engine loop and the socket writer. Pushing never
/// waits; once `capacity` messages are queued the oldest snapshot is
/// discarded. Errors and task events are never discarded.
pub struct Outbox {
    inner: Mutex<Inner>,
    notify: Notify,
    capacity: usize,
}

struct Inner {
    queue: VecDeque<StateMessage>,
    closed: bool,
    dropped: u64,
}

impl Outbox {
    pub fn new(capacity: usize) -> Self {
        Outbox {
            inner: Mutex::new(Inner {
                queue: VecDeque::new(),
                closed: false,
                dropped: 0,
            }),
            notify: Notify::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&self, msg: StateMessage) {
        let mut inner = self.inner.lock().expect("outbox lock");
        if inner.closed {
            return;
        }
        if inner.queue.len() >= self.capacity {
            if let Some(i) = inner.queue.iter().position(StateMessage::is_snapshot) {
                inner.queue.remove(i);
                inner.dropped += 1;
            }
        }
        inner.queue.push_back(msg);
        drop(inner);
        self.notify.notify_one();
    }

    /// No more pushes are accepted; the writer drains what is queued and stops.
    pub fn close(&self) {
        self.inner.lock().expect("outbox lock").closed = true;
        self.notify.notify_one();
    }

    pub fn dropped(&self) -> u64 {
        self.inner.lock().expect("outbox lock").dropped
    }

    /// Everything queued, waiting if empty. `None` once closed and drained.
    pub async fn next_batch(&self) -> Option<Vec<StateMessage>> {
        loop {
            {
                let mut inner = self.inner.lock().expect("outbox lock");
                if !inner.queue.is_empty() {
                    return Some(inner.queue.drain(..).collect());
                }
                if inner.closed {
                    return None;
                }
            }
            self.notify.notified().await;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, TaskLayout};
    use crate::model::{EngineConfig, FactorCondition, SensorFrame, SkinTemps, Vec3};

    fn snapshot(t: f64) -> StateMessage {
        let cfg = EngineConfig::default();
        let mut e = Engine::new(cfg.clone(), FactorCondition::default(), None).unwrap();
        let l = TaskLayout::default();
        let mut s = e
            .tick(&SensorFrame {
                t: 0.0,
                hand_pos: l.hand_rest,
                palm_normal: Vec3::new(0.0, 0.0, 1.0),
                hand_openness: 0.0,
                gaze_origin: l.head,
                gaze_dir: Vec3::new(0.0, 0.0, 1.0),
                eye_openness: 1.0,
                emg_batch: vec![0.0; cfg.emg_batch_len()],
                skin_temp: SkinTemps::default(),
            })
            .unwrap();
        s.t = t;
        StateMessage::Snapshot { snapshot: s }
    }

    fn times(batch: &[StateMessage]) -> Vec<f64> {
        batch
            .iter()
            .filter_map(|m| match m {
                StateMessage::Snapshot { snapshot } => Some(snapshot.t),
                _ => None,
            })
            .collect()
    }

    #[tokio::test]
    async fn drops_oldest_snapshots_but_keeps_errors() {
        let out = Outbox::new(3);
        out.push(StateMessage::error("keep"));
        for i in 0..5 {
            out.push(snapshot(i as f64));
        }
        let batch = out.next_batch().await.unwrap();
        assert!(matches!(batch[0], StateMessage::Error { .. }));
        assert_eq!(times(&batch), vec![3.0, 4.0]);
        assert_eq!(out.dropped(), 3);
    }

    #[tokio::test]
    async fn close_drains_then_ends() {
        let out = Outbox::new(8);
        out.push(snapshot(0.0));
        out.close();
        out.push(snapshot(1.0));
        assert_eq!(times(&out.next_batch().await.unwrap()), vec![0.0]);
        assert!(out.next_batch().await.is_none());
    }
}
