//! JSONL trace files: one [`SensorFrame`] per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::canonical::to_canonical_json;
use super::SensorFrame;
use crate::error::{Error, Result};

/// Relative slack on tick spacing; covers 9-digit rounding of `t`.
const SPACING_TOLERANCE: f64 = 1e-6;

pub fn load_trace(path: &Path) -> Result<Vec<SensorFrame>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(BufReader::new(file), &path.display().to_string())
}

/// Parses and validates a trace from any reader. `name` labels errors.
pub fn read_trace<R: BufRead>(reader: R, name: &str) -> Result<Vec<SensorFrame>> {
    let mut frames: Vec<SensorFrame> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: SensorFrame = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: name.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        frame
            .check()
            .map_err(|m| Error::validation(format!("{name}: line {line_no}: {m}")))?;
        validate_against_previous(&frames, &frame)
            .map_err(|m| Error::validation(format!("{name}: line {line_no}: {m}")))?;
        frames.push(frame);
    }
    Ok(frames)
}

fn validate_against_previous(frames: &[SensorFrame], frame: &SensorFrame) -> Result<(), String> {
    let Some(first) = frames.first() else {
        return Ok(());
    };
    if frame.emg_batch.len() != first.emg_batch.len() {
        return Err(format!(
            "emg_batch length {} differs from first frame ({})",
            frame.emg_batch.len(),
            first.emg_batch.len()
        ));
    }
    let prev = frames.last().expect("nonempty");
    let step = frame.t - prev.t;
    if step <= 0.0 {
        return Err(format!("t not strictly increasing ({} after {})", frame.t, prev.t));
    }
    if frames.len() >= 2 {
        let period = frames[1].t - frames[0].t;
        if (step - period).abs() > SPACING_TOLERANCE * period.max(frame.t.abs()) {
            return Err(format!("t spacing {step} differs from tick period {period}"));
        }
    }
    Ok(())
}

pub fn write_trace<W: Write>(mut writer: W, frames: &[SensorFrame]) -> std::io::Result<()> {
    for f in frames {
        let line = to_canonical_json(f).map_err(std::io::Error::other)?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_trace(path: &Path, frames: &[SensorFrame]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(BufWriter::new(file), frames).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SkinTemps, Vec3};

    fn frame(t: f64, batch: usize) -> SensorFrame {
        SensorFrame {
            t,
            hand_pos: Vec3::new(0.1, 1.2, 0.3),
            palm_normal: Vec3::new(0.0, 0.0, 1.0),
            hand_openness: 0.9,
            gaze_origin: Vec3::new(0.0, 1.6, 0.0),
            gaze_dir: Vec3::new(0.0, 0.0, 1.0),
            eye_openness: 1.0,
            emg_batch: vec![0.01; batch],
            skin_temp: SkinTemps::default(),
        }
    }

    fn to_text(frames: &[SensorFrame]) -> String {
        let mut buf = Vec::new();
        write_trace(&mut buf, frames).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn three_lines_in_order() {
        let frames: Vec<_> = (0..3).map(|i| frame(i as f64 * 0.01, 20)).collect();
        let text = to_text(&frames);
        assert_eq!(text.lines().count(), 3);
        let back = read_trace(text.as_bytes(), "mem").unwrap();
        assert_eq!(back, frames);
    }

    #[test]
    fn empty_file_is_empty_trace() {
        assert!(read_trace("".as_bytes(), "mem").unwrap().is_empty());
    }

    #[test]
    fn batch_length_mismatch_rejected() {
        let frames = vec![frame(0.0, 20), frame(0.01, 21)];
        let err = read_trace(to_text(&frames).as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("line 2")), "{err}");
    }

    #[test]
    fn non_monotone_time_rejected() {
        let frames = vec![frame(0.0, 20), frame(0.01, 20), frame(0.005, 20)];
        let err = read_trace(to_text(&frames).as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("line 3")), "{err}");
        let uneven = vec![frame(0.0, 20), frame(0.01, 20), frame(0.03, 20)];
        assert!(read_trace(to_text(&uneven).as_bytes(), "mem").is_err());
    }

    #[test]
    fn malformed_line_names_line_number() {
        let mut text = to_text(&[frame(0.0, 20)]);
        text.push_str("{not json}\n");
        let err = read_trace(text.as_bytes(), "trace.jsonl").unwrap_err();
        match err {
            Error::Parse { line, ref path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "trace.jsonl");
            }
            other => panic!("unexpected {other}"),
        }
    }
}
