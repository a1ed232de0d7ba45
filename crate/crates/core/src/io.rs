//! Reading and writing eye sequences in the per-frame CSV format:
//!
//! ```text
//! id,eye,condition,t,pupil_rx,pupil_ry,iris_rx,iris_ry,pupil_cx,pupil_cy,iris_cx,iris_cy,valid
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Condition, Eye, EyeSequence, FrameGeometry};
use crate::series::CANONICAL_FPS;

pub const SEQUENCE_COLUMNS: [&str; 13] = [
    "id",
    "eye",
    "condition",
    "t",
    "pupil_rx",
    "pupil_ry",
    "iris_rx",
    "iris_ry",
    "pupil_cx",
    "pupil_cy",
    "iris_cx",
    "iris_cy",
    "valid",
];

pub fn load_sequences(path: impl AsRef<Path>) -> Result<Vec<EyeSequence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_sequences(file, path)
}

/// Parses sequences from any reader; `origin` is used in error messages.
pub fn read_sequences<R: Read>(reader: R, origin: &Path) -> Result<Vec<EyeSequence>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Empty(origin.display().to_string()));
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: origin.to_path_buf(),
                column: name.to_string(),
            })
    };
    let mut idx = [0usize; 13];
    for (slot, name) in idx.iter_mut().zip(SEQUENCE_COLUMNS) {
        *slot = column(name)?;
    }

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            let raw = field(k);
            let v: f64 = raw.parse().map_err(|_| {
                parse_err(line, format!("column `{}`: cannot parse `{raw}` as a number", SEQUENCE_COLUMNS[k]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column `{}` is not finite", SEQUENCE_COLUMNS[k])));
            }
            Ok(v)
        };
        let id = field(0).to_string();
        if id.is_empty() {
            return Err(parse_err(line, "empty id".into()));
        }
        let eye: Eye = field(1).parse().map_err(|e| parse_err(line, e))?;
        let condition: Condition = field(2).parse().map_err(|e| parse_err(line, e))?;
        let valid = match field(12) {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line, format!("column `valid`: expected 0 or 1, got `{other}`"))),
        };
        let frame = FrameGeometry {
            t: num(3)?,
            pupil_rx: num(4)?,
            pupil_ry: num(5)?,
            iris_rx: num(6)?,
            iris_ry: num(7)?,
            pupil_cx: num(8)?,
            pupil_cy: num(9)?,
            iris_cx: num(10)?,
            iris_cy: num(11)?,
            valid,
        };
        if !frame.is_consistent() {
            return Err(parse_err(line, "frame geometry violates radius/time constraints".into()));
        }
        rows.push(FrameRow {
            id,
            eye,
            condition,
            frame,
            line,
        });
    }
    assemble_sequences(rows, origin)
}

/// One frame tagged with its sequence key and source line.
pub(crate) struct FrameRow {
    pub id: String,
    pub eye: Eye,
    pub condition: Condition,
    pub frame: FrameGeometry,
    pub line: u64,
}

/// Groups frames into one sequence per `(id, eye)` in first-seen order,
/// sorting each by time and rejecting duplicated timestamps.
pub(crate) fn assemble_sequences(rows: Vec<FrameRow>, origin: &Path) -> Result<Vec<EyeSequence>> {
    let mut groups: BTreeMap<(String, Eye), (Condition, Vec<FrameGeometry>)> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rows {
        let key = (row.id, row.eye);
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            (row.condition, Vec::new())
        });
        if entry.0 != row.condition {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: row.line,
                message: format!(
                    "sequence {} {} mixes conditions {} and {}",
                    key.0, key.1, entry.0, row.condition
                ),
            });
        }
        entry.1.push(row.frame);
    }
    if groups.is_empty() {
        return Err(Error::Empty(origin.display().to_string()));
    }

    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let (condition, mut frames) = groups.remove(&key).expect("grouped key");
        frames.sort_by(|a, b| a.t.total_cmp(&b.t));
        if let Some(w) = frames.windows(2).find(|w| w[0].t == w[1].t) {
            return Err(Error::DuplicateRow {
                path: origin.to_path_buf(),
                id: key.0,
                eye: key.1.to_string(),
                t: w[0].t,
            });
        }
        let fps = infer_fps(&frames);
        out.push(EyeSequence {
            id: key.0,
            eye: key.1,
            condition,
            fps,
            frames,
        });
    }
    Ok(out)
}

/// Frame rate from the median frame spacing, snapped to 1/1000 fps so that
/// timestamps written with finite precision recover the nominal rate.
fn infer_fps(frames: &[FrameGeometry]) -> f64 {
    let mut gaps: Vec<f64> = frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    if gaps.is_empty() {
        return CANONICAL_FPS;
    }
    gaps.sort_by(f64::total_cmp);
    let median = gaps[gaps.len() / 2];
    ((1.0 / median) * 1000.0).round() / 1000.0
}

pub fn write_sequences<'a, W: Write>(
    writer: W,
    sequences: impl IntoIterator<Item = &'a EyeSequence>,
) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "{}", SEQUENCE_COLUMNS.join(","))?;
    for seq in sequences {
        for f in &seq.frames {
            writeln!(
                w,
                "{},{},{},{:.6},{},{},{},{},{},{},{},{},{}",
                seq.id,
                seq.eye,
                seq.condition,
                f.t,
                f.pupil_rx,
                f.pupil_ry,
                f.iris_rx,
                f.iris_ry,
                f.pupil_cx,
                f.pupil_cy,
                f.iris_cx,
                f.iris_cy,
                u8::from(f.valid)
            )?;
        }
    }
    w.flush()
}

pub fn save_sequences<'a>(
    path: impl AsRef<Path>,
    sequences: impl IntoIterator<Item = &'a EyeSequence>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_sequences(file, sequences).map_err(|e| Error::io(path, e))
}

/// Serialises `value` as pretty JSON followed by a newline.
pub fn save_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,eye,condition,t,pupil_rx,pupil_ry,iris_rx,iris_ry,pupil_cx,pupil_cy,iris_cx,iris_cy,valid\n";

    fn row(id: &str, eye: &str, t: f64) -> String {
        format!("{id},{eye},alcohol,{t:.6},12,12,30,30,64,64,64,64,1\n")
    }

    fn parse(text: &str) -> Result<Vec<EyeSequence>> {
        read_sequences(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn one_sequence_keeps_all_frames() {
        let mut text = HEADER.to_string();
        for i in (0..150).rev() {
            text += &row("a", "L", i as f64 / 15.0);
        }
        let seqs = parse(&text).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].frames.len(), 150);
        assert_eq!(seqs[0].fps, 15.0);
        assert!(seqs[0].frames.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(seqs[0].condition, Condition::Alcohol);
    }

    #[test]
    fn interleaved_ids_and_eyes_are_grouped() {
        let mut text = HEADER.to_string();
        for i in (0..10).rev() {
            for id in ["a", "b"] {
                for eye in ["L", "R"] {
                    text += &row(id, eye, i as f64 / 15.0);
                }
            }
        }
        let seqs = parse(&text).unwrap();
        assert_eq!(seqs.len(), 4);
        for s in &seqs {
            assert_eq!(s.frames.len(), 10);
            assert!(s.frames.windows(2).all(|w| w[0].t < w[1].t));
        }
    }

    #[test]
    fn missing_column_is_named() {
        let text = HEADER.replace("iris_rx,", "") + "a,L,control,0,1,1,1,1,1,1,1,1\n";
        match parse(&text).unwrap_err() {
            Error::MissingColumn { column, .. } => assert_eq!(column, "iris_rx"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn duplicate_rows_rejected() {
        let text = HEADER.to_string() + &row("a", "L", 0.0) + &row("a", "L", 0.0);
        assert!(matches!(parse(&text).unwrap_err(), Error::DuplicateRow { .. }));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(parse("").unwrap_err(), Error::Empty(_)));
        assert!(matches!(parse(HEADER).unwrap_err(), Error::Empty(_)));
    }

    #[test]
    fn unparsable_field_reports_line() {
        let text = HEADER.to_string() + &row("a", "L", 0.0) + "a,L,alcohol,0.1,x,12,30,30,64,64,64,64,1\n";
        match parse(&text).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("pupil_rx"));
            }
            e => panic!("unexpected {e}"),
        }
        let text = HEADER.to_string() + "a,L,alcohol,0.1,1,1,30,30,64,64,64,64,yes\n";
        assert!(matches!(parse(&text).unwrap_err(), Error::Parse { .. }));
    }

    #[test]
    fn missing_file() {
        let err = load_sequences("/nonexistent/frames.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn write_then_read() {
        let mut text = HEADER.to_string();
        for i in 0..5 {
            text += &row("x", "M", i as f64 / 15.0);
        }
        let seqs = parse(&text).unwrap();
        let mut buf = Vec::new();
        write_sequences(&mut buf, &seqs).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), seqs);
    }
}
