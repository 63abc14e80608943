//! Per-frame results files.
//!
//! Native lines are `idx,status[,x1,y1,...,y4]` with `status` one of `init`,
//! `ok`, `fail` or `skip`; coordinates appear only on `ok` lines. The
//! compatibility layout has one line per frame: `1` for an initialisation,
//! `2` for a failure, `0` for a skipped frame, or the eight coordinates.

use super::protocol::{FrameStatus, SequenceResult};
use crate::dataset::format_coords;
use crate::error::{Error, Result};
use crate::geometry::RotBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Record {
    Init,
    Ok(RotBox),
    Fail,
    Skip,
}

pub fn records_of(result: &SequenceResult) -> Vec<Record> {
    result
        .frames
        .iter()
        .zip(&result.outputs)
        .map(|(f, out)| match (f, out) {
            (FrameStatus::Init, _) => Record::Init,
            (FrameStatus::Tracked { .. }, Some(b)) => Record::Ok(*b),
            (FrameStatus::Tracked { .. }, None) => Record::Skip,
            (FrameStatus::Failure, _) => Record::Fail,
            (FrameStatus::Skipped, _) => Record::Skip,
        })
        .collect()
}

pub fn write_records(records: &[Record], vot_compat: bool) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        let line = match (r, vot_compat) {
            (Record::Init, false) => format!("{i},init"),
            (Record::Ok(b), false) => format!("{i},ok,{}", format_coords(&b.flat())),
            (Record::Fail, false) => format!("{i},fail"),
            (Record::Skip, false) => format!("{i},skip"),
            (Record::Init, true) => "1".into(),
            (Record::Ok(b), true) => format_coords(&b.flat()),
            (Record::Fail, true) => "2".into(),
            (Record::Skip, true) => "0".into(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn coords(fields: &[&str], line: usize) -> Result<RotBox> {
    let v: Vec<f64> = fields
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(format!("results line {line}: {e}")))?;
    RotBox::from_flat(&v).map_err(|e| Error::Format(format!("results line {line}: {e}")))
}

/// Parses either layout; the native one is recognised by its `idx,status` prefix.
pub fn parse_records(text: &str) -> Result<Vec<Record>> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let native = lines
        .first()
        .is_some_and(|l| l.split(',').nth(1).is_some_and(|s| s.trim() == "init"));
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').map(str::trim).collect();
            if native {
                let idx: usize = f[0]
                    .parse()
                    .map_err(|_| Error::Format(format!("results line {}: bad index", i + 1)))?;
                if idx != i {
                    return Err(Error::Format(format!(
                        "results line {}: expected frame {i}, found {idx}",
                        i + 1
                    )));
                }
                match (f.get(1).copied(), f.len()) {
                    (Some("init"), 2) => Ok(Record::Init),
                    (Some("fail"), 2) => Ok(Record::Fail),
                    (Some("skip"), 2) => Ok(Record::Skip),
                    (Some("ok"), 10) => Ok(Record::Ok(coords(&f[2..], i + 1)?)),
                    _ => Err(Error::Format(format!("results line {}: `{l}`", i + 1))),
                }
            } else {
                match (f.as_slice(), f.len()) {
                    (["1"], _) => Ok(Record::Init),
                    (["2"], _) => Ok(Record::Fail),
                    (["0"], _) => Ok(Record::Skip),
                    (_, 8) => Ok(Record::Ok(coords(&f, i + 1)?)),
                    _ => Err(Error::Format(format!("results line {}: `{l}`", i + 1))),
                }
            }
        })
        .collect()
}

/// Splits records into the status skeleton and boxes expected by
/// [`SequenceResult::from_outputs`].
pub fn to_statuses(records: &[Record]) -> (Vec<FrameStatus>, Vec<Option<RotBox>>) {
    records
        .iter()
        .map(|r| match r {
            Record::Init => (FrameStatus::Init, None),
            Record::Ok(b) => (
                FrameStatus::Tracked {
                    overlap: 0.0,
                    in_burn_in: false,
                },
                Some(*b),
            ),
            Record::Fail => (FrameStatus::Failure, None),
            Record::Skip => (FrameStatus::Skipped, None),
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AABox;

    fn sample() -> Vec<Record> {
        let b = AABox::new(3.25, 4.0, 2.0, 6.0).unwrap().to_rotbox();
        vec![
            Record::Init,
            Record::Ok(b),
            Record::Fail,
            Record::Skip,
            Record::Init,
        ]
    }

    #[test]
    fn native_round_trip() {
        let text = write_records(&sample(), false);
        assert!(text.starts_with("0,init\n1,ok,2.250000,1.000000,"));
        assert_eq!(parse_records(&text).unwrap(), sample());
    }

    #[test]
    fn compat_round_trip() {
        let text = write_records(&sample(), true);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1");
        assert_eq!(lines[2], "2");
        assert_eq!(lines[3], "0");
        assert_eq!(parse_records(&text).unwrap(), sample());
    }

    #[test]
    fn rotated_boxes_survive_rounding() {
        let b = RotBox::from_center(20.3, 11.7, 9.123_456_7, 4.987_654_3, 0.3137).unwrap();
        let text = write_records(&[Record::Init, Record::Ok(b)], false);
        let Record::Ok(back) = parse_records(&text).unwrap()[1] else {
            panic!("expected a box")
        };
        for (p, q) in back.corners.iter().zip(&b.corners) {
            assert!((p.x - q.x).abs() < 1e-6 && (p.y - q.y).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_records("0,init\n2,ok").is_err());
        assert!(parse_records("0,init\n1,ok,1,2,3").is_err());
        assert!(parse_records("1\nfoo").is_err());
    }
}
