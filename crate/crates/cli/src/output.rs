//! CSV artifacts. Column schemas:
//!
//! | file          | columns                                                   |
//! |---------------|-----------------------------------------------------------|
//! | trace         | `t, x1, y1, …, xN, yN, x{N+1}, y{N+1}, V` (intruder last) |
//! | map           | `x, y, class, t_star` (`t_star` empty unless captured)    |
//! | boundary      | `polyline, index, x, y, closed`                           |
//! | sweep summary | `setting, label, capture, breach, timeout, error, max_t_star, polylines, status` |
//!
//! Numbers are written with 12 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use simulcap::dynamics::OutcomeClass;
use simulcap::dynamics::TraceSample;
use simulcap::experiments::{CaptureMap, CellOutcome, Polyline, SweepEntry};
use simulcap::Point;

use crate::error::CliError;

/// Formats `v` rounded to 12 significant digits, in the shortest form that reads back as that value.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("exponent format parses");
    format!("{rounded}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::data(path, format!("{other:?}")),
    }
}

fn write_rows<I>(path: &Path, header: Vec<String>, rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv_writer(path)?;
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn trace_header(n_defenders: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for k in 1..=n_defenders + 1 {
        h.push(format!("x{k}"));
        h.push(format!("y{k}"));
    }
    h.push("V".into());
    h
}

pub fn write_trace(path: &Path, samples: &[TraceSample]) -> Result<(), CliError> {
    let n = samples.first().map_or(0, |s| s.defenders.len());
    let rows = samples.iter().map(|s| {
        let mut row = Vec::with_capacity(2 * n + 4);
        row.push(fmt_num(s.time));
        for p in s.defenders.iter().chain(std::iter::once(&s.intruder)) {
            row.push(fmt_num(p.x));
            row.push(fmt_num(p.y));
        }
        row.push(fmt_num(s.lyapunov));
        row
    });
    write_rows(path, trace_header(n), rows)
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

fn parse_field(path: &Path, line: u64, column: &str, raw: &str) -> Result<f64, CliError> {
    raw.trim().parse().map_err(|_| {
        CliError::data(
            path,
            format!("line {line}, column `{column}`: `{raw}` is not a number"),
        )
    })
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace(path: &Path) -> Result<Vec<TraceSample>, CliError> {
    let mut r = open_reader(path)?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 6 || !header.len().is_multiple_of(2) {
        return Err(CliError::data(
            path,
            "trace header must be `t, x1, y1, ..., V` with at least two agents",
        ));
    }
    let n = (header.len() - 4) / 2;
    if header != trace_header(n) {
        return Err(CliError::data(
            path,
            format!(
                "unexpected trace header, expected `{}`",
                trace_header(n).join(",")
            ),
        ));
    }
    let mut samples = Vec::new();
    for (k, record) in r.records().enumerate() {
        let line = k as u64 + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != header.len() {
            return Err(CliError::data(
                path,
                format!(
                    "line {line}: {} fields, expected {}",
                    record.len(),
                    header.len()
                ),
            ));
        }
        let values = record
            .iter()
            .zip(&header)
            .map(|(raw, col)| parse_field(path, line, col, raw))
            .collect::<Result<Vec<f64>, _>>()?;
        let agent = |a: usize| Point::new(values[1 + 2 * a], values[2 + 2 * a]);
        samples.push(TraceSample {
            time: values[0],
            defenders: (0..n).map(agent).collect(),
            intruder: agent(n),
            lyapunov: values[values.len() - 1],
        });
    }
    if samples.is_empty() {
        return Err(CliError::data(path, "trace has no samples"));
    }
    if samples
        .windows(2)
        .any(|w| w[1].time.partial_cmp(&w[0].time) != Some(std::cmp::Ordering::Greater))
    {
        return Err(CliError::data(
            path,
            "trace times must be strictly increasing",
        ));
    }
    Ok(samples)
}

pub fn write_map(path: &Path, map: &CaptureMap) -> Result<(), CliError> {
    let g = &map.grid;
    let rows = map.outcomes.iter().enumerate().map(|(idx, o)| {
        let (i, j) = g.coords(idx);
        vec![
            fmt_num(g.x(i)),
            fmt_num(g.y(j)),
            o.label().to_string(),
            o.capture_time().map(fmt_num).unwrap_or_default(),
        ]
    });
    write_rows(
        path,
        ["x", "y", "class", "t_star"].map(String::from).to_vec(),
        rows,
    )
}

/// One row of a map CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub point: Point,
    pub class: String,
    pub t_star: Option<f64>,
}

pub fn read_map(path: &Path) -> Result<Vec<MapRow>, CliError> {
    let mut r = open_reader(path)?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["x", "y", "class", "t_star"] {
        return Err(CliError::data(
            path,
            "unexpected map header, expected `x,y,class,t_star`",
        ));
    }
    let mut rows = Vec::new();
    for (k, record) in r.records().enumerate() {
        let line = k as u64 + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != 4 {
            return Err(CliError::data(
                path,
                format!("line {line}: expected 4 fields"),
            ));
        }
        let class = record[2].to_string();
        if !["capture", "breach", "timeout", "error"].contains(&class.as_str()) {
            return Err(CliError::data(
                path,
                format!("line {line}: unknown class `{class}`"),
            ));
        }
        let t_star = match record[3].trim() {
            "" => None,
            raw => Some(parse_field(path, line, "t_star", raw)?),
        };
        rows.push(MapRow {
            point: Point::new(
                parse_field(path, line, "x", &record[0])?,
                parse_field(path, line, "y", &record[1])?,
            ),
            class,
            t_star,
        });
    }
    Ok(rows)
}

pub fn write_boundary(path: &Path, polylines: &[Polyline]) -> Result<(), CliError> {
    let rows = polylines.iter().enumerate().flat_map(|(k, p)| {
        p.points.iter().enumerate().map(move |(idx, q)| {
            vec![
                k.to_string(),
                idx.to_string(),
                fmt_num(q.x),
                fmt_num(q.y),
                p.closed.to_string(),
            ]
        })
    });
    write_rows(
        path,
        ["polyline", "index", "x", "y", "closed"]
            .map(String::from)
            .to_vec(),
        rows,
    )
}

pub fn read_boundary(path: &Path) -> Result<Vec<Polyline>, CliError> {
    let mut r = open_reader(path)?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["polyline", "index", "x", "y", "closed"] {
        return Err(CliError::data(path, "unexpected boundary header"));
    }
    let mut out: Vec<Polyline> = Vec::new();
    for (k, record) in r.records().enumerate() {
        let line = k as u64 + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != 5 {
            return Err(CliError::data(
                path,
                format!("line {line}: expected 5 fields"),
            ));
        }
        let id: usize = record[0]
            .parse()
            .map_err(|_| CliError::data(path, format!("line {line}: bad polyline id")))?;
        let closed: bool = record[4].parse().map_err(|_| {
            CliError::data(path, format!("line {line}: `closed` must be true or false"))
        })?;
        let p = Point::new(
            parse_field(path, line, "x", &record[2])?,
            parse_field(path, line, "y", &record[3])?,
        );
        if id == out.len() {
            out.push(Polyline {
                points: Vec::new(),
                closed,
            });
        } else if id + 1 != out.len() {
            return Err(CliError::data(
                path,
                format!("line {line}: polylines must be contiguous"),
            ));
        }
        out[id].points.push(p);
    }
    Ok(out)
}

pub fn write_sweep_summary(path: &Path, entries: &[SweepEntry]) -> Result<(), CliError> {
    let rows = entries.iter().enumerate().map(|(k, e)| {
        let mut row = vec![k.to_string(), e.label.clone()];
        match &e.result {
            Ok(out) => {
                let m = &out.map;
                let errors = m
                    .outcomes
                    .iter()
                    .filter(|o| matches!(o, CellOutcome::Error { .. }))
                    .count();
                row.extend([
                    m.count(OutcomeClass::Capture).to_string(),
                    m.count(OutcomeClass::Breach).to_string(),
                    m.count(OutcomeClass::Timeout).to_string(),
                    errors.to_string(),
                    m.max_capture_time().map(fmt_num).unwrap_or_default(),
                    out.boundary.len().to_string(),
                    "ok".into(),
                ]);
            }
            Err(err) => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(format!("error: {err}"));
            }
        }
        row
    });
    write_rows(
        path,
        [
            "setting",
            "label",
            "capture",
            "breach",
            "timeout",
            "error",
            "max_t_star",
            "polylines",
            "status",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    )
}

/// Writes `contents` to `path`, naming the file on failure.
pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use simulcap::experiments::GridSpec;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(48.412_291_827_592_71), "48.4122918276");
        assert_eq!(fmt_num(0.001), "0.001");
        assert_eq!(fmt_num(-15.0), "-15");
        assert_eq!(fmt_num(1e-20), "0.00000000000000000001");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let samples = vec![
            TraceSample {
                time: 0.0,
                defenders: vec![Point::new(1.0, 2.0), Point::new(-3.5, 0.25)],
                intruder: Point::new(0.5, 0.5),
                lyapunov: 12.5,
            },
            TraceSample {
                time: 0.01,
                defenders: vec![Point::new(1.0, 1.9), Point::new(-3.4, 0.25)],
                intruder: Point::new(0.5, 0.49),
                lyapunov: 12.25,
            },
        ];
        write_trace(&path, &samples).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,x1,y1,x2,y2,x3,y3,V\n"));
        assert_eq!(read_trace(&path).unwrap(), samples);
    }

    #[test]
    fn malformed_trace_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,x1,y1,x2,y2,V\n0,1,2,3,oops,5\n").unwrap();
        let err = read_trace(&path).unwrap_err();
        assert!(err.to_string().contains("bad.csv"), "{err}");
        assert!(err.to_string().contains("oops"), "{err}");
        let missing = dir.path().join("absent.csv");
        assert!(matches!(read_trace(&missing), Err(CliError::Io { .. })));
    }

    #[test]
    fn map_and_boundary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::square(1.0, 2);
        let map = CaptureMap {
            grid,
            outcomes: vec![
                CellOutcome::Capture { time: 3.25 },
                CellOutcome::Breach { time: 1.0 },
                CellOutcome::Timeout { time: 200.0 },
                CellOutcome::Capture { time: 1.0 / 3.0 },
            ],
        };
        let path = dir.path().join("map.csv");
        write_map(&path, &map).unwrap();
        let rows = read_map(&path).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].point, Point::new(1.0, -1.0));
        assert_eq!(rows[1].class, "breach");
        assert_eq!(rows[1].t_star, None);
        assert_eq!(rows[3].t_star, Some(0.333333333333));

        let lines = vec![
            Polyline {
                points: vec![Point::new(0.0, 0.5), Point::new(0.5, 0.0)],
                closed: false,
            },
            Polyline {
                points: vec![
                    Point::new(1.0, 0.0),
                    Point::new(0.0, 1.0),
                    Point::new(-1.0, 0.0),
                ],
                closed: true,
            },
        ];
        let path = dir.path().join("boundary.csv");
        write_boundary(&path, &lines).unwrap();
        assert_eq!(read_boundary(&path).unwrap(), lines);
    }
}
