//! Line-delimited QuickDraw "simplified drawing" records:
//!
//! ```json
//! {"word":"house","countrycode":"US","recognized":true,"key_id":"1","drawing":[[[x0,x1,...],[y0,y1,...]],...]}
//! ```
//!
//! Only `word` and `drawing` are interpreted. Extra per-stroke arrays (the
//! timing channel of raw records) are ignored.

use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct RawDrawing {
    pub word: String,
    /// Per stroke: x coordinates and y coordinates.
    pub strokes: Vec<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedFile {
    pub drawings: Vec<RawDrawing>,
    /// Source line of each drawing (1-based).
    pub lines: Vec<usize>,
    pub errors: Vec<LineError>,
}

#[derive(Deserialize)]
struct Record {
    word: String,
    drawing: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    word: &'a str,
    countrycode: &'a str,
    recognized: bool,
    key_id: String,
    drawing: Vec<[&'a [f64]; 2]>,
}

/// Parses one record.
pub fn parse_drawing_line(line: &str) -> Result<RawDrawing, String> {
    let record: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let mut strokes = Vec::with_capacity(record.drawing.len());
    for (k, stroke) in record.drawing.into_iter().enumerate() {
        let mut arrays = stroke.into_iter();
        let (Some(xs), Some(ys)) = (arrays.next(), arrays.next()) else {
            return Err(format!("stroke {k} lacks x/y arrays"));
        };
        if xs.len() != ys.len() {
            return Err(format!(
                "stroke {k} has {} x values but {} y values",
                xs.len(),
                ys.len()
            ));
        }
        strokes.push((xs, ys));
    }
    Ok(RawDrawing {
        word: record.word,
        strokes,
    })
}

/// Reads every record; malformed lines are reported and skipped.
pub fn parse_drawing_file<R: BufRead>(reader: R) -> io::Result<ParsedFile> {
    let mut out = ParsedFile::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_drawing_line(&line) {
            Ok(d) => {
                out.drawings.push(d);
                out.lines.push(n + 1);
            }
            Err(reason) => out.errors.push(LineError { line: n + 1, reason }),
        }
    }
    Ok(out)
}

impl RawDrawing {
    pub fn point_count(&self) -> usize {
        self.strokes.iter().map(|(xs, _)| xs.len()).sum()
    }

    /// Serializes as one QuickDraw record line (no trailing newline).
    pub fn to_ndjson(&self, key_id: u64) -> String {
        let record = OutRecord {
            word: &self.word,
            countrycode: "ZZ",
            recognized: true,
            key_id: key_id.to_string(),
            drawing: self
                .strokes
                .iter()
                .map(|(xs, ys)| [xs.as_slice(), ys.as_slice()])
                .collect(),
        };
        serde_json::to_string(&record).expect("record serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        let parsed = parse_drawing_file("".as_bytes()).unwrap();
        assert!(parsed.drawings.is_empty() && parsed.errors.is_empty());
    }

    #[test]
    fn two_stroke_record() {
        let line = r#"{"word":"cat","countrycode":"US","drawing":[[[0,10,20],[5,5,9]],[[1,2],[3,4],[0,16]]]}"#;
        let parsed = parse_drawing_file(line.as_bytes()).unwrap();
        assert_eq!(parsed.drawings.len(), 1);
        let d = &parsed.drawings[0];
        assert_eq!(d.word, "cat");
        assert_eq!(d.strokes.len(), 2);
        assert_eq!(d.strokes[1], (vec![1.0, 2.0], vec![3.0, 4.0]));
        assert_eq!(d.point_count(), 5);
    }

    #[test]
    fn mismatched_lengths_reported_with_line_number() {
        let text = concat!(
            r#"{"word":"a","drawing":[[[0,1],[0,1]]]}"#,
            "\n\n",
            r#"{"word":"b","drawing":[[[0,1,2],[0,1]]]}"#,
            "\nnot json\n",
            r#"{"word":"c","drawing":[[[0,1],[0,1]]]}"#,
        );
        let parsed = parse_drawing_file(text.as_bytes()).unwrap();
        assert_eq!(parsed.drawings.len(), 2);
        assert_eq!(parsed.lines, vec![1, 5]);
        assert_eq!(parsed.errors.len(), 2);
        assert_eq!(parsed.errors[0].line, 3);
        assert!(parsed.errors[0].reason.contains("3 x values but 2 y values"));
        assert_eq!(parsed.errors[1].line, 4);
    }

    #[test]
    fn writes_parseable_records() {
        let d = RawDrawing {
            word: "house".into(),
            strokes: vec![(vec![0.0, 255.0], vec![3.0, 4.0])],
        };
        assert_eq!(parse_drawing_line(&d.to_ndjson(7)).unwrap(), d);
    }
}
