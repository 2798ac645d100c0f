//! CSV formats for tuples, judgments and scores.
//!
//! * tuples: `tuple_id,item_1,item_2,item_3,item_4`
//! * judgments: `tuple_id,item_1,item_2,item_3,item_4,best,worst,annotator_id,timestamp`
//! * scores: `item_id,score`

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{BwsError, IntimacyScore, Judgment, Tuple4};
use crate::scalar::Scalar;

pub const TUPLE_HEADER: [&str; 5] = ["tuple_id", "item_1", "item_2", "item_3", "item_4"];
pub const JUDGMENT_HEADER: [&str; 9] = [
    "tuple_id",
    "item_1",
    "item_2",
    "item_3",
    "item_4",
    "best",
    "worst",
    "annotator_id",
    "timestamp",
];

#[derive(Debug, Serialize, Deserialize)]
struct TupleRow {
    tuple_id: String,
    item_1: String,
    item_2: String,
    item_3: String,
    item_4: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct JudgmentRow {
    tuple_id: String,
    item_1: String,
    item_2: String,
    item_3: String,
    item_4: String,
    best: String,
    worst: String,
    annotator_id: String,
    #[serde(default)]
    timestamp: Option<String>,
}

fn csv_err(e: csv::Error) -> BwsError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    BwsError::Parse {
        line,
        message: e.to_string(),
    }
}

fn io_err(e: csv::Error) -> BwsError {
    BwsError::Io(std::io::Error::other(e))
}

pub fn write_tuples<W: Write>(out: W, tuples: &[Tuple4]) -> Result<(), BwsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TUPLE_HEADER).map_err(io_err)?;
    for t in tuples {
        let [a, b, c, d] = &t.items;
        w.write_record([t.tuple_id.as_str(), a, b, c, d]).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tuples<R: Read>(input: R) -> Result<Vec<Tuple4>, BwsError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize::<TupleRow>() {
        let row = row.map_err(csv_err)?;
        out.push(Tuple4::new(
            row.tuple_id,
            [row.item_1, row.item_2, row.item_3, row.item_4],
        )?);
    }
    Ok(out)
}

/// Writes judgments together with the items of the tuple they refer to.
pub fn write_judgments<W: Write>(out: W, records: &[(Tuple4, Judgment)]) -> Result<(), BwsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(JUDGMENT_HEADER).map_err(io_err)?;
    for (t, j) in records {
        let [a, b, c, d] = &t.items;
        w.write_record([
            t.tuple_id.as_str(),
            a,
            b,
            c,
            d,
            &j.best,
            &j.worst,
            &j.annotator_id,
            j.timestamp.as_deref().unwrap_or(""),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and validates judgment rows; the first invalid row aborts with its line number.
pub fn read_judgments<R: Read>(input: R) -> Result<Vec<(Tuple4, Judgment)>, BwsError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (k, row) in r.deserialize::<JudgmentRow>().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = k + 2;
        let wrap = |e: BwsError| BwsError::Parse {
            line,
            message: e.to_string(),
        };
        let tuple =
            Tuple4::new(row.tuple_id.clone(), [row.item_1, row.item_2, row.item_3, row.item_4]).map_err(wrap)?;
        let judgment = Judgment {
            tuple_id: row.tuple_id,
            best: row.best,
            worst: row.worst,
            annotator_id: row.annotator_id,
            timestamp: row.timestamp.filter(|t| !t.is_empty()),
        };
        judgment.validate(&tuple).map_err(wrap)?;
        out.push((tuple, judgment));
    }
    Ok(out)
}

pub fn write_scores<W: Write, T: Scalar>(out: W, scores: &IntimacyScore<T>) -> Result<(), BwsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item_id", "score"]).map_err(io_err)?;
    for (id, s) in &scores.scores {
        w.write_record([id.as_str(), &s.to_string()]).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judgments_round_trip() {
        let t = Tuple4::new("t1", ["a", "b", "c", "d"].map(String::from)).unwrap();
        let j = Judgment {
            tuple_id: "t1".into(),
            best: "c".into(),
            worst: "a".into(),
            annotator_id: "ann".into(),
            timestamp: None,
        };
        let mut buf = Vec::new();
        write_judgments(&mut buf, &[(t.clone(), j.clone())]).unwrap();
        let back = read_judgments(buf.as_slice()).unwrap();
        assert_eq!(back, vec![(t, j)]);
    }

    #[test]
    fn invalid_row_names_line() {
        let csv = "tuple_id,item_1,item_2,item_3,item_4,best,worst,annotator_id,timestamp\n\
                   t1,a,b,c,d,a,b,x,\n\
                   t2,a,b,c,d,a,a,x,\n";
        match read_judgments(csv.as_bytes()) {
            Err(BwsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tuples_round_trip() {
        let t = vec![Tuple4::new("t0", ["w", "x", "y", "z"].map(String::from)).unwrap()];
        let mut buf = Vec::new();
        write_tuples(&mut buf, &t).unwrap();
        assert_eq!(read_tuples(buf.as_slice()).unwrap(), t);
    }
}
