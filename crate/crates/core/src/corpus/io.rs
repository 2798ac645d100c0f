//! Line-delimited JSON records for raw items and extracted questions.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use super::{CorpusError, Question, RawItem, RejectReason};

/// Reads one JSON object per line. Blank lines are skipped; ids must be unique.
pub fn read_raw_items<R: BufRead>(reader: R) -> Result<Vec<RawItem>, CorpusError> {
    let mut items = Vec::new();
    let mut ids = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: RawItem = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if !ids.insert(item.id.clone()) {
            return Err(CorpusError::DuplicateId(item.id));
        }
        items.push(item);
    }
    Ok(items)
}

pub fn read_questions<R: BufRead>(reader: R) -> Result<Vec<Question>, CorpusError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Writes accepted and rejected items interleaved back into input order.
/// Rejected rows keep their original text and carry a `rejected` reason.
pub fn write_extraction<W: Write>(
    mut out: W,
    input: &[RawItem],
    accepted: &[Question],
    rejected: &[(RawItem, RejectReason)],
) -> Result<(), CorpusError> {
    let mut by_id: HashMap<&str, Question> = accepted.iter().map(|q| (q.id.as_str(), q.clone())).collect();
    for (item, reason) in rejected {
        by_id.insert(
            item.id.as_str(),
            Question {
                id: item.id.clone(),
                domain: item.domain,
                text: item.text.clone(),
                metadata: item.metadata.clone(),
                rejected: Some(*reason),
            },
        );
    }
    for item in input {
        if let Some(q) = by_id.get(item.id.as_str()) {
            serde_json::to_writer(&mut out, q).map_err(|e| CorpusError::Format(e.to_string()))?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Two-column TSV: handle (with or without `@`) and display name.
pub fn read_display_names<R: BufRead>(reader: R) -> Result<HashMap<String, String>, CorpusError> {
    let mut map = HashMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (handle, name) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
            line: n + 1,
            message: "expected handle<TAB>display name".into(),
        })?;
        map.insert(handle.trim_start_matches('@').to_string(), name.trim().to_string());
    }
    Ok(map)
}
