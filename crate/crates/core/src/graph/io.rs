use std::io::{Read, Write};

use super::{DistanceBin, GraphError, MentionEvent, MutualGraph};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"MUTGRAPH";
const VERSION: u32 = 1;

/// Mention events from `from,to[,timestamp]` CSV. A header row whose first
/// field is `from` is skipped, as are self-mentions.
pub fn read_mention_events<R: Read>(r: R) -> Result<Vec<MentionEvent>, GraphError> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| GraphError::Parse {
            line,
            message: e.to_string(),
        })?;
        if i == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("from")) {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(GraphError::Parse {
                line,
                message: "expected from,to[,timestamp]".into(),
            });
        }
        if rec[0] == rec[1] {
            continue;
        }
        out.push(MentionEvent {
            from: rec[0].to_string(),
            to: rec[1].to_string(),
            timestamp: rec.get(2).filter(|t| !t.is_empty()).map(str::to_string),
        });
    }
    Ok(out)
}

/// Layout (little endian): magic, version u32, node count u32, then per node
/// its name (u32 length + UTF-8), then per node its degree u32 followed by
/// sorted neighbor ids u32.
pub fn write_graph<W: Write>(mut w: W, g: &MutualGraph) -> Result<(), GraphError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.n_nodes() as u32).to_le_bytes())?;
    for name in g.names() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for u in 0..g.n_nodes() as u32 {
        let ns = g.neighbors(u);
        w.write_all(&(ns.len() as u32).to_le_bytes())?;
        for &v in ns {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph<R: Read>(mut r: R) -> Result<MutualGraph, GraphError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GraphError::Format("not a graph file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(GraphError::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        names.push(String::from_utf8(buf).map_err(|e| GraphError::Format(e.to_string()))?);
    }
    let mut adj = Vec::with_capacity(n);
    for _ in 0..n {
        let deg = read_u32(&mut r)? as usize;
        let mut ns = Vec::with_capacity(deg);
        for _ in 0..deg {
            let v = read_u32(&mut r)?;
            if v as usize >= n {
                return Err(GraphError::Format(format!("neighbor id {v} out of range")));
            }
            ns.push(v);
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GraphError::Format("adjacency not sorted".into()));
        }
        adj.push(ns);
    }
    for (u, ns) in adj.iter().enumerate() {
        if ns
            .iter()
            .any(|&v| v as usize == u || adj[v as usize].binary_search(&(u as u32)).is_err())
        {
            return Err(GraphError::Format("adjacency not symmetric".into()));
        }
    }
    Ok(MutualGraph::from_parts(names, adj))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// CSV `degree,mean,ci_low,ci_high,n`.
pub fn write_distance_bins<T: Scalar, W: Write>(w: W, bins: &[DistanceBin<T>]) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["degree", "mean", "ci_low", "ci_high", "n"])?;
    for b in bins {
        wr.write_record([
            b.distance.to_string(),
            b.mean.value.to_string(),
            b.mean.ci_low.to_string(),
            b.mean.ci_high.to_string(),
            b.n.to_string(),
        ])?;
    }
    wr.flush()
}
