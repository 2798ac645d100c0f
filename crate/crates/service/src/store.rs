use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use intimacy_core::bws::{self, Judgment, Tuple4};
use intimacy_core::stats::{derive_seed, rng};

use crate::ServiceError;

/// Tuples available for annotation plus the text of every item.
#[derive(Debug, Clone)]
pub struct TupleSet {
    pub id: String,
    pub tuples: Vec<Tuple4>,
    pub texts: HashMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// One `<tuple_set_id>.jsonl` journal per set lives here.
    pub journal_dir: PathBuf,
    pub seed: u64,
    pub instructions: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Entry {
    Session {
        session_id: String,
        annotator_id: String,
        order_seed: u64,
        created_at: String,
    },
    Judgment {
        session_id: String,
        tuple_id: String,
        best: String,
        worst: String,
        received_at: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SessionInfo {
    pub session_id: String,
    pub annotator_id: String,
    pub tuple_set_id: String,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ItemView {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextTuple {
    Pending {
        tuple_id: String,
        position: usize,
        total: usize,
        /// Items in display order.
        items: Vec<ItemView>,
        /// `items[k]` is stored item number `order[k]` of the tuple.
        order: [usize; 4],
    },
    Done {
        total: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JudgmentRequest {
    pub tuple_id: String,
    pub best: String,
    pub worst: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Progress {
    pub session_id: String,
    pub annotator_id: String,
    pub completed: usize,
    pub total: usize,
    pub done: bool,
}

struct Session {
    annotator_id: String,
    queue: Vec<usize>,
    cursor: usize,
}

struct SetState {
    set: TupleSet,
    by_id: HashMap<String, usize>,
    journal: File,
    sessions: HashMap<String, Session>,
    records: Vec<(usize, Judgment)>,
}

/// Session bookkeeping over append-only per-set journals. A write is
/// fsynced before the call returns, so anything acknowledged survives a
/// restart; reopening replays the journals.
pub struct AnnotationService {
    config: ServiceConfig,
    sets: HashMap<String, Mutex<SetState>>,
    session_set: RwLock<HashMap<String, String>>,
    next_session: AtomicU64,
}

fn now() -> String {
    let ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    ms.to_string()
}

fn queue_for(n: usize, order_seed: u64) -> Vec<usize> {
    let mut q: Vec<usize> = (0..n).collect();
    q.shuffle(&mut rng(order_seed));
    q
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Within-tuple display permutation, fixed per (session, tuple).
pub fn display_order(session_id: &str, tuple_id: &str) -> [usize; 4] {
    let mut order = [0, 1, 2, 3];
    order.shuffle(&mut rng(derive_seed(fnv(session_id), fnv(tuple_id))));
    order
}

impl AnnotationService {
    pub fn open(config: ServiceConfig, sets: Vec<TupleSet>) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(&config.journal_dir)?;
        let mut states = HashMap::new();
        let mut session_set = HashMap::new();
        let mut max_session = 0u64;
        for set in sets {
            if states.contains_key(&set.id) {
                return Err(ServiceError::Config(format!("duplicate tuple set {:?}", set.id)));
            }
            for t in &set.tuples {
                if let Some(missing) = t.items.iter().find(|i| !set.texts.contains_key(*i)) {
                    return Err(ServiceError::Config(format!(
                        "no text for item {missing:?} in set {:?}",
                        set.id
                    )));
                }
            }
            let path = config.journal_dir.join(format!("{}.jsonl", set.id));
            let by_id: HashMap<String, usize> = set
                .tuples
                .iter()
                .enumerate()
                .map(|(i, t)| (t.tuple_id.clone(), i))
                .collect();
            let (sessions, records) = replay(&path, &set, &by_id)?;
            let journal = OpenOptions::new().create(true).append(true).open(&path)?;
            let state = SetState {
                set,
                by_id,
                journal,
                sessions,
                records,
            };
            for sid in state.sessions.keys() {
                if let Some(n) = sid.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                    max_session = max_session.max(n);
                }
                session_set.insert(sid.clone(), state.set.id.clone());
            }
            states.insert(state.set.id.clone(), Mutex::new(state));
        }
        Ok(Self {
            config,
            sets: states,
            session_set: RwLock::new(session_set),
            next_session: AtomicU64::new(max_session + 1),
        })
    }

    pub fn instructions(&self) -> &str {
        &self.config.instructions
    }

    pub fn tuple_set_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sets.keys().cloned().collect();
        ids.sort();
        ids
    }

    fn set(&self, id: &str) -> Result<&Mutex<SetState>, ServiceError> {
        self.sets
            .get(id)
            .ok_or_else(|| ServiceError::UnknownTupleSet(id.to_string()))
    }

    fn set_of_session(&self, session_id: &str) -> Result<&Mutex<SetState>, ServiceError> {
        let set_id = self
            .session_set
            .read()
            .expect("lock")
            .get(session_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))?;
        self.set(&set_id)
    }

    pub fn create_session(&self, annotator_id: &str, tuple_set_id: &str) -> Result<SessionInfo, ServiceError> {
        if annotator_id.trim().is_empty() {
            return Err(ServiceError::BadRequest("annotator_id is empty".into()));
        }
        let mut st = self.set(tuple_set_id)?.lock().expect("lock");
        let n = self.next_session.fetch_add(1, Ordering::SeqCst);
        let session_id = format!("s{n:06}");
        let order_seed = derive_seed(self.config.seed, n);
        append(
            &mut st.journal,
            &Entry::Session {
                session_id: session_id.clone(),
                annotator_id: annotator_id.to_string(),
                order_seed,
                created_at: now(),
            },
        )?;
        let total = st.set.tuples.len();
        st.sessions.insert(
            session_id.clone(),
            Session {
                annotator_id: annotator_id.to_string(),
                queue: queue_for(total, order_seed),
                cursor: 0,
            },
        );
        self.session_set
            .write()
            .expect("lock")
            .insert(session_id.clone(), tuple_set_id.to_string());
        log::info!("session {session_id} for {annotator_id:?} on {tuple_set_id:?} ({total} tuples)");
        Ok(SessionInfo {
            session_id,
            annotator_id: annotator_id.to_string(),
            tuple_set_id: tuple_set_id.to_string(),
            total,
        })
    }

    pub fn next_tuple(&self, session_id: &str) -> Result<NextTuple, ServiceError> {
        let st = self.set_of_session(session_id)?.lock().expect("lock");
        let s = &st.sessions[session_id];
        let total = s.queue.len();
        if s.cursor >= total {
            return Ok(NextTuple::Done { total });
        }
        let t = &st.set.tuples[s.queue[s.cursor]];
        let order = display_order(session_id, &t.tuple_id);
        log::debug!("serve {session_id} {} order {order:?}", t.tuple_id);
        Ok(NextTuple::Pending {
            tuple_id: t.tuple_id.clone(),
            position: s.cursor,
            total,
            items: order
                .iter()
                .map(|&k| ItemView {
                    id: t.items[k].clone(),
                    text: st.set.texts[&t.items[k]].clone(),
                })
                .collect(),
            order,
        })
    }

    pub fn submit(&self, session_id: &str, req: &JudgmentRequest) -> Result<Progress, ServiceError> {
        let mut guard = self.set_of_session(session_id)?.lock().expect("lock");
        let st = &mut *guard;
        let s = st.sessions.get(session_id).expect("indexed session");
        let current = s.queue.get(s.cursor).map(|&i| &st.set.tuples[i]);
        let tuple = match current {
            Some(t) if t.tuple_id == req.tuple_id => t.clone(),
            _ => {
                return Err(ServiceError::OutOfOrder {
                    expected: current.map(|t| t.tuple_id.clone()),
                    got: req.tuple_id.clone(),
                })
            }
        };
        let judgment = Judgment {
            tuple_id: req.tuple_id.clone(),
            best: req.best.clone(),
            worst: req.worst.clone(),
            annotator_id: s.annotator_id.clone(),
            timestamp: Some(now()),
        };
        judgment
            .validate(&tuple)
            .map_err(|e| ServiceError::InvalidJudgment(e.to_string()))?;
        append(
            &mut st.journal,
            &Entry::Judgment {
                session_id: session_id.to_string(),
                tuple_id: judgment.tuple_id.clone(),
                best: judgment.best.clone(),
                worst: judgment.worst.clone(),
                received_at: judgment.timestamp.clone().unwrap_or_default(),
            },
        )?;
        let idx = st.by_id[&judgment.tuple_id];
        st.records.push((idx, judgment));
        let s = st.sessions.get_mut(session_id).expect("indexed session");
        s.cursor += 1;
        Ok(progress_of(session_id, s))
    }

    pub fn progress(&self, session_id: &str) -> Result<Progress, ServiceError> {
        let st = self.set_of_session(session_id)?.lock().expect("lock");
        Ok(progress_of(session_id, &st.sessions[session_id]))
    }

    /// Judgments of a set in journal order, in the scoring input format.
    pub fn export(&self, tuple_set_id: &str) -> Result<Vec<u8>, ServiceError> {
        let st = self.set(tuple_set_id)?.lock().expect("lock");
        let records: Vec<(Tuple4, Judgment)> = st
            .records
            .iter()
            .map(|(i, j)| (st.set.tuples[*i].clone(), j.clone()))
            .collect();
        let mut out = Vec::new();
        bws::io::write_judgments(&mut out, &records).map_err(|e| ServiceError::Io(std::io::Error::other(e)))?;
        Ok(out)
    }
}

fn progress_of(session_id: &str, s: &Session) -> Progress {
    Progress {
        session_id: session_id.to_string(),
        annotator_id: s.annotator_id.clone(),
        completed: s.cursor,
        total: s.queue.len(),
        done: s.cursor >= s.queue.len(),
    }
}

fn append(journal: &mut File, entry: &Entry) -> Result<(), ServiceError> {
    let mut line = serde_json::to_vec(entry).expect("serializable");
    line.push(b'\n');
    journal.write_all(&line)?;
    journal.sync_data()?;
    Ok(())
}

type Replayed = (HashMap<String, Session>, Vec<(usize, Judgment)>);

/// Rebuilds sessions and records. A torn final line (crash mid-append) is
/// ignored; damage anywhere else is an error.
fn replay(path: &Path, set: &TupleSet, by_id: &HashMap<String, usize>) -> Result<Replayed, ServiceError> {
    let mut sessions: HashMap<String, Session> = HashMap::new();
    let mut records = Vec::new();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((sessions, records)),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<&str> = text.lines().collect();
    let unterminated = !text.is_empty() && !text.ends_with('\n');
    let last = lines.len().saturating_sub(1);
    let mut torn = false;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(_) if i == last && unterminated => {
                log::warn!("{}: ignoring torn final line", path.display());
                torn = true;
                break;
            }
            Err(e) => return Err(ServiceError::Journal(format!("{}:{}: {e}", path.display(), i + 1))),
        };
        let bad = |msg: String| ServiceError::Journal(format!("{}:{}: {msg}", path.display(), i + 1));
        match entry {
            Entry::Session {
                session_id,
                annotator_id,
                order_seed,
                ..
            } => {
                let queue = queue_for(set.tuples.len(), order_seed);
                sessions.insert(
                    session_id,
                    Session {
                        annotator_id,
                        queue,
                        cursor: 0,
                    },
                );
            }
            Entry::Judgment {
                session_id,
                tuple_id,
                best,
                worst,
                received_at,
            } => {
                let s = sessions
                    .get_mut(&session_id)
                    .ok_or_else(|| bad(format!("unknown session {session_id}")))?;
                let idx = *by_id
                    .get(&tuple_id)
                    .ok_or_else(|| bad(format!("unknown tuple {tuple_id}")))?;
                if s.queue.get(s.cursor) != Some(&idx) {
                    return Err(bad(format!("judgment for {tuple_id} out of session order")));
                }
                s.cursor += 1;
                let j = Judgment {
                    tuple_id,
                    best,
                    worst,
                    annotator_id: s.annotator_id.clone(),
                    timestamp: Some(received_at),
                };
                records.push((idx, j));
            }
        }
    }
    if torn {
        // Drop the torn tail so the next append starts on a fresh line.
        let keep = text.rfind('\n').map_or(0, |p| p + 1);
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(keep as u64)?;
        f.sync_data()?;
    } else if unterminated {
        let mut f = OpenOptions::new().append(true).open(path)?;
        f.write_all(b"\n")?;
        f.sync_data()?;
    }
    Ok((sessions, records))
}
