//! Seeded synthetic corpora with planted effects, used for the shipped
//! example data and for end-to-end checks.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use intimacy_core::analysis::{
    classify_identity, IdentityCategory, IdentityLexicons, Lexicon, NameDatabase, NameListClassifier,
};
use intimacy_core::bws::{Judgment, Tuple4};
use intimacy_core::graph::MentionEvent;
use intimacy_core::stats::{derive_seed, rng, SeededRng};

use crate::rows::{AddressedQuestion, DomainQuestion, DyadQuestion, LabeledQuestion, UserQuestion};

pub const DOMAINS: [&str; 4] = ["reddit_post", "twitter", "book", "movie"];

const WORDS: &[&str] = &[
    "apple",
    "garden",
    "river",
    "window",
    "table",
    "summer",
    "winter",
    "music",
    "coffee",
    "travel",
    "friend",
    "school",
    "dinner",
    "movie",
    "secret",
    "family",
    "money",
    "story",
    "dream",
    "night",
    "morning",
    "city",
    "forest",
    "ocean",
    "mountain",
    "book",
    "letter",
    "phone",
    "car",
    "train",
    "house",
    "kitchen",
    "party",
    "job",
    "boss",
    "team",
    "game",
    "song",
    "dance",
    "paint",
    "photo",
    "gift",
    "childhood",
    "memory",
    "fear",
    "love",
    "regret",
    "hobby",
    "pet",
    "dog",
    "cat",
    "bird",
    "holiday",
    "birthday",
    "wedding",
    "breakfast",
    "lunch",
    "recipe",
    "weekend",
    "neighbor",
    "teacher",
    "doctor",
    "hospital",
    "church",
    "market",
    "shop",
    "bread",
    "cheese",
    "wine",
    "beer",
    "tea",
    "sugar",
    "salt",
    "rain",
    "snow",
    "sun",
    "moon",
    "star",
    "sky",
    "road",
    "bridge",
    "tower",
    "castle",
    "village",
    "island",
    "beach",
    "desert",
    "lake",
    "hill",
    "field",
    "flower",
    "tree",
    "leaf",
    "stone",
    "fire",
    "water",
    "air",
    "earth",
    "heart",
    "mind",
    "soul",
    "body",
    "hand",
    "face",
    "voice",
    "name",
    "word",
    "idea",
    "plan",
    "goal",
    "habit",
    "skill",
    "lesson",
    "mistake",
    "choice",
    "chance",
    "luck",
    "hope",
    "trust",
    "truth",
    "lie",
    "joke",
    "game",
    "puzzle",
    "riddle",
    "map",
    "key",
    "door",
    "wall",
    "roof",
    "floor",
    "chair",
    "bed",
    "lamp",
    "clock",
    "mirror",
    "picture",
    "shirt",
    "shoe",
    "hat",
    "coat",
    "bag",
    "box",
    "bottle",
    "cup",
    "plate",
    "spoon",
    "knife",
    "fork",
    "bike",
    "boat",
    "plane",
    "ticket",
    "passport",
    "hotel",
    "museum",
    "library",
    "park",
    "zoo",
    "farm",
    "factory",
    "office",
];

const OPENERS: &[&str] = &[
    "What is your",
    "Why is your",
    "How did your",
    "When was your",
    "Where is your",
    "Who gave you your",
    "Which is your",
    "Do you remember your",
    "Have you ever lost your",
    "Is this your",
];

fn gauss(r: &mut SeededRng) -> f64 {
    StandardNormal.sample(r)
}

fn words_without(lexicons: &[&Lexicon]) -> Vec<&'static str> {
    WORDS
        .iter()
        .copied()
        .filter(|w| lexicons.iter().all(|l| !l.matches(w)))
        .collect()
}

/// Texts whose score is a fixed linear function of word counts plus small noise.
pub fn labeled_corpus(n: usize, seed: u64) -> Vec<LabeledQuestion> {
    let mut r = rng(seed);
    let weights: HashMap<&str, f64> = WORDS.iter().map(|w| (*w, gauss(&mut r))).collect();
    (0..n)
        .map(|i| {
            let len = r.random_range(6..=12);
            let ws: Vec<&str> = (0..len).map(|_| *WORDS.choose(&mut r).expect("non-empty")).collect();
            let signal: f64 = ws.iter().map(|w| weights[w]).sum();
            LabeledQuestion {
                question_id: format!("L{i:05}"),
                text: format!("what {}?", ws.join(" ")),
                score: 0.2 * signal + 0.05 * gauss(&mut r),
            }
        })
        .collect()
}

/// Texts drawn from `topics` planted word distributions; the score is a
/// mixture of per-topic intimacy levels.
pub fn topic_corpus(n: usize, topics: usize, seed: u64) -> Vec<LabeledQuestion> {
    let mut r = rng(seed);
    let level: Vec<f64> = (0..topics).map(|_| r.random_range(-1.0..1.0)).collect();
    let words: Vec<Vec<String>> = (0..topics)
        .map(|k| (0..25).map(|j| format!("t{k}w{j}")).collect())
        .collect();
    (0..n)
        .map(|i| {
            let main = r.random_range(0..topics);
            let side = r.random_range(0..topics);
            let len = r.random_range(8..=14);
            let toks: Vec<&str> = (0..len)
                .map(|_| {
                    let k = if r.random_bool(0.8) { main } else { side };
                    words[k].choose(&mut r).expect("non-empty").as_str()
                })
                .collect();
            LabeledQuestion {
                question_id: format!("T{i:05}"),
                text: format!("{}?", toks.join(" ")),
                score: 0.8 * level[main] + 0.2 * level[side] + 0.1 * gauss(&mut r),
            }
        })
        .collect()
}

/// Questions in every domain; hedged ones are shifted by `hedge_shift` and
/// sworn ones by `swear_shift` on top of standard-normal noise.
pub fn marker_corpus(per_domain: usize, hedge_shift: f64, swear_shift: f64, seed: u64) -> Vec<DomainQuestion> {
    let hedges = Lexicon::hedges();
    let swears = Lexicon::swears();
    let filler = words_without(&[&hedges, &swears]);
    let hedge_list: Vec<&str> = hedges.entries().collect();
    let swear_list: Vec<&str> = ["damn", "hell", "shit", "fucking", "bloody", "crap"]
        .into_iter()
        .filter(|w| swears.matches(w))
        .collect();
    let mut r = rng(seed);
    let mut out = Vec::new();
    for (d, domain) in DOMAINS.iter().enumerate() {
        for i in 0..per_domain {
            let hedged = r.random_bool(0.35);
            let sworn = r.random_bool(0.2);
            let mut parts = vec![OPENERS.choose(&mut r).expect("non-empty").to_string()];
            if sworn {
                parts.push(swear_list.choose(&mut r).expect("non-empty").to_string());
            }
            for _ in 0..r.random_range(1..=3) {
                parts.push(filler.choose(&mut r).expect("non-empty").to_string());
            }
            if hedged {
                parts.push(format!("or {}", hedge_list.choose(&mut r).expect("non-empty")));
            }
            let score = gauss(&mut r)
                + 0.3 * d as f64
                + if hedged { hedge_shift } else { 0.0 }
                + if sworn { swear_shift } else { 0.0 };
            out.push(DomainQuestion {
                question_id: format!("M{d}{i:05}"),
                domain: domain.to_string(),
                text: format!("{}?", parts.join(" ")),
                score,
            });
        }
    }
    out
}

/// Planted dyad model: reference FF plus per-dyad shifts, author and
/// author:book intercept noise, residual noise.
#[derive(Debug, Clone, Copy)]
pub struct DyadEffects {
    pub intercept: f64,
    pub fm: f64,
    pub mf: f64,
    pub mm: f64,
    pub author_sd: f64,
    pub book_sd: f64,
    pub noise_sd: f64,
}

const FEMALE_NAMES: &[&str] = &[
    "Mary", "Jessica", "Sarah", "Emma", "Olivia", "Hannah", "Margaret", "Alice",
];
const MALE_NAMES: &[&str] = &[
    "James", "Robert", "David", "Thomas", "Peter", "George", "Henry", "Arthur",
];
const SURNAMES: &[&str] = &["Dalloway", "Darcy", "Bennet", "Crawley", "Ashford", "Whitlock"];

fn character(r: &mut SeededRng, female: bool) -> String {
    if r.random_bool(0.25) {
        let title = if female { "Mrs." } else { "Mr." };
        format!("{title} {}", SURNAMES.choose(r).expect("non-empty"))
    } else {
        let pool = if female { FEMALE_NAMES } else { MALE_NAMES };
        pool.choose(r).expect("non-empty").to_string()
    }
}

pub fn dyad_corpus(
    authors: usize,
    books_per_author: usize,
    per_book: usize,
    fx: DyadEffects,
    seed: u64,
) -> Vec<DyadQuestion> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for a in 0..authors {
        let author_effect = fx.author_sd * gauss(&mut r);
        for b in 0..books_per_author {
            let book_effect = fx.book_sd * gauss(&mut r);
            for q in 0..per_book {
                let (sf, af) = (r.random_bool(0.5), r.random_bool(0.5));
                let shift = match (sf, af) {
                    (true, true) => 0.0,
                    (true, false) => fx.fm,
                    (false, true) => fx.mf,
                    (false, false) => fx.mm,
                };
                let speaker = character(&mut r, sf);
                let addressee = character(&mut r, af);
                let opener = OPENERS.choose(&mut r).expect("non-empty");
                let noun = WORDS.choose(&mut r).expect("non-empty");
                let vocative = r.random_bool(0.5);
                let text = if vocative {
                    format!("{opener} {noun}, {addressee}?")
                } else {
                    format!("{opener} {noun}?")
                };
                out.push(DyadQuestion {
                    question_id: format!("D{a:03}{b:02}{q:03}"),
                    score: fx.intercept + shift + author_effect + book_effect + fx.noise_sd * gauss(&mut r),
                    text,
                    speaker,
                    addressee: if vocative { String::new() } else { addressee },
                    kind: "character".into(),
                    groups: format!("author{a}/book{b}"),
                    speaker_gender: String::new(),
                    addressee_gender: String::new(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct AnonymityEffects {
    /// Mean of the reference category (Other).
    pub intercept: f64,
    pub anonymous: f64,
    pub name_containing: f64,
    pub depersonalized: f64,
    pub subreddit_sd: f64,
    pub noise_sd: f64,
}

/// Male-author dyad coefficients (FF reference).
pub const TABLE_DYADS: DyadEffects = DyadEffects {
    intercept: 0.057,
    fm: -0.022,
    mf: -0.013,
    mm: -0.045,
    author_sd: 0.03,
    book_sd: 0.02,
    noise_sd: 0.2,
};

/// Username-category coefficients (Other reference).
pub const TABLE_ANONYMITY: AnonymityEffects = AnonymityEffects {
    intercept: -0.213,
    anonymous: 0.017,
    name_containing: 0.002,
    depersonalized: 0.001,
    subreddit_sd: 0.05,
    noise_sd: 0.02,
};

const SYLLABLES: &[&str] = &[
    "zor", "quib", "vex", "plo", "trax", "mun", "keth", "dra", "fiz", "yom", "grel", "wup",
];
const TAGS: &[&str] = &["Runs", "Cooks", "Reads", "Sails", "Draws", "Bakes", "Skates", "Codes"];
const OTHER_WORDS: &[&str] = &["cooldude", "fastcar", "bluesky", "redfox", "oldsoul", "nightowl"];

fn username(r: &mut SeededRng, cat: IdentityCategory) -> String {
    let syl = |n: usize, r: &mut SeededRng| {
        (0..n)
            .map(|_| *SYLLABLES.choose(r).expect("non-empty"))
            .collect::<String>()
    };
    match cat {
        IdentityCategory::Anonymous => match r.random_range(0..3) {
            0 => format!("throwaway_{}", syl(2, r)),
            1 => format!("anon{}", r.random_range(10..10_000)),
            _ => format!("anonymous_{}", syl(1, r)),
        },
        IdentityCategory::NameContaining => {
            let pool = if r.random_bool(0.5) { FEMALE_NAMES } else { MALE_NAMES };
            format!(
                "{}{}",
                pool.choose(r).expect("non-empty"),
                TAGS.choose(r).expect("non-empty")
            )
        }
        IdentityCategory::Depersonalized => syl(3, r),
        IdentityCategory::Other => match r.random_range(0..3) {
            0 => format!(
                "{}{}",
                OTHER_WORDS.choose(r).expect("non-empty"),
                r.random_range(1950..=2005)
            ),
            1 => format!("{}{}", syl(2, r), r.random_range(50..=99)),
            _ => format!("maga_{}", syl(1, r)),
        },
    }
}

pub fn anonymity_corpus(subreddits: usize, per_subreddit: usize, fx: AnonymityEffects, seed: u64) -> Vec<UserQuestion> {
    let names = NameDatabase::builtin();
    let lexicons = IdentityLexicons::default();
    let gender = NameListClassifier::new(names.clone());
    let mut r = rng(seed);
    let mut out = Vec::new();
    for s in 0..subreddits {
        let sub_effect = fx.subreddit_sd * gauss(&mut r);
        for q in 0..per_subreddit {
            let cat = IdentityCategory::ALL[r.random_range(0..4)];
            let user = loop {
                let u = username(&mut r, cat);
                if classify_identity(&u, &names, &lexicons, &gender) == cat {
                    break u;
                }
            };
            let shift = match cat {
                IdentityCategory::Anonymous => fx.anonymous,
                IdentityCategory::NameContaining => fx.name_containing,
                IdentityCategory::Depersonalized => fx.depersonalized,
                IdentityCategory::Other => 0.0,
            };
            out.push(UserQuestion {
                question_id: format!("A{s:03}{q:04}"),
                score: fx.intercept + shift + sub_effect + fx.noise_sd * gauss(&mut r),
                username: user,
                subreddit: format!("r/sub{s:03}"),
            });
        }
    }
    out
}

/// Mean z-intimacy planted per degree of separation (index = degree) and
/// for unreachable pairs.
pub const DISTANCE_PROFILE: [f64; 5] = [0.6, 0.1, -0.4, -0.2, 0.0];
pub const UNREACHABLE_LEVEL: f64 = 0.5;

/// A small-world mention graph with a detached community, plus questions
/// whose intimacy follows [`DISTANCE_PROFILE`]. Questions to verified or
/// high-follower recipients carry an inverted signal, so they must be
/// filtered out to recover the profile.
pub fn distance_corpus(nodes: usize, questions: usize, seed: u64) -> (Vec<MentionEvent>, Vec<AddressedQuestion>) {
    let mut r = rng(seed);
    let user = |i: usize| format!("u{i:05}");
    let main = nodes - nodes / 10;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for i in 0..main {
        link(i, (i + 1) % main, &mut adj);
        if r.random_bool(0.15) {
            let j = r.random_range(0..main);
            link(i, j, &mut adj);
        }
    }
    for i in main..nodes {
        let j = main + (i - main + 1) % (nodes - main);
        link(i, j, &mut adj);
    }
    let mut events = Vec::new();
    for (a, ns) in adj.iter().enumerate() {
        for &b in ns {
            events.push(MentionEvent {
                from: user(a),
                to: user(b),
                timestamp: Some(format!("{}", a * 7 + b)),
            });
        }
    }
    // One-way mentions never form edges.
    for _ in 0..nodes / 2 {
        let (a, b) = (r.random_range(0..nodes), r.random_range(0..nodes));
        if a != b && !adj[a].contains(&b) && !adj[b].contains(&a) {
            events.push(MentionEvent {
                from: user(a),
                to: user(b),
                timestamp: None,
            });
        }
    }
    events.shuffle(&mut r);

    let noise = Normal::new(0.0, 0.4).expect("valid sd");
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < questions {
        let asker = r.random_range(0..main);
        let dist = bfs(&adj, asker);
        let target = r.random_range(0..=DISTANCE_PROFILE.len());
        let candidates: Vec<usize> = if target == DISTANCE_PROFILE.len() {
            (main..nodes).collect()
        } else {
            (0..nodes)
                .filter(|&v| v != asker && dist[v] == Some(target + 1))
                .collect()
        };
        let Some(&recipient) = candidates.choose(&mut r) else {
            continue;
        };
        let level = DISTANCE_PROFILE.get(target).copied().unwrap_or(UNREACHABLE_LEVEL);
        let celebrity = r.random_bool(0.1);
        let verified = celebrity && r.random_bool(0.5);
        out.push(AddressedQuestion {
            question_id: format!("G{k:05}"),
            asker: user(asker),
            recipient: user(recipient),
            score: if celebrity { -level - 1.0 } else { level } + noise.sample(&mut r),
            recipient_followers: if celebrity && !verified {
                r.random_range(5_000..50_000)
            } else {
                r.random_range(0..5_000)
            },
            recipient_verified: verified,
        });
        k += 1;
    }
    (events, out)
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; adj.len()];
    d[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v].is_none() {
                d[v] = Some(d[u].expect("visited") + 1);
                q.push_back(v);
            }
        }
    }
    d
}

/// Best/worst picks under the Luce choice model with strengths
/// `exp(scale · truth)`: best is drawn in proportion to strength, then worst
/// from the remaining three in proportion to inverse strength.
pub fn simulate_judgments(
    truth: &BTreeMap<String, f64>,
    tuples: &[Tuple4],
    annotator: &str,
    scale: f64,
    seed: u64,
) -> Vec<(Tuple4, Judgment)> {
    tuples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut r = rng(derive_seed(seed, i as u64));
            let s: Vec<f64> = t.items.iter().map(|id| (scale * truth[id]).exp()).collect();
            let best = draw(&mut r, &s, None);
            let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
            let worst = draw(&mut r, &inv, Some(best));
            let j = Judgment {
                tuple_id: t.tuple_id.clone(),
                best: t.items[best].clone(),
                worst: t.items[worst].clone(),
                annotator_id: annotator.to_string(),
                timestamp: None,
            };
            (t.clone(), j)
        })
        .collect()
}

fn draw(r: &mut SeededRng, weights: &[f64], skip: Option<usize>) -> usize {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, w)| w)
        .sum();
    let mut u = r.random_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if u < w {
            return i;
        }
        u -= w;
    }
    (0..weights.len()).rev().find(|&i| Some(i) != skip).expect("four items")
}
