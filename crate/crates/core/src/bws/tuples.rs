use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};

use super::{BwsError, ItemId, Tuple4};
use crate::stats::rng;

const ROUND_ATTEMPTS: usize = 200;

fn choose4(n: usize) -> u128 {
    let n = n as u128;
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

/// Randomized round-robin design. Each round shuffles the items and cuts them
/// into fours (padding a short last chunk with other items), so every item
/// lands in at least `tuples_per_item` tuples. A round that would repeat an
/// item set already used is redrawn.
pub fn generate_tuples(item_ids: &[ItemId], tuples_per_item: usize, seed: u64) -> Result<Vec<Tuple4>, BwsError> {
    let n = item_ids.len();
    let mut seen_ids = HashSet::new();
    for id in item_ids {
        if !seen_ids.insert(id) {
            return Err(BwsError::DuplicateItem(id.clone()));
        }
    }
    if n < 4 {
        return Err(BwsError::TooFewItems(n));
    }
    let per_round = n.div_ceil(4);
    if choose4(n) < (per_round * tuples_per_item) as u128 {
        return Err(BwsError::CannotSatisfy(tuples_per_item));
    }

    let mut r = rng(seed);
    let mut used: HashSet<[usize; 4]> = HashSet::new();
    let mut tuples = Vec::with_capacity(per_round * tuples_per_item);
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..tuples_per_item {
        let mut placed = false;
        for _ in 0..ROUND_ATTEMPTS {
            order.shuffle(&mut r);
            let mut round: Vec<[usize; 4]> = Vec::with_capacity(per_round);
            for chunk in order.chunks(4) {
                let mut t: Vec<usize> = chunk.to_vec();
                while t.len() < 4 {
                    let pick = *order.choose(&mut r).expect("n >= 4");
                    if !t.contains(&pick) {
                        t.push(pick);
                    }
                }
                round.push([t[0], t[1], t[2], t[3]]);
            }
            let key = |t: &[usize; 4]| {
                let mut k = *t;
                k.sort_unstable();
                k
            };
            let mut keys: HashSet<[usize; 4]> = HashSet::new();
            if round.iter().all(|t| {
                let k = key(t);
                !used.contains(&k) && keys.insert(k)
            }) {
                used.extend(keys);
                tuples.extend(round);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(BwsError::CannotSatisfy(tuples_per_item));
        }
    }

    Ok(tuples
        .into_iter()
        .enumerate()
        .map(|(k, t)| Tuple4 {
            tuple_id: format!("t{k:06}"),
            items: t.map(|i| item_ids[i].clone()),
        })
        .collect())
}
