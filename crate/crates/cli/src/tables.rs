//! Enumerations printed by `wsurf table`.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use wsurf::cfrac::{hj_value, markov_triples, recognize_t_form};
use wsurf::{Chain, MarkovTriple, TForm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TRow {
    pub chain: Chain,
    pub fraction: String,
    pub form: TForm,
}

fn row(c: Chain) -> TRow {
    let f = hj_value(&c);
    TRow {
        fraction: format!("1/{}(1,{})", f.m(), f.q()),
        form: recognize_t_form(&f),
        chain: c,
    }
}

/// Chains of non-du-Val T-singularities with at most `max_len` entries, each
/// at most `max_entry`. Grown from [4], [3,3], [3,2,3], ... by the two moves
/// [b1..bk] -> [2,b1..bk+1] and [b1+1..bk,2]; both only lengthen the chain
/// and raise entries, so pruning on the bounds loses nothing.
pub fn t_chains(max_len: usize, max_entry: i64) -> Vec<TRow> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for d in 1..max_len.max(1) + 1 {
        let seed = if d == 1 {
            vec![4]
        } else {
            let mut s = vec![2; d];
            s[0] = 3;
            s[d - 1] = 3;
            s
        };
        queue.push_back(seed);
    }
    while let Some(c) = queue.pop_front() {
        if c.len() > max_len || c.iter().any(|&b| b > max_entry) || !seen.insert(c.clone()) {
            continue;
        }
        let mut left = vec![2];
        left.extend_from_slice(&c);
        *left.last_mut().expect("nonempty") += 1;
        let mut right = c.clone();
        right[0] += 1;
        right.push(2);
        queue.push_back(left);
        queue.push_back(right);
    }
    let mut rows: Vec<TRow> = seen
        .into_iter()
        .map(|c| row(Chain::new(c).expect("entries >= 2")))
        .collect();
    rows.sort_by(|a, b| {
        a.chain
            .len()
            .cmp(&b.chain.len())
            .then_with(|| a.chain.entries().cmp(b.chain.entries()))
    });
    rows
}

/// The same set by brute force over every chain within the bounds.
pub fn t_chains_exhaustive(max_len: usize, max_entry: i64) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    let mut cur: Vec<i64> = Vec::new();
    fn go(cur: &mut Vec<i64>, max_len: usize, max_entry: i64, out: &mut BTreeSet<Vec<i64>>) {
        if !cur.is_empty() {
            let f = hj_value(&Chain::new(cur.clone()).expect("entries >= 2"));
            if !matches!(recognize_t_form(&f), TForm::DuVal | TForm::NonT) {
                out.insert(cur.clone());
            }
        }
        if cur.len() == max_len {
            return;
        }
        for b in 2..=max_entry {
            cur.push(b);
            go(cur, max_len, max_entry, out);
            cur.pop();
        }
    }
    go(&mut cur, max_len, max_entry, &mut out);
    out
}

pub fn markov(bound: u64) -> Vec<MarkovTriple> {
    markov_triples(bound).into_iter().collect()
}
