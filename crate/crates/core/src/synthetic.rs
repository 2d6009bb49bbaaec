//! Seeded toy datasets: the copy task, item-title/query pairs, and a bisection catalog.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::probe::{Catalog, Item};
use crate::training::PairCorpus;

fn symbols(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Random sequences of `symbols` symbols, target = source.
pub fn copy_task(pairs: usize, symbols_n: usize, min_len: usize, max_len: usize, seed: u64) -> PairCorpus {
    let words = symbols(symbols_n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = PairCorpus::new(format!("copy-task seed={seed}"));
    for _ in 0..pairs {
        let len = rng.gen_range(min_len..=max_len);
        let seq: Vec<String> = (0..len).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
        corpus.pairs.push((seq.clone(), seq));
    }
    corpus
}

/// `(title, query)` pairs where the query is an in-order subsequence of
/// 2..=3 title words. Titles have 4..=6 distinct words.
pub fn title_query_pairs(pairs: usize, symbols_n: usize, seed: u64) -> PairCorpus {
    let words = symbols(symbols_n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = PairCorpus::new(format!("title-query seed={seed}"));
    for _ in 0..pairs {
        let len = rng.gen_range(4..=6);
        let title: Vec<String> = words.choose_multiple(&mut rng, len).cloned().collect();
        let q_len = rng.gen_range(2..=3);
        let mut keep: Vec<usize> = (0..len).collect();
        keep.shuffle(&mut rng);
        keep.truncate(q_len);
        keep.sort_unstable();
        let query = keep.iter().map(|&i| title[i].clone()).collect();
        corpus.pairs.push((title, query));
    }
    corpus
}

/// `2^bits` items; attribute `a{b}` is bit `b` of the item index, so the
/// attributes bisect the catalog.
pub fn bisection_catalog(bits: u32) -> Catalog {
    let n = 1usize << bits;
    let items = (0..n)
        .map(|i| Item {
            id: format!("item{i}"),
            title: (0..bits)
                .map(|b| format!("{}{b}", if i >> b & 1 == 1 { "hi" } else { "lo" }))
                .collect(),
            attributes: (0..bits)
                .map(|b| {
                    let v = if i >> b & 1 == 1 { "yes" } else { "no" };
                    (format!("a{b}"), v.to_string())
                })
                .collect(),
        })
        .collect();
    Catalog::new(items).expect("generated ids are unique")
}
