#![allow(dead_code)]

use std::collections::BTreeSet;

use misscall::corpus::{Corpus, TypeUsage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const METHODS: [&str; 6] = ["<init>", "add", "close", "open", "read", "setText"];

fn usage_from(i: usize, ty: usize, ctx: usize, mask: u8) -> TypeUsage {
    let calls: BTreeSet<String> = METHODS
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask & (1 << bit) != 0)
        .map(|(_, m)| m.to_string())
        .collect();
    TypeUsage::new(
        &format!("u{i}"),
        &format!("T{ty}"),
        &format!("c{ctx}()"),
        calls,
    )
}

/// Small corpora with few types and contexts so buckets collide often.
pub fn arb_corpus(max_len: usize) -> impl Strategy<Value = Corpus> {
    prop::collection::vec((0..2usize, 0..3usize, 0u8..64), 0..=max_len).prop_map(|rows| {
        let usages = rows
            .into_iter()
            .enumerate()
            .map(|(i, (ty, ctx, mask))| usage_from(i, ty, ctx, mask))
            .collect();
        Corpus::new(usages).unwrap()
    })
}

/// Seeded random corpus: up to `max_len` usages, calls drawn from six names.
/// Call-sets are biased towards a few shared shapes so that the almost-similar
/// relation is exercised.
pub fn random_corpus(seed: u64, max_len: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_len);
    let shapes: Vec<u8> = (0..4).map(|_| rng.gen_range(0u8..64)).collect();
    let usages = (0..n)
        .map(|i| {
            let mut mask = shapes[rng.gen_range(0..shapes.len())];
            if rng.gen_bool(0.4) {
                mask ^= 1 << rng.gen_range(0..6);
            }
            usage_from(i, rng.gen_range(0..2), rng.gen_range(0..3), mask)
        })
        .collect();
    Corpus::new(usages).unwrap()
}
