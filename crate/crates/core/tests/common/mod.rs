#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempora::{AnnotatedToken, Sentence};

pub fn sentence(words: &[String]) -> Sentence {
    Sentence::new(words.iter().map(|w| AnnotatedToken::new(w.as_str(), "X", "")).collect()).unwrap()
}

/// Documents of shared filler words; every sentence of a document of class
/// `c` ends in the token `marker{c}` when `with_marker(i)` holds for its index.
pub fn marker_corpus(
    n_classes: usize,
    per_class: usize,
    seed: u64,
    with_marker: impl Fn(usize) -> bool,
) -> (Vec<Vec<Sentence>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n_classes {
        for _ in 0..per_class {
            let marked = with_marker(docs.len());
            let sents = (0..4)
                .map(|_| {
                    let mut words: Vec<String> = (0..8).map(|_| format!("w{}", rng.random_range(0..50u32))).collect();
                    if marked {
                        words.push(format!("marker{c}"));
                    }
                    sentence(&words)
                })
                .collect();
            docs.push(sents);
            labels.push(c);
        }
    }
    (docs, labels)
}

pub fn class_labels(n: usize) -> Vec<String> {
    (0..n).map(|c| format!("class{c}")).collect()
}
