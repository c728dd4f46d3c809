//! Synthetic two-class corpora for fast, deterministic experiments.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledCorpus;

const CLASS_WORDS: usize = 40;
const NEUTRAL_WORDS: usize = 20;
const TRAIN_FRACTION: f64 = 0.8;

fn word(prefix: &str, i: usize) -> String {
    format!("{prefix}{i:02}")
}

fn split(examples: Vec<(u8, String)>) -> (LabeledCorpus, LabeledCorpus) {
    let n_train = ((examples.len() as f64) * TRAIN_FRACTION).round() as usize;
    let test = examples[n_train..].to_vec();
    let train = examples[..n_train].to_vec();
    (
        LabeledCorpus {
            examples: train,
            split: "train".into(),
        },
        LabeledCorpus {
            examples: test,
            split: "test".into(),
        },
    )
}

/// Corpus where the two classes draw from disjoint word sets, so a
/// bag-of-words linear rule separates them exactly. Labels alternate, giving
/// a balanced 80/20 split.
pub fn separable_corpus(n: usize, sentence_len: usize, seed: u64) -> (LabeledCorpus, LabeledCorpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let examples = (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let prefix = if label == 1 { "pos" } else { "neg" };
            let words: Vec<String> = (0..sentence_len)
                .map(|_| word(prefix, rng.gen_range(0..CLASS_WORDS)))
                .collect();
            (label, words.join(" "))
        })
        .collect();
    split(examples)
}

/// Corpus with overlapping class vocabularies: each word comes from the
/// label's word set with probability `1 - noise`, from the opposite set with
/// probability `noise * 0.5`, and from a shared neutral set otherwise. With
/// noise well above zero, accuracy stays below ceiling and depends on how much
/// evidence the model can integrate.
pub fn noisy_corpus(
    n: usize,
    sentence_len: usize,
    noise: f64,
    seed: u64,
) -> (LabeledCorpus, LabeledCorpus) {
    assert!((0.0..1.0).contains(&noise));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let examples = (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let own = if label == 1 { "pos" } else { "neg" };
            let other = if label == 1 { "neg" } else { "pos" };
            let words: Vec<String> = (0..sentence_len)
                .map(|_| {
                    let u: f64 = rng.gen();
                    if u < 1.0 - noise {
                        word(own, rng.gen_range(0..CLASS_WORDS))
                    } else if u < 1.0 - noise * 0.5 {
                        word(other, rng.gen_range(0..CLASS_WORDS))
                    } else {
                        word("mid", rng.gen_range(0..NEUTRAL_WORDS))
                    }
                })
                .collect();
            (label, words.join(" "))
        })
        .collect();
    split(examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_classes_use_disjoint_words() {
        let (train, test) = separable_corpus(100, 8, 1);
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
        for corpus in [&train, &test] {
            for (label, text) in &corpus.examples {
                let prefix = if *label == 1 { "pos" } else { "neg" };
                for w in text.split(' ') {
                    assert!(w.starts_with(prefix), "label {label} contains {w}");
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let (a, _) = separable_corpus(50, 6, 7);
        let (b, _) = separable_corpus(50, 6, 7);
        assert_eq!(a.examples, b.examples);
        let (c, _) = noisy_corpus(50, 6, 0.3, 7);
        let (d, _) = noisy_corpus(50, 6, 0.3, 7);
        assert_eq!(c.examples, d.examples);
    }

    #[test]
    fn noisy_corpus_mixes_vocabularies() {
        let (train, _) = noisy_corpus(200, 10, 0.4, 2);
        let pos_sentences_with_neg = train
            .examples
            .iter()
            .filter(|(l, t)| *l == 1 && t.split(' ').any(|w| w.starts_with("neg")))
            .count();
        assert!(pos_sentences_with_neg > 0);
    }

    #[test]
    fn labels_balanced() {
        let (train, test) = separable_corpus(100, 4, 3);
        let ones: usize = train.examples.iter().filter(|(l, _)| *l == 1).count();
        assert_eq!(ones, 40);
        let ones: usize = test.examples.iter().filter(|(l, _)| *l == 1).count();
        assert_eq!(ones, 10);
    }
}
