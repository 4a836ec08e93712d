use std::collections::HashMap;

use crate::error::{Error, Result};

/// Dense word index ordered by descending frequency, ties broken
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<(String, u64)>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// From `(word, count)` tallies; entries below `min_count` are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>, min_count: u64) -> Result<Self> {
        let mut words: Vec<(String, u64)> = counts.into_iter().filter(|(_, n)| *n >= min_count).collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        words.dedup_by(|a, b| a.0 == b.0);
        if words.is_empty() {
            return Err(Error::Config(format!("no word occurs at least {min_count} times")));
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            words,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, ix: u32) -> &str {
        &self.words[ix as usize].0
    }

    pub fn count(&self, ix: u32) -> u64 {
        self.words[ix as usize].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words.iter().map(|(w, n)| (w.as_str(), *n))
    }
}

/// Whitespace-token vocabulary of `lines`.
pub fn build_vocab<I, S>(lines: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for line in lines {
        for tok in line.as_ref().split_whitespace() {
            match counts.get_mut(tok) {
                Some(n) => *n += 1,
                None => {
                    counts.insert(tok.to_owned(), 1);
                }
            }
        }
    }
    Vocabulary::from_counts(counts, min_count)
}

/// Sentences as vocabulary indices, flattened. Out-of-vocabulary tokens are
/// dropped and counted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodedCorpus {
    pub tokens: Vec<u32>,
    /// Sentence `i` is `tokens[offsets[i]..offsets[i + 1]]`.
    pub offsets: Vec<usize>,
    pub oov_tokens: u64,
}

impl EncodedCorpus {
    pub fn encode<I, S>(lines: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = EncodedCorpus {
            offsets: vec![0],
            ..Default::default()
        };
        for line in lines {
            for tok in line.as_ref().split_whitespace() {
                match vocab.get(tok) {
                    Some(ix) => out.tokens.push(ix),
                    None => out.oov_tokens += 1,
                }
            }
            if out.tokens.len() > *out.offsets.last().unwrap() {
                out.offsets.push(out.tokens.len());
            }
        }
        out
    }

    pub fn sentences(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn sentence(&self, i: usize) -> &[u32] {
        &self.tokens[self.offsets[i]..self.offsets[i + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_count_filters() {
        let v = build_vocab(["a a b"], 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.get("b"), None);
        let all = build_vocab(["a a b", "c"], 1).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn empty_vocab_is_error() {
        assert!(matches!(build_vocab(["a b"], 5), Err(Error::Config(_))));
        assert!(build_vocab(Vec::<String>::new(), 1).is_err());
    }

    #[test]
    fn ordering_and_counts_match_tally() {
        let lines = ["the cat sat", "the dog sat on the mat", "a cat"];
        let v = build_vocab(lines, 1).unwrap();
        let mut tally: HashMap<&str, u64> = HashMap::new();
        for l in lines {
            for t in l.split(' ') {
                *tally.entry(t).or_default() += 1;
            }
        }
        assert_eq!(v.len(), tally.len());
        for (w, n) in v.iter() {
            assert_eq!(tally[w], n);
        }
        let order: Vec<&str> = v.iter().map(|(w, _)| w).collect();
        assert_eq!(order, ["the", "cat", "sat", "a", "dog", "mat", "on"]);
    }

    #[test]
    fn encode_skips_oov_and_empty_sentences() {
        let v = build_vocab(["a b a"], 2).unwrap();
        let e = EncodedCorpus::encode(["a b a", "b b", "a"], &v);
        assert_eq!(e.sentences(), 2);
        assert_eq!(e.sentence(0), &[0, 0]);
        assert_eq!(e.sentence(1), &[0]);
        assert_eq!(e.oov_tokens, 3);
    }
}
