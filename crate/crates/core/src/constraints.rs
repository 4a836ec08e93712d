//! Synonym and translation pairs mined from the lexicon.
//!
//! Any two distinct lexicalizations of one concept form a pair: same-language
//! pairs are synonyms, cross-language pairs are translations. Pairs are
//! stored once, canonically ordered on `(lang, word)`, and de-duplicated
//! across concepts.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Monolingual,
    Bilingual,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Monolingual => "monolingual",
            Kind::Bilingual => "bilingual",
        })
    }
}

/// Canonical pair: `(lang_a, word_a) < (lang_b, word_b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintPair {
    pub lang_a: String,
    pub word_a: String,
    pub lang_b: String,
    pub word_b: String,
}

impl ConstraintPair {
    /// `None` when both sides are the same word in the same language.
    pub fn new(word_a: &str, lang_a: &str, word_b: &str, lang_b: &str) -> Option<Self> {
        let a = (lang_a, word_a);
        let b = (lang_b, word_b);
        let (lo, hi) = match a.cmp(&b) {
            std::cmp::Ordering::Equal => return None,
            std::cmp::Ordering::Less => (a, b),
            std::cmp::Ordering::Greater => (b, a),
        };
        Some(ConstraintPair {
            lang_a: lo.0.to_owned(),
            word_a: lo.1.to_owned(),
            lang_b: hi.0.to_owned(),
            word_b: hi.1.to_owned(),
        })
    }

    pub fn kind(&self) -> Kind {
        if self.lang_a == self.lang_b {
            Kind::Monolingual
        } else {
            Kind::Bilingual
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    languages: Vec<String>,
    pairs: BTreeSet<ConstraintPair>,
    // (lang, word) -> [(lang, word)]
    index: HashMap<(String, String), Vec<(String, String)>>,
}

impl ConstraintSet {
    pub fn new(languages: &[String]) -> Self {
        ConstraintSet {
            languages: languages.to_vec(),
            ..Default::default()
        }
    }

    pub fn from_pairs(languages: &[String], pairs: impl IntoIterator<Item = ConstraintPair>) -> Self {
        let mut cs = ConstraintSet::new(languages);
        for p in pairs {
            cs.insert(p);
        }
        cs
    }

    pub fn insert(&mut self, p: ConstraintPair) -> bool {
        for l in [&p.lang_a, &p.lang_b] {
            if !self.languages.contains(l) {
                self.languages.push(l.clone());
            }
        }
        if self.pairs.contains(&p) {
            return false;
        }
        self.index
            .entry((p.lang_a.clone(), p.word_a.clone()))
            .or_default()
            .push((p.lang_b.clone(), p.word_b.clone()));
        self.index
            .entry((p.lang_b.clone(), p.word_b.clone()))
            .or_default()
            .push((p.lang_a.clone(), p.word_a.clone()));
        self.pairs.insert(p)
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ConstraintPair> + '_ {
        self.pairs.iter()
    }

    pub fn count(&self, kind: Kind) -> usize {
        self.pairs.iter().filter(|p| p.kind() == kind).count()
    }

    pub fn bilingual_only(&self) -> ConstraintSet {
        ConstraintSet::from_pairs(
            &self.languages,
            self.pairs.iter().filter(|p| p.kind() == Kind::Bilingual).cloned(),
        )
    }

    /// M(w): every `(word, lang)` constrained with `word` in `lang`, both
    /// languages, sorted.
    pub fn constraints_for(&self, word: &str, lang: &str) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .index
            .get(&(lang.to_owned(), word.to_owned()))
            .map(|v| v.iter().map(|(l, w)| (w.clone(), l.clone())).collect())
            .unwrap_or_default();
        out.sort();
        out
    }

    /// Bilingual pairs projected to `(from word, to word)`, sorted, unique.
    pub fn translation_dictionary(&self, from: &str, to: &str) -> Result<Vec<(String, String)>> {
        for l in [from, to] {
            if !self.languages.iter().any(|x| x == l) {
                return Err(Error::Validation(format!("unknown language {l}")));
            }
        }
        if from == to {
            return Err(Error::Validation(format!(
                "a translation dictionary needs two languages, got {from} twice"
            )));
        }
        let dict: BTreeSet<(String, String)> = self
            .pairs
            .iter()
            .filter_map(|p| {
                if p.lang_a == from && p.lang_b == to {
                    Some((p.word_a.clone(), p.word_b.clone()))
                } else if p.lang_a == to && p.lang_b == from {
                    Some((p.word_b.clone(), p.word_a.clone()))
                } else {
                    None
                }
            })
            .collect();
        Ok(dict.into_iter().collect())
    }

    /// `word_a<TAB>lang_a<TAB>word_b<TAB>lang_b<TAB>kind` per pair.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.pairs {
            writeln!(out, "{}\t{}\t{}\t{}\t{}", p.word_a, p.lang_a, p.word_b, p.lang_b, p.kind())?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut cs = ConstraintSet::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(Error::parse(path, n + 1, "expected 5 tab-separated fields"));
            }
            let p = ConstraintPair::new(f[0], f[1], f[2], f[3])
                .ok_or_else(|| Error::parse(path, n + 1, "pair of a word with itself"))?;
            let kind = match f[4] {
                "monolingual" => Kind::Monolingual,
                "bilingual" => Kind::Bilingual,
                other => return Err(Error::parse(path, n + 1, format!("unknown kind {other:?}"))),
            };
            if kind != p.kind() {
                return Err(Error::parse(path, n + 1, format!("kind {kind} does not match the languages")));
            }
            cs.insert(p);
        }
        Ok(cs)
    }
}

/// All synonym and translation pairs of `lex`.
pub fn mine_constraints(lex: &Lexicon) -> ConstraintSet {
    let mut cs = ConstraintSet::new(lex.languages());
    let mut members: Vec<(&str, &str)> = Vec::new();
    for c in 0..lex.concept_count() {
        members.clear();
        for (li, lang) in lex.languages().iter().enumerate() {
            members.extend(lex.words_of(c, li).map(|w| (lang.as_str(), w)));
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (la, wa) = members[i];
                let (lb, wb) = members[j];
                if let Some(p) = ConstraintPair::new(wa, la, wb, lb) {
                    cs.insert(p);
                }
            }
        }
    }
    cs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{GraphBuilder, KnowledgeGraph};

    fn lex_of(entries: &[(&str, &str, &str)]) -> (KnowledgeGraph, Lexicon) {
        let mut b = GraphBuilder::default();
        for (c, _, _) in entries {
            b.add_concept(c).unwrap();
        }
        let g = b.build();
        let mut lex = Lexicon::new(&g, &["en", "es"]).unwrap();
        for (c, l, w) in entries {
            lex.insert(&g, c, l, w).unwrap();
        }
        (g, lex)
    }

    fn toy() -> Lexicon {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let g = KnowledgeGraph::load(dir.join("toy_graph.tsv")).unwrap();
        Lexicon::load(dir.join("toy_lexicon.tsv"), &g, &["en", "es"]).unwrap()
    }

    /// Every distinct (lang, word) item pair that shares some concept.
    fn brute_force(lex: &Lexicon) -> BTreeSet<ConstraintPair> {
        let mut items = BTreeSet::new();
        for c in 0..lex.concept_count() {
            for (li, l) in lex.languages().iter().enumerate() {
                for w in lex.words_of(c, li) {
                    items.insert((l.clone(), w.to_owned()));
                }
            }
        }
        let items: Vec<_> = items.into_iter().collect();
        let in_concept = |c: usize, (l, w): &(String, String)| {
            let li = lex.language_index(l).unwrap();
            lex.words_of(c, li).any(|x| x == w)
        };
        let mut out = BTreeSet::new();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if (0..lex.concept_count()).any(|c| in_concept(c, &items[i]) && in_concept(c, &items[j])) {
                    out.insert(ConstraintPair::new(&items[i].1, &items[i].0, &items[j].1, &items[j].0).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn one_word_each_gives_one_bilingual_pair() {
        let (_, lex) = lex_of(&[("c", "en", "x"), ("c", "es", "y")]);
        let cs = mine_constraints(&lex);
        assert_eq!(cs.len(), 1);
        let p = cs.iter().next().unwrap();
        assert_eq!(p.kind(), Kind::Bilingual);
        assert_eq!((p.word_a.as_str(), p.word_b.as_str()), ("x", "y"));
    }

    #[test]
    fn synonyms_give_monolingual_pair() {
        let (_, lex) = lex_of(&[("c", "en", "x1"), ("c", "en", "x2")]);
        let cs = mine_constraints(&lex);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.count(Kind::Monolingual), 1);
        assert!(cs.translation_dictionary("en", "es").unwrap().is_empty());
    }

    #[test]
    fn toy_counts_match_brute_force() {
        let lex = toy();
        let cs = mine_constraints(&lex);
        let oracle = brute_force(&lex);
        assert_eq!(cs.iter().cloned().collect::<BTreeSet<_>>(), oracle);
        // feline{feline,felid|felino} 3, lion 1, cat 1, dog{dog|perro,can} 3
        assert_eq!(cs.len(), 8);
        assert_eq!(cs.count(Kind::Monolingual), 2);
        let dict = cs.translation_dictionary("en", "es").unwrap();
        assert_eq!(dict.len(), cs.count(Kind::Bilingual));
        assert_eq!(dict.len(), cs.translation_dictionary("es", "en").unwrap().len());
    }

    #[test]
    fn polysemous_word_unions_synsets() {
        let (_, lex) = lex_of(&[
            ("bank1", "en", "bank"),
            ("bank1", "es", "banco"),
            ("bank2", "en", "bank"),
            ("bank2", "en", "shore"),
            ("bank2", "es", "orilla"),
        ]);
        let cs = mine_constraints(&lex);
        let got = cs.constraints_for("bank", "en");
        let want: Vec<(String, String)> = [("banco", "es"), ("orilla", "es"), ("shore", "en")]
            .iter()
            .map(|(w, l)| (w.to_string(), l.to_string()))
            .collect();
        assert_eq!(got, want);
        assert!(cs.constraints_for("nope", "en").is_empty());
        // brute-force neighbor union
        let oracle: BTreeSet<(String, String)> = brute_force(&lex)
            .into_iter()
            .filter_map(|p| {
                if (p.lang_a.as_str(), p.word_a.as_str()) == ("en", "bank") {
                    Some((p.word_b, p.lang_b))
                } else if (p.lang_b.as_str(), p.word_b.as_str()) == ("en", "bank") {
                    Some((p.word_a, p.lang_a))
                } else {
                    None
                }
            })
            .collect();
        assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), oracle);
    }

    #[test]
    fn dictionary_errors_and_singleton() {
        let (_, lex) = lex_of(&[("c", "en", "x"), ("c", "es", "y")]);
        let cs = mine_constraints(&lex);
        assert_eq!(
            cs.translation_dictionary("es", "en").unwrap(),
            vec![("y".to_string(), "x".to_string())]
        );
        assert!(matches!(cs.translation_dictionary("en", "fr"), Err(Error::Validation(_))));
    }

    #[test]
    fn file_round_trip() {
        let cs = mine_constraints(&toy());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        cs.write_tsv(&mut f).unwrap();
        let back = ConstraintSet::load(f.path()).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), cs.iter().collect::<Vec<_>>());
    }

    #[test]
    fn canonical_pair_rules() {
        assert!(ConstraintPair::new("x", "en", "x", "en").is_none());
        let p = ConstraintPair::new("y", "es", "x", "en").unwrap();
        assert_eq!(p, ConstraintPair::new("x", "en", "y", "es").unwrap());
        assert_eq!(p.lang_a, "en");
        // same surface form across languages is a valid translation pair
        assert_eq!(
            ConstraintPair::new("panthera", "en", "panthera", "es").unwrap().kind(),
            Kind::Bilingual
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mining_ignores_concept_order(
                entries in proptest::collection::vec((0u8..5, 0u8..2, 0u8..6), 1..25)
            ) {
                let as_strs: Vec<(String, &str, String)> = entries
                    .iter()
                    .map(|(c, l, w)| (format!("c{c}"), ["en", "es"][*l as usize], format!("w{w}")))
                    .collect();
                let build = |order: &[usize]| {
                    let mut b = GraphBuilder::default();
                    for &i in order {
                        b.add_concept(&as_strs[i].0).unwrap();
                    }
                    let g = b.build();
                    let mut lex = Lexicon::new(&g, &["en", "es"]).unwrap();
                    for &i in order {
                        let (c, l, w) = &as_strs[i];
                        lex.insert(&g, c, l, w).unwrap();
                    }
                    mine_constraints(&lex).iter().cloned().collect::<Vec<_>>()
                };
                let fwd: Vec<usize> = (0..as_strs.len()).collect();
                let rev: Vec<usize> = fwd.iter().rev().copied().collect();
                let a = build(&fwd);
                prop_assert_eq!(&a, &build(&rev));
                for p in &a {
                    prop_assert!((&p.lang_a, &p.word_a) < (&p.lang_b, &p.word_b));
                }
            }
        }
    }
}
