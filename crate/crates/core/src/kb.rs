//! Knowledge-base graph and per-language lexicalizations.
//!
//! Concepts are interned to dense `usize` indices in order of first
//! appearance. Relations are undirected and untyped.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Opaque concept identifier, e.g. a synset offset-POS key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("empty concept id".into()));
        }
        Ok(ConceptId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Undirected concept graph with symmetric, sorted adjacency lists.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    ids: Vec<ConceptId>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl KnowledgeGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn concept(&self, ix: usize) -> &ConceptId {
        &self.ids[ix]
    }

    pub fn concepts(&self) -> &[ConceptId] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// N(c) for the concept at `ix`.
    pub fn neighbors(&self, ix: usize) -> &[u32] {
        &self.adjacency[ix]
    }

    /// |N(c)|.
    pub fn degree(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .map(|ix| self.adjacency[ix].len())
            .ok_or_else(|| Error::lookup("concept", id))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&(b as u32)).is_ok()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| {
            ns.iter()
                .map(|&b| b as usize)
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    /// Edge file form, one `a<TAB>b` line per edge.
    pub fn write_edges<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (a, b) in self.edges() {
            writeln!(out, "{}\t{}", self.ids[a], self.ids[b])?;
        }
        Ok(())
    }

    /// Load an edge list: `concept_a<TAB>concept_b` per line, `#` comments
    /// and blank lines ignored, duplicates (in either direction) collapsed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut builder = GraphBuilder::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(
                    path,
                    n + 1,
                    format!("expected 2 tab-separated fields, got {:?}", line),
                ));
            }
            builder
                .add_edge(fields[0], fields[1])
                .map_err(|e| match e {
                    Error::Validation(msg) => {
                        Error::Validation(format!("{}:{}: {}", path.display(), n + 1, msg))
                    }
                    other => other,
                })?;
        }
        Ok(builder.build())
    }
}

/// Incremental graph construction; also the only way to add isolated
/// concepts.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<ConceptId>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(u32, u32)>,
}

impl GraphBuilder {
    pub fn add_concept(&mut self, id: &str) -> Result<usize> {
        if let Some(&ix) = self.index.get(id) {
            return Ok(ix);
        }
        let cid = ConceptId::new(id)?;
        let ix = self.ids.len();
        self.ids.push(cid);
        self.index.insert(id.to_owned(), ix);
        Ok(ix)
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        if a == b {
            return Err(Error::Validation(format!("self-loop on concept {a}")));
        }
        let a = self.add_concept(a)? as u32;
        let b = self.add_concept(b)? as u32;
        self.edges.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn build(self) -> KnowledgeGraph {
        let mut adjacency = vec![Vec::new(); self.ids.len()];
        for &(a, b) in &self.edges {
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for ns in &mut adjacency {
            ns.sort_unstable();
        }
        KnowledgeGraph {
            ids: self.ids,
            index: self.index,
            adjacency,
            edge_count: self.edges.len(),
        }
    }
}

/// Per-language lexicalizations D_l(c) over a companion graph.
///
/// Words are interned once across languages; each D_l(c) is a sorted list of
/// word ids (sorted by surface form), possibly empty.
#[derive(Debug, Clone)]
pub struct Lexicon {
    languages: Vec<String>,
    words: Vec<String>,
    word_index: HashMap<String, u32>,
    // entries[concept * languages.len() + lang]
    entries: Vec<Vec<u32>>,
}

impl Lexicon {
    /// Empty lexicon for `graph` over one or two language codes.
    pub fn new(graph: &KnowledgeGraph, languages: &[&str]) -> Result<Self> {
        if languages.is_empty() || languages.len() > 2 {
            return Err(Error::Config(format!(
                "a lexicon covers one or two languages, got {}",
                languages.len()
            )));
        }
        if languages.len() == 2 && languages[0] == languages[1] {
            return Err(Error::Config(format!(
                "duplicate language code {}",
                languages[0]
            )));
        }
        if languages.iter().any(|l| l.is_empty()) {
            return Err(Error::Config("empty language code".into()));
        }
        Ok(Lexicon {
            languages: languages.iter().map(|l| (*l).to_owned()).collect(),
            words: Vec::new(),
            word_index: HashMap::new(),
            entries: vec![Vec::new(); graph.len() * languages.len()],
        })
    }

    /// Language codes used in a lexicon file, sorted.
    pub fn languages_in(path: impl AsRef<Path>) -> Result<Vec<String>> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut langs = std::collections::BTreeSet::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split('\t').nth(1) {
                Some(l) => {
                    langs.insert(l.to_owned());
                }
                None => return Err(Error::parse(path, n + 1, "missing language field")),
            }
        }
        Ok(langs.into_iter().collect())
    }

    /// Load `concept<TAB>lang<TAB>word` lines. Words are lowercased; rows in
    /// other languages than `languages` are skipped.
    pub fn load(path: impl AsRef<Path>, graph: &KnowledgeGraph, languages: &[&str]) -> Result<Self> {
        let path = path.as_ref();
        let mut lex = Lexicon::new(graph, languages)?;
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    n + 1,
                    format!("expected 3 tab-separated fields, got {:?}", line),
                ));
            }
            let (concept, lang, word) = (fields[0], fields[1], fields[2].trim());
            if word.is_empty() {
                return Err(Error::parse(path, n + 1, "empty word"));
            }
            if lex.language_index(lang).is_none() {
                continue;
            }
            lex.insert(graph, concept, lang, word).map_err(|e| match e {
                Error::Validation(msg) => {
                    Error::Validation(format!("{}:{}: {}", path.display(), n + 1, msg))
                }
                other => other,
            })?;
        }
        Ok(lex)
    }

    /// Add `word` (lowercased) to D_lang(concept).
    pub fn insert(&mut self, graph: &KnowledgeGraph, concept: &str, lang: &str, word: &str) -> Result<()> {
        let c = graph
            .index_of(concept)
            .ok_or_else(|| Error::Validation(format!("concept {concept} is not in the graph")))?;
        let l = self
            .language_index(lang)
            .ok_or_else(|| Error::Validation(format!("unknown language code {lang}")))?;
        let word = word.to_lowercase();
        if word.is_empty() {
            return Err(Error::Validation("empty word".into()));
        }
        let id = match self.word_index.get(&word) {
            Some(&id) => id,
            None => {
                let id = self.words.len() as u32;
                self.words.push(word.clone());
                self.word_index.insert(word, id);
                id
            }
        };
        let slot = c * self.languages.len() + l;
        let words = &self.words;
        let entry = &mut self.entries[slot];
        if let Err(pos) = entry.binary_search_by(|&w| words[w as usize].as_str().cmp(&words[id as usize])) {
            entry.insert(pos, id);
        }
        Ok(())
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn language_index(&self, lang: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == lang)
    }

    pub fn concept_count(&self) -> usize {
        self.entries.len() / self.languages.len()
    }

    /// D_l(c) as word ids.
    pub fn lexicalizations(&self, concept: usize, lang: usize) -> &[u32] {
        &self.entries[concept * self.languages.len() + lang]
    }

    /// D_l(c) as strings.
    pub fn words_of(&self, concept: usize, lang: usize) -> impl Iterator<Item = &str> + '_ {
        self.lexicalizations(concept, lang)
            .iter()
            .map(|&w| self.words[w as usize].as_str())
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.word_index.get(word).copied()
    }

    /// Whether `word` is a lexicalization of some concept in `lang`.
    pub fn contains(&self, word: &str, lang: usize) -> bool {
        let Some(id) = self.word_id(word) else {
            return false;
        };
        (0..self.concept_count()).any(|c| self.lexicalizations(c, lang).contains(&id))
    }

    /// Number of concepts with a non-empty D_l(c).
    pub fn lexicalized_count(&self, lang: usize) -> usize {
        (0..self.concept_count())
            .filter(|&c| !self.lexicalizations(c, lang).is_empty())
            .count()
    }
}
