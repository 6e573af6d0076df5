use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;

pub const PAD: &str = "<pad>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub const PAD_ID: usize = 0;
pub const BOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const UNK_ID: usize = 3;

/// Token <-> id table. Ids below 4 are the special tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(vocab: Vocab) -> Self {
        vocab.tokens
    }
}

impl Vocab {
    /// Specials followed by `tokens` in the given order (duplicates dropped).
    pub fn with_specials<I: IntoIterator<Item = String>>(tokens: I) -> Self {
        let mut all: Vec<String> = [PAD, BOS, EOS, UNK].iter().map(|s| s.to_string()).collect();
        for t in tokens {
            if !all.contains(&t) {
                all.push(t);
            }
        }
        Vocab::from(all)
    }

    /// Generation vocabulary: tokens seen at least `min_count` times across
    /// training references and table values, most frequent first (ties
    /// alphabetical).
    pub fn build(instances: &[Instance], min_count: usize) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for inst in instances {
            for reference in inst.references() {
                for t in reference {
                    *counts.entry(t).or_default() += 1;
                }
            }
            for t in inst.table().value_tokens() {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Vocab::with_specials(kept.into_iter().map(|(t, _)| t.to_owned()))
    }

    /// Attribute vocabulary (specials included so unknown fields map to UNK).
    pub fn build_attributes(instances: &[Instance]) -> Self {
        let mut names: Vec<String> = instances
            .iter()
            .flat_map(|i| i.table().records().iter().map(|r| r.attribute().to_owned()))
            .collect();
        names.sort();
        names.dedup();
        Vocab::with_specials(names)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> usize {
        self.get(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
