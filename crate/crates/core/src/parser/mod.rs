//! From query text to candidate interpretations: tokenizing, binding each
//! keyword to relations, attributes or values, and enumerating conjunctive
//! readings with their query trees.

mod tokenize;
mod tree;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::catalog::{ColumnId, ColumnRef, SchemaCatalog, TableId};
use crate::config::UnmappedKeywordPolicy;
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, VocScope};
use crate::value::normalize;

pub use tokenize::{tokenize, Token, TokenKind};
pub use tree::{AttributeNode, QueryTree, RelationNode, ValueLeaf};

/// Upper bound on the raw number of combinations examined for one query.
pub const MAX_COMBINATIONS: usize = 100_000;

/// Longest vocabulary phrase, in words, that adjacent keywords merge into.
const MAX_PHRASE_WORDS: usize = 5;

/// One keyword of the query after operators are folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub text: String,
    pub quoted: bool,
    pub negated: bool,
    pub position: usize,
}

/// One keyword binding: `(R)`, `(R, A)` or `(R, A, v)`, the last optionally
/// negated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PathTerm {
    pub relation: TableId,
    pub attribute: Option<ColumnId>,
    pub value: Option<String>,
    pub negated: bool,
}

impl PathTerm {
    pub fn relation(relation: TableId) -> PathTerm {
        PathTerm {
            relation,
            attribute: None,
            value: None,
            negated: false,
        }
    }

    pub fn attribute(column: ColumnRef) -> PathTerm {
        PathTerm {
            relation: column.table,
            attribute: Some(column.column),
            value: None,
            negated: false,
        }
    }

    pub fn value(column: ColumnRef, value: &str, negated: bool) -> PathTerm {
        PathTerm {
            relation: column.table,
            attribute: Some(column.column),
            value: Some(normalize(value)),
            negated,
        }
    }

    pub fn column(&self) -> Option<ColumnRef> {
        self.attribute.map(|a| ColumnRef::new(self.relation, a))
    }

    pub fn is_metadata_only(&self) -> bool {
        self.value.is_none()
    }
}

/// Preference order for interpretations; smaller is better. Compared
/// field by field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Score {
    /// Distinct relations named by the terms.
    pub relations: usize,
    /// Relation or attribute terms standing alone on their relation.
    pub unmerged: usize,
    /// Value terms that sit on foreign-key columns (the value is then also
    /// present, and better read, in the referenced table).
    pub fk_values: usize,
}

/// One conjunctive reading of the whole query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interpretation {
    pub terms: Vec<PathTerm>,
    pub score: Score,
}

impl Interpretation {
    /// Distinct relations in order of first appearance.
    pub fn relations(&self) -> Vec<TableId> {
        let mut out = Vec::new();
        for t in &self.terms {
            if !out.contains(&t.relation) {
                out.push(t.relation);
            }
        }
        out
    }

    /// Merge and score a raw conjunction of bindings. Returns `None` when
    /// nothing remains.
    pub fn from_terms(raw: Vec<PathTerm>, catalog: &SchemaCatalog) -> Option<Interpretation> {
        let mut terms: Vec<PathTerm> = Vec::with_capacity(raw.len());
        for t in raw {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        let snapshot = terms.clone();
        terms.retain(|t| match (&t.attribute, &t.value) {
            (None, _) => !snapshot
                .iter()
                .any(|o| o.relation == t.relation && o.attribute.is_some()),
            (Some(a), None) => !snapshot
                .iter()
                .any(|o| o.relation == t.relation && o.attribute == Some(*a) && o.value.is_some()),
            _ => true,
        });
        if terms.is_empty() {
            return None;
        }
        let relations: BTreeSet<TableId> = terms.iter().map(|t| t.relation).collect();
        let unmerged = terms
            .iter()
            .filter(|t| t.is_metadata_only() && !terms.iter().any(|o| o != *t && o.relation == t.relation))
            .count();
        let fk_values = terms
            .iter()
            .filter(|t| t.value.is_some() && t.column().is_some_and(|c| catalog.is_foreign_key_column(c)))
            .count();
        Some(Interpretation {
            terms,
            score: Score {
                relations: relations.len(),
                unmerged,
                fk_values,
            },
        })
    }

    fn order_key(&self, catalog: &SchemaCatalog) -> Vec<(String, String, String, bool)> {
        self.terms
            .iter()
            .map(|t| {
                (
                    catalog.table_name(t.relation).to_lowercase(),
                    t.column()
                        .map(|c| catalog.column_name(c).to_lowercase())
                        .unwrap_or_default(),
                    t.value.clone().unwrap_or_default(),
                    t.negated,
                )
            })
            .collect()
    }
}

/// Fold operators into keywords and merge runs of adjacent bare words that
/// form a vocabulary phrase.
pub fn keywords(tokens: &[Token], lexicon: &Lexicon) -> Vec<Keyword> {
    // (keyword, joined to the previous one by an implied AND)
    let mut items: Vec<(Keyword, bool)> = Vec::new();
    let mut negated = false;
    let mut implied = false;
    for t in tokens {
        match t.kind {
            TokenKind::OpNot => negated = true,
            TokenKind::OpAnd => implied = t.implicit,
            TokenKind::Keyword => {
                items.push((
                    Keyword {
                        text: t.text.clone(),
                        quoted: t.quoted,
                        negated,
                        position: t.position,
                    },
                    implied && !negated,
                ));
                negated = false;
                implied = false;
            }
        }
    }
    let mut out: Vec<Keyword> = Vec::with_capacity(items.len());
    let mut i = 0;
    while i < items.len() {
        let mut take = 1;
        if !items[i].0.quoted {
            let mut j = i + 1;
            while j < items.len() && j - i < MAX_PHRASE_WORDS && items[j].1 && !items[j].0.quoted {
                j += 1;
            }
            for end in (i + 2..=j).rev() {
                let phrase = items[i..end]
                    .iter()
                    .map(|k| k.0.text.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                if lexicon.has_phrase(&phrase) {
                    take = end - i;
                    break;
                }
            }
        }
        let mut k = items[i].0.clone();
        if take > 1 {
            k.text = items[i..i + take]
                .iter()
                .map(|k| k.0.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
        }
        out.push(k);
        i += take;
    }
    out
}

/// Every binding of one keyword: relations by name or vocabulary, attributes
/// by name or vocabulary, and indexed values (after vocabulary
/// translation). Negated keywords bind only as values.
pub fn bind_keyword(keyword: &Keyword, lexicon: &Lexicon, catalog: &SchemaCatalog) -> Vec<PathTerm> {
    let mut out = BTreeSet::new();
    if !keyword.negated {
        out.extend(metadata_bindings(&keyword.text, lexicon, catalog));
    }
    for v in value_forms(&keyword.text, lexicon) {
        for c in lexicon.lookup_value(&v) {
            out.insert(PathTerm::value(c, &v, keyword.negated));
        }
    }
    out.into_iter().collect()
}

fn metadata_bindings(text: &str, lexicon: &Lexicon, catalog: &SchemaCatalog) -> BTreeSet<PathTerm> {
    let mut out = BTreeSet::new();
    let mut table_names = vec![text.to_owned()];
    table_names.extend(
        lexicon
            .translate(text, &[VocScope::TableName])
            .into_iter()
            .map(|e| e.internal),
    );
    for name in table_names {
        if let Some(t) = catalog.table_by_name(&name) {
            out.insert(PathTerm::relation(t.table_id));
        }
    }
    let wanted = normalize(text);
    for c in catalog.columns() {
        if normalize(&c.name) == wanted {
            out.insert(PathTerm::attribute(c.column_ref()));
        }
    }
    for e in lexicon.translate(text, &[VocScope::ColumnName]) {
        if let Some((t, c)) = e.internal.split_once('.') {
            if let Some(t) = catalog.table_by_name(t) {
                if let Some(c) = catalog.column_by_name(t.table_id, c) {
                    out.insert(PathTerm::attribute(c.column_ref()));
                }
            }
        }
    }
    out
}

/// The keyword itself plus its value-code translations, normalized.
pub fn value_forms(text: &str, lexicon: &Lexicon) -> Vec<String> {
    let mut out = vec![normalize(text)];
    for e in lexicon.translate(text, &[VocScope::ValueCode]) {
        let v = normalize(&e.internal);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.retain(|v| !v.is_empty());
    out
}

/// Column lookup for keywords nothing else can place. Receives the
/// normalized value form and returns the columns containing it.
pub type Fallback<'a> = dyn FnMut(&str) -> Result<Vec<ColumnRef>> + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpretOptions {
    pub cap: usize,
    pub policy: UnmappedKeywordPolicy,
}

impl Default for InterpretOptions {
    fn default() -> Self {
        InterpretOptions {
            cap: 8,
            policy: UnmappedKeywordPolicy::Reject,
        }
    }
}

/// Bind every keyword, form the cartesian product of the bindings, merge and
/// score each combination, and return the best `cap` readings.
pub fn interpret(
    tokens: &[Token],
    lexicon: &Lexicon,
    catalog: &SchemaCatalog,
    options: InterpretOptions,
    fallback: &mut Fallback<'_>,
) -> Result<Vec<(Interpretation, QueryTree)>> {
    let keywords = keywords(tokens, lexicon);
    if keywords.is_empty() {
        return Err(Error::Validation("the query has no keywords".into()));
    }
    let mut per_keyword: Vec<Vec<PathTerm>> = Vec::with_capacity(keywords.len());
    for k in &keywords {
        let mut bindings = bind_keyword(k, lexicon, catalog);
        if bindings.is_empty() && k.negated && !metadata_bindings(&k.text, lexicon, catalog).is_empty() {
            return Err(Error::NoInterpretation(format!(
                "`not {}`: negation applies only to values, not to table or column names",
                k.text
            )));
        }
        if bindings.is_empty() {
            if options.policy == UnmappedKeywordPolicy::Reject {
                return Err(Error::UnmappableKeyword {
                    keyword: k.text.clone(),
                    policy: options.policy.as_str().into(),
                });
            }
            let mut found = BTreeSet::new();
            for v in value_forms(&k.text, lexicon) {
                for c in fallback(&v)? {
                    found.insert(PathTerm::value(c, &v, k.negated));
                }
            }
            if found.is_empty() {
                return Err(Error::UnmappableKeyword {
                    keyword: k.text.clone(),
                    policy: options.policy.as_str().into(),
                });
            }
            bindings = found.into_iter().collect();
        }
        per_keyword.push(bindings);
    }

    let total = per_keyword.iter().try_fold(1usize, |acc, b| {
        acc.checked_mul(b.len()).filter(|n| *n <= MAX_COMBINATIONS)
    });
    let Some(total) = total else {
        let n = per_keyword.iter().fold(1usize, |acc, b| acc.saturating_mul(b.len()));
        return Err(Error::TooAmbiguous(n));
    };

    let mut seen: BTreeMap<Vec<PathTerm>, ()> = BTreeMap::new();
    let mut found: Vec<Interpretation> = Vec::new();
    let mut index = vec![0usize; per_keyword.len()];
    for _ in 0..total {
        let raw: Vec<PathTerm> = index
            .iter()
            .enumerate()
            .map(|(k, &i)| per_keyword[k][i].clone())
            .collect();
        if let Some(interp) = Interpretation::from_terms(raw, catalog) {
            let mut key = interp.terms.clone();
            key.sort();
            if seen.insert(key, ()).is_none() {
                found.push(interp);
            }
        }
        for k in (0..index.len()).rev() {
            index[k] += 1;
            if index[k] < per_keyword[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
    if found.is_empty() {
        return Err(Error::NoInterpretation("no reading of the query survives".into()));
    }
    let mut keyed: Vec<_> = found.into_iter().map(|i| (i.score, i.order_key(catalog), i)).collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(keyed
        .into_iter()
        .take(options.cap.max(1))
        .map(|(_, _, i)| {
            let tree = QueryTree::from_interpretation(&i);
            (i, tree)
        })
        .collect())
}

/// A fallback that never finds anything.
pub fn no_fallback(_: &str) -> Result<Vec<ColumnRef>> {
    Ok(Vec::new())
}
