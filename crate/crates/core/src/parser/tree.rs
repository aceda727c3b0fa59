use serde::Serialize;

use super::{Interpretation, PathTerm};
use crate::catalog::{ColumnId, ColumnRef, SchemaCatalog, TableId};

/// root → relations → attributes → values. Lower levels may be absent
/// when a keyword names a table or column rather than a value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryTree {
    pub relations: Vec<RelationNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationNode {
    pub relation: TableId,
    pub attributes: Vec<AttributeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeNode {
    pub attribute: ColumnId,
    pub values: Vec<ValueLeaf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueLeaf {
    pub value: String,
    pub negated: bool,
}

impl QueryTree {
    pub fn from_interpretation(interp: &Interpretation) -> QueryTree {
        let mut tree = QueryTree::default();
        for t in &interp.terms {
            let rel = match tree.relations.iter().position(|r| r.relation == t.relation) {
                Some(i) => &mut tree.relations[i],
                None => {
                    tree.relations.push(RelationNode {
                        relation: t.relation,
                        attributes: Vec::new(),
                    });
                    tree.relations.last_mut().unwrap()
                }
            };
            let Some(a) = t.attribute else { continue };
            let attr = match rel.attributes.iter().position(|n| n.attribute == a) {
                Some(i) => &mut rel.attributes[i],
                None => {
                    rel.attributes.push(AttributeNode {
                        attribute: a,
                        values: Vec::new(),
                    });
                    rel.attributes.last_mut().unwrap()
                }
            };
            if let Some(v) = &t.value {
                attr.values.push(ValueLeaf {
                    value: v.clone(),
                    negated: t.negated,
                });
            }
        }
        tree
    }

    /// Each relation appears once and exists; each attribute appears once
    /// under its own relation; every value hangs under an attribute.
    pub fn is_well_formed(&self, catalog: &SchemaCatalog) -> bool {
        let mut seen = Vec::new();
        for r in &self.relations {
            if seen.contains(&r.relation) || catalog.table(r.relation).is_none() {
                return false;
            }
            seen.push(r.relation);
            let mut attrs = Vec::new();
            for a in &r.attributes {
                if attrs.contains(&a.attribute) || catalog.column(ColumnRef::new(r.relation, a.attribute)).is_none() {
                    return false;
                }
                attrs.push(a.attribute);
                if a.values.iter().any(|v| v.value.is_empty()) {
                    return false;
                }
            }
        }
        true
    }

    /// Flatten back to path terms: one per value leaf, one per attribute
    /// without values, one per relation without attributes.
    pub fn terms(&self) -> Vec<PathTerm> {
        let mut out = Vec::new();
        for r in &self.relations {
            if r.attributes.is_empty() {
                out.push(PathTerm::relation(r.relation));
            }
            for a in &r.attributes {
                let col = ColumnRef::new(r.relation, a.attribute);
                if a.values.is_empty() {
                    out.push(PathTerm::attribute(col));
                }
                for v in &a.values {
                    out.push(PathTerm {
                        relation: r.relation,
                        attribute: Some(a.attribute),
                        value: Some(v.value.clone()),
                        negated: v.negated,
                    });
                }
            }
        }
        out
    }
}
