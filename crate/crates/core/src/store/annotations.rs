//! Administrator annotation file (TOML).
//!
//! ```toml
//! index_default = "all"          # all | keys | none
//!
//! [tables.Member]
//! description = "club member"
//! primary_key = ["Name"]          # optional override
//! [tables.Member.columns.City]
//! description = "home city"
//! index = false
//!
//! [[vocabulary]]
//! external = "female"
//! internal = "F"
//!
//! [[vocabulary]]
//! external = "club members"
//! internal = "Member"
//! scope = "table-name"
//!
//! [[foreign_keys]]
//! from_table = "Activity"
//! from_columns = ["Name"]
//! to_table = "Member"
//! to_columns = ["Name"]           # optional; defaults to the primary key
//!
//! [[code_tables]]
//! table = "Dept"
//! code_column = "code"
//! description_column = "title"
//!
//! [[sort_orders]]
//! table = "Emp"
//! column = "salary"
//! direction = "desc"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexDefault {
    /// Every column of an indexable type.
    #[default]
    All,
    /// Columns belonging to some candidate key or foreign key.
    Keys,
    None,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdminAnnotations {
    #[serde(default)]
    pub index_default: IndexDefault,
    #[serde(default)]
    pub tables: BTreeMap<String, TableAnnotation>,
    #[serde(default)]
    pub vocabulary: Vec<VocabularyAnnotation>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKeyAnnotation>,
    #[serde(default)]
    pub code_tables: Vec<CodeTableAnnotation>,
    #[serde(default)]
    pub sort_orders: Vec<SortOrderAnnotation>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableAnnotation {
    pub description: Option<String>,
    pub primary_key: Option<Vec<String>>,
    #[serde(default)]
    pub columns: BTreeMap<String, ColumnAnnotation>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnAnnotation {
    pub description: Option<String>,
    pub index: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyAnnotation {
    pub external: String,
    pub internal: String,
    /// `value-code`, `table-name` or `column-name`; inferred from `internal`
    /// when absent.
    pub scope: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForeignKeyAnnotation {
    pub from_table: String,
    pub from_columns: Vec<String>,
    pub to_table: String,
    #[serde(default)]
    pub to_columns: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeTableAnnotation {
    pub table: String,
    pub code_column: String,
    pub description_column: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortOrderAnnotation {
    pub table: String,
    pub column: String,
    #[serde(default = "default_direction")]
    pub direction: String,
}

fn default_direction() -> String {
    "asc".to_owned()
}

impl AdminAnnotations {
    pub fn parse(text: &str) -> Result<AdminAnnotations> {
        toml::from_str(text).map_err(|e| Error::Annotations(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<AdminAnnotations> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Annotations(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Case-insensitive table lookup.
    pub fn table(&self, name: &str) -> Option<&TableAnnotation> {
        self.tables
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v)
    }

    pub fn column(&self, table: &str, column: &str) -> Option<&ColumnAnnotation> {
        self.table(table)?
            .columns
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(column))
            .map(|(_, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_shape() {
        let a = AdminAnnotations::parse(
            r#"
index_default = "keys"
[tables.Member]
description = "club member"
[tables.Member.columns.City]
description = "home city"
index = false
[[vocabulary]]
external = "female"
internal = "F"
[[foreign_keys]]
from_table = "Activity"
from_columns = ["Name"]
to_table = "Member"
[[sort_orders]]
table = "Emp"
column = "salary"
direction = "desc"
"#,
        )
        .unwrap();
        assert_eq!(a.index_default, IndexDefault::Keys);
        assert_eq!(a.table("member").unwrap().description.as_deref(), Some("club member"));
        assert_eq!(a.column("MEMBER", "city").unwrap().index, Some(false));
        assert!(a.foreign_keys[0].to_columns.is_empty());
        assert_eq!(a.sort_orders[0].direction, "desc");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(AdminAnnotations::parse("[tables.X]\ndescripton = 'typo'").is_err());
    }
}
