//! Scalar cell values and keyword normalization.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

/// A typed-or-null scalar, as read from or bound to a SQL statement.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SqlValue {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
}

impl SqlValue {
    pub fn is_null(&self) -> bool {
        matches!(self, SqlValue::Null)
    }

    /// Normalized text form used by the value index, or `None` for nulls
    /// and values that normalize to the empty string.
    pub fn normalized(&self) -> Option<String> {
        let text = match self {
            SqlValue::Null => return None,
            SqlValue::Integer(i) => i.to_string(),
            SqlValue::Real(f) => format_real(*f),
            SqlValue::Text(s) => normalize(s),
        };
        if text.is_empty() {
            None
        } else {
            Some(text)
        }
    }

    /// Raw display form. Used for link keys and plain-text output.
    pub fn display_text(&self) -> Option<String> {
        match self {
            SqlValue::Null => None,
            SqlValue::Integer(i) => Some(i.to_string()),
            SqlValue::Real(f) => Some(format_real(*f)),
            SqlValue::Text(s) => Some(s.clone()),
        }
    }

    /// SQL equality as used in join predicates: nulls never match, numbers
    /// compare numerically across integer/real, text compares exactly.
    pub fn sql_eq(&self, other: &SqlValue) -> bool {
        match (self, other) {
            (SqlValue::Integer(a), SqlValue::Integer(b)) => a == b,
            (SqlValue::Real(a), SqlValue::Real(b)) => a == b,
            (SqlValue::Integer(a), SqlValue::Real(b)) | (SqlValue::Real(b), SqlValue::Integer(a)) => (*a as f64) == *b,
            (SqlValue::Text(a), SqlValue::Text(b)) => a == b,
            _ => false,
        }
    }

    /// Total order used for deterministic sorting in tests and fixtures:
    /// null < numbers < text.
    pub fn total_cmp(&self, other: &SqlValue) -> Ordering {
        fn rank(v: &SqlValue) -> u8 {
            match v {
                SqlValue::Null => 0,
                SqlValue::Integer(_) | SqlValue::Real(_) => 1,
                SqlValue::Text(_) => 2,
            }
        }
        match (self, other) {
            (SqlValue::Integer(a), SqlValue::Integer(b)) => a.cmp(b),
            (SqlValue::Real(a), SqlValue::Real(b)) => a.total_cmp(b),
            (SqlValue::Integer(a), SqlValue::Real(b)) => (*a as f64).total_cmp(b),
            (SqlValue::Real(a), SqlValue::Integer(b)) => a.total_cmp(&(*b as f64)),
            (SqlValue::Text(a), SqlValue::Text(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl Serialize for SqlValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SqlValue::Null => serializer.serialize_none(),
            SqlValue::Integer(i) => serializer.serialize_i64(*i),
            SqlValue::Real(f) => serializer.serialize_f64(*f),
            SqlValue::Text(s) => serializer.serialize_str(s),
        }
    }
}

impl fmt::Display for SqlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.display_text() {
            Some(s) => f.write_str(&s),
            None => f.write_str("NULL"),
        }
    }
}

impl From<&str> for SqlValue {
    fn from(s: &str) -> Self {
        SqlValue::Text(s.to_owned())
    }
}

impl From<String> for SqlValue {
    fn from(s: String) -> Self {
        SqlValue::Text(s)
    }
}

impl From<i64> for SqlValue {
    fn from(i: i64) -> Self {
        SqlValue::Integer(i)
    }
}

impl From<f64> for SqlValue {
    fn from(f: f64) -> Self {
        SqlValue::Real(f)
    }
}

fn format_real(f: f64) -> String {
    // `{}` prints the shortest representation that parses back exactly,
    // and prints integral values without a fractional part.
    format!("{f}")
}

/// Keyword/value normalization: trim surrounding whitespace, then lowercase.
///
/// The SQL side evaluates `lower(trim(col))`; the embedded provider
/// registers Unicode-aware versions of both functions so the two agree.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// The literal shape of a keyword, which decides the column types it can
/// possibly match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralKind {
    Integer,
    Decimal,
    Date,
    Text,
}

impl LiteralKind {
    pub fn of(keyword: &str) -> LiteralKind {
        let k = keyword.trim();
        if k.parse::<i64>().is_ok() {
            LiteralKind::Integer
        } else if k.parse::<f64>().is_ok_and(f64::is_finite) && k.chars().any(|c| c.is_ascii_digit()) {
            LiteralKind::Decimal
        } else if is_iso_date(k) {
            LiteralKind::Date
        } else {
            LiteralKind::Text
        }
    }
}

fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_trims_and_folds_case() {
        assert_eq!(normalize("  JoHn "), "john");
        assert_eq!(normalize("ÉCOLE"), "école");
        assert_eq!(SqlValue::Text("   ".into()).normalized(), None);
        assert_eq!(SqlValue::Null.normalized(), None);
    }

    #[test]
    fn numbers_normalize_to_their_shortest_form() {
        assert_eq!(SqlValue::Integer(15).normalized().as_deref(), Some("15"));
        assert_eq!(SqlValue::Real(15.0).normalized().as_deref(), Some("15"));
        assert_eq!(SqlValue::Real(2.5).normalized().as_deref(), Some("2.5"));
    }

    #[test]
    fn literal_kinds() {
        assert_eq!(LiteralKind::of("15"), LiteralKind::Integer);
        assert_eq!(LiteralKind::of("-3"), LiteralKind::Integer);
        assert_eq!(LiteralKind::of("2.5"), LiteralKind::Decimal);
        assert_eq!(LiteralKind::of("2001-04-30"), LiteralKind::Date);
        assert_eq!(LiteralKind::of("BO-3492"), LiteralKind::Text);
        assert_eq!(LiteralKind::of("inf"), LiteralKind::Text);
        assert_eq!(LiteralKind::of("NaN"), LiteralKind::Text);
    }

    #[test]
    fn sql_equality_ignores_nulls() {
        assert!(!SqlValue::Null.sql_eq(&SqlValue::Null));
        assert!(SqlValue::Integer(3).sql_eq(&SqlValue::Real(3.0)));
        assert!(!SqlValue::Integer(3).sql_eq(&SqlValue::Text("3".into())));
    }

    #[test]
    fn json_shape_is_plain_scalars() {
        let row = vec![SqlValue::Text("John".into()), SqlValue::Integer(15), SqlValue::Null];
        assert_eq!(serde_json::to_string(&row).unwrap(), r#"["John",15,null]"#);
    }
}
