//! SQL text fragments shared by the planner, the lexicon scan and drill
//! queries.

use crate::catalog::DataType;
use crate::value::SqlValue;

/// Double-quote an identifier, doubling embedded quotes.
pub fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

/// `alias."column"`
pub fn qualified(alias: &str, column: &str) -> String {
    format!("{alias}.{}", quote_ident(column))
}

fn cast_text(col: &str) -> String {
    format!("lower(trim(cast({col} as varchar(64))))")
}

/// Equality (or inequality) between a column and a normalized keyword, with
/// the keyword as the single positional parameter.
///
/// Text columns compare case-insensitively after trimming. Numeric columns
/// compare numerically when the keyword parses as a number of the right
/// kind. Dates and anything else compare on their text rendering.
pub fn value_predicate(col: &str, ty: DataType, value: &str, negated: bool) -> (String, SqlValue) {
    let op = if negated { "<>" } else { "=" };
    match ty {
        DataType::Text => (format!("lower(trim({col})) {op} ?"), SqlValue::Text(value.to_owned())),
        DataType::Integer => match value.parse::<i64>() {
            Ok(i) => (format!("{col} {op} ?"), SqlValue::Integer(i)),
            Err(_) => (format!("{} {op} ?", cast_text(col)), SqlValue::Text(value.to_owned())),
        },
        DataType::Decimal => match value.parse::<f64>() {
            Ok(f) if f.is_finite() => (format!("{col} {op} ?"), SqlValue::Real(f)),
            _ => (format!("{} {op} ?", cast_text(col)), SqlValue::Text(value.to_owned())),
        },
        DataType::Date | DataType::Other => (format!("{} {op} ?", cast_text(col)), SqlValue::Text(value.to_owned())),
    }
}

/// A boolean SQL expression together with the parameters its placeholders
/// consume, in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fragment {
    pub sql: String,
    pub params: Vec<SqlValue>,
}

impl Fragment {
    pub fn new(sql: impl Into<String>, params: Vec<SqlValue>) -> Fragment {
        Fragment {
            sql: sql.into(),
            params,
        }
    }

    /// Conjunction of the given fragments; `None` when there are none.
    pub fn and(parts: Vec<Fragment>) -> Option<Fragment> {
        join(parts, " and ")
    }

    /// Parenthesized disjunction.
    pub fn or(parts: Vec<Fragment>) -> Option<Fragment> {
        let mut f = join(parts, " or ")?;
        f.sql = format!("({})", f.sql);
        Some(f)
    }
}

fn join(parts: Vec<Fragment>, sep: &str) -> Option<Fragment> {
    if parts.is_empty() {
        return None;
    }
    let mut sql = Vec::with_capacity(parts.len());
    let mut params = Vec::new();
    for p in parts {
        sql.push(p.sql);
        params.extend(p.params);
    }
    Some(Fragment {
        sql: sql.join(sep),
        params,
    })
}

/// ` where <cond>` or nothing.
pub fn where_clause(cond: &Option<Fragment>) -> String {
    match cond {
        Some(c) => format!(" where {}", c.sql),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_are_quoted() {
        assert_eq!(quote_ident("Member"), "\"Member\"");
        assert_eq!(quote_ident("we\"ird"), "\"we\"\"ird\"");
        assert_eq!(qualified("t0", "Name"), "t0.\"Name\"");
    }

    #[test]
    fn predicates_follow_column_type() {
        assert_eq!(
            value_predicate("c", DataType::Text, "john", false),
            ("lower(trim(c)) = ?".into(), SqlValue::Text("john".into()))
        );
        assert_eq!(
            value_predicate("c", DataType::Integer, "15", true),
            ("c <> ?".into(), SqlValue::Integer(15))
        );
        assert_eq!(
            value_predicate("c", DataType::Decimal, "2.5", false).1,
            SqlValue::Real(2.5)
        );
        assert!(value_predicate("c", DataType::Integer, "abc", false)
            .0
            .contains("cast(c as varchar(64))"));
        assert!(value_predicate("c", DataType::Date, "2001-01-01", false)
            .0
            .starts_with("lower(trim(cast("));
    }

    #[test]
    fn fragments_combine_in_order() {
        let a = Fragment::new("a = ?", vec![1.into()]);
        let b = Fragment::new("b = ?", vec![2.into()]);
        let both = Fragment::and(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(both.sql, "a = ? and b = ?");
        assert_eq!(both.params, vec![SqlValue::Integer(1), SqlValue::Integer(2)]);
        assert_eq!(Fragment::or(vec![a, b]).unwrap().sql, "(a = ? or b = ?)");
        assert!(Fragment::and(vec![]).is_none());
    }
}
