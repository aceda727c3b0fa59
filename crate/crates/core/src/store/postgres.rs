//! Network PostgreSQL provider.

use std::time::Duration;

use postgres::types::{ToSql, Type};
use postgres::{Client, NoTls, Row};
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use super::gateway::{
    check_statement, placeholder_positions, RawColumn, RawForeignKey, RawSchema, RawTable, Rows, Session, SqlGateway,
};
use crate::error::{Error, Result};
use crate::value::SqlValue;

pub struct PostgresGateway {
    descriptor: String,
}

impl PostgresGateway {
    pub fn open(descriptor: &str) -> Result<PostgresGateway> {
        let gateway = PostgresGateway {
            descriptor: descriptor.to_owned(),
        };
        gateway.client()?;
        Ok(gateway)
    }

    fn client(&self) -> Result<Client> {
        let fail = |e: postgres::Error| Error::Connection {
            descriptor: self.descriptor.clone(),
            message: e.to_string(),
        };
        let mut client = Client::connect(&self.descriptor, NoTls).map_err(fail)?;
        client
            .batch_execute("set session characteristics as transaction read only")
            .map_err(fail)?;
        Ok(client)
    }
}

impl SqlGateway for PostgresGateway {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn open_session(&self) -> Result<Box<dyn Session>> {
        Ok(Box::new(PostgresSession { client: self.client()? }))
    }
}

struct PostgresSession {
    client: Client,
}

fn sql_err(e: postgres::Error) -> Error {
    Error::Sql {
        target: String::new(),
        message: e.to_string(),
    }
}

/// Rewrite `?` placeholders to `$1, $2, ...`.
fn numbered_placeholders(sql: &str) -> String {
    let mut out = String::with_capacity(sql.len() + 8);
    let mut last = 0;
    for (n, pos) in placeholder_positions(sql).into_iter().enumerate() {
        out.push_str(&sql[last..pos]);
        out.push_str(&format!("${}", n + 1));
        last = pos + 1;
    }
    out.push_str(&sql[last..]);
    out
}

fn bind(value: &SqlValue, ty: &Type) -> Result<Box<dyn ToSql + Sync>> {
    let mismatch = || Error::Sql {
        target: String::new(),
        message: format!("cannot bind {value:?} as {ty}"),
    };
    Ok(match (value, ty) {
        (SqlValue::Null, &Type::INT2) => Box::new(None::<i16>),
        (SqlValue::Null, &Type::INT4) => Box::new(None::<i32>),
        (SqlValue::Null, &Type::INT8) => Box::new(None::<i64>),
        (SqlValue::Null, &Type::FLOAT4) => Box::new(None::<f32>),
        (SqlValue::Null, &Type::FLOAT8) => Box::new(None::<f64>),
        (SqlValue::Null, &Type::NUMERIC) => Box::new(None::<Decimal>),
        (SqlValue::Null, _) => Box::new(None::<String>),
        (SqlValue::Integer(i), &Type::INT2) => Box::new(i16::try_from(*i).map_err(|_| mismatch())?),
        (SqlValue::Integer(i), &Type::INT4) => Box::new(i32::try_from(*i).map_err(|_| mismatch())?),
        (SqlValue::Integer(i), &Type::INT8) => Box::new(*i),
        (SqlValue::Integer(i), &Type::FLOAT4) => Box::new(*i as f32),
        (SqlValue::Integer(i), &Type::FLOAT8) => Box::new(*i as f64),
        (SqlValue::Integer(i), &Type::NUMERIC) => Box::new(Decimal::from(*i)),
        (SqlValue::Real(f), &Type::FLOAT4) => Box::new(*f as f32),
        (SqlValue::Real(f), &Type::FLOAT8) => Box::new(*f),
        (SqlValue::Real(f), &Type::NUMERIC) => Box::new(Decimal::try_from(*f).map_err(|_| mismatch())?),
        (SqlValue::Text(s), &Type::DATE) => {
            Box::new(chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| mismatch())?)
        }
        (SqlValue::Text(s), &Type::INT2 | &Type::INT4 | &Type::INT8) => {
            let i: i64 = s.trim().parse().map_err(|_| mismatch())?;
            return bind(&SqlValue::Integer(i), ty);
        }
        (other, _) => Box::new(other.display_text().unwrap_or_default()),
    })
}

fn cell(row: &Row, i: usize) -> SqlValue {
    let ty = row.columns()[i].type_();
    let v = match *ty {
        Type::INT2 => row
            .try_get::<_, Option<i16>>(i)
            .ok()
            .flatten()
            .map(|v| SqlValue::Integer(v.into())),
        Type::INT4 => row
            .try_get::<_, Option<i32>>(i)
            .ok()
            .flatten()
            .map(|v| SqlValue::Integer(v.into())),
        Type::INT8 => row.try_get::<_, Option<i64>>(i).ok().flatten().map(SqlValue::Integer),
        Type::FLOAT4 => row
            .try_get::<_, Option<f32>>(i)
            .ok()
            .flatten()
            .map(|v| SqlValue::Real(v.into())),
        Type::FLOAT8 => row.try_get::<_, Option<f64>>(i).ok().flatten().map(SqlValue::Real),
        Type::NUMERIC => row.try_get::<_, Option<Decimal>>(i).ok().flatten().and_then(|d| {
            if d.is_integer() {
                d.to_i64().map(SqlValue::Integer)
            } else {
                d.to_f64().map(SqlValue::Real)
            }
        }),
        Type::BOOL => row
            .try_get::<_, Option<bool>>(i)
            .ok()
            .flatten()
            .map(|b| SqlValue::Integer(b.into())),
        Type::DATE => row
            .try_get::<_, Option<chrono::NaiveDate>>(i)
            .ok()
            .flatten()
            .map(|d| SqlValue::Text(d.format("%Y-%m-%d").to_string())),
        Type::TIMESTAMP => row
            .try_get::<_, Option<chrono::NaiveDateTime>>(i)
            .ok()
            .flatten()
            .map(|d| SqlValue::Text(d.format("%Y-%m-%d %H:%M:%S").to_string())),
        _ => row.try_get::<_, Option<String>>(i).ok().flatten().map(SqlValue::Text),
    };
    v.unwrap_or(SqlValue::Null)
}

impl PostgresSession {
    fn select(&mut self, sql: &str, params: &[SqlValue]) -> Result<Rows> {
        check_statement(sql, params)?;
        let stmt = self.client.prepare(&numbered_placeholders(sql)).map_err(sql_err)?;
        let bound = params
            .iter()
            .zip(stmt.params())
            .map(|(v, ty)| bind(v, ty))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&(dyn ToSql + Sync)> = bound.iter().map(|b| b.as_ref()).collect();
        let columns = stmt.columns().iter().map(|c| c.name().to_owned()).collect();
        let rows = self.client.query(&stmt, &refs).map_err(sql_err)?;
        let rows = rows
            .iter()
            .map(|r| (0..r.len()).map(|i| cell(r, i)).collect())
            .collect();
        Ok(Rows { columns, rows })
    }

    fn strings(&mut self, sql: &str, params: &[SqlValue]) -> Result<Vec<Vec<String>>> {
        Ok(self
            .select(sql, params)?
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.display_text().unwrap_or_default()).collect())
            .collect())
    }
}

const TABLES: &str = "select table_name from information_schema.tables \
     where table_schema = current_schema() and table_type = 'BASE TABLE' order by table_name";
const COLUMNS: &str = "select column_name, data_type from information_schema.columns \
     where table_schema = current_schema() and table_name = ? order by ordinal_position";
const KEYS: &str = "select tc.constraint_name, tc.constraint_type, kcu.column_name \
     from information_schema.table_constraints tc \
     join information_schema.key_column_usage kcu \
       on tc.constraint_name = kcu.constraint_name and tc.table_schema = kcu.table_schema \
     where tc.table_schema = current_schema() and tc.table_name = ? \
       and tc.constraint_type in ('PRIMARY KEY', 'UNIQUE') \
     order by tc.constraint_name, kcu.ordinal_position";
const FOREIGN_KEYS: &str = "select c.conname, src.relname, sa.attname, dst.relname, da.attname \
     from pg_constraint c \
     join pg_class src on src.oid = c.conrelid \
     join pg_class dst on dst.oid = c.confrelid \
     join pg_namespace n on n.oid = src.relnamespace \
     cross join lateral unnest(c.conkey, c.confkey) with ordinality as k(src_att, dst_att, ord) \
     join pg_attribute sa on sa.attrelid = c.conrelid and sa.attnum = k.src_att \
     join pg_attribute da on da.attrelid = c.confrelid and da.attnum = k.dst_att \
     where c.contype = 'f' and n.nspname = current_schema() \
     order by src.relname, c.conname, k.ord";

impl Session for PostgresSession {
    fn introspect(&mut self) -> Result<RawSchema> {
        let mut schema = RawSchema::default();
        for name in self.strings(TABLES, &[])? {
            let name = name[0].clone();
            let arg = [SqlValue::Text(name.clone())];
            let columns = self
                .strings(COLUMNS, &arg)?
                .into_iter()
                .map(|r| RawColumn {
                    name: r[0].clone(),
                    native_type: r[1].clone(),
                })
                .collect();
            let mut table = RawTable {
                name,
                columns,
                ..RawTable::default()
            };
            let mut current: Option<(String, bool, Vec<String>)> = None;
            let finish = |c: Option<(String, bool, Vec<String>)>, table: &mut RawTable| {
                if let Some((_, primary, cols)) = c {
                    if primary {
                        table.primary_key = cols;
                    } else {
                        table.unique_keys.push(cols);
                    }
                }
            };
            for r in self.strings(KEYS, &arg)? {
                if current.as_ref().map(|c| c.0.as_str()) != Some(r[0].as_str()) {
                    finish(current.take(), &mut table);
                    current = Some((r[0].clone(), r[1] == "PRIMARY KEY", Vec::new()));
                }
                current.as_mut().unwrap().2.push(r[2].clone());
            }
            finish(current.take(), &mut table);
            schema.tables.push(table);
        }
        let mut current: Option<(String, RawForeignKey)> = None;
        for r in self.strings(FOREIGN_KEYS, &[])? {
            let id = format!("{}.{}", r[1], r[0]);
            if current.as_ref().map(|c| &c.0) != Some(&id) {
                if let Some((_, fk)) = current.take() {
                    schema.foreign_keys.push(fk);
                }
                current = Some((
                    id,
                    RawForeignKey {
                        from_table: r[1].clone(),
                        from_columns: Vec::new(),
                        to_table: r[3].clone(),
                        to_columns: Vec::new(),
                    },
                ));
            }
            let fk = &mut current.as_mut().unwrap().1;
            fk.from_columns.push(r[2].clone());
            fk.to_columns.push(r[4].clone());
        }
        if let Some((_, fk)) = current {
            schema.foreign_keys.push(fk);
        }
        if schema.foreign_keys.is_empty() && schema.tables.len() > 1 {
            schema
                .warnings
                .push("no foreign keys declared; supply them in the annotation file".to_owned());
        }
        Ok(schema)
    }

    fn run_select(&mut self, sql: &str, params: &[SqlValue], timeout: Option<Duration>) -> Result<Rows> {
        let ms = timeout.map(|t| t.as_millis()).unwrap_or(0);
        self.client
            .batch_execute(&format!("set statement_timeout = {ms}"))
            .map_err(sql_err)?;
        self.select(sql, params).map_err(|e| match e {
            Error::Sql { message, .. } if message.contains("statement timeout") => Error::Timeout {
                target: String::new(),
                seconds: timeout.unwrap_or_default().as_secs(),
            },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_numbered() {
        assert_eq!(
            numbered_placeholders(r#"select * from "a?" where x = ? and y in (select z from w where v = ?)"#),
            r#"select * from "a?" where x = $1 and y in (select z from w where v = $2)"#
        );
    }

    #[test]
    fn binding_follows_server_types() {
        assert!(bind(&SqlValue::Integer(7), &Type::INT4).is_ok());
        assert!(bind(&SqlValue::Integer(i64::MAX), &Type::INT4).is_err());
        assert!(bind(&SqlValue::Text("2001-04-30".into()), &Type::DATE).is_ok());
        assert!(bind(&SqlValue::Text("x".into()), &Type::DATE).is_err());
    }

    #[test]
    fn unreachable_server_is_a_connection_error() {
        let err = PostgresGateway::open("postgres://nobody@127.0.0.1:1/none?connect_timeout=1")
            .err()
            .unwrap();
        assert_eq!(err.code(), "connection_failed");
    }
}
