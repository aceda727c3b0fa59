//! Access to the application database and persistence of the search
//! system's own store.

pub mod annotations;
mod gateway;
#[cfg(feature = "postgres")]
pub mod postgres;
pub mod sqlite;
mod ssdb;

pub use gateway::{
    connect, introspect, run_select, RawColumn, RawForeignKey, RawSchema, RawTable, Rows, Session, SqlGateway,
};
pub use ssdb::{load_ssdb, save_ssdb, SsDb, SsDbContent};
