//! Fixture databases written to temporary SQLite files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use kwsearch_core::store::connect;
use kwsearch_core::{register_application, AdminAnnotations, Config, Searcher, SqlGateway, SsDb};
use tempfile::TempDir;

/// A SQLite database file that lives as long as the value.
pub struct Fixture {
    dir: TempDir,
    pub path: PathBuf,
    pub uri: String,
    /// Annotation file contents suggested for this fixture.
    pub annotations: String,
}

impl Fixture {
    /// Run `script` against a fresh database file.
    pub fn from_sql(script: &str, annotations: &str) -> Fixture {
        let dir = tempfile::tempdir().expect("temporary directory");
        let path = dir.path().join("app.db");
        let conn = rusqlite::Connection::open(&path).expect("create fixture database");
        // dangling references are deliberate in generated data
        conn.pragma_update(None, "foreign_keys", false).expect("pragma");
        conn.execute_batch(script).expect("fixture script");
        drop(conn);
        let uri = format!("sqlite://{}", path.display());
        Fixture {
            dir,
            path,
            uri,
            annotations: annotations.to_owned(),
        }
    }

    /// Scratch directory that is removed with the fixture.
    pub fn dir(&self) -> &Path {
        self.dir.path()
    }

    pub fn gateway(&self) -> Arc<dyn SqlGateway> {
        connect(&self.uri).expect("fixture gateway")
    }

    pub fn parsed_annotations(&self) -> AdminAnnotations {
        AdminAnnotations::parse(&self.annotations).expect("fixture annotations")
    }

    /// Register the fixture into a store in its scratch directory.
    pub fn harness(&self) -> Harness {
        self.harness_with(Config::default())
    }

    /// Register with the given configuration; its `uri` and `ssdb` are
    /// overwritten.
    pub fn harness_with(&self, mut config: Config) -> Harness {
        let gateway = self.gateway();
        let (content, _) = register_application(gateway.as_ref(), &self.parsed_annotations(), config.max_hops)
            .expect("fixture registration");
        let store_path = self.dir.path().join("ssdb.db");
        let store = SsDb::create(&store_path).expect("create store");
        store.save(&content).expect("save store");
        config.uri = Some(self.uri.clone());
        config.ssdb = store_path.clone();
        let searcher = Searcher::new(content, gateway, config).with_store(store);
        Harness { store_path, searcher }
    }
}

/// A registered fixture ready to answer queries.
pub struct Harness {
    pub store_path: PathBuf,
    pub searcher: Searcher,
}

/// The club example: members, the cities they live in and the sports
/// they take part in.
pub fn club() -> Fixture {
    club_annotated("index_default = \"all\"\n")
}

/// The club example under other annotations.
pub fn club_annotated(annotations: &str) -> Fixture {
    Fixture::from_sql(
        "create table City (Code varchar(16) primary key, Location varchar(40));
         create table Member (Name varchar(30) primary key, City varchar(16) references City(Code), Age integer);
         create table Activity (
             Name varchar(30) references Member(Name),
             Sport varchar(30),
             primary key (Name, Sport));
         insert into City values ('BO-3492', 'Illinois'), ('AT-1170', 'Georgia'), ('CH-2281', 'Illinois');
         insert into Member values ('John', 'BO-3492', 15), ('Mary', 'AT-1170', 22),
             ('Peter', 'CH-2281', 31), ('Susan', 'BO-3492', 27);
         insert into Activity values ('John', 'Running'), ('John', 'Biking'), ('Mary', 'Biking'),
             ('Peter', 'Running'), ('Susan', 'Swimming');",
        annotations,
    )
}

/// Courses, students and who studies what, plus faculty and their papers.
pub fn university() -> Fixture {
    Fixture::from_sql(
        "create table Course (cno varchar(8) primary key, title varchar(40), dept varchar(8));
         create table Student (sno varchar(8) primary key, name varchar(30), status varchar(8));
         create table Study (
             sno varchar(8) references Student(sno),
             cno varchar(8) references Course(cno),
             grade varchar(2),
             primary key (sno, cno));
         create table Faculty (fid varchar(8) primary key, name varchar(30), dept varchar(8));
         create table Papers (
             pid varchar(8),
             fid varchar(8) references Faculty(fid),
             area varchar(30),
             title varchar(60),
             primary key (pid, fid));
         insert into Course values ('C1', 'Databases', 'CS'), ('C2', 'Compilers', 'CS'),
             ('C3', 'Algebra', 'MATH'), ('C4', 'Optics', 'PHYS');
         insert into Student values ('S1', 'Alice', 'good'), ('S2', 'Bob', 'weak'), ('S3', 'Carol', 'weak'),
             ('S4', 'Dave', 'good'), ('S5', 'Erin', 'weak');
         insert into Study values ('S1', 'C1', 'A'), ('S2', 'C1', 'D'), ('S2', 'C3', 'C'), ('S3', 'C3', 'D'),
             ('S4', 'C2', 'B'), ('S5', 'C4', 'F'), ('S3', 'C4', 'D');
         insert into Faculty values ('F1', 'Sudarshan', 'CSE'), ('F2', 'Soumen', 'CSE'),
             ('F3', 'Ramamritham', 'CSE'), ('F4', 'Phatak', 'EE');
         insert into Papers values
             ('P1', 'F1', 'QueryOptimization', 'Joint plan search'),
             ('P1', 'F2', 'QueryOptimization', 'Joint plan search'),
             ('P2', 'F1', 'QueryOptimization', 'Volcano rules revisited'),
             ('P3', 'F2', 'QueryOptimization', 'Cost models for text'),
             ('P4', 'F1', 'Recovery', 'Joint logging'),
             ('P4', 'F2', 'Recovery', 'Joint logging'),
             ('P5', 'F3', 'QueryOptimization', 'Real-time plans'),
             ('P5', 'F1', 'QueryOptimization', 'Real-time plans');",
        "index_default = \"all\"\n",
    )
}

/// Departments and their employees.
pub fn dept_emp() -> Fixture {
    Fixture::from_sql(
        "create table Dept (dno integer primary key, dname varchar(20), location varchar(20));
         create table Emp (
             eno integer primary key,
             ename varchar(20),
             job_type varchar(20),
             dno integer references Dept(dno));
         insert into Dept values (10, 'Research', 'London'), (20, 'Sales', 'London'), (30, 'Operations', 'Paris'),
             (40, 'Admin', 'London');
         insert into Emp values (1, 'Smith', 'Programmer', 10), (2, 'Jones', 'Analyst', 10),
             (3, 'Brown', 'Programmer', 30), (4, 'Green', 'Clerk', 20), (5, 'White', 'Programmer', 10),
             (6, 'Black', 'Programmer', 40), (7, 'Gray', 'Programmer', null);",
        "index_default = \"all\"\n",
    )
}
