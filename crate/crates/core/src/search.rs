//! The end-to-end pipeline shared by the HTTP server and the command-line
//! tool, plus the registration workflow.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::catalog::{register_database, ColumnRef, SchemaCatalog, TableId};
use crate::config::{Config, UnmappedKeywordPolicy};
use crate::engine::{execute_plan, row_limit_apply, ExecOptions, SortDirection, SortOrderSpec};
use crate::error::{Error, Result};
use crate::lexicon::{IndexPolicy, Lexicon, VocEntry, VocScope};
use crate::parser::{interpret, tokenize, InterpretOptions, Interpretation, PathTerm, QueryTree};
use crate::planner::sql::quote_ident;
use crate::planner::{attach_ranking, plan, plan_single, PlanOptions, RankMode};
use crate::presenter::{
    annotate, column_caption, describe_interpretation, render_html, render_html_groups, render_json, render_text,
    table_caption, ResultDocument,
};
use crate::store::annotations::AdminAnnotations;
use crate::store::{connect, SqlGateway, SsDb, SsDbContent};
use crate::value::SqlValue;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpMode {
    /// Execute only the preferred interpretation.
    #[default]
    Best,
    /// Execute every interpretation up to the cap.
    All,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Html,
    /// Plain-text tables.
    Table,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "json" => Some(OutputFormat::Json),
            "html" => Some(OutputFormat::Html),
            "table" | "text" => Some(OutputFormat::Table),
            _ => None,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            OutputFormat::Json => "application/json",
            OutputFormat::Html => "text/html; charset=utf-8",
            OutputFormat::Table => "text/plain; charset=utf-8",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRequest {
    pub q: String,
    pub rank: RankMode,
    pub interp: InterpMode,
    pub limit: Option<usize>,
    pub offset: usize,
    pub format: OutputFormat,
}

impl SearchRequest {
    pub fn new(q: impl Into<String>) -> SearchRequest {
        SearchRequest {
            q: q.into(),
            rank: RankMode::None,
            interp: InterpMode::Best,
            limit: None,
            offset: 0,
            format: OutputFormat::Json,
        }
    }

    /// Build from `(name, value)` pairs as found in a query string.
    /// Unknown names are rejected.
    pub fn from_params<'a>(params: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<SearchRequest> {
        let mut req = SearchRequest::new("");
        let mut have_q = false;
        for (k, v) in params {
            match k {
                "q" => {
                    req.q = v.to_owned();
                    have_q = true;
                }
                "rank" => {
                    req.rank = RankMode::parse(v).ok_or_else(|| {
                        Error::Validation(format!("rank must be fk_count, app_sort or none, got `{v}`"))
                    })?
                }
                "interp" => {
                    req.interp = match v {
                        "best" => InterpMode::Best,
                        "all" => InterpMode::All,
                        _ => return Err(Error::Validation(format!("interp must be best or all, got `{v}`"))),
                    }
                }
                "limit" => {
                    req.limit = Some(
                        v.parse()
                            .map_err(|_| Error::Validation(format!("limit must be a positive integer, got `{v}`")))?,
                    )
                }
                "offset" => {
                    req.offset = v
                        .parse()
                        .map_err(|_| Error::Validation(format!("offset must be a non-negative integer, got `{v}`")))?
                }
                "format" => {
                    req.format = match OutputFormat::parse(v) {
                        Some(f @ (OutputFormat::Json | OutputFormat::Html)) => f,
                        _ => return Err(Error::Validation(format!("format must be json or html, got `{v}`"))),
                    }
                }
                other => return Err(Error::Validation(format!("unknown parameter `{other}`"))),
            }
        }
        if !have_q {
            return Err(Error::Validation("missing parameter `q`".into()));
        }
        Ok(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DrillDirection {
    /// The keyed row of the table.
    Row,
    /// Rows of the table whose foreign key `fk_no` carries the given values.
    Referencing,
}

/// Query-string names reserved for paging and format on drill endpoints.
pub const DRILL_CONTROL_PARAMS: [&str; 3] = ["_format", "_limit", "_offset"];

/// A request to follow a link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrillRequest {
    pub table: String,
    pub key_values: Vec<(String, String)>,
    pub direction: DrillDirection,
    pub fk_no: Option<u32>,
}

fn encode_segment(s: &str) -> String {
    url::form_urlencoded::byte_serialize(s.as_bytes())
        .collect::<String>()
        .replace('+', "%20")
}

impl DrillRequest {
    /// Server-relative URL: `/api/row/{table}?col=v&...` or
    /// `/api/related/{table}/{fk_no}?col=v&...`.
    pub fn href(&self) -> String {
        let mut query = url::form_urlencoded::Serializer::new(String::new());
        for (k, v) in &self.key_values {
            query.append_pair(k, v);
        }
        let query = query.finish();
        let path = match (self.direction, self.fk_no) {
            (DrillDirection::Referencing, Some(n)) => format!("/api/related/{}/{n}", encode_segment(&self.table)),
            _ => format!("/api/row/{}", encode_segment(&self.table)),
        };
        if query.is_empty() {
            path
        } else {
            format!("{path}?{query}")
        }
    }

    /// Parse an href produced by [`DrillRequest::href`]. Control parameters
    /// (`_format`, `_limit`, `_offset`) are ignored.
    pub fn from_href(href: &str) -> Result<DrillRequest> {
        let bad = || Error::Validation(format!("not a drill link: `{href}`"));
        let parsed = url::Url::parse("http://localhost")
            .unwrap()
            .join(href)
            .map_err(|_| bad())?;
        let segments: Vec<String> = parsed
            .path_segments()
            .ok_or_else(bad)?
            .map(|s| {
                url::form_urlencoded::parse(format!("x={}", s.replace('+', "%2B")).as_bytes())
                    .next()
                    .map(|(_, v)| v.into_owned())
                    .unwrap_or_default()
            })
            .collect();
        let key_values: Vec<(String, String)> = parsed
            .query_pairs()
            .filter(|(k, _)| !DRILL_CONTROL_PARAMS.contains(&k.as_ref()))
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect();
        match segments.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            ["api", "row", table] => Ok(DrillRequest {
                table: table.to_owned(),
                key_values,
                direction: DrillDirection::Row,
                fk_no: None,
            }),
            ["api", "related", table, n] => Ok(DrillRequest {
                table: table.to_owned(),
                key_values,
                direction: DrillDirection::Referencing,
                fk_no: Some(n.parse().map_err(|_| bad())?),
            }),
            _ => Err(bad()),
        }
    }
}

/// Result of a search: one document, or one per interpretation.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Single(ResultDocument),
    Groups { query: String, groups: Vec<ResultDocument> },
}

#[derive(Serialize)]
struct GroupsView<'a> {
    query: &'a str,
    groups: &'a [ResultDocument],
}

/// A rendered response body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub content_type: &'static str,
    pub body: String,
}

impl SearchOutcome {
    pub fn render(&self, format: OutputFormat, base_url: &str) -> Rendered {
        let body = match (self, format) {
            (SearchOutcome::Single(d), OutputFormat::Json) => render_json(d),
            (SearchOutcome::Single(d), OutputFormat::Html) => render_html(d, base_url),
            (SearchOutcome::Single(d), OutputFormat::Table) => render_text(d),
            (SearchOutcome::Groups { query, groups }, OutputFormat::Json) => render_json(&GroupsView { query, groups }),
            (SearchOutcome::Groups { query, groups }, OutputFormat::Html) => {
                render_html_groups(query, groups, base_url)
            }
            (SearchOutcome::Groups { groups, .. }, OutputFormat::Table) => groups
                .iter()
                .enumerate()
                .map(|(i, d)| format!("== Reading {} ==\n{}", i + 1, render_text(d)))
                .collect::<Vec<_>>()
                .join("\n"),
        };
        Rendered {
            content_type: format.content_type(),
            body,
        }
    }
}

/// Everything needed to answer queries against one registered database.
pub struct Searcher {
    catalog: SchemaCatalog,
    lexicon: Lexicon,
    sort_orders: Vec<SortOrderSpec>,
    gateway: Arc<dyn SqlGateway>,
    config: Config,
    store: Option<SsDb>,
    exec: ExecOptions,
}

impl Searcher {
    pub fn new(content: SsDbContent, gateway: Arc<dyn SqlGateway>, config: Config) -> Searcher {
        let exec = ExecOptions {
            timeout: config.query_timeout(),
            sequential: false,
        };
        Searcher {
            catalog: content.catalog,
            lexicon: content.lexicon,
            sort_orders: content.sort_orders,
            gateway,
            config,
            store: None,
            exec,
        }
    }

    /// Load the store named by the configuration and connect to the
    /// application database (the configured descriptor, else the one
    /// recorded at registration).
    pub fn open(config: Config) -> Result<Searcher> {
        let store = SsDb::open(&config.ssdb)?;
        let content = store.load()?;
        let uri = match (&config.uri, content.meta.get("uri")) {
            (Some(u), _) => u.clone(),
            (None, Some(u)) => u.clone(),
            (None, None) => return Err(Error::Config("no database descriptor configured or recorded".into())),
        };
        let gateway = connect(&uri)?;
        let mut s = Searcher::new(content, gateway, config);
        s.store = Some(store);
        Ok(s)
    }

    /// Persist index entries found by fallback scans to this store.
    pub fn with_store(mut self, store: SsDb) -> Searcher {
        self.store = Some(store);
        self
    }

    pub fn with_exec_options(mut self, exec: ExecOptions) -> Searcher {
        self.exec = exec;
        self
    }

    pub fn catalog(&self) -> &SchemaCatalog {
        &self.catalog
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn gateway(&self) -> &dyn SqlGateway {
        self.gateway.as_ref()
    }

    pub fn sort_orders(&self) -> &[SortOrderSpec] {
        &self.sort_orders
    }

    fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            max_hops: self.config.max_hops.min(self.catalog.max_hops().max(1)),
        }
    }

    /// Candidate interpretations of a query, best first.
    pub fn interpretations(&self, q: &str) -> Result<Vec<(Interpretation, QueryTree)>> {
        if q.trim().is_empty() {
            return Err(Error::Validation("the query is empty".into()));
        }
        let tokens = tokenize(q)?;
        let options = InterpretOptions {
            cap: self.config.interp_cap,
            policy: self.config.unmapped_keyword,
        };
        let mut fallback = |value: &str| -> Result<Vec<ColumnRef>> {
            let found = self
                .lexicon
                .fallback_scan(self.gateway.as_ref(), &self.catalog, value)?;
            if let Some(store) = &self.store {
                store.append_vmap(&found.added)?;
            }
            Ok(found.hits)
        };
        interpret(&tokens, &self.lexicon, &self.catalog, options, &mut fallback)
    }

    fn page(&self, limit: Option<usize>, offset: usize) -> Result<(usize, usize)> {
        let limit = limit.unwrap_or(self.config.default_limit);
        if limit == 0 || limit > self.config.max_limit {
            return Err(Error::Validation(format!(
                "limit must be between 1 and {}",
                self.config.max_limit
            )));
        }
        Ok((limit, offset))
    }

    /// Plan, rank, execute and annotate one interpretation.
    pub fn run_interpretation(
        &self,
        q: &str,
        interp: &Interpretation,
        rank: RankMode,
        limit: usize,
        offset: usize,
    ) -> Result<ResultDocument> {
        let plan = plan(interp, &self.catalog, self.plan_options())?;
        let plan = attach_ranking(plan, &self.catalog, rank, &self.sort_orders);
        let sets = execute_plan(&plan, self.gateway.as_ref(), &self.catalog, self.exec)?;
        let sets = sets.into_iter().map(|s| row_limit_apply(s, limit, offset)).collect();
        let mut doc = annotate(q, sets, &self.catalog, &self.lexicon);
        doc.interpretation = Some(describe_interpretation(interp, &plan, &self.catalog, &self.lexicon));
        doc.diagnostics.splice(0..0, plan.notes.iter().cloned());
        Ok(doc)
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchOutcome> {
        let (limit, offset) = self.page(req.limit, req.offset)?;
        let interps = self.interpretations(&req.q)?;
        match req.interp {
            InterpMode::Best => {
                let (best, _) = &interps[0];
                Ok(SearchOutcome::Single(
                    self.run_interpretation(&req.q, best, req.rank, limit, offset)?,
                ))
            }
            InterpMode::All => {
                let mut groups = Vec::with_capacity(interps.len());
                let mut first_error = None;
                for (interp, _) in &interps {
                    match self.run_interpretation(&req.q, interp, req.rank, limit, offset) {
                        Ok(d) => groups.push(d),
                        Err(e) if e.is_client_error() => {
                            let mut d = annotate(&req.q, Vec::new(), &self.catalog, &self.lexicon);
                            d.diagnostics = vec![e.to_string()];
                            groups.push(d);
                            first_error.get_or_insert(e);
                        }
                        Err(e) => return Err(e),
                    }
                }
                if groups.iter().all(|g| g.frames.is_empty()) {
                    if let Some(e) = first_error {
                        return Err(e);
                    }
                }
                Ok(SearchOutcome::Groups {
                    query: req.q.clone(),
                    groups,
                })
            }
        }
    }

    /// Search and render in the requested format.
    pub fn respond(&self, req: &SearchRequest, base_url: &str) -> Result<Rendered> {
        Ok(self.search(req)?.render(req.format, base_url))
    }

    /// Follow a link: the keyed row of a table, or the rows of a table whose
    /// foreign key carries the given values.
    pub fn drill(&self, req: &DrillRequest, limit: Option<usize>, offset: usize) -> Result<ResultDocument> {
        let (limit, offset) = self.page(limit, offset)?;
        let table = self
            .catalog
            .table_by_name(&req.table)
            .ok_or_else(|| Error::UnknownTable(req.table.clone()))?
            .table_id;
        let fk_columns = match req.direction {
            DrillDirection::Row => None,
            DrillDirection::Referencing => {
                let n = req
                    .fk_no
                    .ok_or_else(|| Error::Validation("a referencing link needs a foreign key number".into()))?;
                let fk = self
                    .catalog
                    .foreign_keys_from(table)
                    .find(|f| f.fk_no == n)
                    .ok_or_else(|| Error::UnknownColumn {
                        table: req.table.clone(),
                        column: format!("foreign key {n}"),
                    })?;
                Some(fk.from_columns().collect::<Vec<_>>())
            }
        };
        if req.key_values.is_empty() {
            return Err(Error::Validation("a drill link needs at least one key value".into()));
        }
        let mut terms = Vec::new();
        for (name, value) in &req.key_values {
            let col = self
                .catalog
                .column_by_name(table, name)
                .ok_or_else(|| Error::UnknownColumn {
                    table: req.table.clone(),
                    column: name.clone(),
                })?;
            if let Some(fk_cols) = &fk_columns {
                if !fk_cols.contains(&col.column_id) {
                    return Err(Error::Validation(format!(
                        "column `{name}` is not part of foreign key {}",
                        req.fk_no.unwrap_or_default()
                    )));
                }
            }
            terms.push(PathTerm::value(col.column_ref(), value, false));
        }
        let interp = Interpretation {
            terms,
            score: Default::default(),
        };
        let plan = plan_single(&interp, &self.catalog)?;
        let sets = execute_plan(&plan, self.gateway.as_ref(), &self.catalog, self.exec)?;
        let sets = sets.into_iter().map(|s| row_limit_apply(s, limit, offset)).collect();
        let conds: Vec<String> = req.key_values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        let echo = format!("{} where {}", req.table, conds.join(" and "));
        Ok(annotate(&echo, sets, &self.catalog, &self.lexicon))
    }

    /// Page through all rows of one table.
    pub fn browse(&self, table: &str, limit: Option<usize>, offset: usize) -> Result<ResultDocument> {
        let (limit, offset) = self.page(limit, offset)?;
        let t = self
            .catalog
            .table_by_name(table)
            .ok_or_else(|| Error::UnknownTable(table.to_owned()))?
            .table_id;
        let interp = Interpretation {
            terms: vec![PathTerm::relation(t)],
            score: Default::default(),
        };
        let plan = plan_single(&interp, &self.catalog)?;
        let sets = execute_plan(&plan, self.gateway.as_ref(), &self.catalog, self.exec)?;
        let sets = sets.into_iter().map(|s| row_limit_apply(s, limit, offset)).collect();
        Ok(annotate(self.catalog.table_name(t), sets, &self.catalog, &self.lexicon))
    }

    /// The catalog with captions, as served by the schema endpoint.
    pub fn schema_document(&self) -> SchemaDocument {
        schema_document(&self.catalog, &self.lexicon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaDocument {
    pub max_hops: usize,
    pub tables: Vec<SchemaTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaTable {
    pub name: String,
    pub caption: String,
    pub description: String,
    pub columns: Vec<SchemaColumn>,
    pub keys: Vec<SchemaKey>,
    pub foreign_keys: Vec<SchemaForeignKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaColumn {
    pub name: String,
    pub caption: String,
    #[serde(rename = "type")]
    pub data_type: crate::catalog::DataType,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaKey {
    pub key_no: u32,
    pub primary: bool,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaForeignKey {
    pub fk_no: u32,
    pub columns: Vec<String>,
    pub references: String,
    pub referenced_columns: Vec<String>,
}

pub fn schema_document(catalog: &SchemaCatalog, lexicon: &Lexicon) -> SchemaDocument {
    let col = |t: TableId, c| catalog.column_name(ColumnRef::new(t, c)).to_owned();
    SchemaDocument {
        max_hops: catalog.max_hops(),
        tables: catalog
            .tables()
            .iter()
            .map(|t| SchemaTable {
                name: t.name.clone(),
                caption: table_caption(catalog, lexicon, t.table_id),
                description: t.description.clone(),
                columns: catalog
                    .columns_of(t.table_id)
                    .iter()
                    .map(|c| SchemaColumn {
                        name: c.name.clone(),
                        caption: column_caption(catalog, lexicon, c.column_ref()),
                        data_type: c.data_type,
                        description: c.description.clone(),
                    })
                    .collect(),
                keys: catalog
                    .keys_of(t.table_id)
                    .map(|k| SchemaKey {
                        key_no: k.key_no,
                        primary: k.is_primary(),
                        columns: k.columns.iter().map(|c| col(t.table_id, *c)).collect(),
                    })
                    .collect(),
                foreign_keys: catalog
                    .foreign_keys_from(t.table_id)
                    .map(|f| SchemaForeignKey {
                        fk_no: f.fk_no,
                        columns: f.from_columns().map(|c| col(t.table_id, c)).collect(),
                        references: catalog.table_name(f.to_table).to_owned(),
                        referenced_columns: f.to_columns().map(|c| col(f.to_table, c)).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Counts reported after registration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RegistrationReport {
    pub tables: usize,
    pub columns: usize,
    pub keys: usize,
    pub foreign_keys: usize,
    pub paths: usize,
    pub vmap_entries: usize,
    pub voc_entries: usize,
    pub sort_orders: usize,
    pub warnings: Vec<String>,
}

fn vocabulary_scope(catalog: &SchemaCatalog, internal: &str, explicit: Option<&str>) -> Result<VocScope> {
    if let Some(s) = explicit {
        return VocScope::parse(s).ok_or_else(|| Error::Annotations(format!("unknown vocabulary scope `{s}`")));
    }
    if catalog.table_by_name(internal).is_some() {
        return Ok(VocScope::TableName);
    }
    if let Some((t, c)) = internal.split_once('.') {
        if let Some(t) = catalog.table_by_name(t) {
            if catalog.column_by_name(t.table_id, c).is_some() {
                return Ok(VocScope::ColumnName);
            }
        }
    }
    Ok(VocScope::ValueCode)
}

/// Introspect the database, merge annotations, compute join paths, build
/// the value index and vocabulary, and return the store content to save.
pub fn register_application(
    gateway: &dyn SqlGateway,
    annotations: &AdminAnnotations,
    max_hops: usize,
) -> Result<(SsDbContent, RegistrationReport)> {
    let reg = register_database(gateway, annotations)?;
    let catalog = reg.catalog.compute_paths(max_hops);
    let mut warnings = reg.warnings;

    let mut lexicon = Lexicon::new();
    let policy = IndexPolicy::from_annotations(&catalog, annotations);
    lexicon.build_vmap(gateway, &catalog, &policy)?;

    for v in &annotations.vocabulary {
        let scope = vocabulary_scope(&catalog, &v.internal, v.scope.as_deref())?;
        let added = lexicon.add_vocabulary(VocEntry {
            external: v.external.clone(),
            internal: v.internal.clone(),
            scope,
        });
        if !added {
            warnings.push(format!(
                "vocabulary term `{}` ({}) defined twice; first kept",
                v.external,
                scope.as_str()
            ));
        }
    }
    for ct in &annotations.code_tables {
        let t = catalog
            .table_by_name(&ct.table)
            .ok_or_else(|| Error::Annotations(format!("code table `{}` does not exist", ct.table)))?;
        let find = |name: &str| {
            catalog
                .column_by_name(t.table_id, name)
                .ok_or_else(|| Error::Annotations(format!("code table `{}` has no column `{name}`", ct.table)))
        };
        let (code, desc) = (find(&ct.code_column)?, find(&ct.description_column)?);
        let sql = format!(
            "select {}, {} from {}",
            quote_ident(&code.name),
            quote_ident(&desc.name),
            quote_ident(&t.name)
        );
        let rows = gateway.open_session()?.run_select(&sql, &[], None)?;
        for row in rows.rows {
            let (Some(code), Some(desc)) = (row[0].display_text(), row[1].display_text()) else {
                continue;
            };
            lexicon.add_vocabulary(VocEntry {
                external: desc,
                internal: code,
                scope: VocScope::ValueCode,
            });
        }
    }

    let mut sort_orders = Vec::new();
    for s in &annotations.sort_orders {
        let t = catalog
            .table_by_name(&s.table)
            .ok_or_else(|| Error::Annotations(format!("sort order names unknown table `{}`", s.table)))?;
        let c = catalog
            .column_by_name(t.table_id, &s.column)
            .ok_or_else(|| Error::Annotations(format!("sort order names unknown column `{}.{}`", s.table, s.column)))?;
        let direction = SortDirection::parse(&s.direction)
            .ok_or_else(|| Error::Annotations(format!("sort direction must be asc or desc, got `{}`", s.direction)))?;
        sort_orders.push(SortOrderSpec {
            table_id: t.table_id,
            column_id: c.column_id,
            direction,
        });
    }

    let report = RegistrationReport {
        tables: catalog.tables().len(),
        columns: catalog.columns().len(),
        keys: catalog.keys().len(),
        foreign_keys: catalog.foreign_keys().len(),
        paths: catalog.all_paths().count(),
        vmap_entries: lexicon.vmap_len(),
        voc_entries: lexicon.voc_entries().count(),
        sort_orders: sort_orders.len(),
        warnings,
    };
    let mut meta = BTreeMap::new();
    meta.insert("uri".to_owned(), gateway.descriptor().to_owned());
    Ok((
        SsDbContent {
            catalog,
            lexicon,
            sort_orders,
            meta,
        },
        report,
    ))
}

/// Rows that a keyword-free lookup would return; used by callers that only
/// need raw values.
pub fn cell_text(v: &SqlValue) -> String {
    v.display_text().unwrap_or_else(|| "NULL".to_owned())
}

#[allow(dead_code)]
fn policy_name(p: UnmappedKeywordPolicy) -> &'static str {
    p.as_str()
}
