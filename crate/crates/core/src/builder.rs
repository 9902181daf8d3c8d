//! Plug-and-produce ingestion: four engineer-authored CSV files describing
//! resources, process plans, features and products are validated and
//! turned into ABox triples.
//!
//! | file            | columns                                                          |
//! |-----------------|------------------------------------------------------------------|
//! | `resources.csv` | `id,kind,capableOf` (plan ids separated by `;`)                  |
//! | `processes.csv` | `id,realizes,machine,durationMin,energyKwh,emissions,quality`    |
//! | `features.csv`  | `id,description`                                                 |
//! | `products.csv`  | `id,features,deadline,objective` (`metric=value;...`)            |
//!
//! A `processes.csv` row with a `machine` describes that machine's own
//! variant of the plan: it becomes the plan instance `<id>@<machine>` with
//! its own expected performance, and the machine is `capableOf` only that
//! variant. Rows without a machine attach the performance to the plan
//! itself.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use serde::Serialize;

use crate::kb::vocab::{self, *};
use crate::kb::{
    format_datetime, parse_datetime, Changeset, Iri, KbError, KnowledgeBase, Literal, Term, Triple, UpdateStats,
};
use crate::runtime::{Coefficient, Metric, Performance};

pub const RESOURCES_CSV: &str = "resources.csv";
pub const PROCESSES_CSV: &str = "processes.csv";
pub const FEATURES_CSV: &str = "features.csv";
pub const PRODUCTS_CSV: &str = "products.csv";
pub const BUNDLE_FILES: [&str; 4] = [RESOURCES_CSV, PROCESSES_CSV, FEATURES_CSV, PRODUCTS_CSV];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("{file}:{line}: CSV syntax error: {message}")]
    CsvSyntax { file: String, line: u64, message: String },
    #[error("{file}:{line}: reference to undeclared id {id:?}")]
    DanglingReference { file: String, line: u64, id: String },
    #[error("{file}:{line}: invalid {field}: {message}")]
    DomainViolation {
        file: String,
        line: u64,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Kb(#[from] KbError),
}

impl BuildError {
    pub fn location(&self) -> Option<(&str, u64)> {
        match self {
            BuildError::CsvSyntax { file, line, .. }
            | BuildError::DanglingReference { file, line, .. }
            | BuildError::DomainViolation { file, line, .. } => Some((file, *line)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Machine,
    Robot,
    Buffer,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Machine => "machine",
            ResourceKind::Robot => "robot",
            ResourceKind::Buffer => "buffer",
        }
    }

    pub fn class(self) -> &'static str {
        match self {
            ResourceKind::Machine => MACHINE,
            ResourceKind::Robot => ROBOT,
            ResourceKind::Buffer => BUFFER,
        }
    }
}

impl FromStr for ResourceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "machine" => Ok(ResourceKind::Machine),
            "robot" => Ok(ResourceKind::Robot),
            "buffer" => Ok(ResourceKind::Buffer),
            _ => Err(format!("unknown resource kind {s:?}")),
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceSpec {
    pub id: String,
    pub kind: ResourceKind,
    pub capable_of: Vec<String>,
}

/// One `processes.csv` row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessPlanSpec {
    pub id: String,
    pub realizes: String,
    pub machine: Option<String>,
    pub expected: Performance,
}

impl ProcessPlanSpec {
    /// Local name of the plan instance this row describes.
    pub fn instance_id(&self) -> String {
        match &self.machine {
            Some(m) => plan_variant_id(&self.id, m),
            None => self.id.clone(),
        }
    }
}

pub fn plan_variant_id(plan: &str, machine: &str) -> String {
    format!("{plan}@{machine}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub id: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpec {
    pub id: String,
    pub defines: Vec<String>,
    pub deadline: DateTime<Utc>,
    pub coefficients: Vec<Coefficient>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlantDescription {
    pub resources: Vec<ResourceSpec>,
    pub process_plans: Vec<ProcessPlanSpec>,
    pub features: Vec<FeatureSpec>,
    pub products: Vec<ProductSpec>,
}

impl PlantDescription {
    pub fn resource(&self, id: &str) -> Option<&ResourceSpec> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn product(&self, id: &str) -> Option<&ProductSpec> {
        self.products.iter().find(|p| p.id == id)
    }
}

// ---------------------------------------------------------------- parsing

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Rows of one CSV file keyed by header name, with 1-based line numbers.
struct Table {
    file: &'static str,
    rows: Vec<(u64, HashMap<String, String>)>,
}

impl Table {
    fn read(file: &'static str, text: &str, columns: &[&str]) -> Result<Table, BuildError> {
        let syntax = |line: u64, message: String| BuildError::CsvSyntax {
            file: file.into(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| syntax(e.position().map_or(1, |p| p.line()), e.to_string()))?
            .clone();
        for col in columns {
            if !headers.iter().any(|h| h == *col) {
                return Err(syntax(1, format!("missing column {col:?}")));
            }
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| syntax(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let map = headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect();
            rows.push((line, map));
        }
        Ok(Table { file, rows })
    }
}

struct Ctx<'a> {
    file: &'static str,
    line: u64,
    row: &'a HashMap<String, String>,
}

impl Ctx<'_> {
    fn get(&self, col: &str) -> &str {
        self.row.get(col).map(String::as_str).unwrap_or("")
    }

    fn violation(&self, field: &str, message: impl Into<String>) -> BuildError {
        BuildError::DomainViolation {
            file: self.file.into(),
            line: self.line,
            field: field.into(),
            message: message.into(),
        }
    }

    fn dangling(&self, id: &str) -> BuildError {
        BuildError::DanglingReference {
            file: self.file.into(),
            line: self.line,
            id: id.into(),
        }
    }

    fn id(&self, col: &str) -> Result<String, BuildError> {
        let v = self.get(col);
        if !valid_id(v) {
            return Err(self.violation(col, format!("{v:?} is not a valid id (letters, digits, '_', '-', '.')")));
        }
        Ok(v.to_string())
    }

    fn decimal(&self, col: &str) -> Result<Decimal, BuildError> {
        let v = self.get(col);
        Literal::parse(v, crate::kb::Datatype::Decimal)
            .ok()
            .and_then(|l| l.as_decimal())
            .ok_or_else(|| self.violation(col, format!("{v:?} is not a decimal number")))
    }
}

/// Parses and validates the four-file bundle (`name → CSV text`).
pub fn parse_csv_bundle(files: &BTreeMap<String, String>) -> Result<PlantDescription, BuildError> {
    let text = |name: &str| {
        files
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| BuildError::MissingFile(name.to_string()))
    };
    let resources_t = Table::read(RESOURCES_CSV, text(RESOURCES_CSV)?, &["id", "kind", "capableOf"])?;
    let processes_t = Table::read(
        PROCESSES_CSV,
        text(PROCESSES_CSV)?,
        &[
            "id",
            "realizes",
            "machine",
            "durationMin",
            "energyKwh",
            "emissions",
            "quality",
        ],
    )?;
    let features_t = Table::read(FEATURES_CSV, text(FEATURES_CSV)?, &["id", "description"])?;
    let products_t = Table::read(
        PRODUCTS_CSV,
        text(PRODUCTS_CSV)?,
        &["id", "features", "deadline", "objective"],
    )?;

    let mut pd = PlantDescription::default();
    let mut entity_ids: HashSet<String> = HashSet::new();
    let claim = |ctx: &Ctx, id: &str, ids: &mut HashSet<String>| {
        if ids.insert(id.to_string()) {
            Ok(())
        } else {
            Err(ctx.violation("id", format!("duplicate id {id:?}")))
        }
    };

    // features
    for (line, row) in &features_t.rows {
        let ctx = Ctx {
            file: features_t.file,
            line: *line,
            row,
        };
        let id = ctx.id("id")?;
        claim(&ctx, &id, &mut entity_ids)?;
        pd.features.push(FeatureSpec {
            id,
            description: ctx.get("description").to_string(),
        });
    }
    let feature_ids: HashSet<&str> = pd.features.iter().map(|f| f.id.as_str()).collect();

    // resources (capableOf resolved after plans are known)
    let mut resource_lines = Vec::new();
    for (line, row) in &resources_t.rows {
        let ctx = Ctx {
            file: resources_t.file,
            line: *line,
            row,
        };
        let id = ctx.id("id")?;
        claim(&ctx, &id, &mut entity_ids)?;
        let kind = ctx.get("kind").parse().map_err(|e: String| ctx.violation("kind", e))?;
        pd.resources.push(ResourceSpec {
            id,
            kind,
            capable_of: split_list(ctx.get("capableOf")),
        });
        resource_lines.push(*line);
    }

    // process plans
    let mut plan_feature: HashMap<String, String> = HashMap::new();
    let mut plan_rows: HashSet<(String, Option<String>)> = HashSet::new();
    for (line, row) in &processes_t.rows {
        let ctx = Ctx {
            file: processes_t.file,
            line: *line,
            row,
        };
        let id = ctx.id("id")?;
        let realizes = ctx.id("realizes")?;
        if !feature_ids.contains(realizes.as_str()) {
            return Err(ctx.dangling(&realizes));
        }
        let machine = match ctx.get("machine") {
            "" => None,
            _ => {
                let m = ctx.id("machine")?;
                match pd.resource(&m) {
                    None => return Err(ctx.dangling(&m)),
                    Some(r) if r.kind != ResourceKind::Machine => {
                        return Err(ctx.violation("machine", format!("{m:?} is a {}, not a machine", r.kind)))
                    }
                    Some(_) => Some(m),
                }
            }
        };
        match plan_feature.get(&id) {
            Some(f) if *f != realizes => {
                return Err(ctx.violation("realizes", format!("plan {id:?} already realizes {f:?}")));
            }
            Some(_) => {}
            None => {
                if entity_ids.contains(&id) {
                    return Err(ctx.violation("id", format!("duplicate id {id:?}")));
                }
                plan_feature.insert(id.clone(), realizes.clone());
            }
        }
        if !plan_rows.insert((id.clone(), machine.clone())) {
            return Err(ctx.violation("id", format!("duplicate row for plan {id:?}")));
        }
        let expected = Performance::new(
            ctx.decimal("durationMin")?,
            ctx.decimal("energyKwh")?,
            ctx.decimal("emissions")?,
            ctx.decimal("quality")?,
        )
        .map_err(|v| ctx.violation(v.field, v.reason))?;
        pd.process_plans.push(ProcessPlanSpec {
            id,
            realizes,
            machine,
            expected,
        });
    }
    entity_ids.extend(plan_feature.keys().cloned());

    // capableOf must name a plan and, for machine-specific plans, a variant for this machine
    for (res, (line, row)) in pd.resources.iter().zip(&resources_t.rows) {
        let ctx = Ctx {
            file: resources_t.file,
            line: *line,
            row,
        };
        for plan in &res.capable_of {
            if !plan_feature.contains_key(plan) {
                return Err(ctx.dangling(plan));
            }
            let generic = plan_rows.contains(&(plan.clone(), None));
            let specific = plan_rows.contains(&(plan.clone(), Some(res.id.clone())));
            if !generic && !specific {
                return Err(ctx.dangling(&plan_variant_id(plan, &res.id)));
            }
        }
    }

    // products
    for (line, row) in &products_t.rows {
        let ctx = Ctx {
            file: products_t.file,
            line: *line,
            row,
        };
        let id = ctx.id("id")?;
        claim(&ctx, &id, &mut entity_ids)?;
        let defines = split_list(ctx.get("features"));
        if defines.is_empty() {
            return Err(ctx.violation("features", "at least one feature is required"));
        }
        for f in &defines {
            if !feature_ids.contains(f.as_str()) {
                return Err(ctx.dangling(f));
            }
        }
        let deadline_text = ctx.get("deadline");
        let deadline = parse_datetime(deadline_text).ok_or_else(|| {
            ctx.violation(
                "deadline",
                format!("{deadline_text:?} is not an ISO-8601 UTC timestamp"),
            )
        })?;
        let coefficients = parse_objective(ctx.get("objective")).map_err(|m| ctx.violation("objective", m))?;
        pd.products.push(ProductSpec {
            id,
            defines,
            deadline,
            coefficients,
        });
    }
    Ok(pd)
}

fn parse_objective(text: &str) -> Result<Vec<Coefficient>, String> {
    let mut out: Vec<Coefficient> = Vec::new();
    for part in split_list(text) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("{part:?} is not metric=value"))?;
        let metric: Metric = name.trim().parse()?;
        let value = Literal::parse(value.trim(), crate::kb::Datatype::Decimal)
            .ok()
            .and_then(|l| l.as_decimal())
            .ok_or_else(|| format!("{value:?} is not a decimal number"))?;
        if out.iter().any(|c| c.metric == metric) {
            return Err(format!("metric {metric} given twice"));
        }
        out.push(Coefficient { metric, value });
    }
    if out.is_empty() {
        return Err("at least one coefficient is required".into());
    }
    Ok(out)
}

// -------------------------------------------------------------- rendering

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

/// Renders a description back into the four CSV files.
pub fn render_csv_bundle(pd: &PlantDescription) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert(
        RESOURCES_CSV.to_string(),
        write_csv(
            &["id", "kind", "capableOf"],
            pd.resources
                .iter()
                .map(|r| vec![r.id.clone(), r.kind.to_string(), r.capable_of.join(";")]),
        ),
    );
    out.insert(
        PROCESSES_CSV.to_string(),
        write_csv(
            &[
                "id",
                "realizes",
                "machine",
                "durationMin",
                "energyKwh",
                "emissions",
                "quality",
            ],
            pd.process_plans.iter().map(|p| {
                vec![
                    p.id.clone(),
                    p.realizes.clone(),
                    p.machine.clone().unwrap_or_default(),
                    p.expected.duration_min().to_string(),
                    p.expected.energy_kwh().to_string(),
                    p.expected.emissions().to_string(),
                    p.expected.quality().to_string(),
                ]
            }),
        ),
    );
    out.insert(
        FEATURES_CSV.to_string(),
        write_csv(
            &["id", "description"],
            pd.features.iter().map(|f| vec![f.id.clone(), f.description.clone()]),
        ),
    );
    out.insert(
        PRODUCTS_CSV.to_string(),
        write_csv(
            &["id", "features", "deadline", "objective"],
            pd.products.iter().map(|p| {
                let objective: Vec<String> = p
                    .coefficients
                    .iter()
                    .map(|c| format!("{}={}", c.metric, c.value))
                    .collect();
                vec![
                    p.id.clone(),
                    p.defines.join(";"),
                    format_datetime(&p.deadline),
                    objective.join(";"),
                ]
            }),
        ),
    );
    out
}

/// Reads the four bundle files from a directory.
pub fn read_bundle_dir(dir: &std::path::Path) -> std::io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for name in BUNDLE_FILES {
        let path = dir.join(name);
        if path.exists() {
            out.insert(name.to_string(), std::fs::read_to_string(path)?);
        }
    }
    Ok(out)
}

// --------------------------------------------------------------- ABox build

pub fn expected_performance_id(plan_instance: &str) -> String {
    format!("{plan_instance}_expected")
}

pub fn objective_id(product: &str) -> String {
    format!("{product}_objective")
}

pub fn coefficient_id(product: &str, metric: Metric) -> String {
    format!("{product}_{metric}")
}

/// Accumulates the triples for one build, remembering which
/// `(subject, predicate)` pairs the build owns so stale values can be
/// replaced on a re-build.
#[derive(Default)]
pub(crate) struct AboxWriter {
    triples: Vec<Triple>,
    owned: BTreeSet<(String, &'static str)>,
}

impl AboxWriter {
    fn owns(&mut self, subject: &str, predicates: &[&'static str]) {
        for p in predicates {
            self.owned.insert((subject.to_string(), p));
        }
    }

    fn ty(&mut self, subject: &str, class: &str) {
        self.triples
            .push(Triple::from_iris(ex(subject), vocab::rdf_type(), ex_term(class)));
    }

    fn link(&mut self, subject: &str, predicate: &str, object: &str) {
        self.triples
            .push(Triple::from_iris(ex(subject), ex(predicate), ex_term(object)));
    }

    fn value(&mut self, subject: &str, predicate: &str, object: Term) {
        self.triples.push(Triple::from_iris(ex(subject), ex(predicate), object));
    }

    pub(crate) fn performance(&mut self, node: &str, perf: &Performance) {
        self.owns(node, &["type", DURATION, ENERGY_COST, EMISSIONS, QUALITY]);
        self.ty(node, PERFORMANCE);
        self.value(node, DURATION, Term::decimal(perf.duration_min()));
        self.value(node, ENERGY_COST, Term::decimal(perf.energy_kwh()));
        self.value(node, EMISSIONS, Term::decimal(perf.emissions()));
        self.value(node, QUALITY, Term::decimal(perf.quality()));
    }

    pub(crate) fn product(&mut self, p: &ProductSpec) {
        self.owns(&p.id, &["type", DEFINES, DEADLINE, HAS_OBJECTIVE_FUNCTION]);
        self.ty(&p.id, PRODUCT);
        for f in &p.defines {
            self.link(&p.id, DEFINES, f);
        }
        self.value(&p.id, DEADLINE, Term::datetime(p.deadline));
        let obj = objective_id(&p.id);
        self.link(&p.id, HAS_OBJECTIVE_FUNCTION, &obj);
        self.owns(&obj, &["type", HAS_COEFFICIENT]);
        self.ty(&obj, OBJECTIVE_FUNCTION);
        for c in &p.coefficients {
            let node = coefficient_id(&p.id, c.metric);
            self.link(&obj, HAS_COEFFICIENT, &node);
            self.owns(&node, &["type", HAS_VALUE, COEFFICIENT_FOR]);
            self.ty(&node, COEFFICIENT);
            self.value(&node, HAS_VALUE, Term::decimal(c.value));
            self.value(&node, COEFFICIENT_FOR, Term::string(c.metric.as_str()));
        }
    }

    /// Changeset that replaces everything this writer owns in `kb`.
    pub(crate) fn into_changeset(self, kb: &KnowledgeBase) -> Changeset {
        let insert_set: HashSet<&Triple> = self.triples.iter().collect();
        let mut delete = Vec::new();
        for (subject, pred) in &self.owned {
            let p = if *pred == "type" { vocab::rdf_type() } else { ex(pred) };
            for t in kb.graph().match_raw(&crate::kb::Pattern::new(
                Some(ex_term(subject)),
                Some(Term::Iri(p)),
                None,
            )) {
                if !insert_set.contains(&t) {
                    delete.push(t);
                }
            }
        }
        let mut insert = self.triples;
        insert.retain(|t| !kb.graph().contains(t));
        let mut seen = HashSet::new();
        insert.retain(|t| seen.insert(t.clone()));
        Changeset { delete, insert }
    }
}

/// Populates the ABox from a validated description. Re-building replaces
/// the values the builder owns instead of accumulating them.
pub fn build_abox(kb: &mut KnowledgeBase, pd: &PlantDescription) -> Result<UpdateStats, BuildError> {
    let mut w = AboxWriter::default();

    for f in &pd.features {
        w.owns(&f.id, &["type", DESCRIPTION]);
        w.ty(&f.id, FEATURE);
        w.value(&f.id, DESCRIPTION, Term::string(&f.description));
    }

    let mut logical_done = HashSet::new();
    for p in &pd.process_plans {
        if logical_done.insert(p.id.clone()) {
            w.owns(&p.id, &["type", REALIZES, EXPECTED_PERFORMANCE]);
            w.ty(&p.id, PROCESS_PLAN);
            w.link(&p.id, REALIZES, &p.realizes);
        }
        let inst = p.instance_id();
        if p.machine.is_some() {
            w.owns(&inst, &["type", REALIZES, EXPECTED_PERFORMANCE]);
            w.ty(&inst, PROCESS_PLAN);
            w.link(&inst, REALIZES, &p.realizes);
        }
        let perf = expected_performance_id(&inst);
        w.link(&inst, EXPECTED_PERFORMANCE, &perf);
        w.performance(&perf, &p.expected);
    }

    for r in &pd.resources {
        w.owns(&r.id, &["type", CAPABLE_OF]);
        w.ty(&r.id, r.kind.class());
        for plan in &r.capable_of {
            let variant = pd
                .process_plans
                .iter()
                .any(|p| p.id == *plan && p.machine.as_deref() == Some(r.id.as_str()));
            let target = if variant {
                plan_variant_id(plan, &r.id)
            } else {
                plan.clone()
            };
            w.link(&r.id, CAPABLE_OF, &target);
        }
    }

    for p in &pd.products {
        w.product(p);
    }

    let changes = w.into_changeset(kb);
    Ok(kb.apply(&changes)?)
}

/// IRI for an id taken from a CSV file or API request.
pub fn entity_iri(id: &str) -> Result<Iri, KbError> {
    vocab::try_ex(id)
}
