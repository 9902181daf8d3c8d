//! Run the resource-history query against a small plant: record two
//! successful executions and one failed one on M1 with plain SPARQL
//! updates, then ask for the successful ones.
//!
//! ```bash
//! cargo run --example query_listing
//! ```

use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::query::{execute, select, Outcome};
use ontomas::runtime::{get_resource_history, ExecStatus, RESOURCE_HISTORY_QUERY};

const PREFIX: &str =
    "PREFIX ex: <http://example.org/manufacturing#>\nPREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n";

fn record(kb: &mut KnowledgeBase, id: &str, status: &str, start: &str, end: &str, energy: &str) {
    let text = format!(
        "{PREFIX}INSERT DATA {{
            ex:{id} a ex:ProcessExecution ;
                ex:runsOnResource ex:M1 ;
                ex:hasStatus \"{status}\" ;
                ex:realStartTime \"{start}\"^^xsd:dateTime ;
                ex:realEndTime \"{end}\"^^xsd:dateTime ;
                ex:realPerformance ex:{id}_real .
            ex:{id}_real a ex:Performance ;
                ex:duration 20.0 ; ex:energyCost {energy} ; ex:emissions 0.0 ; ex:quality 1.0 .
        }}"
    );
    match execute(kb, &text).expect("valid update") {
        Outcome::Updated(stats) => println!("INSERT DATA {id}: +{} triples", stats.inserted),
        Outcome::Solutions(_) => unreachable!(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &parse_csv_bundle(&read_bundle_dir(&dir)?)?)?;

    record(
        &mut kb,
        "run_a",
        "successful",
        "2023-01-01T00:00:00Z",
        "2023-01-01T00:20:00Z",
        "100.0",
    );
    record(
        &mut kb,
        "run_b",
        "successful",
        "2023-01-01T00:25:00Z",
        "2023-01-01T00:45:00Z",
        "101.5",
    );
    record(
        &mut kb,
        "run_c",
        "errored",
        "2023-01-01T00:50:00Z",
        "2023-01-01T00:55:00Z",
        "30.0",
    );

    // the query file uses `<resource>` as a placeholder
    let listing = RESOURCE_HISTORY_QUERY.replace("<resource>", "ex:M1");
    println!("\n{listing}");
    let solutions = select(&kb, &listing)?;
    let header: Vec<&str> = solutions.vars.iter().map(|v| v.name()).collect();
    println!("{}", header.join(" | "));
    for row in solutions.table() {
        println!("{}", row.join(" | "));
    }

    // a DELETE/INSERT WHERE rewrites the failed run's status in one step
    let fix = format!(
        "{PREFIX}DELETE {{ ?e ex:hasStatus \"errored\" }} INSERT {{ ?e ex:hasStatus \"successful\" }} \
         WHERE {{ ?e ex:runsOnResource ex:M1 . ?e ex:hasStatus \"errored\" }}"
    );
    if let Outcome::Updated(s) = execute(&mut kb, &fix)? {
        println!("\nstatus rewrite: -{} +{}", s.deleted, s.inserted);
    }
    println!("successful rows now: {}", select(&kb, &listing)?.rows.len());

    // the typed façade runs the same query
    for row in get_resource_history(&kb, "M1", ExecStatus::Successful)? {
        println!(
            "  {} {} .. {} {} kWh",
            row.execution_id, row.real_start, row.real_end, row.energy_kwh
        );
    }

    // anything outside the supported grammar is refused
    let err = select(&kb, "SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s").unwrap_err();
    println!("\nGROUP BY -> {err}");
    Ok(())
}
