//! IRIs of the manufacturing vocabulary and the W3C terms it builds on.

use super::term::{Iri, Term};

pub const EX: &str = "http://example.org/manufacturing#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_SUBPROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATETIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

/// Prefixes known to every parser and used by the Turtle writer.
pub const STANDARD_PREFIXES: [(&str, &str); 5] = [("ex", EX), ("owl", OWL), ("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD)];

// classes
pub const PRODUCT: &str = "Product";
pub const SPECIFICATION: &str = "Specification";
pub const FEATURE: &str = "Feature";
pub const PROCESS: &str = "Process";
pub const PROCESS_PLAN: &str = "ProcessPlan";
pub const PROCESS_EXECUTION: &str = "ProcessExecution";
pub const RESOURCE: &str = "Resource";
pub const MACHINE: &str = "Machine";
pub const ROBOT: &str = "Robot";
pub const BUFFER: &str = "Buffer";
pub const PERFORMANCE: &str = "Performance";
pub const OBJECTIVE_FUNCTION: &str = "ObjectiveFunction";
pub const COEFFICIENT: &str = "Coefficient";

// object properties
pub const CAPABLE_OF: &str = "capableOf";
pub const REALIZES: &str = "realizes";
pub const DEFINES: &str = "defines";
pub const HAS_OBJECTIVE_FUNCTION: &str = "hasObjectiveFunction";
pub const HAS_COEFFICIENT: &str = "hasCoefficient";
pub const HAS_PERFORMANCE: &str = "hasPerformance";
pub const EXPECTED_PERFORMANCE: &str = "expectedPerformance";
pub const REAL_PERFORMANCE: &str = "realPerformance";
pub const HAS_PROCESS_EXECUTION: &str = "hasProcessExecution";
pub const RUNS_ON_RESOURCE: &str = "runsOnResource";
pub const RUNS_PROCESS_PLAN: &str = "runsProcessPlan";

// datatype properties
pub const HAS_VALUE: &str = "hasValue";
pub const COEFFICIENT_FOR: &str = "coefficientFor";
pub const DEADLINE: &str = "deadline";
pub const DESCRIPTION: &str = "description";
pub const HAS_STATUS: &str = "hasStatus";
pub const HAS_ERROR_MESSAGE: &str = "hasErrorMessage";
pub const PLANNED_START_TIME: &str = "plannedStartTime";
pub const PLANNED_END_TIME: &str = "plannedEndTime";
pub const REAL_START_TIME: &str = "realStartTime";
pub const REAL_END_TIME: &str = "realEndTime";
pub const DURATION: &str = "duration";
pub const ENERGY_COST: &str = "energyCost";
pub const EMISSIONS: &str = "emissions";
pub const QUALITY: &str = "quality";

/// IRI in the manufacturing namespace.
///
/// Panics if `local` would produce an invalid IRI; use [`try_ex`] for
/// externally supplied ids.
pub fn ex(local: &str) -> Iri {
    try_ex(local).unwrap_or_else(|e| panic!("invalid vocabulary name {local:?}: {e}"))
}

pub fn try_ex(local: &str) -> Result<Iri, super::KbError> {
    Iri::new(format!("{EX}{local}"))
}

pub fn ex_term(local: &str) -> Term {
    Term::Iri(ex(local))
}

pub fn rdf_type() -> Iri {
    Iri::new(RDF_TYPE).expect("static IRI")
}

pub fn iri(text: &str) -> Iri {
    Iri::new(text).expect("static IRI")
}
