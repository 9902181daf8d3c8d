//! The fixed TBox: classes, subclass facts and property signatures of the
//! manufacturing ontology.

use super::term::{Datatype, Iri, Term, Triple};
use super::vocab::{self, *};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectProperty {
    pub name: &'static str,
    pub domain: &'static str,
    pub range: &'static str,
    /// Parent property for `rdfs:subPropertyOf`, if any.
    pub parent: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatatypeProperty {
    pub name: &'static str,
    pub domain: &'static str,
    pub range: Datatype,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OntologySchema {
    pub classes: Vec<&'static str>,
    /// `(sub, super)` pairs.
    pub subclass_of: Vec<(&'static str, &'static str)>,
    pub object_properties: Vec<ObjectProperty>,
    pub datatype_properties: Vec<DatatypeProperty>,
}

const fn obj(
    name: &'static str,
    domain: &'static str,
    range: &'static str,
    parent: Option<&'static str>,
) -> ObjectProperty {
    ObjectProperty {
        name,
        domain,
        range,
        parent,
    }
}

const fn data(name: &'static str, domain: &'static str, range: Datatype) -> DatatypeProperty {
    DatatypeProperty { name, domain, range }
}

impl Default for OntologySchema {
    /// The manufacturing ontology: resources execute processes on products
    /// to realize features, with performance attached to plans (expected)
    /// and executions (real).
    fn default() -> Self {
        OntologySchema {
            classes: vec![
                PRODUCT,
                SPECIFICATION,
                FEATURE,
                PROCESS,
                PROCESS_PLAN,
                PROCESS_EXECUTION,
                RESOURCE,
                MACHINE,
                ROBOT,
                BUFFER,
                PERFORMANCE,
                OBJECTIVE_FUNCTION,
                COEFFICIENT,
            ],
            subclass_of: vec![
                (MACHINE, RESOURCE),
                (ROBOT, RESOURCE),
                (BUFFER, RESOURCE),
                (PROCESS_PLAN, PROCESS),
                (PROCESS_EXECUTION, PROCESS),
            ],
            object_properties: vec![
                obj(CAPABLE_OF, RESOURCE, PROCESS_PLAN, None),
                obj(REALIZES, PROCESS_PLAN, FEATURE, None),
                obj(DEFINES, PRODUCT, FEATURE, None),
                obj(HAS_OBJECTIVE_FUNCTION, PRODUCT, OBJECTIVE_FUNCTION, None),
                obj(HAS_COEFFICIENT, OBJECTIVE_FUNCTION, COEFFICIENT, None),
                // ProcessPlan | ProcessExecution, declared on their common superclass
                obj(HAS_PERFORMANCE, PROCESS, PERFORMANCE, None),
                obj(EXPECTED_PERFORMANCE, PROCESS_PLAN, PERFORMANCE, Some(HAS_PERFORMANCE)),
                obj(REAL_PERFORMANCE, PROCESS_EXECUTION, PERFORMANCE, Some(HAS_PERFORMANCE)),
                obj(HAS_PROCESS_EXECUTION, PRODUCT, PROCESS_EXECUTION, None),
                obj(RUNS_ON_RESOURCE, PROCESS_EXECUTION, RESOURCE, None),
                obj(RUNS_PROCESS_PLAN, PROCESS_EXECUTION, PROCESS_PLAN, None),
            ],
            datatype_properties: vec![
                data(HAS_VALUE, COEFFICIENT, Datatype::Decimal),
                data(COEFFICIENT_FOR, COEFFICIENT, Datatype::String),
                data(DEADLINE, PRODUCT, Datatype::DateTime),
                data(DESCRIPTION, FEATURE, Datatype::String),
                data(HAS_STATUS, PROCESS_EXECUTION, Datatype::String),
                data(HAS_ERROR_MESSAGE, PROCESS_EXECUTION, Datatype::String),
                data(PLANNED_START_TIME, PROCESS_EXECUTION, Datatype::DateTime),
                data(PLANNED_END_TIME, PROCESS_EXECUTION, Datatype::DateTime),
                data(REAL_START_TIME, PROCESS_EXECUTION, Datatype::DateTime),
                data(REAL_END_TIME, PROCESS_EXECUTION, Datatype::DateTime),
                data(DURATION, PERFORMANCE, Datatype::Decimal),
                data(ENERGY_COST, PERFORMANCE, Datatype::Decimal),
                data(EMISSIONS, PERFORMANCE, Datatype::Decimal),
                data(QUALITY, PERFORMANCE, Datatype::Decimal),
            ],
        }
    }
}

impl OntologySchema {
    /// Class declarations, subclass facts and property signatures as triples.
    pub fn tbox_triples(&self) -> Vec<Triple> {
        let ty = vocab::rdf_type();
        let sub = vocab::iri(RDFS_SUBCLASS_OF);
        let subprop = vocab::iri(RDFS_SUBPROPERTY_OF);
        let domain = vocab::iri(RDFS_DOMAIN);
        let range = vocab::iri(RDFS_RANGE);
        let mut out = Vec::new();

        for class in &self.classes {
            out.push(Triple::from_iris(ex(class), ty.clone(), vocab::iri(OWL_CLASS)));
        }
        for (child, parent) in &self.subclass_of {
            out.push(Triple::from_iris(ex(child), sub.clone(), ex(parent)));
        }
        for p in &self.object_properties {
            out.push(Triple::from_iris(
                ex(p.name),
                ty.clone(),
                vocab::iri(OWL_OBJECT_PROPERTY),
            ));
            out.push(Triple::from_iris(ex(p.name), domain.clone(), ex(p.domain)));
            out.push(Triple::from_iris(ex(p.name), range.clone(), ex(p.range)));
            if let Some(parent) = p.parent {
                out.push(Triple::from_iris(ex(p.name), subprop.clone(), ex(parent)));
            }
        }
        for p in &self.datatype_properties {
            out.push(Triple::from_iris(
                ex(p.name),
                ty.clone(),
                vocab::iri(OWL_DATATYPE_PROPERTY),
            ));
            out.push(Triple::from_iris(ex(p.name), domain.clone(), ex(p.domain)));
            out.push(Triple::from_iris(ex(p.name), range.clone(), vocab::iri(p.range.iri())));
        }
        out
    }

    /// True for `rdf:type` and every property declared by the schema.
    pub fn declares_predicate(&self, predicate: &Iri) -> bool {
        if predicate.as_str() == RDF_TYPE {
            return true;
        }
        let Some(local) = predicate.local_name() else {
            return false;
        };
        self.object_properties.iter().any(|p| p.name == local)
            || self.datatype_properties.iter().any(|p| p.name == local)
    }

    pub fn declares_class(&self, class: &Term) -> bool {
        class
            .as_iri()
            .and_then(Iri::local_name)
            .is_some_and(|l| self.classes.contains(&l))
    }

    pub fn datatype_property(&self, name: &str) -> Option<&DatatypeProperty> {
        self.datatype_properties.iter().find(|p| p.name == name)
    }

    pub fn object_property(&self, name: &str) -> Option<&ObjectProperty> {
        self.object_properties.iter().find(|p| p.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_property_has_one_domain_and_range() {
        let schema = OntologySchema::default();
        let tbox = schema.tbox_triples();
        let names = schema
            .object_properties
            .iter()
            .map(|p| p.name)
            .chain(schema.datatype_properties.iter().map(|p| p.name));
        for name in names {
            let subject = ex_term(name);
            for pred in [RDFS_DOMAIN, RDFS_RANGE] {
                let n = tbox
                    .iter()
                    .filter(|t| t.subject() == &subject && t.predicate().as_iri().unwrap().as_str() == pred)
                    .count();
                assert_eq!(n, 1, "{name} {pred}");
            }
        }
    }

    #[test]
    fn property_names_are_unique() {
        let schema = OntologySchema::default();
        let mut seen = HashSet::new();
        for name in schema
            .object_properties
            .iter()
            .map(|p| p.name)
            .chain(schema.datatype_properties.iter().map(|p| p.name))
        {
            assert!(seen.insert(name), "duplicate property {name}");
        }
    }

    #[test]
    fn property_domains_are_declared_classes() {
        let schema = OntologySchema::default();
        for p in &schema.object_properties {
            assert!(schema.classes.contains(&p.domain), "{}", p.name);
            assert!(schema.classes.contains(&p.range), "{}", p.name);
        }
        for p in &schema.datatype_properties {
            assert!(schema.classes.contains(&p.domain), "{}", p.name);
        }
    }
}
