use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{EntityId, Monolith, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: &'static str,
    pub message: String,
    pub location: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: &str) -> bool {
        self.errors.iter().any(|f| f.code == code)
    }

    pub fn has_warning(&self, code: &str) -> bool {
        self.warnings.iter().any(|f| f.code == code)
    }

    fn error(&mut self, code: &'static str, location: String, message: String) {
        self.errors.push(Finding { code, message, location });
    }

    fn warning(&mut self, code: &'static str, location: String, message: String) {
        self.warnings.push(Finding { code, message, location });
    }
}

pub const NONEMPTY_TRACES: &str = "NONEMPTY_TRACES";
pub const EMPTY_TRACE: &str = "EMPTY_TRACE";
pub const DUPLICATE_TRACE_ID: &str = "DUPLICATE_TRACE_ID";
pub const UNUSED_ENTITY: &str = "UNUSED_ENTITY";
pub const DUPLICATE_FUNCTIONALITY: &str = "DUPLICATE_FUNCTIONALITY";

pub fn validate_monolith(m: &Monolith) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut used: BTreeSet<EntityId> = BTreeSet::new();
    let mut by_traces: BTreeMap<&[Trace], Vec<&str>> = BTreeMap::new();

    for f in m.functionalities() {
        if f.traces.is_empty() {
            report.error(NONEMPTY_TRACES, f.name.clone(), "functionality has no traces".into());
        }
        let mut ids = BTreeSet::new();
        for t in &f.traces {
            if !ids.insert(t.id) {
                report.error(
                    DUPLICATE_TRACE_ID,
                    format!("{}/{}", f.name, t.id),
                    format!("trace id {} appears more than once", t.id),
                );
            }
            if t.is_empty() {
                report.error(EMPTY_TRACE, format!("{}/{}", f.name, t.id), "trace has no accesses".into());
            }
            used.extend(t.accesses.iter().map(|a| a.entity));
        }
        if !f.traces.is_empty() {
            by_traces.entry(f.traces.as_slice()).or_default().push(&f.name);
        }
    }

    for id in m.entities().keys().filter(|e| !used.contains(e)) {
        report.warning(UNUSED_ENTITY, id.to_string(), "entity is declared but never accessed".into());
    }
    for names in by_traces.values().filter(|n| n.len() > 1) {
        report.warning(
            DUPLICATE_FUNCTIONALITY,
            names.join(","),
            "functionalities have identical traces".into(),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Access, Functionality};

    #[test]
    fn well_formed_monolith_has_no_errors() {
        let m = Monolith::from_functionalities(vec![
            Functionality::with_accesses("f1", vec![Access::read(1), Access::write(2)]),
            Functionality::with_accesses("f2", vec![Access::read(2)]),
        ])
        .unwrap();
        let r = validate_monolith(&m);
        assert!(r.is_accepted());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn functionality_without_traces_is_an_error() {
        let m = Monolith::from_functionalities(vec![Functionality::new("f", vec![])]).unwrap();
        assert!(validate_monolith(&m).has_error(NONEMPTY_TRACES));
    }

    #[test]
    fn duplicate_trace_ids_and_empty_traces() {
        let m = Monolith::from_functionalities(vec![Functionality::new(
            "f",
            vec![Trace::new(1, vec![Access::read(1)]), Trace::new(1, vec![])],
        )])
        .unwrap();
        let r = validate_monolith(&m);
        assert!(r.has_error(DUPLICATE_TRACE_ID));
        assert!(r.has_error(EMPTY_TRACE));
    }

    #[test]
    fn unused_entities_and_duplicates_are_warnings() {
        let m = Monolith::new(
            vec![
                Functionality::with_accesses("a", vec![Access::read(1)]),
                Functionality::with_accesses("b", vec![Access::read(1)]),
            ],
            [(EntityId(2), None)].into(),
        )
        .unwrap();
        let r = validate_monolith(&m);
        assert!(r.is_accepted());
        assert!(r.has_warning(UNUSED_ENTITY));
        assert!(r.has_warning(DUPLICATE_FUNCTIONALITY));
    }
}
