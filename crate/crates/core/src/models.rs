//! Memory models as pairs `(po-mm, rf-mm)` derived from a history.
//!
//! | model | po-mm                      | rf-mm | load-load hazards | thin-air test |
//! |-------|----------------------------|-------|-------------------|---------------|
//! | SC    | po                         | rf    | no                | no            |
//! | TSO   | po \ WR×RD                 | rf_e  | no                | no            |
//! | PSO   | po \ (WR×RD ∪ WR×WR)       | rf_e  | no                | no            |
//! | RMO   | dp                         | rf_e  | yes               | yes           |
//!
//! `rf_e` keeps the reads-from pairs whose endpoints are not related by `po`.

use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;
use crate::graph::EventGraph;
use crate::history::{EventId, History, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Sc,
    Tso,
    Pso,
    Rmo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Same-variable read pairs may be reordered (`po-loc` loses `RD × RD`).
    pub allows_llh: bool,
    /// `dp ∪ rf` must be acyclic.
    pub requires_oota: bool,
}

impl ModelSpec {
    pub const fn new(kind: ModelKind) -> Self {
        let relaxed = matches!(kind, ModelKind::Rmo);
        Self {
            kind,
            allows_llh: relaxed,
            requires_oota: relaxed,
        }
    }

    pub const fn sc() -> Self {
        Self::new(ModelKind::Sc)
    }

    pub const fn tso() -> Self {
        Self::new(ModelKind::Tso)
    }

    pub const fn pso() -> Self {
        Self::new(ModelKind::Pso)
    }

    pub const fn rmo() -> Self {
        Self::new(ModelKind::Rmo)
    }

    pub const ALL: [ModelSpec; 4] = [Self::sc(), Self::tso(), Self::pso(), Self::rmo()];

    /// Canonical lowercase name.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Sc => "sc",
            ModelKind::Tso => "tso",
            ModelKind::Pso => "pso",
            ModelKind::Rmo => "rmo",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Self::sc()),
            "tso" => Ok(Self::tso()),
            "pso" => Ok(Self::pso()),
            "rmo" => Ok(Self::rmo()),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

/// The relations a model keeps from one history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedModel {
    pub spec: ModelSpec,
    pub po_mm: Relation,
    pub rf_mm: Relation,
    /// `po-loc`, or `po-loc` without read-read pairs when the model allows
    /// load-load hazards.
    pub po_loc_effective: Relation,
    /// Human-readable notes about questionable inputs; never fatal.
    pub warnings: Vec<String>,
}

/// `rf_e`: reads-from pairs not related by program order in either direction.
pub fn rf_external(h: &History) -> Relation {
    h.rf()
        .filter(|w, r| !h.po().contains(w, r) && !h.po().contains(r, w))
}

pub fn derive(h: &History, spec: &ModelSpec) -> Result<DerivedModel, ModelError> {
    validate_dp(h)?;
    let is_write = |e: EventId| h.event(e).is_write();
    let is_read = |e: EventId| h.event(e).is_read();
    let (po_mm, rf_mm) = match spec.kind {
        ModelKind::Sc => (h.po().clone(), h.rf().clone()),
        ModelKind::Tso => (
            h.po().filter(|a, b| !(is_write(a) && is_read(b))),
            rf_external(h),
        ),
        ModelKind::Pso => (h.po().filter(|a, _| !is_write(a)), rf_external(h)),
        ModelKind::Rmo => (h.dp().clone(), rf_external(h)),
    };

    let mut warnings = Vec::new();
    if spec.kind != ModelKind::Sc {
        for (w, r) in h.rf().iter().filter(|&(w, _)| h.event(w).is_init) {
            warnings.push(format!(
                "initial write {} sources read {}; init writes precede every event in po, \
                 so this edge is not visible under {}",
                h.event_ref(w),
                h.event_ref(r),
                spec.name()
            ));
        }
    }

    Ok(DerivedModel {
        spec: *spec,
        po_mm,
        rf_mm,
        po_loc_effective: h.po_loc(spec.allows_llh),
        warnings,
    })
}

fn validate_dp(h: &History) -> Result<(), ModelError> {
    for (a, b) in h.dp().iter() {
        let reason = if !h.event(a).is_read() {
            "source must be a read"
        } else if !h.po().contains(a, b) {
            "edge must lie in program order"
        } else {
            continue;
        };
        return Err(ModelError::InvalidDp {
            from: h.event_ref(a).to_string(),
            to: h.event_ref(b).to_string(),
            reason: reason.into(),
        });
    }
    Ok(())
}

/// The out-of-thin-air test: is `(O, dp ∪ rf)` acyclic?
pub fn oota_check(h: &History) -> bool {
    oota_graph(h).is_acyclic()
}

/// A cycle through `dp ∪ rf`, if the thin-air test fails.
pub fn oota_cycle(h: &History) -> Option<Vec<EventId>> {
    oota_graph(h).find_cycle()
}

fn oota_graph(h: &History) -> EventGraph {
    let mut g = EventGraph::new(h.n());
    g.add_relation(h.dp());
    g.add_relation(h.rf());
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::parse_history;

    fn ids(r: &Relation) -> Vec<(usize, usize)> {
        r.iter().map(|(a, b)| (a.0, b.0)).collect()
    }

    #[test]
    fn names_are_case_insensitive() {
        assert_eq!("TSO".parse::<ModelSpec>().unwrap(), ModelSpec::tso());
        assert_eq!("Rmo".parse::<ModelSpec>().unwrap().name(), "rmo");
        assert!(matches!(
            "xyz".parse::<ModelSpec>(),
            Err(ModelError::UnknownModel(_))
        ));
    }

    #[test]
    fn flags_only_for_rmo() {
        for spec in ModelSpec::ALL {
            let rmo = spec.kind == ModelKind::Rmo;
            assert_eq!(spec.allows_llh, rmo);
            assert_eq!(spec.requires_oota, rmo);
        }
    }

    #[test]
    fn rf_external_examples() {
        let h = parse_history("thread T0\nwr x 1\nrd x 1\n").unwrap();
        assert!(rf_external(&h).is_empty());
        let h = parse_history("thread T0\nwr x 1\nthread T1\nrd x 1\n").unwrap();
        assert_eq!(rf_external(&h), *h.rf());
        let h = parse_history("init: x=0\nthread T0\nrd x 0\n").unwrap();
        assert!(rf_external(&h).is_empty());
    }

    #[test]
    fn sc_is_identity() {
        let h = parse_history("thread T0\nwr x 1\nrd x 1\nthread T1\nrd x 1\n").unwrap();
        let m = derive(&h, &ModelSpec::sc()).unwrap();
        assert_eq!(m.po_mm, *h.po());
        assert_eq!(m.rf_mm, *h.rf());
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn tso_drops_write_read_pairs() {
        let h = parse_history("init: y=0\nthread T0\nwr x 1\nrd y 0\n").unwrap();
        // init y = 0, T0:0 = 1, T0:1 = 2
        let m = derive(&h, &ModelSpec::tso()).unwrap();
        assert_eq!(ids(&m.po_mm), vec![(0, 1)]);
        assert!(!m.po_mm.contains(EventId(1), EventId(2)));
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn pso_drops_write_write_pairs() {
        let h = parse_history("thread T0\nwr x 1\nwr y 1\n").unwrap();
        let m = derive(&h, &ModelSpec::pso()).unwrap();
        assert!(m.po_mm.is_empty());
        let m = derive(&h, &ModelSpec::tso()).unwrap();
        assert_eq!(ids(&m.po_mm), vec![(0, 1)]);
    }

    #[test]
    fn rmo_uses_dp_and_llh() {
        let h = parse_history(
            "thread T0\nwr x 1\nthread T1\nrd x 1\nrd x 1\nwr y 1\ndp T1:0 -> T1:2\n",
        )
        .unwrap();
        let m = derive(&h, &ModelSpec::rmo()).unwrap();
        assert_eq!(m.po_mm, *h.dp());
        assert!(m.po_loc_effective.is_empty());
        assert_eq!(
            derive(&h, &ModelSpec::sc()).unwrap().po_loc_effective.len(),
            1
        );
    }

    #[test]
    fn oota_examples() {
        let h = parse_history("thread T0\nwr x 1\nthread T1\nrd x 1\n").unwrap();
        assert!(oota_check(&h));

        // rd x 1 -dp-> wr y 1 -rf-> rd y 1 -dp-> wr x 1 -rf-> rd x 1
        let h = parse_history(
            "thread T0\nrd x 1\nwr y 1\nthread T1\nrd y 1\nwr x 1\n\
             dp T0:0 -> T0:1\ndp T1:0 -> T1:1\n",
        )
        .unwrap();
        assert!(!oota_check(&h));
        assert_eq!(oota_cycle(&h).unwrap().len(), 4);

        let h = parse_history(
            "init: y=0\nthread T0\nrd x 1\nwr y 1\nthread T1\nwr x 1\ndp T0:0 -> T0:1\n",
        )
        .unwrap();
        assert!(oota_check(&h));
    }
}
