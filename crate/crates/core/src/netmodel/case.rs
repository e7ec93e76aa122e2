//! Case document model, JSON parsing and validation.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSpec {
    pub id: i64,
    /// Solved voltage magnitude, per-unit. Required wherever a load or a
    /// generator without explicit EMF data sits on the bus.
    #[serde(default)]
    pub voltage_mag: Option<f64>,
    /// Solved voltage angle, rad.
    #[serde(default)]
    pub voltage_ang: Option<f64>,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub q_load: f64,
}

impl BusSpec {
    pub fn has_load(&self) -> bool {
        self.p_load != 0.0 || self.q_load != 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    /// Defaults to the 1-based position in the branch list.
    #[serde(default)]
    pub id: Option<i64>,
    pub from_bus: i64,
    pub to_bus: i64,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    #[serde(default)]
    pub b_shunt: f64,
    /// Off-nominal turns ratio on the from side; 1.0 for lines.
    #[serde(default = "one")]
    pub tap: f64,
    #[serde(default = "yes")]
    pub in_service: bool,
}

impl BranchSpec {
    pub fn id(&self) -> i64 {
        self.id.expect("branch ids are resolved during validation")
    }
}

/// Classical generator: constant EMF behind transient reactance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Defaults to the terminal bus id.
    #[serde(default)]
    pub id: Option<i64>,
    pub bus: i64,
    /// Inertia constant, s. Not used for infinite buses.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub d: f64,
    pub xdp: f64,
    #[serde(default)]
    pub e: Option<f64>,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub pm: Option<f64>,
    /// An ideal source of infinite inertia (the infinite bus of a SMIB case).
    #[serde(default)]
    pub infinite: bool,
}

impl GeneratorParams {
    pub fn id(&self) -> i64 {
        self.id.unwrap_or(self.bus)
    }

    /// Inertia used for ordering and reference selection; infinite for ideal sources.
    pub fn effective_inertia(&self) -> f64 {
        if self.infinite {
            f64::INFINITY
        } else {
            self.h.unwrap_or(0.0)
        }
    }
}

/// A branch referenced either by id or by its `[from, to]` bus pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchRef {
    Id(i64),
    Pair([i64; 2]),
}

/// Post-disturbance speed and angle offsets applied on top of the equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDeviation {
    pub generator: i64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventScript {
    #[serde(default)]
    pub fault_bus: Option<i64>,
    #[serde(default)]
    pub t_fault: f64,
    #[serde(default)]
    pub t_clear: f64,
    #[serde(default)]
    pub trips: Vec<BranchRef>,
    #[serde(default)]
    pub initial_deviation: Vec<InitialDeviation>,
}

impl EventScript {
    pub fn fault_duration(&self) -> f64 {
        self.t_clear - self.t_fault
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDocument {
    #[serde(default)]
    name: Option<String>,
    base_mva: f64,
    frequency_hz: f64,
    #[serde(default)]
    omega0: Option<f64>,
    #[serde(default)]
    reference: Option<i64>,
    buses: Vec<BusSpec>,
    branches: Vec<BranchSpec>,
    generators: Vec<GeneratorParams>,
    #[serde(default)]
    events: EventScript,
}

/// A validated system case.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSystemCase {
    pub name: String,
    pub base_mva: f64,
    pub frequency_hz: f64,
    /// Synchronous speed, rad/s.
    pub omega0: f64,
    pub buses: Vec<BusSpec>,
    pub branches: Vec<BranchSpec>,
    pub generators: Vec<GeneratorParams>,
    pub events: EventScript,
    /// Explicit reference generator id, if the document names one.
    pub reference: Option<i64>,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Parses and validates a JSON case document.
pub fn parse_case(text: &str) -> Result<PowerSystemCase> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: CaseDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let omega0 = doc
        .omega0
        .unwrap_or(2.0 * std::f64::consts::PI * doc.frequency_hz);
    let mut case = PowerSystemCase {
        name: doc.name.unwrap_or_else(|| "case".to_string()),
        base_mva: doc.base_mva,
        frequency_hz: doc.frequency_hz,
        omega0,
        buses: doc.buses,
        branches: doc.branches,
        generators: doc.generators,
        events: doc.events,
        reference: doc.reference,
    };
    for (k, br) in case.branches.iter_mut().enumerate() {
        br.id.get_or_insert(k as i64 + 1);
    }
    for g in &mut case.generators {
        g.id.get_or_insert(g.bus);
    }
    case.validate()?;
    Ok(case)
}

impl PowerSystemCase {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.buses.is_empty() {
            return bad("case has no buses".into());
        }
        if self.generators.is_empty() {
            return bad("case has no generators".into());
        }
        if !(self.base_mva > 0.0) || !(self.omega0 > 0.0) {
            return bad("base_mva and the synchronous speed must be positive".into());
        }

        let mut ids = HashSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return bad(format!("duplicate bus id {}", b.id));
            }
            if let Some(v) = b.voltage_mag {
                if !(v > 0.0) {
                    return bad(format!("bus {}: voltage_mag must be positive", b.id));
                }
            }
        }

        let mut branch_ids = HashSet::new();
        for br in &self.branches {
            let id = br.id();
            if !branch_ids.insert(id) {
                return bad(format!("duplicate branch id {id}"));
            }
            if br.from_bus == br.to_bus {
                return bad(format!("branch {id}: from_bus equals to_bus"));
            }
            if br.x == 0.0 {
                return bad(format!(
                    "branch {id}: purely resistive branches are not supported"
                ));
            }
            if !(br.tap > 0.0) {
                return bad(format!("branch {id}: tap ratio must be positive"));
            }
            for bus in [br.from_bus, br.to_bus] {
                if !ids.contains(&bus) {
                    return bad(format!("branch {id} references unknown bus {bus}"));
                }
            }
        }

        let mut gen_ids = HashSet::new();
        for g in &self.generators {
            let id = g.id();
            if !gen_ids.insert(id) {
                return bad(format!("duplicate generator id {id}"));
            }
            if !ids.contains(&g.bus) {
                return bad(format!("generator {id} references unknown bus {}", g.bus));
            }
            if !(g.xdp > 0.0) {
                return bad(format!("generator {id}: xdp must be positive"));
            }
            if !g.infinite {
                match g.h {
                    Some(h) if h > 0.0 => {}
                    _ => return bad(format!("generator {id}: inertia h must be positive")),
                }
            }
            if !(g.d >= 0.0) {
                return bad(format!("generator {id}: damping d must be nonnegative"));
            }
            if let Some(e) = g.e {
                if !(e > 0.0) {
                    return bad(format!("generator {id}: EMF e must be positive"));
                }
            }
        }
        if let Some(r) = self.reference {
            if !gen_ids.contains(&r) {
                return bad(format!("reference generator {r} does not exist"));
            }
        }

        let ev = &self.events;
        if !(ev.t_fault >= 0.0 && ev.t_clear >= ev.t_fault) {
            return bad("events: require 0 <= t_fault <= t_clear".into());
        }
        if let Some(fb) = ev.fault_bus {
            if !ids.contains(&fb) {
                return bad(format!("events: fault bus {fb} does not exist"));
            }
        }
        for trip in &ev.trips {
            self.branch_index(*trip)?;
        }
        for dev in &ev.initial_deviation {
            if !gen_ids.contains(&dev.generator) {
                return bad(format!(
                    "events: deviation for unknown generator {}",
                    dev.generator
                ));
            }
        }

        self.check_connected()
    }

    /// Every bus must be reachable over post-fault in-service branches.
    fn check_connected(&self) -> Result<()> {
        let index = self.bus_index_map();
        let tripped = self.tripped_branches()?;
        let mut adj = vec![Vec::new(); self.buses.len()];
        for (k, br) in self.branches.iter().enumerate() {
            if br.in_service && !tripped.contains(&k) {
                let (f, t) = (index[&br.from_bus], index[&br.to_bus]);
                adj[f].push(t);
                adj[t].push(f);
            }
        }
        let mut seen = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        let islanded: Vec<i64> = self
            .buses
            .iter()
            .zip(&seen)
            .filter(|(_, &s)| !s)
            .map(|(b, _)| b.id)
            .collect();
        if islanded.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "post-fault network is not connected; isolated buses {islanded:?}"
            )))
        }
    }

    pub fn bus_index_map(&self) -> HashMap<i64, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(k, b)| (b.id, k))
            .collect()
    }

    pub fn bus(&self, id: i64) -> Option<&BusSpec> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn generator_index(&self, id: i64) -> Option<usize> {
        self.generators.iter().position(|g| g.id() == id)
    }

    /// Resolves a branch reference to its position in the branch list.
    pub fn branch_index(&self, r: BranchRef) -> Result<usize> {
        let found = match r {
            BranchRef::Id(id) => self.branches.iter().position(|b| b.id() == id),
            BranchRef::Pair([a, b]) => self.branches.iter().position(|br| {
                (br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a)
            }),
        };
        found.ok_or_else(|| Error::Validation(format!("tripped branch {r:?} does not exist")))
    }

    pub fn tripped_branches(&self) -> Result<HashSet<usize>> {
        self.events
            .trips
            .iter()
            .map(|t| self.branch_index(*t))
            .collect()
    }

    /// Index of the reference machine: the named one, otherwise the machine
    /// with the largest inertia (ideal sources first).
    pub fn reference_index(&self) -> usize {
        if let Some(k) = self.reference.and_then(|r| self.generator_index(r)) {
            return k;
        }
        let mut best = 0;
        for (k, g) in self.generators.iter().enumerate() {
            if g.effective_inertia() > self.generators[best].effective_inertia() {
                best = k;
            }
        }
        best
    }

    /// Replaces the inertia of one generator.
    pub fn set_inertia(&mut self, generator: i64, h: f64) -> Result<()> {
        let k = self
            .generator_index(generator)
            .ok_or_else(|| Error::Validation(format!("unknown generator {generator}")))?;
        if !(h > 0.0) {
            return Err(Error::Validation(format!(
                "inertia must be positive, got {h}"
            )));
        }
        self.generators[k].h = Some(h);
        Ok(())
    }
}
