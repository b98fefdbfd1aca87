//! Scripted scenarios and brute-force oracles shared by the integration
//! suites and the acceptance runner.
#![allow(dead_code)]

use std::path::PathBuf;

use needsim::geom::Vec2;
use needsim::links::{Chunk, ChunkPayload, NodeRef, UpTree};
use needsim::ltm::{KnowledgeBase, Predicate};
use needsim::needs::{NeedId, NeedMap};
use needsim::scenario::parse_scenario;
use needsim::stm::{Admission, Decision, Premises, SlotKind, SlotTag, SlotTree, OBJECT_DECAY, OBJECT_INTENSITY};
use needsim::trace::{EventKind, TraceEvent};
use needsim::world::{ScenarioConfig, World};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"))
}

pub fn scenario(name: &str) -> ScenarioConfig {
    let text = std::fs::read_to_string(scenario_path(name)).expect("bundled scenario readable");
    parse_scenario(&text).expect("bundled scenario parses")
}

/// Slots of every `kind` event for `agent`, optionally filtered by need.
pub fn slots_of(trace: &[TraceEvent], agent: &str, kind: EventKind, need: Option<&str>) -> Vec<u64> {
    trace
        .iter()
        .filter(|e| e.agent == agent && e.kind == kind && need.is_none_or(|n| e.need.as_deref() == Some(n)))
        .map(|e| e.slot)
        .collect()
}

pub fn first_slot(trace: &[TraceEvent], agent: &str, kind: EventKind, need: Option<&str>) -> Option<u64> {
    slots_of(trace, agent, kind, need).into_iter().next()
}

/// Satisfactions of `agent` at the end of `slot`, read back from the samples.
pub fn sampled_sats(trace: &[TraceEvent], agent: &str, slot: u64) -> NeedMap<f64> {
    let mut sats = NeedMap::splat(f64::NAN);
    for e in trace.iter().filter(|e| e.slot == slot && e.agent == agent && e.kind == EventKind::SatisfactionSample) {
        let need = NeedId::ALL.into_iter().find(|n| Some(n.name()) == e.need.as_deref()).expect("known need");
        sats[need] = e.value.expect("sample value");
    }
    sats
}

// ---- Up-Tree ----

fn chunk(ltm_id: usize, weight: f64) -> Chunk {
    Chunk { ltm_id, payload: ChunkPayload::Need(NeedId::Energy), weight, submitted_at: 0 }
}

/// Submits one chunk per leaf and steps until the tree is empty; returns the
/// emitting ltm ids in order.
pub fn uptree_emissions(weights: &[f64]) -> Vec<usize> {
    let mut tree = UpTree::new(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        tree.submit(i, chunk(i, w)).expect("leaf in range");
    }
    let mut out = Vec::new();
    // Every chunk needs at most height + n steps.
    for _ in 0..(tree.height() + weights.len() + 2) {
        if let Some(c) = tree.compete_step().0 {
            out.push(c.ltm_id);
        }
    }
    assert!(tree.is_empty(), "tree did not drain");
    out
}

/// Brute force: heaviest first, lower id on ties.
pub fn sorted_oracle(weights: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..weights.len()).collect();
    ids.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).expect("finite").then(a.cmp(&b)));
    ids
}

/// Steps until a lone chunk submitted at `leaf` sits in the root buffer.
pub fn steps_to_root(n: usize, leaf: usize) -> usize {
    let mut tree = UpTree::new(n);
    tree.submit(leaf, chunk(leaf, 1.0)).expect("leaf in range");
    let root = NodeRef { level: tree.height(), index: 0 };
    let mut steps = 0;
    while tree.node(root).is_none() {
        tree.compete_step();
        steps += 1;
        assert!(steps <= 64, "chunk never reached the root");
    }
    steps
}

// ---- short-term memory walkthrough ----

struct Owns(Vec<&'static str>);

impl Premises for Owns {
    fn holds(&self, p: &Predicate) -> bool {
        p.name == "possess" && self.0.contains(&p.arg.as_str())
    }
}

/// Membership after each step of the hungry walkthrough, as sorted
/// `tag:label` strings.
pub fn walkthrough_expected() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("start", vec!["object:obj_1", "object:obj_2", "object:obj_3", "ontology:self"]),
        ("step1 hungry", vec!["need:hungry", "object:obj_1", "object:obj_2", "object:obj_3", "ontology:self"]),
        ("step2 eat", vec!["method:eat", "need:hungry", "object:obj_1", "object:obj_2", "object:obj_3", "ontology:self"]),
        (
            "step3 food target",
            vec!["method:eat", "need:food", "need:hungry", "object:obj_1", "object:obj_2", "object:obj_3", "ontology:self"],
        ),
        (
            "step4 search, obj_3 out",
            vec!["method:eat", "method:search", "need:food", "need:hungry", "object:obj_1", "object:obj_2", "ontology:self"],
        ),
        (
            "step5 food seen",
            vec!["method:eat", "method:search", "need:food", "need:hungry", "object:food", "object:obj_1", "ontology:self"],
        ),
        ("step5 reduction", vec!["method:eat", "need:hungry", "object:food", "object:obj_1", "ontology:self"]),
        ("step5 eaten", vec!["object:food", "object:obj_1", "ontology:self"]),
    ]
}

pub struct Walkthrough {
    pub steps: Vec<(&'static str, Vec<String>)>,
    pub evicted: Vec<String>,
    pub decisions: Vec<Decision>,
}

fn members(t: &SlotTree) -> Vec<String> {
    let mut m: Vec<String> = t.slots().iter().map(|s| format!("{}:{}", s.kind.tag(), s.kind.label())).collect();
    m.sort();
    m
}

/// Drives a bare slot tree through the five hungry steps. Objects fade every
/// slot; obj_1 and obj_2 are seen again each slot, obj_3 is not. In step 5
/// the thing tracked as obj_2 turns out to be food, so obj_2 is not re-seen.
pub fn walkthrough() -> Walkthrough {
    let kb = KnowledgeBase::with_default_rules();
    let mut t = SlotTree::awake();
    let mut steps = Vec::new();
    let mut evicted = Vec::new();
    let mut decisions = Vec::new();
    let hungry_w = 6.0;
    let mut slot = 0;
    let note = |adm: Admission, evicted: &mut Vec<String>| {
        if let Admission::Replaced { evicted: e, cascade, .. } = adm {
            evicted.push(e.kind.label().to_string());
            evicted.extend(cascade.iter().map(|s| s.kind.label().to_string()));
        }
    };
    let see = |t: &mut SlotTree, label: &str, slot: u64| {
        t.admit(SlotKind::object(label, Vec2::default(), slot), OBJECT_INTENSITY, slot)
    };
    for o in ["obj_1", "obj_2", "obj_3"] {
        see(&mut t, o, slot).unwrap();
    }
    steps.push(("start", members(&t)));

    let tick = |t: &mut SlotTree, slot: &mut u64, seen: &[&str]| {
        *slot += 1;
        t.refresh(|l| (l == "hungry").then_some(hungry_w), OBJECT_DECAY);
        for o in seen {
            see(t, o, *slot).unwrap();
        }
    };

    tick(&mut t, &mut slot, &["obj_1", "obj_2"]);
    t.admit(SlotKind::need("hungry", hungry_w), hungry_w, slot).unwrap();
    steps.push(("step1 hungry", members(&t)));

    tick(&mut t, &mut slot, &["obj_1", "obj_2"]);
    let d = t.think_decide(&kb, &Owns(vec![]));
    decisions.push(d.clone());
    if let Decision::Subgoal { need, method, .. } = &d {
        note(t.admit(SlotKind::method(method, need), hungry_w, slot).unwrap(), &mut evicted);
    }
    steps.push(("step2 eat", members(&t)));

    tick(&mut t, &mut slot, &["obj_1", "obj_2"]);
    if let Decision::Subgoal { need, subgoal, .. } = &d {
        note(t.admit(SlotKind::subgoal(subgoal, hungry_w, need), hungry_w, slot).unwrap(), &mut evicted);
    }
    steps.push(("step3 food target", members(&t)));

    tick(&mut t, &mut slot, &["obj_1", "obj_2"]);
    let d = t.think_decide(&kb, &Owns(vec![]));
    decisions.push(d.clone());
    if let Decision::Execute { need, method } = &d {
        note(t.admit(SlotKind::method(method, need), hungry_w, slot).unwrap(), &mut evicted);
        t.set_running(method, true);
    }
    steps.push(("step4 search, obj_3 out", members(&t)));

    tick(&mut t, &mut slot, &["obj_1"]);
    note(see(&mut t, "food", slot).unwrap(), &mut evicted);
    steps.push(("step5 food seen", members(&t)));
    t.reduction();
    steps.push(("step5 reduction", members(&t)));
    let d = t.think_decide(&kb, &Owns(vec!["food"]));
    decisions.push(d.clone());
    if let Decision::Execute { need, method } = &d {
        t.admit(SlotKind::method(method, need), hungry_w, slot).unwrap();
        t.set_running(method, true);
        // Eating fills energy, so hungry is satisfied.
        t.complete_method(method, |l| l == "hungry");
    }
    steps.push(("step5 eaten", members(&t)));
    assert!(t.contains(SlotTag::Ontology, "self"));
    Walkthrough { steps, evicted, decisions }
}

// ---- stale backup ----

pub struct StaleBackup {
    /// Slot the hunger chunk was submitted in.
    pub submitted: u64,
    /// First slot the chunk was seen parked at an internal node after losing.
    pub parked_at: Option<(u64, usize)>,
    /// Slot energy was refilled.
    pub satisfied: u64,
    /// Slot the stale chunk reached short-term memory.
    pub emitted: Option<u64>,
    pub emitted_weight: Option<f64>,
    /// Energy satisfaction when the chunk arrived.
    pub sat_at_emit: Option<f64>,
    /// Whether the stale need was admitted and then cleared as satisfied.
    pub admitted_then_cleared: bool,
}

pub fn stale_backup() -> StaleBackup {
    let cfg = scenario("stale_backup");
    let satisfied = cfg
        .schedule
        .iter()
        .find(|e| matches!(&e.action, needsim::world::Action::SetSat { need: NeedId::Energy, value, .. } if *value >= 5.0))
        .map(|e| e.slot)
        .expect("scripted refill");
    let mut w = World::new(&cfg);
    let mut report = StaleBackup {
        submitted: 0,
        parked_at: None,
        satisfied,
        emitted: None,
        emitted_weight: None,
        sat_at_emit: None,
        admitted_then_cleared: false,
    };
    let mut first_chunk_slot = None;
    while w.slot < cfg.horizon {
        let ev = w.tick();
        let slot = w.slot;
        if first_chunk_slot.is_none() {
            first_chunk_slot = ev
                .iter()
                .find(|e| e.kind == EventKind::ChunkSubmit && e.need.as_deref() == Some("energy"))
                .map(|e| e.slot);
        }
        let Some(sub) = first_chunk_slot else { continue };
        report.submitted = sub;
        let tree = &w.agents[0].uptree;
        if report.parked_at.is_none() && report.emitted.is_none() {
            for level in 1..tree.height() {
                for index in 0..(tree.leaves() >> level) {
                    if let Some(c) = tree.node(NodeRef { level, index }) {
                        let root_busy = tree.node(NodeRef { level: tree.height(), index: 0 }).is_some();
                        if c.submitted_at == sub && c.payload == ChunkPayload::Need(NeedId::Energy) && root_busy {
                            report.parked_at = Some((slot, level));
                        }
                    }
                }
            }
        }
        let emit = ev.iter().find(|e| {
            e.kind == EventKind::ChunkEmit
                && e.need.as_deref() == Some("energy")
                && e.label.as_deref() == Some(sub.to_string().as_str())
        });
        if let (None, Some(e)) = (report.emitted, emit) {
            report.emitted = Some(slot);
            report.emitted_weight = e.value;
            report.sat_at_emit = Some(w.agents[0].needs.get(NeedId::Energy));
            let admitted = ev.iter().any(|e| e.kind == EventKind::SlotAdmit && e.label.as_deref() == Some("need:hungry"));
            let cleared = ev.iter().any(|e| e.kind == EventKind::Reduction && e.label.as_deref() == Some("hungry"));
            report.admitted_then_cleared = admitted && cleared;
        }
    }
    report
}
