//! Short-term memory: a seven-slot tree rooted at the agent's ontology slot.
//!
//! Needs and objects hang off the root, methods hang off the need they
//! serve. When the tree is full an incoming item may displace the weakest
//! resident, and `think` turns the strongest need into an action, a subgoal,
//! or nothing.

use std::fmt;

use crate::error::StmError;
use crate::geom::Vec2;
use crate::ltm::{KnowledgeBase, Predicate};

pub const STM_CAPACITY: usize = 7;

/// Intensity a fresh percept starts with.
pub const OBJECT_INTENSITY: f64 = 5.0;
/// Per-slot intensity loss of an object that is not seen again.
pub const OBJECT_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub enum NeedOrigin {
    /// Raised by a feeling processor.
    Feeling,
    /// Created by `think` as a target for the need it serves.
    Subgoal { serves: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlotKind {
    Ontology,
    Need { label: String, weight: f64, origin: NeedOrigin },
    Object { label: String, position: Vec2, seen_at: u64 },
    Method { label: String, target: String, running: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotTag {
    Ontology,
    Need,
    Object,
    Method,
}

impl fmt::Display for SlotTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotTag::Ontology => "ontology",
            SlotTag::Need => "need",
            SlotTag::Object => "object",
            SlotTag::Method => "method",
        })
    }
}

impl SlotKind {
    pub fn need(label: impl Into<String>, weight: f64) -> Self {
        SlotKind::Need { label: label.into(), weight, origin: NeedOrigin::Feeling }
    }

    pub fn subgoal(label: impl Into<String>, weight: f64, serves: impl Into<String>) -> Self {
        SlotKind::Need {
            label: label.into(),
            weight,
            origin: NeedOrigin::Subgoal { serves: serves.into() },
        }
    }

    pub fn object(label: impl Into<String>, position: Vec2, seen_at: u64) -> Self {
        SlotKind::Object { label: label.into(), position, seen_at }
    }

    pub fn method(label: impl Into<String>, target: impl Into<String>) -> Self {
        SlotKind::Method { label: label.into(), target: target.into(), running: false }
    }

    pub fn tag(&self) -> SlotTag {
        match self {
            SlotKind::Ontology => SlotTag::Ontology,
            SlotKind::Need { .. } => SlotTag::Need,
            SlotKind::Object { .. } => SlotTag::Object,
            SlotKind::Method { .. } => SlotTag::Method,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            SlotKind::Ontology => "self",
            SlotKind::Need { label, .. }
            | SlotKind::Object { label, .. }
            | SlotKind::Method { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub id: SlotId,
    pub kind: SlotKind,
    pub intensity: f64,
    pub parent: Option<SlotId>,
    pub admitted_at: u64,
}

/// What happened to an item offered to [`SlotTree::admit`].
#[derive(Debug, Clone, PartialEq)]
pub enum Admission {
    /// Same kind and label already resident; its intensity was refreshed.
    Refreshed(SlotId),
    Admitted(SlotId),
    /// Admitted after evicting `evicted`; `cascade` holds slots that hung
    /// off the evicted one and had to go with it.
    Replaced { id: SlotId, evicted: Slot, cascade: Vec<Slot> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotTree {
    slots: Vec<Slot>,
    capacity: usize,
    awake: bool,
    next_id: u64,
}

impl Default for SlotTree {
    fn default() -> Self {
        SlotTree { slots: Vec::new(), capacity: STM_CAPACITY, awake: false, next_id: 0 }
    }
}

/// Result of one `think` pass.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    /// Start `method` for `need`; its premises hold.
    Execute { need: String, method: String },
    /// `method` is blocked by a missing resource; `subgoal` becomes a new need.
    Subgoal { need: String, method: String, subgoal: String },
    Continue,
    /// The knowledge base has no rule for `need`.
    NoMethod { need: String },
}

/// Agent-side truth used by the feasibility check.
pub trait Premises {
    fn holds(&self, predicate: &Predicate) -> bool;
}

impl SlotTree {
    /// An awake tree holding only the ontology root.
    pub fn awake() -> Self {
        let mut t = SlotTree::default();
        t.sleep_wake(true, 0);
        t
    }

    pub fn is_awake(&self) -> bool {
        self.awake
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn root(&self) -> Option<&Slot> {
        self.slots.iter().find(|s| s.kind == SlotKind::Ontology)
    }

    pub fn get(&self, id: SlotId) -> Option<&Slot> {
        self.slots.iter().find(|s| s.id == id)
    }

    pub fn find(&self, tag: SlotTag, label: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.kind.tag() == tag && s.kind.label() == label)
    }

    pub fn contains(&self, tag: SlotTag, label: &str) -> bool {
        self.find(tag, label).is_some()
    }

    /// Labels of the resident slots, in admission order.
    pub fn labels(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.kind.label()).collect()
    }

    /// Falling asleep empties everything, ontology included; waking installs
    /// the ontology root into the empty tree. Waking an awake tree is a no-op.
    pub fn sleep_wake(&mut self, awake: bool, slot: u64) {
        if awake == self.awake {
            return;
        }
        self.slots.clear();
        self.awake = awake;
        if awake {
            let id = self.fresh_id();
            self.slots.push(Slot {
                id,
                kind: SlotKind::Ontology,
                intensity: f64::INFINITY,
                parent: None,
                admitted_at: slot,
            });
        }
    }

    fn fresh_id(&mut self) -> SlotId {
        self.next_id += 1;
        SlotId(self.next_id)
    }

    /// Offers a new item to the tree.
    pub fn admit(&mut self, kind: SlotKind, intensity: f64, slot: u64) -> Result<Admission, StmError> {
        if !self.awake {
            return Err(StmError::Asleep);
        }
        if kind == SlotKind::Ontology {
            return Err(StmError::Ontology);
        }
        let intensity = if intensity.is_finite() { intensity.max(0.0) } else { 0.0 };

        if let Some(existing) = self
            .slots
            .iter_mut()
            .find(|s| s.kind.tag() == kind.tag() && s.kind.label() == kind.label())
        {
            existing.intensity = existing.intensity.max(intensity);
            match (&mut existing.kind, kind) {
                (SlotKind::Object { position, seen_at, .. }, SlotKind::Object { position: p, seen_at: t, .. }) => {
                    *position = p;
                    *seen_at = t;
                }
                (SlotKind::Need { weight, .. }, SlotKind::Need { weight: w, .. }) => *weight = w,
                _ => {}
            }
            return Ok(Admission::Refreshed(existing.id));
        }

        let root = self.root().map(|s| s.id).expect("awake tree has a root");
        let parent = match &kind {
            SlotKind::Method { label, target, .. } => match self.find(SlotTag::Need, target) {
                Some(need) => need.id,
                None => {
                    return Err(StmError::MissingTarget { method: label.clone(), target: target.clone() })
                }
            },
            _ => root,
        };

        let mut displaced = None;
        if self.slots.len() >= self.capacity {
            let protected = self.ancestors(parent);
            let victim = self
                .slots
                .iter()
                .filter(|s| s.kind != SlotKind::Ontology && !protected.contains(&s.id))
                .min_by(|a, b| {
                    a.intensity
                        .total_cmp(&b.intensity)
                        .then(a.admitted_at.cmp(&b.admitted_at))
                        .then(a.id.cmp(&b.id))
                })
                .cloned();
            match victim {
                Some(v) if intensity > v.intensity => {
                    let mut removed = self.remove_subtree(v.id);
                    let evicted = removed.remove(0);
                    displaced = Some((evicted, removed));
                }
                _ => return Err(StmError::Rejected(intensity)),
            }
        }

        let id = self.fresh_id();
        self.slots.push(Slot { id, kind, intensity, parent: Some(parent), admitted_at: slot });
        Ok(match displaced {
            Some((evicted, cascade)) => Admission::Replaced { id, evicted, cascade },
            None => Admission::Admitted(id),
        })
    }

    fn ancestors(&self, mut id: SlotId) -> Vec<SlotId> {
        let mut out = vec![id];
        while let Some(p) = self.get(id).and_then(|s| s.parent) {
            out.push(p);
            id = p;
        }
        out
    }

    /// Removes `id` and everything below it. The first element is `id` itself.
    fn remove_subtree(&mut self, id: SlotId) -> Vec<Slot> {
        let mut doomed = vec![id];
        let mut i = 0;
        while i < doomed.len() {
            let cur = doomed[i];
            doomed.extend(self.slots.iter().filter(|s| s.parent == Some(cur)).map(|s| s.id));
            i += 1;
        }
        let mut removed: Vec<Slot> = Vec::new();
        for d in &doomed {
            if let Some(pos) = self.slots.iter().position(|s| s.id == *d) {
                removed.push(self.slots.remove(pos));
            }
        }
        removed
    }

    /// Removes a need together with its methods and any subgoals created on its behalf.
    pub fn remove_need(&mut self, label: &str) -> Vec<Slot> {
        let Some(id) = self.find(SlotTag::Need, label).map(|s| s.id) else {
            return Vec::new();
        };
        let mut removed = self.remove_subtree(id);
        let served: Vec<String> = self
            .slots
            .iter()
            .filter_map(|s| match &s.kind {
                SlotKind::Need { label: l, origin: NeedOrigin::Subgoal { serves }, .. } if serves == label => {
                    Some(l.clone())
                }
                _ => None,
            })
            .collect();
        for sub in served {
            removed.extend(self.remove_need(&sub));
        }
        removed
    }

    /// Reduction: every need whose label matches a resident object is solved.
    /// The need and the methods working on it leave the tree.
    pub fn reduction(&mut self) -> Vec<String> {
        let objects: Vec<String> = self
            .slots
            .iter()
            .filter(|s| s.kind.tag() == SlotTag::Object)
            .map(|s| s.kind.label().to_string())
            .collect();
        let solved: Vec<String> = self
            .slots
            .iter()
            .filter(|s| s.kind.tag() == SlotTag::Need && objects.iter().any(|o| o == s.kind.label()))
            .map(|s| s.kind.label().to_string())
            .collect();
        for label in &solved {
            if let Some(id) = self.find(SlotTag::Need, label).map(|s| s.id) {
                self.remove_subtree(id);
            }
        }
        solved
    }

    /// Removes a finished method. If it served a feeling need that is now
    /// satisfied, that need goes too.
    pub fn complete_method(&mut self, method: &str, satisfied: impl Fn(&str) -> bool) -> Vec<Slot> {
        let Some(slot) = self.find(SlotTag::Method, method).cloned() else {
            return Vec::new();
        };
        let mut removed = self.remove_subtree(slot.id);
        if let SlotKind::Method { target, .. } = &slot.kind {
            let feeling = matches!(
                self.find(SlotTag::Need, target).map(|s| &s.kind),
                Some(SlotKind::Need { origin: NeedOrigin::Feeling, .. })
            );
            if feeling && satisfied(target) {
                removed.extend(self.remove_need(target));
            }
        }
        removed
    }

    /// Drops feeling needs that are no longer unmet. A need whose method is
    /// still running stays until the method finishes. Returns their labels.
    pub fn remove_satisfied(&mut self, satisfied: impl Fn(&str) -> bool) -> Vec<String> {
        let done: Vec<String> = self
            .slots
            .iter()
            .filter_map(|s| match &s.kind {
                SlotKind::Need { label, origin: NeedOrigin::Feeling, .. }
                    if satisfied(label) && !self.has_running_method(label) =>
                {
                    Some(label.clone())
                }
                _ => None,
            })
            .collect();
        for label in &done {
            self.remove_need(label);
        }
        done
    }

    fn has_running_method(&self, need: &str) -> bool {
        self.slots
            .iter()
            .any(|s| matches!(&s.kind, SlotKind::Method { target, running: true, .. } if target == need))
    }

    fn need_intensities(&self) -> Vec<(String, f64)> {
        self.slots
            .iter()
            .filter(|s| s.kind.tag() == SlotTag::Need)
            .map(|s| (s.kind.label().to_string(), s.intensity))
            .collect()
    }

    /// Re-derives intensities: feeling needs take their live weight,
    /// subgoals the intensity of the need they serve, methods that of their
    /// target. Objects fade by `object_decay` and vanish at zero.
    pub fn refresh(&mut self, live_weight: impl Fn(&str) -> Option<f64>, object_decay: f64) -> Vec<Slot> {
        for s in &mut self.slots {
            if let SlotKind::Need { label, weight, origin: NeedOrigin::Feeling } = &mut s.kind {
                if let Some(w) = live_weight(label) {
                    *weight = w;
                    s.intensity = w.max(0.0);
                }
            }
        }
        // Subgoals follow the need they serve, possibly through a chain;
        // methods then follow their target.
        for _ in 0..self.slots.len() {
            let needs = self.need_intensities();
            let mut changed = false;
            for s in &mut self.slots {
                if let SlotKind::Need { weight, origin: NeedOrigin::Subgoal { serves }, .. } = &mut s.kind {
                    if let Some(i) = lookup(&needs, serves) {
                        changed |= s.intensity != i;
                        *weight = i;
                        s.intensity = i;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let needs = self.need_intensities();
        for s in &mut self.slots {
            match &mut s.kind {
                SlotKind::Method { target, .. } => {
                    if let Some(i) = lookup(&needs, target) {
                        s.intensity = i;
                    }
                }
                SlotKind::Object { .. } => s.intensity = (s.intensity - object_decay).max(0.0),
                _ => {}
            }
        }
        let faded: Vec<SlotId> = self
            .slots
            .iter()
            .filter(|s| s.kind.tag() == SlotTag::Object && s.intensity <= 0.0)
            .map(|s| s.id)
            .collect();
        faded.into_iter().flat_map(|id| self.remove_subtree(id)).collect()
    }

    pub fn set_running(&mut self, method: &str, running: bool) {
        for s in &mut self.slots {
            if let SlotKind::Method { label, running: r, .. } = &mut s.kind {
                if label == method {
                    *r = running;
                }
            }
        }
    }

    /// The need `think` attends to: highest intensity, newest on ties.
    pub fn focus(&self) -> Option<&Slot> {
        self.slots
            .iter()
            .filter(|s| s.kind.tag() == SlotTag::Need)
            .max_by(|a, b| {
                a.intensity
                    .total_cmp(&b.intensity)
                    .then(a.admitted_at.cmp(&b.admitted_at))
                    .then(a.id.cmp(&b.id))
            })
    }

    /// Decides what to do about the strongest need. A need nothing can be
    /// done about (no rule, failed premises, no subgoal) passes attention on
    /// to the next strongest; the strongest one's verdict is returned when
    /// every need is stuck.
    pub fn think_decide(&self, kb: &KnowledgeBase, premises: &impl Premises) -> Decision {
        if !self.awake {
            return Decision::Continue;
        }
        let mut needs: Vec<&Slot> = self.slots.iter().filter(|s| s.kind.tag() == SlotTag::Need).collect();
        needs.sort_by(|a, b| {
            b.intensity.total_cmp(&a.intensity).then(b.admitted_at.cmp(&a.admitted_at)).then(b.id.cmp(&a.id))
        });
        let mut stuck = None;
        for slot in needs {
            let need = slot.kind.label().to_string();
            let running = self.slots.iter().any(|s| {
                matches!(&s.kind, SlotKind::Method { target, running: true, .. } if *target == need)
            });
            if running {
                return Decision::Continue;
            }
            let verdict = match kb.query(&need) {
                None => Decision::NoMethod { need },
                Some(rule) if rule.preconditions.iter().all(|p| premises.holds(p)) => {
                    return Decision::Execute { need, method: rule.method.clone() };
                }
                Some(rule) => match &rule.subgoal_on_failure {
                    Some(sub) if !self.contains(SlotTag::Need, sub) => {
                        return Decision::Subgoal { need, method: rule.method.clone(), subgoal: sub.clone() };
                    }
                    // Waiting on its subgoal.
                    Some(_) => return Decision::Continue,
                    None => Decision::Continue,
                },
            };
            stuck.get_or_insert(verdict);
        }
        stuck.unwrap_or(Decision::Continue)
    }

    /// Immutable copy of the tree content for the Down-Tree.
    pub fn snapshot(&self) -> StmSnapshot {
        StmSnapshot {
            entries: self
                .slots
                .iter()
                .map(|s| SnapshotEntry {
                    tag: s.kind.tag(),
                    label: s.kind.label().to_string(),
                    intensity: s.intensity,
                    position: match &s.kind {
                        SlotKind::Object { position, seen_at, .. } => Some((*position, *seen_at)),
                        _ => None,
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEntry {
    pub tag: SlotTag,
    pub label: String,
    pub intensity: f64,
    /// Objects only: where and when the thing was last seen.
    pub position: Option<(Vec2, u64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StmSnapshot {
    pub entries: Vec<SnapshotEntry>,
}

impl StmSnapshot {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn lookup(table: &[(String, f64)], label: &str) -> Option<f64> {
    table.iter().find(|(l, _)| l == label).map(|(_, i)| *i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltm::{KnowledgeBase, Rule};

    struct Owns(Vec<&'static str>);
    impl Premises for Owns {
        fn holds(&self, p: &Predicate) -> bool {
            p.name == "possess" && self.0.contains(&p.arg.as_str())
        }
    }

    fn full_tree() -> SlotTree {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        t.admit(SlotKind::method("eat", "hungry"), 6.0, 2).unwrap();
        t.admit(SlotKind::subgoal("food", 6.0, "hungry"), 6.0, 3).unwrap();
        t.admit(SlotKind::object("obj_1", Vec2::default(), 1), 4.0, 1).unwrap();
        t.admit(SlotKind::object("obj_2", Vec2::default(), 1), 3.0, 1).unwrap();
        t.admit(SlotKind::object("obj_3", Vec2::default(), 1), 2.0, 1).unwrap();
        t
    }

    #[test]
    fn full_tree_evicts_weakest() {
        let mut t = full_tree();
        assert_eq!(t.len(), 7);
        let adm = t.admit(SlotKind::method("search", "food"), 6.0, 4).unwrap();
        match adm {
            Admission::Replaced { evicted, cascade, .. } => {
                assert_eq!(evicted.kind.label(), "obj_3");
                assert!(cascade.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(t.len(), 7);
        assert!(t.contains(SlotTag::Method, "search"));
    }

    #[test]
    fn weak_item_rejected_when_full() {
        let mut t = full_tree();
        let before = t.clone();
        let r = t.admit(SlotKind::object("pebble", Vec2::default(), 4), 1.0, 4);
        assert_eq!(r, Err(StmError::Rejected(1.0)));
        assert_eq!(t, before);
    }

    #[test]
    fn need_attaches_to_root_and_method_to_need() {
        let mut t = SlotTree::awake();
        let root = t.root().unwrap().id;
        t.admit(SlotKind::need("hungry", 5.0), 5.0, 1).unwrap();
        let hungry = t.find(SlotTag::Need, "hungry").unwrap();
        assert_eq!(hungry.parent, Some(root));
        let hid = hungry.id;
        t.admit(SlotKind::method("eat", "hungry"), 5.0, 1).unwrap();
        assert_eq!(t.find(SlotTag::Method, "eat").unwrap().parent, Some(hid));
        let err = t.admit(SlotKind::method("drink", "thirsty"), 5.0, 1).unwrap_err();
        assert!(matches!(err, StmError::MissingTarget { .. }));
    }

    #[test]
    fn duplicates_refresh() {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::object("prey", Vec2::new(1.0, 1.0), 1), 2.0, 1).unwrap();
        let r = t.admit(SlotKind::object("prey", Vec2::new(2.0, 2.0), 2), 5.0, 2).unwrap();
        assert!(matches!(r, Admission::Refreshed(_)));
        assert_eq!(t.len(), 2);
        let s = t.find(SlotTag::Object, "prey").unwrap();
        assert_eq!(s.intensity, 5.0);
        assert_eq!(s.kind, SlotKind::object("prey", Vec2::new(2.0, 2.0), 2));
        t.admit(SlotKind::object("prey", Vec2::new(2.0, 2.0), 3), 1.0, 3).unwrap();
        assert_eq!(t.find(SlotTag::Object, "prey").unwrap().intensity, 5.0);
    }

    #[test]
    fn asleep_rejects_and_wake_cycle() {
        let mut t = SlotTree::default();
        assert_eq!(t.admit(SlotKind::need("x", 1.0), 1.0, 0), Err(StmError::Asleep));
        t.sleep_wake(true, 0);
        assert_eq!(t.labels(), ["self"]);
        let before = t.clone();
        t.sleep_wake(true, 5);
        assert_eq!(t, before);
        assert_eq!(t.admit(SlotKind::Ontology, 1.0, 0), Err(StmError::Ontology));
        for i in 0..4 {
            t.admit(SlotKind::need(format!("n{i}"), 1.0), 1.0, 0).unwrap();
        }
        assert_eq!(t.len(), 5);
        t.sleep_wake(false, 1);
        assert!(t.is_empty());
        assert!(!t.is_awake());
    }

    #[test]
    fn reduction_rules() {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::object("food", Vec2::default(), 1), 5.0, 1).unwrap();
        assert!(t.reduction().is_empty());
        assert_eq!(t.len(), 2);

        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        t.admit(SlotKind::subgoal("food", 6.0, "hungry"), 6.0, 1).unwrap();
        t.admit(SlotKind::method("search", "food"), 6.0, 1).unwrap();
        t.admit(SlotKind::object("prey", Vec2::default(), 1), 5.0, 1).unwrap();
        assert!(t.reduction().is_empty());
        t.admit(SlotKind::object("food", Vec2::default(), 2), 5.0, 2).unwrap();
        assert_eq!(t.reduction(), vec!["food".to_string()]);
        assert_eq!(t.labels(), ["self", "hungry", "prey", "food"]);
    }

    #[test]
    fn complete_method_cases() {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        t.admit(SlotKind::method("eat", "hungry"), 6.0, 1).unwrap();
        let before = t.clone();
        assert!(t.complete_method("nap", |_| true).is_empty());
        assert_eq!(t, before);

        t.complete_method("eat", |_| false);
        assert_eq!(t.labels(), ["self", "hungry"]);

        t.admit(SlotKind::method("eat", "hungry"), 6.0, 2).unwrap();
        t.complete_method("eat", |l| l == "hungry");
        assert_eq!(t.labels(), ["self"]);
    }

    #[test]
    fn removing_a_need_takes_its_subgoals() {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        t.admit(SlotKind::method("eat", "hungry"), 6.0, 1).unwrap();
        t.admit(SlotKind::subgoal("food", 6.0, "hungry"), 6.0, 1).unwrap();
        t.admit(SlotKind::method("search", "food"), 6.0, 1).unwrap();
        assert_eq!(t.remove_satisfied(|l| l == "hungry"), vec!["hungry".to_string()]);
        assert_eq!(t.labels(), ["self"]);
    }

    #[test]
    fn think_cases() {
        let mut kb = KnowledgeBase::default();
        kb.insert_rule(Rule::parse("hungry -> eat [pre: possess(food)] [subgoal: food]").unwrap())
            .unwrap();
        kb.insert_rule(Rule::parse("food -> search").unwrap()).unwrap();

        let mut t = SlotTree::awake();
        assert_eq!(t.think_decide(&kb, &Owns(vec![])), Decision::Continue);

        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        assert_eq!(
            t.think_decide(&kb, &Owns(vec![])),
            Decision::Subgoal { need: "hungry".into(), method: "eat".into(), subgoal: "food".into() }
        );
        assert_eq!(
            t.think_decide(&kb, &Owns(vec!["food"])),
            Decision::Execute { need: "hungry".into(), method: "eat".into() }
        );

        t.admit(SlotKind::subgoal("food", 6.0, "hungry"), 6.0, 2).unwrap();
        assert_eq!(
            t.think_decide(&kb, &Owns(vec![])),
            Decision::Execute { need: "food".into(), method: "search".into() }
        );
        t.admit(SlotKind::method("search", "food"), 6.0, 2).unwrap();
        t.set_running("search", true);
        assert_eq!(t.think_decide(&kb, &Owns(vec![])), Decision::Continue);

        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("respect", 9.0), 9.0, 1).unwrap();
        assert_eq!(t.think_decide(&kb, &Owns(vec![])), Decision::NoMethod { need: "respect".into() });

        // A stuck need passes attention down.
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 2).unwrap();
        assert_eq!(
            t.think_decide(&kb, &Owns(vec!["food"])),
            Decision::Execute { need: "hungry".into(), method: "eat".into() }
        );
        // A need waiting on its subgoal keeps it.
        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 9.0), 9.0, 1).unwrap();
        t.admit(SlotKind::subgoal("food", 1.0, "hungry"), 1.0, 1).unwrap();
        kb.insert_rule(Rule::parse("thirsty -> drink").unwrap()).unwrap();
        t.admit(SlotKind::need("thirsty", 5.0), 5.0, 1).unwrap();
        assert_eq!(t.think_decide(&kb, &Owns(vec![])), Decision::Continue);
    }

    #[test]
    fn refresh_fades_objects_and_tracks_weights() {
        let mut t = SlotTree::awake();
        t.admit(SlotKind::need("hungry", 6.0), 6.0, 1).unwrap();
        t.admit(SlotKind::subgoal("food", 6.0, "hungry"), 6.0, 1).unwrap();
        t.admit(SlotKind::method("search", "food"), 6.0, 1).unwrap();
        t.admit(SlotKind::object("prey", Vec2::default(), 1), 0.5, 1).unwrap();
        let gone = t.refresh(|l| (l == "hungry").then_some(8.0), OBJECT_DECAY);
        assert_eq!(gone.len(), 1);
        assert_eq!(t.find(SlotTag::Method, "search").unwrap().intensity, 8.0);
        assert_eq!(t.find(SlotTag::Need, "food").unwrap().intensity, 8.0);
    }

    #[test]
    fn snapshot_is_a_copy() {
        let mut t = SlotTree::awake();
        assert_eq!(SlotTree::default().snapshot().len(), 0);
        t.admit(SlotKind::need("a", 1.0), 1.0, 0).unwrap();
        t.admit(SlotKind::need("b", 1.0), 1.0, 0).unwrap();
        let mut snap = t.snapshot();
        assert_eq!(snap.len(), 3);
        snap.entries[1].label.push_str("-mutated");
        assert!(t.contains(SlotTag::Need, "a"));
    }
}
