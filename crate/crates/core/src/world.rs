//! The 2D environment and the per-slot engine loop.

use crate::geom::{distance, Vec2};
use crate::links::{broadcast, Chunk, ChunkPayload, Pipe, UpTree};
use crate::ltm::{
    sense, skill_step, KnowledgeBase, Message, Observer, Percept, PerceptKind, Predicate, Sighting, Skill,
    SkillContext, SkillState,
};
use crate::needs::{
    all_weights, NeedEvent, NeedHierarchy, NeedId, NeedMap, SatisfactionState, WeightParams, DEFAULT_THRESHOLD,
    S_MAX,
};
use crate::stm::{
    Admission, Decision, Premises, Slot, SlotKind, SlotTag, SlotTree, OBJECT_DECAY, OBJECT_INTENSITY, STM_CAPACITY,
};
use crate::trace::{sort_events, EventKind, TraceEvent};

pub const PREDATOR_LABEL: &str = "predator";
pub const PREY_LABEL: &str = "prey";
pub const FOOD_ITEM: &str = "food";

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub name: String,
    pub position: Vec2,
    pub speed: f64,
    pub flee_speed: f64,
    pub view_radius: f64,
    pub hearing_radius: f64,
    pub friend: Option<String>,
    pub sat: NeedMap<f64>,
    pub decay: NeedMap<f64>,
    pub possessions: Vec<String>,
}

impl AgentConfig {
    pub fn new(name: impl Into<String>, position: Vec2) -> Self {
        AgentConfig {
            name: name.into(),
            position,
            speed: 1.0,
            flee_speed: 1.0,
            view_radius: 23.0,
            hearing_radius: 50.0,
            friend: None,
            sat: NeedMap::splat(S_MAX),
            decay: crate::needs::default_decay(),
            possessions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredatorConfig {
    pub name: String,
    pub position: Vec2,
    pub speed: f64,
    pub view_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreyConfig {
    pub name: String,
    pub position: Vec2,
}

/// A scripted perturbation applied at the start of its slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    SetSat { agent: String, need: NeedId, value: f64 },
    Give { agent: String, item: String },
    Place { entity: String, position: Vec2 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledEvent {
    pub slot: u64,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub agents: Vec<AgentConfig>,
    pub predators: Vec<PredatorConfig>,
    pub prey: Vec<PreyConfig>,
    pub params: WeightParams,
    /// Levels whose correction is derived rather than given.
    pub delta_auto: [bool; 4],
    pub hierarchy: NeedHierarchy,
    pub recovery: NeedMap<f64>,
    pub threshold: f64,
    /// Needs with a feeling processor, in leaf order.
    pub active: Vec<NeedId>,
    pub capture_distance: f64,
    pub horizon: u64,
    pub seed: u64,
    pub schedule: Vec<ScheduledEvent>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            agents: Vec::new(),
            predators: Vec::new(),
            prey: Vec::new(),
            params: WeightParams::default(),
            delta_auto: [false, true, true, true],
            hierarchy: NeedHierarchy::default(),
            recovery: crate::needs::default_recovery(),
            threshold: DEFAULT_THRESHOLD,
            active: NeedId::ALL.to_vec(),
            capture_distance: 1.0,
            horizon: 90,
            seed: 0,
            schedule: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    /// Fills in every correction flagged as derived.
    pub fn resolve_deltas(&mut self) {
        let auto = self.params.clone().with_auto_delta(&self.hierarchy);
        for (i, flag) in self.delta_auto.iter().enumerate() {
            if *flag {
                self.params.delta[i] = auto.delta[i];
            }
        }
    }
}

struct Running {
    method: String,
    target: String,
    skill: Skill,
    state: SkillState,
}

pub struct Agent {
    pub id: usize,
    pub name: String,
    pub position: Vec2,
    pub speed: f64,
    pub flee_speed: f64,
    pub view_radius: f64,
    pub hearing_radius: f64,
    pub friend: Option<usize>,
    pub possessions: Vec<String>,
    pub needs: SatisfactionState,
    pub stm: SlotTree,
    pub uptree: UpTree,
    pub pipe: Pipe,
    pub kb: KnowledgeBase,
    pub alive: bool,
    /// Agents that have warned this one.
    pub warned_by: Vec<usize>,
    arisen: NeedMap<bool>,
    percepts: Vec<Percept>,
    running: Vec<Running>,
}

impl Agent {
    pub fn running_methods(&self) -> Vec<&str> {
        self.running.iter().map(|r| r.method.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predator {
    pub name: String,
    pub position: Vec2,
    pub speed: f64,
    pub view_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prey {
    pub name: String,
    pub position: Vec2,
    pub alive: bool,
}

/// Everything that changes while a scenario runs. Entity ids are agents
/// first, then predators, then prey.
pub struct World {
    pub slot: u64,
    pub agents: Vec<Agent>,
    pub predators: Vec<Predator>,
    pub prey: Vec<Prey>,
    params: WeightParams,
    hierarchy: NeedHierarchy,
    active: Vec<NeedId>,
    capture_distance: f64,
    schedule: Vec<ScheduledEvent>,
    /// Messages spoken last slot, heard this slot.
    inbox: Vec<Message>,
}

struct Facts<'a> {
    friend: Option<usize>,
    warned_by: &'a [usize],
    possessions: &'a [String],
    percepts: &'a [Percept],
    kb: &'a KnowledgeBase,
}

impl Premises for Facts<'_> {
    fn holds(&self, p: &Predicate) -> bool {
        let visible = || self.percepts.iter().any(|x| x.kind == PerceptKind::Visual && x.label == p.arg);
        match p.name.as_str() {
            "possess" => self.possessions.contains(&p.arg),
            "visible" => visible(),
            "known" => visible() || self.kb.fact(&p.arg).is_some(),
            // A friend who raised the alarm already knows.
            "unaware" if p.arg == "friend" => self.friend.is_some_and(|f| !self.warned_by.contains(&f)),
            _ => false,
        }
    }
}

fn slot_event(slot: u64, a: &Agent, kind: EventKind) -> TraceEvent {
    TraceEvent::new(slot, a.id, &a.name, kind)
}

fn slot_label(s: &Slot) -> String {
    format!("{}:{}", s.kind.tag(), s.kind.label())
}

fn need_column(label: &str) -> String {
    NeedId::from_slot_label(label).map(|n| n.name().to_string()).unwrap_or_else(|| label.to_string())
}

impl World {
    pub fn new(config: &ScenarioConfig) -> World {
        let index_of = |name: &str| config.agents.iter().position(|a| a.name == name);
        let agents = config
            .agents
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let needs = SatisfactionState {
                    sat: c.sat,
                    decay_rate: c.decay,
                    recovery_rate: config.recovery,
                    threshold: config.threshold,
                };
                Agent {
                    id,
                    name: c.name.clone(),
                    position: c.position,
                    speed: c.speed,
                    flee_speed: c.flee_speed,
                    view_radius: c.view_radius,
                    hearing_radius: c.hearing_radius,
                    friend: c.friend.as_deref().and_then(index_of),
                    possessions: c.possessions.clone(),
                    arisen: NeedMap::from_fn(|n| needs.is_arisen(n)),
                    needs,
                    stm: SlotTree::awake(),
                    uptree: UpTree::new(config.active.len()),
                    pipe: Pipe::default(),
                    kb: KnowledgeBase::with_default_rules(),
                    alive: true,
                    warned_by: Vec::new(),
                    percepts: Vec::new(),
                    running: Vec::new(),
                }
            })
            .collect();
        World {
            slot: 0,
            agents,
            predators: config
                .predators
                .iter()
                .map(|p| Predator {
                    name: p.name.clone(),
                    position: p.position,
                    speed: p.speed,
                    view_radius: p.view_radius,
                })
                .collect(),
            prey: config
                .prey
                .iter()
                .map(|p| Prey { name: p.name.clone(), position: p.position, alive: true })
                .collect(),
            params: config.params.clone(),
            hierarchy: config.hierarchy.clone(),
            active: config.active.clone(),
            capture_distance: config.capture_distance,
            schedule: config.schedule.clone(),
            inbox: Vec::new(),
        }
    }

    fn predator_id(&self, i: usize) -> usize {
        self.agents.len() + i
    }

    fn prey_id(&self, i: usize) -> usize {
        self.agents.len() + self.predators.len() + i
    }

    pub fn all_dead(&self) -> bool {
        self.agents.iter().all(|a| !a.alive)
    }

    /// Advances one slot and returns its events in phase order per agent.
    pub fn tick(&mut self) -> Vec<TraceEvent> {
        self.slot += 1;
        let slot = self.slot;
        let mut ev = Vec::new();

        // 1. environment
        self.apply_schedule(slot);
        self.predators_move();

        // 2. sense
        let sightings = self.sightings();
        let inbox = std::mem::take(&mut self.inbox);
        let names: Vec<String> = self.agents.iter().map(|a| a.name.clone()).collect();
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            let obs = Observer {
                id: a.id,
                position: a.position,
                view_radius: a.view_radius,
                hearing_radius: a.hearing_radius,
            };
            a.percepts = sense(&obs, &sightings, &inbox, slot);
            for p in &a.percepts {
                if p.kind == PerceptKind::Auditory {
                    let from = names.get(p.source).cloned().unwrap_or_default();
                    if !a.warned_by.contains(&p.source) {
                        a.warned_by.push(p.source);
                    }
                    ev.push(slot_event(slot, a, EventKind::RemindHeard).label(from).at(p.position));
                    a.kb.update(crate::ltm::Fact {
                        label: PREDATOR_LABEL.to_string(),
                        last_position: p.position,
                        last_seen_slot: slot,
                    });
                    let d = distance(a.position, p.position);
                    let _ = a.needs.apply_event(NeedEvent::PredatorProximity { distance: d, radius: a.view_radius });
                }
                a.pipe.push(p.clone());
            }
        }

        // 3. feelings
        let positions: Vec<Vec2> = self.agents.iter().map(|a| a.position).collect();
        let alive: Vec<bool> = self.agents.iter().map(|a| a.alive).collect();
        let first_predator = self.predator_id(0);
        let threat_view: Vec<f64> = self.predators.iter().map(|p| p.view_radius).collect();
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            feel(a, &positions, first_predator, &threat_view, &alive, slot, &self.params, &self.hierarchy, &self.active, &mut ev);
        }

        // 4. competition
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            let (winner, _) = a.uptree.compete_step();
            if let Some(chunk) = winner {
                admit_chunk(a, chunk, slot, &mut ev);
            }
        }

        // 5. conscious processing
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            conscious(a, slot, &self.params, &self.hierarchy, &mut ev);
        }

        // 6. skills
        let mut outbox = Vec::new();
        for i in 0..self.agents.len() {
            if self.agents[i].alive {
                self.step_skills(i, slot, &mut outbox, &mut ev);
            }
        }
        self.inbox = outbox;

        // 7. down-tree broadcast
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            let snap = (slot, a.stm.snapshot());
            broadcast(&snap, std::slice::from_mut(&mut a.kb));
        }

        // 8. death
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            assert!(a.stm.len() <= STM_CAPACITY, "{}: {} slots in short-term memory", a.name, a.stm.len());
            if a.needs.is_dead() {
                a.alive = false;
                a.stm.sleep_wake(false, slot);
                a.running.clear();
                let need = NeedId::at_level(1).find(|n| a.needs.get(*n) <= 0.0).expect("a depleted need");
                ev.push(slot_event(slot, a, EventKind::Death).need(need.name()).at(a.position));
            }
        }

        for a in &self.agents {
            for need in NeedId::ALL {
                ev.push(
                    slot_event(slot, a, EventKind::SatisfactionSample)
                        .need(need.name())
                        .value(a.needs.get(need))
                        .at(a.position),
                );
            }
        }
        sort_events(&mut ev);
        ev
    }

    fn apply_schedule(&mut self, slot: u64) {
        let due: Vec<Action> =
            self.schedule.iter().filter(|e| e.slot == slot).map(|e| e.action.clone()).collect();
        for action in due {
            match action {
                Action::SetSat { agent, need, value } => {
                    if let Some(a) = self.agents.iter_mut().find(|a| a.name == agent) {
                        a.needs.set(need, value);
                    }
                }
                Action::Give { agent, item } => {
                    if let Some(a) = self.agents.iter_mut().find(|a| a.name == agent) {
                        a.possessions.push(item);
                    }
                }
                Action::Place { entity, position } => {
                    if let Some(a) = self.agents.iter_mut().find(|a| a.name == entity) {
                        a.position = position;
                    } else if let Some(p) = self.predators.iter_mut().find(|p| p.name == entity) {
                        p.position = position;
                    } else if let Some(p) = self.prey.iter_mut().find(|p| p.name == entity) {
                        p.position = position;
                    }
                }
            }
        }
    }

    /// Every predator closes in on the nearest living agent it can see.
    fn predators_move(&mut self) {
        for p in &mut self.predators {
            let target = self
                .agents
                .iter()
                .filter(|a| a.alive)
                .map(|a| (distance(a.position, p.position), a.id, a.position))
                .filter(|(d, _, _)| *d <= p.view_radius)
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            if let Some((_, _, pos)) = target {
                p.position = p.position.step_toward(pos, p.speed);
            }
        }
    }

    fn sightings(&self) -> Vec<Sighting> {
        let mut out: Vec<Sighting> = self
            .agents
            .iter()
            .filter(|a| a.alive)
            .map(|a| Sighting { id: a.id, label: a.name.clone(), position: a.position })
            .collect();
        for (i, p) in self.predators.iter().enumerate() {
            out.push(Sighting { id: self.predator_id(i), label: PREDATOR_LABEL.into(), position: p.position });
        }
        for (i, p) in self.prey.iter().enumerate().filter(|(_, p)| p.alive) {
            out.push(Sighting { id: self.prey_id(i), label: PREY_LABEL.into(), position: p.position });
        }
        out
    }

    fn escaped(&self, a: &Agent) -> bool {
        self.predators.iter().all(|p| {
            let d = distance(p.position, a.position);
            d > a.view_radius && d > p.view_radius
        })
    }

    fn step_skills(&mut self, i: usize, slot: u64, outbox: &mut Vec<Message>, ev: &mut Vec<TraceEvent>) {
        // Only the strongest method moves the body; the others wait.
        let Some(r) = self.agents[i]
            .running
            .iter()
            .enumerate()
            .filter_map(|(k, r)| self.agents[i].stm.find(SlotTag::Method, &r.method).map(|s| (k, s)))
            .max_by(|(_, x), (_, y)| {
                x.intensity.total_cmp(&y.intensity).then(x.admitted_at.cmp(&y.admitted_at)).then(x.id.cmp(&y.id))
            })
            .map(|(k, _)| k)
        else {
            return;
        };
        let escaped = self.escaped(&self.agents[i]);
        let a = &self.agents[i];
        let friend_visible = a.friend.is_some_and(|f| a.percepts.iter().any(|p| p.source == f));
        let friend_safe = !friend_visible || !a.needs.is_arisen(NeedId::Friendship);
        let mut state = a.running[r].state;
        let skill = a.running[r].skill;
        let method = a.running[r].method.clone();
        let target = a.running[r].target.clone();
        let out = {
            let ctx = SkillContext {
                self_id: a.id,
                position: a.position,
                speed: a.speed,
                flee_speed: a.flee_speed,
                view_radius: a.view_radius,
                capture_distance: self.capture_distance,
                possessions: &a.possessions,
                percepts: &a.percepts,
                kb: &a.kb,
                target: &target,
                friend: a.friend,
                escaped,
                friend_safe,
            };
            skill_step(skill, &ctx, &mut state)
        };
        let prey_base = self.prey_id(0);
        let friend_name = a.friend.map(|f| self.agents[f].name.clone());

        if let Some(id) = out.capture {
            if let Some(p) = self.prey.get_mut(id - prey_base) {
                p.alive = false;
            }
        }
        let a = &mut self.agents[i];
        a.running[r].state = state;
        if !out.applicable {
            // Premises changed under the skill; drop it and let think decide again.
            a.running.remove(r);
            a.stm.complete_method(&method, |_| false);
            return;
        }
        if let Some(to) = out.move_to {
            a.position = to;
        }
        if let Some(id) = out.capture {
            a.possessions.push(FOOD_ITEM.to_string());
            a.kb.forget(PREY_LABEL);
            a.pipe.push(Percept::visual(FOOD_ITEM, a.position, id, slot));
        }
        if let Some(item) = out.consume.as_ref().or(out.drop.as_ref()) {
            if let Some(k) = a.possessions.iter().position(|p| p == item) {
                a.possessions.remove(k);
            }
        }
        if let Some(e) = out.need_event {
            let _ = a.needs.apply_event(e);
            if e == NeedEvent::Ate {
                ev.push(slot_event(slot, a, EventKind::EatDone).need(NeedId::Energy.name()).at(a.position));
            }
        }
        if let Some(m) = out.message {
            ev.push(
                slot_event(slot, a, EventKind::RemindSent)
                    .label(friend_name.unwrap_or_default())
                    .at(m.threat_position),
            );
            outbox.push(m);
        }
        if out.done {
            ev.push(slot_event(slot, a, EventKind::SkillDone).need(need_column(&target)).label(&method).at(a.position));
            a.running.remove(r);
            let needs = a.needs.clone();
            a.stm.complete_method(&method, |label| {
                NeedId::from_slot_label(label).is_some_and(|n| !needs.is_arisen(n))
            });
        }
    }
}

/// Decay, distance-driven updates, threshold check and Up-Tree submissions.
#[allow(clippy::too_many_arguments)]
fn feel(
    a: &mut Agent,
    positions: &[Vec2],
    first_predator: usize,
    threat_view: &[f64],
    alive: &[bool],
    slot: u64,
    params: &WeightParams,
    hierarchy: &NeedHierarchy,
    active: &[NeedId],
    ev: &mut Vec<TraceEvent>,
) {
    a.needs.decay_tick();
    let threats: Vec<(Vec2, f64)> = a
        .percepts
        .iter()
        .filter(|p| p.kind == PerceptKind::Visual && p.label == PREDATOR_LABEL)
        .map(|p| (p.position, threat_view[p.source - first_predator]))
        .collect();
    let nearest = |from: Vec2| {
        threats.iter().map(|(t, r)| (distance(*t, from), *r)).min_by(|x, y| x.0.total_cmp(&y.0))
    };
    let event = match nearest(a.position) {
        Some((d, _)) => NeedEvent::PredatorProximity { distance: d, radius: a.view_radius },
        None => NeedEvent::Recover(NeedId::PersonalSafety),
    };
    let _ = a.needs.apply_event(event);
    if let Some(f) = a.friend.filter(|&f| alive[f]) {
        let visible = a.percepts.iter().any(|p| p.kind == PerceptKind::Visual && p.source == f);
        let event = match nearest(positions[f]).filter(|_| visible) {
            // The friend is safe once the threat can no longer see it.
            Some((d, r)) => NeedEvent::FriendThreat { distance: d, radius: r },
            None => NeedEvent::Recover(NeedId::Friendship),
        };
        let _ = a.needs.apply_event(event);
    }

    for need in NeedId::ALL {
        let now = a.needs.is_arisen(need);
        if now && !a.arisen[need] {
            ev.push(
                slot_event(slot, a, EventKind::NeedArise)
                    .need(need.name())
                    .label(need.slot_label())
                    .value(a.needs.get(need)),
            );
        }
        a.arisen[need] = now;
    }

    let weights = all_weights(params, hierarchy, &a.needs.sat, slot);
    for (leaf, &need) in active.iter().enumerate() {
        if !a.arisen[need] || a.stm.contains(SlotTag::Need, need.slot_label()) {
            continue;
        }
        let chunk = Chunk { ltm_id: leaf, payload: ChunkPayload::Need(need), weight: weights.w[need], submitted_at: slot };
        if a.uptree.submit(leaf, chunk).is_ok() {
            ev.push(
                slot_event(slot, a, EventKind::ChunkSubmit)
                    .need(need.name())
                    .label(leaf.to_string())
                    .value(weights.w[need]),
            );
        }
    }
}

fn push_admission(a: &mut Agent, adm: &Admission, slot: u64, ev: &mut Vec<TraceEvent>) {
    let evicted: Vec<Slot> = match adm {
        Admission::Replaced { evicted, cascade, .. } => std::iter::once(evicted.clone()).chain(cascade.clone()).collect(),
        _ => Vec::new(),
    };
    for s in &evicted {
        ev.push(slot_event(slot, a, EventKind::SlotEvict).label(slot_label(s)).value(s.intensity));
    }
    drop_orphans(a);
    let id = match adm {
        Admission::Admitted(id) | Admission::Replaced { id, .. } => *id,
        Admission::Refreshed(_) => return,
    };
    let s = a.stm.get(id).expect("admitted slot exists");
    let mut e = slot_event(slot, a, EventKind::SlotAdmit).label(slot_label(s)).value(s.intensity);
    if let SlotKind::Object { position, .. } = &s.kind {
        e = e.at(*position);
    }
    if let SlotKind::Need { label, .. } = &s.kind {
        e = e.need(need_column(label));
    }
    ev.push(e);
}

/// Running skills whose method slot is gone stop.
fn drop_orphans(a: &mut Agent) {
    let stm = &a.stm;
    a.running.retain(|r| stm.contains(SlotTag::Method, &r.method));
}

fn admit_chunk(a: &mut Agent, chunk: Chunk, slot: u64, ev: &mut Vec<TraceEvent>) {
    let ChunkPayload::Need(need) = chunk.payload else {
        return;
    };
    ev.push(
        slot_event(slot, a, EventKind::ChunkEmit)
            .need(need.name())
            .label(chunk.submitted_at.to_string())
            .value(chunk.weight),
    );
    if let Ok(adm) = a.stm.admit(SlotKind::need(need.slot_label(), chunk.weight), chunk.weight, slot) {
        push_admission(a, &adm, slot, ev);
    }
}

fn conscious(a: &mut Agent, slot: u64, params: &WeightParams, hierarchy: &NeedHierarchy, ev: &mut Vec<TraceEvent>) {
    let weights = all_weights(params, hierarchy, &a.needs.sat, slot);
    let faded = a.stm.refresh(|l| NeedId::from_slot_label(l).map(|n| weights.w[n]), OBJECT_DECAY);
    for s in &faded {
        ev.push(slot_event(slot, a, EventKind::SlotEvict).label(slot_label(s)).value(s.intensity));
    }
    drop_orphans(a);

    for p in a.pipe.drain() {
        let kind = SlotKind::object(p.label.clone(), p.position, slot);
        if let Ok(adm) = a.stm.admit(kind, OBJECT_INTENSITY, slot) {
            push_admission(a, &adm, slot, ev);
        }
    }

    let needs = a.needs.clone();
    let mut solved = a.stm.remove_satisfied(|l| NeedId::from_slot_label(l).is_some_and(|n| !needs.is_arisen(n)));
    solved.extend(a.stm.reduction());
    for label in solved {
        ev.push(slot_event(slot, a, EventKind::Reduction).need(need_column(&label)).label(label));
    }
    drop_orphans(a);

    let decision = {
        let facts = Facts {
            friend: a.friend,
            warned_by: &a.warned_by,
            possessions: &a.possessions,
            percepts: &a.percepts,
            kb: &a.kb,
        };
        a.stm.think_decide(&a.kb, &facts)
    };
    match decision {
        Decision::Execute { need, method } => {
            let Some(skill) = Skill::from_name(&method) else {
                return;
            };
            let intensity = a.stm.find(SlotTag::Need, &need).map(|s| s.intensity).unwrap_or(0.0);
            let Ok(adm) = a.stm.admit(SlotKind::method(&method, &need), intensity, slot) else {
                return;
            };
            ev.push(slot_event(slot, a, EventKind::Decide).need(need_column(&need)).label(format!("{need}->{method}")));
            push_admission(a, &adm, slot, ev);
            a.stm.set_running(&method, true);
            a.running.retain(|r| r.method != method);
            a.running.push(Running { method: method.clone(), target: need.clone(), skill, state: SkillState::default() });
            ev.push(slot_event(slot, a, EventKind::SkillStart).need(need_column(&need)).label(&method).at(a.position));
            if skill == Skill::Flee {
                ev.push(slot_event(slot, a, EventKind::FleeStart).need(need_column(&need)).at(a.position));
            }
        }
        Decision::Subgoal { need, method, subgoal } => {
            let intensity = a.stm.find(SlotTag::Need, &need).map(|s| s.intensity).unwrap_or(0.0);
            if let Ok(adm) = a.stm.admit(SlotKind::subgoal(&subgoal, intensity, &need), intensity, slot) {
                ev.push(
                    slot_event(slot, a, EventKind::Decide)
                        .need(need_column(&need))
                        .label(format!("{need}->{method}")),
                );
                ev.push(slot_event(slot, a, EventKind::Subgoal).need(need_column(&need)).label(&subgoal));
                push_admission(a, &adm, slot, ev);
            }
        }
        Decision::Continue | Decision::NoMethod { .. } => {}
    }
}

/// Runs a scenario to its horizon, or until every agent is dead.
pub fn run(config: &ScenarioConfig) -> Vec<TraceEvent> {
    let mut world = World::new(config);
    let mut out = Vec::new();
    while world.slot < config.horizon && !(world.all_dead() && !world.agents.is_empty()) {
        out.extend(world.tick());
    }
    out
}

/// Slots survived by `agent`, capped at the horizon.
pub fn survival_slots(trace: &[TraceEvent], agent: &str, horizon: u64) -> u64 {
    trace
        .iter()
        .find(|e| e.kind == EventKind::Death && e.agent == agent)
        .map(|e| e.slot)
        .unwrap_or(horizon)
        .min(horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone(sat_energy: f64, decay_energy: f64) -> ScenarioConfig {
        let mut a = AgentConfig::new("alice", Vec2::new(0.0, 0.0));
        a.sat[NeedId::Energy] = sat_energy;
        a.decay = NeedMap::splat(0.0);
        a.decay[NeedId::Energy] = decay_energy;
        ScenarioConfig { agents: vec![a], ..Default::default() }
    }

    #[test]
    fn forced_decay_kills_on_hand_computed_slot() {
        let trace = run(&lone(5.1, 1.0));
        let death: Vec<_> = trace.iter().filter(|e| e.kind == EventKind::Death).collect();
        assert_eq!(death.len(), 1);
        assert_eq!(death[0].slot, 6);
        assert_eq!(death[0].need.as_deref(), Some("energy"));
        assert_eq!(trace.iter().map(|e| e.slot).max(), Some(6));
    }

    #[test]
    fn quiet_world_only_samples() {
        let trace = run(&lone(10.0, 0.0));
        assert_eq!(trace.len(), 90 * 10);
        assert!(trace.iter().all(|e| e.kind == EventKind::SatisfactionSample));
    }

    #[test]
    fn empty_world_and_zero_horizon() {
        assert!(run(&ScenarioConfig::default()).is_empty());
        let cfg = ScenarioConfig { horizon: 0, ..lone(5.1, 0.1) };
        assert!(run(&cfg).is_empty());
    }

    #[test]
    fn predator_holds_or_chases() {
        let mut cfg = lone(10.0, 0.0);
        cfg.predators.push(PredatorConfig {
            name: "p".into(),
            position: Vec2::new(30.0, 0.0),
            speed: 1.0,
            view_radius: 23.0,
        });
        let mut w = World::new(&cfg);
        w.tick();
        assert_eq!(w.predators[0].position, Vec2::new(30.0, 0.0));
        w.agents[0].position = Vec2::new(10.0, 0.0);
        w.agents[0].speed = 0.0;
        w.agents[0].flee_speed = 0.0;
        w.tick();
        assert_eq!(w.predators[0].position, Vec2::new(29.0, 0.0));
    }

    #[test]
    fn equidistant_agents_chase_lower_id() {
        let mut cfg = lone(10.0, 0.0);
        let mut b = cfg.agents[0].clone();
        b.name = "bob".into();
        b.position = Vec2::new(10.0, 0.0);
        cfg.agents[0].position = Vec2::new(-10.0, 0.0);
        cfg.agents.push(b);
        cfg.predators.push(PredatorConfig { name: "p".into(), position: Vec2::default(), speed: 1.0, view_radius: 23.0 });
        let mut w = World::new(&cfg);
        w.predators_move();
        assert_eq!(w.predators[0].position, Vec2::new(-1.0, 0.0));
    }
}
