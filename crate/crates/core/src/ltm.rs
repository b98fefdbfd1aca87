//! Unconscious processors: the knowledge base, sensors and skills.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::KbError;
use crate::geom::{distance, Vec2};
use crate::links::Listener;
use crate::needs::NeedEvent;
use crate::stm::{SlotTag, StmSnapshot};

/// A named premise such as `possess(food)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Predicate {
    pub name: String,
    pub arg: String,
}

impl Predicate {
    pub fn new(name: impl Into<String>, arg: impl Into<String>) -> Self {
        Predicate { name: name.into(), arg: arg.into() }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.arg)
    }
}

impl FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| format!("bad predicate `{s}`"))?;
        if !s.ends_with(')') {
            return Err(format!("bad predicate `{s}`"));
        }
        let name = s[..open].trim();
        let arg = s[open + 1..s.len() - 1].trim();
        if !is_word(name) || !is_word(arg) {
            return Err(format!("bad predicate `{s}`"));
        }
        Ok(Predicate::new(name, arg))
    }
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `need -> method [pre: p1,p2] [subgoal: label]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub need: String,
    pub method: String,
    pub preconditions: Vec<Predicate>,
    pub subgoal_on_failure: Option<String>,
}

impl Rule {
    pub fn parse(line: &str) -> Result<Rule, String> {
        let (need, rest) = line.split_once("->").ok_or("expected `->`")?;
        let need = need.trim();
        let rest = rest.trim();
        let (method, mut tail) = match rest.find('[') {
            Some(i) => (rest[..i].trim(), rest[i..].trim()),
            None => (rest, ""),
        };
        if !is_word(need) || !is_word(method) {
            return Err(format!("bad rule head `{line}`"));
        }
        let mut rule = Rule {
            need: need.to_string(),
            method: method.to_string(),
            preconditions: Vec::new(),
            subgoal_on_failure: None,
        };
        while !tail.is_empty() {
            let close = tail.find(']').ok_or("unclosed `[`")?;
            let body = &tail[1..close];
            tail = tail[close + 1..].trim_start();
            if let Some(list) = body.strip_prefix("pre:") {
                for p in list.split(',') {
                    rule.preconditions.push(p.parse()?);
                }
            } else if let Some(label) = body.strip_prefix("subgoal:") {
                let label = label.trim();
                if !is_word(label) {
                    return Err(format!("bad subgoal `{label}`"));
                }
                rule.subgoal_on_failure = Some(label.to_string());
            } else {
                return Err(format!("unknown clause `[{body}]`"));
            }
        }
        Ok(rule)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.need, self.method)?;
        if !self.preconditions.is_empty() {
            let pre: Vec<String> = self.preconditions.iter().map(|p| p.to_string()).collect();
            write!(f, " [pre: {}]", pre.join(","))?;
        }
        if let Some(s) = &self.subgoal_on_failure {
            write!(f, " [subgoal: {s}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub label: String,
    pub last_position: Vec2,
    pub last_seen_slot: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    rules: Vec<Rule>,
    facts: BTreeMap<String, Fact>,
}

/// Rules covering the needs the default scenarios exercise.
pub const DEFAULT_RULES: &str = "\
hungry -> eat [pre: possess(food)] [subgoal: food]
food -> search
thirsty -> drink [pre: possess(water)] [subgoal: water]
water -> search
sleepy -> sleep
personal_safety -> flee [pre: known(predator)]
friendship -> remind [pre: visible(predator),unaware(friend)]
";

impl KnowledgeBase {
    pub fn with_default_rules() -> Self {
        KnowledgeBase::load(DEFAULT_RULES).expect("default rules parse")
    }

    /// Adds a rule; a second rule for the same need is refused.
    pub fn insert_rule(&mut self, rule: Rule) -> Result<(), KbError> {
        if self.query(&rule.need).is_some() {
            return Err(KbError::DuplicateRule { line: 0, need: rule.need });
        }
        self.rules.push(rule);
        Ok(())
    }

    pub fn query(&self, need: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.need == need)
    }

    pub fn forget(&mut self, label: &str) -> Option<Fact> {
        self.facts.remove(label)
    }

    /// Upserts a fact; the newest observation wins.
    pub fn update(&mut self, fact: Fact) {
        match self.facts.get(&fact.label) {
            Some(old) if old.last_seen_slot > fact.last_seen_slot => {}
            _ => {
                self.facts.insert(fact.label.clone(), fact);
            }
        }
    }

    pub fn fact(&self, label: &str) -> Option<&Fact> {
        self.facts.get(label)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values()
    }

    /// Line-oriented text form: rules in insertion order, then facts by label.
    pub fn save(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        for f in self.facts.values() {
            out.push_str(&format!(
                "fact {} {} {} {}\n",
                f.label, f.last_position.x, f.last_position.y, f.last_seen_slot
            ));
        }
        out
    }

    pub fn load(source: &str) -> Result<KnowledgeBase, KbError> {
        let mut kb = KnowledgeBase::default();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            if let Some(rest) = text.strip_prefix("fact ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let bad = |m: &str| KbError::Parse { line, message: m.to_string() };
                if parts.len() != 4 {
                    return Err(bad("expected `fact label x y slot`"));
                }
                let x = parts[1].parse().map_err(|_| bad("bad x"))?;
                let y = parts[2].parse().map_err(|_| bad("bad y"))?;
                let slot = parts[3].parse().map_err(|_| bad("bad slot"))?;
                kb.update(Fact {
                    label: parts[0].to_string(),
                    last_position: Vec2::new(x, y),
                    last_seen_slot: slot,
                });
            } else {
                let rule = Rule::parse(text).map_err(|message| KbError::Parse { line, message })?;
                kb.insert_rule(rule).map_err(|e| match e {
                    KbError::DuplicateRule { need, .. } => KbError::DuplicateRule { line, need },
                    other => other,
                })?;
            }
        }
        Ok(kb)
    }
}

/// The knowledge processor remembers every object in a broadcast that was
/// seen during the broadcast slot. Older objects carry nothing new.
impl Listener<(u64, StmSnapshot)> for KnowledgeBase {
    fn receive(&mut self, (slot, snap): &(u64, StmSnapshot)) {
        for e in snap.entries.iter().filter(|e| e.tag == SlotTag::Object) {
            if let Some((p, seen)) = e.position {
                if seen == *slot {
                    self.update(Fact { label: e.label.clone(), last_position: p, last_seen_slot: seen });
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerceptKind {
    Visual,
    Auditory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    pub label: String,
    pub kind: PerceptKind,
    pub position: Vec2,
    pub source: usize,
    pub slot: u64,
}

impl Percept {
    pub fn visual(label: impl Into<String>, position: Vec2, source: usize, slot: u64) -> Self {
        Percept { label: label.into(), kind: PerceptKind::Visual, position, source, slot }
    }
}

/// Something that can be seen.
#[derive(Debug, Clone, PartialEq)]
pub struct Sighting {
    pub id: usize,
    pub label: String,
    pub position: Vec2,
}

/// A spoken warning about a threat.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub speaker_position: Vec2,
    pub threat: String,
    pub threat_position: Vec2,
}

impl Message {
    pub fn label(&self) -> String {
        format!("{}@({:.1},{:.1})", self.threat, self.threat_position.x, self.threat_position.y)
    }
}

/// What an observer perceives this slot.
#[derive(Debug, Clone, Copy)]
pub struct Observer {
    pub id: usize,
    pub position: Vec2,
    pub view_radius: f64,
    pub hearing_radius: f64,
}

/// Visual percepts for everything within view (self excluded) followed by
/// auditory percepts for messages addressed to the observer within hearing
/// range. Visual percepts come out in entity-id order.
pub fn sense(observer: &Observer, world: &[Sighting], messages: &[Message], slot: u64) -> Vec<Percept> {
    let mut seen: Vec<&Sighting> = world
        .iter()
        .filter(|s| s.id != observer.id && distance(s.position, observer.position) <= observer.view_radius)
        .collect();
    seen.sort_by_key(|s| s.id);
    let mut out: Vec<Percept> =
        seen.into_iter().map(|s| Percept::visual(&s.label, s.position, s.id, slot)).collect();
    out.extend(
        messages
            .iter()
            .filter(|m| {
                m.to == observer.id
                    && distance(m.speaker_position, observer.position) <= observer.hearing_radius
            })
            .map(|m| Percept {
                label: m.label(),
                kind: PerceptKind::Auditory,
                position: m.threat_position,
                source: m.from,
                slot,
            }),
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Skill {
    Eat,
    Drink,
    Sleep,
    Hunt,
    Search,
    Move,
    Observe,
    Put,
    Flee,
    Remind,
}

impl Skill {
    pub const ALL: [Skill; 10] = [
        Skill::Eat,
        Skill::Drink,
        Skill::Sleep,
        Skill::Hunt,
        Skill::Search,
        Skill::Move,
        Skill::Observe,
        Skill::Put,
        Skill::Flee,
        Skill::Remind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Skill::Eat => "eat",
            Skill::Drink => "drink",
            Skill::Sleep => "sleep",
            Skill::Hunt => "hunt",
            Skill::Search => "search",
            Skill::Move => "move",
            Skill::Observe => "observe",
            Skill::Put => "put",
            Skill::Flee => "flee",
            Skill::Remind => "remind",
        }
    }

    pub fn from_name(name: &str) -> Option<Skill> {
        Skill::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Progress kept by a running skill between slots.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SkillState {
    pub steps: u64,
    pub anchor: Vec2,
    pub sweep_angle: f64,
}

/// Everything a skill may look at for one step.
#[derive(Debug, Clone, Copy)]
pub struct SkillContext<'a> {
    pub self_id: usize,
    pub position: Vec2,
    pub speed: f64,
    pub flee_speed: f64,
    pub view_radius: f64,
    pub capture_distance: f64,
    pub possessions: &'a [String],
    pub percepts: &'a [Percept],
    pub kb: &'a KnowledgeBase,
    /// Label of the need the skill serves.
    pub target: &'a str,
    pub friend: Option<usize>,
    /// Every threat is out of this agent's view and has lost sight of it.
    pub escaped: bool,
    /// The friend is no longer in danger.
    pub friend_safe: bool,
}

/// World delta requested by one skill step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkillOutcome {
    pub applicable: bool,
    pub move_to: Option<Vec2>,
    /// Entity id of a captured prey.
    pub capture: Option<usize>,
    pub consume: Option<String>,
    pub drop: Option<String>,
    pub need_event: Option<NeedEvent>,
    pub message: Option<Message>,
    pub done: bool,
}

impl SkillOutcome {
    fn inapplicable() -> Self {
        SkillOutcome::default()
    }

    fn done() -> Self {
        SkillOutcome { applicable: true, done: true, ..Default::default() }
    }
}

/// Which visible or remembered label serves as a source for a target need.
fn source_label(target: &str) -> &str {
    match target {
        "food" => "prey",
        other => other,
    }
}

fn nearest<'a>(ctx: &SkillContext<'a>, label: &str) -> Option<&'a Percept> {
    ctx.percepts
        .iter()
        .filter(|p| p.kind == PerceptKind::Visual && p.label == label)
        .min_by(|a, b| {
            distance(a.position, ctx.position)
                .total_cmp(&distance(b.position, ctx.position))
                .then(a.source.cmp(&b.source))
        })
}

/// One step of `skill`.
pub fn skill_step(skill: Skill, ctx: &SkillContext<'_>, state: &mut SkillState) -> SkillOutcome {
    let first = state.steps == 0;
    if first {
        state.anchor = ctx.position;
    }
    let out = match skill {
        Skill::Eat => consume(ctx, "food", NeedEvent::Ate),
        Skill::Drink => consume(ctx, "water", NeedEvent::Drank),
        Skill::Sleep => SkillOutcome { need_event: Some(NeedEvent::Slept), ..SkillOutcome::done() },
        Skill::Hunt => hunt(ctx, "prey"),
        Skill::Search => search(ctx, state),
        Skill::Move => match ctx.kb.fact(ctx.target) {
            Some(f) => {
                let to = ctx.position.step_toward(f.last_position, ctx.speed);
                SkillOutcome { applicable: true, move_to: Some(to), done: to == f.last_position, ..Default::default() }
            }
            None => SkillOutcome::inapplicable(),
        },
        Skill::Observe => SkillOutcome::done(),
        Skill::Put => match ctx.possessions.first() {
            Some(item) => SkillOutcome { drop: Some(item.clone()), ..SkillOutcome::done() },
            None => SkillOutcome::inapplicable(),
        },
        Skill::Flee => flee(ctx),
        Skill::Remind => remind(ctx, first),
    };
    if out.applicable {
        state.steps += 1;
    }
    out
}

fn consume(ctx: &SkillContext<'_>, item: &str, event: NeedEvent) -> SkillOutcome {
    if ctx.possessions.iter().any(|p| p == item) {
        SkillOutcome { consume: Some(item.to_string()), need_event: Some(event), ..SkillOutcome::done() }
    } else {
        SkillOutcome::inapplicable()
    }
}

/// Close in on the nearest visible `label`, or its remembered position, and
/// capture on contact.
fn hunt(ctx: &SkillContext<'_>, label: &str) -> SkillOutcome {
    let (target, id) = match nearest(ctx, label) {
        Some(p) => (p.position, Some(p.source)),
        None => match ctx.kb.fact(label) {
            Some(f) => (f.last_position, None),
            None => return SkillOutcome::inapplicable(),
        },
    };
    let to = ctx.position.step_toward(target, ctx.speed);
    let contact = distance(to, target) < ctx.capture_distance;
    let mut out = SkillOutcome { applicable: true, move_to: Some(to), ..Default::default() };
    if contact {
        match id {
            Some(id) => {
                out.capture = Some(id);
                out.done = true;
            }
            // Reached a remembered spot and nothing is there.
            None => out.done = true,
        }
    }
    out
}

fn search(ctx: &SkillContext<'_>, state: &mut SkillState) -> SkillOutcome {
    let label = source_label(ctx.target);
    if nearest(ctx, label).is_some() || ctx.kb.fact(label).is_some() {
        let out = hunt(ctx, label);
        if out.applicable {
            return out;
        }
    }
    // Outward spiral around the anchor; loops are one view diameter apart.
    let pitch = (ctx.view_radius.max(1.0) * 2.0) / std::f64::consts::TAU;
    let r = pitch * state.sweep_angle.max(1.0);
    state.sweep_angle += ctx.speed / r;
    let a = state.sweep_angle;
    let waypoint = state.anchor + Vec2::new(a.cos(), a.sin()) * (pitch * a);
    SkillOutcome {
        applicable: true,
        move_to: Some(ctx.position.step_toward(waypoint, ctx.speed)),
        ..Default::default()
    }
}

fn flee(ctx: &SkillContext<'_>) -> SkillOutcome {
    if ctx.escaped {
        return SkillOutcome::done();
    }
    let threat = match nearest(ctx, "predator") {
        Some(p) => p.position,
        None => match ctx.kb.fact("predator") {
            Some(f) => f.last_position,
            None => return SkillOutcome::inapplicable(),
        },
    };
    SkillOutcome {
        applicable: true,
        move_to: Some(ctx.position.step_away(threat, ctx.flee_speed)),
        ..Default::default()
    }
}

/// Warn the friend once, then keep watching until the friend is safe.
fn remind(ctx: &SkillContext<'_>, first: bool) -> SkillOutcome {
    let Some(friend) = ctx.friend else {
        return SkillOutcome::inapplicable();
    };
    if !first {
        return SkillOutcome { applicable: true, done: ctx.friend_safe, ..Default::default() };
    }
    let Some(threat) = nearest(ctx, "predator") else {
        return SkillOutcome::inapplicable();
    };
    SkillOutcome {
        applicable: true,
        message: Some(Message {
            from: ctx.self_id,
            to: friend,
            speaker_position: ctx.position,
            threat: "predator".to_string(),
            threat_position: threat.position,
        }),
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(percepts: &'a [Percept], kb: &'a KnowledgeBase, possessions: &'a [String]) -> SkillContext<'a> {
        SkillContext {
            self_id: 0,
            position: Vec2::new(88.0, 105.0),
            speed: 1.0,
            flee_speed: 1.5,
            view_radius: 23.0,
            capture_distance: 1.0,
            possessions,
            percepts,
            kb,
            target: "food",
            friend: Some(1),
            escaped: false,
            friend_safe: false,
        }
    }

    #[test]
    fn queries() {
        let kb = KnowledgeBase::with_default_rules();
        let r = kb.query("hungry").unwrap();
        assert_eq!(r.method, "eat");
        assert_eq!(r.preconditions, vec![Predicate::new("possess", "food")]);
        assert_eq!(r.subgoal_on_failure.as_deref(), Some("food"));
        assert_eq!(kb.query("food").unwrap().method, "search");
        assert!(kb.query("boredom").is_none());
    }

    #[test]
    fn updates_upsert() {
        let mut kb = KnowledgeBase::default();
        kb.update(Fact { label: "prey".into(), last_position: Vec2::new(100.0, 100.0), last_seen_slot: 3 });
        assert_eq!(kb.fact("prey").unwrap().last_seen_slot, 3);
        kb.update(Fact { label: "prey".into(), last_position: Vec2::new(99.0, 100.0), last_seen_slot: 5 });
        kb.update(Fact { label: "prey".into(), last_position: Vec2::new(0.0, 0.0), last_seen_slot: 4 });
        assert_eq!(kb.facts().count(), 1);
        assert_eq!(kb.fact("prey").unwrap().last_position, Vec2::new(99.0, 100.0));
        kb.update(Fact { label: "predator".into(), last_position: Vec2::default(), last_seen_slot: 1 });
        assert_eq!(kb.facts().count(), 2);
    }

    #[test]
    fn save_load() {
        let empty = KnowledgeBase::default();
        assert_eq!(KnowledgeBase::load(&empty.save()).unwrap(), empty);

        let mut kb = KnowledgeBase::default();
        for line in ["a -> x", "b -> y [pre: possess(z),visible(w)]", "c -> z [subgoal: q]"] {
            kb.insert_rule(Rule::parse(line).unwrap()).unwrap();
        }
        kb.update(Fact { label: "prey".into(), last_position: Vec2::new(0.1, -3.25), last_seen_slot: 7 });
        let text = kb.save();
        assert_eq!(KnowledgeBase::load(&text).unwrap(), kb);
        assert_eq!(KnowledgeBase::load(&text).unwrap().save(), text);

        let truncated = &text[..text.len() - 4];
        assert!(matches!(KnowledgeBase::load(truncated), Err(KbError::Parse { line: 4, .. })));
        assert!(matches!(
            KnowledgeBase::load("a -> x\nb -> [pre: possess(z)"),
            Err(KbError::Parse { line: 2, .. })
        ));
        assert_eq!(
            KnowledgeBase::load("a -> x\na -> y"),
            Err(KbError::DuplicateRule { line: 2, need: "a".into() })
        );
    }

    #[test]
    fn sensing() {
        let observer = Observer { id: 0, position: Vec2::new(88.0, 105.0), view_radius: 23.0, hearing_radius: 50.0 };
        let world = vec![
            Sighting { id: 3, label: "predator".into(), position: Vec2::new(112.0, 84.0) },
            Sighting { id: 2, label: "prey".into(), position: Vec2::new(100.0, 100.0) },
            Sighting { id: 0, label: "alice".into(), position: Vec2::new(88.0, 105.0) },
        ];
        let ps = sense(&observer, &world, &[], 1);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].label, "prey");
        assert_eq!(distance(ps[0].position, observer.position), 13.0);

        let blind = Observer { view_radius: 0.0, ..observer };
        let msg = Message {
            from: 1,
            to: 0,
            speaker_position: Vec2::new(88.0, 110.0),
            threat: "predator".into(),
            threat_position: Vec2::new(112.0, 84.0),
        };
        let ps = sense(&blind, &world, &[msg], 1);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].kind, PerceptKind::Auditory);
        assert_eq!(ps[0].label, "predator@(112.0,84.0)");
    }

    #[test]
    fn hunt_closes_in_and_captures() {
        let kb = KnowledgeBase::default();
        let mut pos = Vec2::new(88.0, 105.0);
        let prey = Vec2::new(100.0, 100.0);
        let mut state = SkillState::default();
        let mut steps = 0;
        loop {
            let percepts = [Percept::visual("prey", prey, 7, steps)];
            let c = SkillContext { position: pos, ..ctx(&percepts, &kb, &[]) };
            let before = distance(pos, prey);
            let out = skill_step(Skill::Hunt, &c, &mut state);
            pos = out.move_to.unwrap();
            steps += 1;
            assert!((before - distance(pos, prey) - before.min(1.0)).abs() < 1e-9);
            if out.done {
                assert_eq!(out.capture, Some(7));
                break;
            }
        }
        assert_eq!(steps, 13);
    }

    #[test]
    fn eat_requires_food() {
        let kb = KnowledgeBase::default();
        let mut st = SkillState::default();
        assert!(!skill_step(Skill::Eat, &ctx(&[], &kb, &[]), &mut st).applicable);
        let food = vec!["food".to_string()];
        let out = skill_step(Skill::Eat, &ctx(&[], &kb, &food), &mut st);
        assert!(out.done);
        assert_eq!(out.need_event, Some(NeedEvent::Ate));
        assert_eq!(out.consume.as_deref(), Some("food"));
    }

    #[test]
    fn remind_then_watch() {
        let kb = KnowledgeBase::default();
        let percepts = [Percept::visual("predator", Vec2::new(112.0, 84.0), 5, 1)];
        let mut st = SkillState::default();
        let out = skill_step(Skill::Remind, &ctx(&percepts, &kb, &[]), &mut st);
        let msg = out.message.unwrap();
        assert_eq!((msg.from, msg.to), (0, 1));
        assert!(!out.done);
        let out = skill_step(Skill::Remind, &ctx(&percepts, &kb, &[]), &mut st);
        assert!(out.message.is_none() && !out.done);
        let safe = SkillContext { friend_safe: true, ..ctx(&percepts, &kb, &[]) };
        assert!(skill_step(Skill::Remind, &safe, &mut st).done);
    }

    #[test]
    fn flee_moves_away() {
        let kb = KnowledgeBase::default();
        let threat = Vec2::new(112.0, 84.0);
        let percepts = [Percept::visual("predator", threat, 5, 1)];
        let c = ctx(&percepts, &kb, &[]);
        let out = skill_step(Skill::Flee, &c, &mut SkillState::default());
        let gained = distance(out.move_to.unwrap(), threat) - distance(c.position, threat);
        assert!((gained - 1.5).abs() < 1e-9);
        let gone = SkillContext { escaped: true, ..c };
        assert!(skill_step(Skill::Flee, &gone, &mut SkillState::default()).done);
        let none = ctx(&[], &kb, &[]);
        assert!(!skill_step(Skill::Flee, &none, &mut SkillState::default()).applicable);
    }

    #[test]
    fn search_sweeps_without_knowledge() {
        let kb = KnowledgeBase::default();
        let mut st = SkillState::default();
        let mut pos = Vec2::new(0.0, 0.0);
        let mut trail = Vec::new();
        for _ in 0..50 {
            let c = SkillContext { position: pos, ..ctx(&[], &kb, &[]) };
            let next = skill_step(Skill::Search, &c, &mut st).move_to.unwrap();
            assert!(distance(pos, next) <= 1.0 + 1e-9);
            pos = next;
            trail.push(pos);
        }
        assert!(distance(pos, Vec2::default()) > 3.0);
        let mut again = SkillState::default();
        let mut p2 = Vec2::new(0.0, 0.0);
        for expected in &trail {
            let c = SkillContext { position: p2, ..ctx(&[], &kb, &[]) };
            p2 = skill_step(Skill::Search, &c, &mut again).move_to.unwrap();
            assert_eq!(p2, *expected);
        }
    }
}
