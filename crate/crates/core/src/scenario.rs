//! Flat `key = value` scenario files.
//!
//! ```text
//! agents = alice
//! predators = p1
//! prey = f
//! alice.pos = 88 105
//! alice.sat.energy = 5.1
//! p1.pos = 112 84
//! f.pos = 100 100
//! params.level2.alpha = -0.5
//! schedule.1 = 40 sat alice energy 10
//! ```
//!
//! Every key is optional except `agents` and the position of each entity.
//! Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::ConfigError;
use crate::geom::Vec2;
use crate::needs::{NeedId, NeedMap, WeightParams, LEVEL_COUNT, S_MAX};
use crate::world::{Action, AgentConfig, PredatorConfig, PreyConfig, ScenarioConfig, ScheduledEvent};

const RESERVED: [&str; 14] = [
    "agents",
    "predators",
    "prey",
    "horizon",
    "seed",
    "threshold",
    "capture_distance",
    "needs",
    "decay",
    "recovery",
    "sons",
    "params",
    "schedule",
    "level",
];

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

/// Key/value pairs with their line numbers; every lookup marks the key used.
struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn parse(source: &str) -> Result<Entries, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (k, v) = text.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if map.contains_key(&key) {
                return Err(ConfigError::Invalid { line, key, message: "duplicate key".into() });
            }
            map.insert(key, Entry { line, value: v.trim().to_string(), used: false });
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| ConfigError::Invalid {
                line,
                key: key.to_string(),
                message: format!("expected {what}, got `{v}`"),
            }),
        }
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.invalid(key, "must be finite")),
            _ => Ok(v),
        }
    }

    fn nonneg(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.real(key)? {
            Some(x) if x < 0.0 => Err(self.invalid(key, "must not be negative")),
            v => Ok(v),
        }
    }

    fn positive(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.real(key)? {
            Some(x) if x <= 0.0 => Err(self.invalid(key, "must be positive")),
            v => Ok(v),
        }
    }

    fn point(&mut self, key: &str) -> Result<Option<Vec2>, ConfigError> {
        let Some((line, v)) = self.take(key) else {
            return Ok(None);
        };
        let nums: Vec<f64> = v.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        if nums.len() != 2 || v.split_whitespace().count() != 2 || !Vec2::new(nums[0], nums[1]).is_finite() {
            return Err(ConfigError::Invalid { line, key: key.into(), message: "expected `x y`".into() });
        }
        Ok(Some(Vec2::new(nums[0], nums[1])))
    }

    fn words(&mut self, key: &str) -> Option<(usize, Vec<String>)> {
        self.take(key).map(|(line, v)| (line, v.split_whitespace().map(str::to_string).collect()))
    }

    fn needs(&mut self, key: &str) -> Result<Option<Vec<NeedId>>, ConfigError> {
        let Some((line, words)) = self.words(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for w in words {
            let n: NeedId = w.parse().map_err(|_| ConfigError::Invalid {
                line,
                key: key.into(),
                message: format!("unknown need `{w}`"),
            })?;
            if out.contains(&n) {
                return Err(ConfigError::Invalid { line, key: key.into(), message: format!("`{w}` listed twice") });
            }
            out.push(n);
        }
        Ok(Some(out))
    }

    fn invalid(&self, key: &str, message: &str) -> ConfigError {
        let line = self.map.get(key).map(|e| e.line).unwrap_or(0);
        ConfigError::Invalid { line, key: key.into(), message: message.into() }
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map(|e| e.line).unwrap_or(0)
    }

    fn reject_unused(&self) -> Result<(), ConfigError> {
        match self.map.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(ConfigError::UnknownKey { line: e.line, key: k.clone() }),
            None => Ok(()),
        }
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
        && s.parse::<NeedId>().is_err()
}

pub fn parse_scenario(source: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut e = Entries::parse(source)?;
    let mut cfg = ScenarioConfig::default();

    let (line, agents) = e.words("agents").ok_or_else(|| ConfigError::Missing("agents".into()))?;
    if agents.is_empty() {
        return Err(ConfigError::Invalid { line, key: "agents".into(), message: "no agents listed".into() });
    }
    let predators = e.words("predators").unwrap_or((0, Vec::new()));
    let prey = e.words("prey").unwrap_or((0, Vec::new()));
    let mut seen: Vec<&String> = Vec::new();
    for (key, (line, names)) in [("agents", (line, &agents)), ("predators", (predators.0, &predators.1)), ("prey", (prey.0, &prey.1))] {
        for n in names {
            if !is_name(n) {
                return Err(ConfigError::Invalid { line, key: key.into(), message: format!("bad entity name `{n}`") });
            }
            if seen.contains(&n) {
                return Err(ConfigError::Invalid { line, key: key.into(), message: format!("`{n}` declared twice") });
            }
            seen.push(n);
        }
    }

    if let Some(h) = e.parsed::<u64>("horizon", "a slot count")? {
        if h == 0 {
            return Err(e.invalid("horizon", "must be positive"));
        }
        cfg.horizon = h;
    }
    if let Some(s) = e.parsed("seed", "an unsigned integer")? {
        cfg.seed = s;
    }
    if let Some(t) = e.real("threshold")? {
        if !(0.0..=S_MAX).contains(&t) {
            return Err(e.invalid("threshold", "must lie in [0, 10]"));
        }
        cfg.threshold = t;
    }
    if let Some(c) = e.nonneg("capture_distance")? {
        cfg.capture_distance = c;
    }
    if let Some(active) = e.needs("needs.active")? {
        if active.is_empty() {
            return Err(e.invalid("needs.active", "at least one need"));
        }
        cfg.active = active;
    }

    let mut decay = crate::needs::default_decay();
    for need in NeedId::ALL {
        if let Some(v) = e.nonneg(&format!("decay.{need}"))? {
            decay[need] = v;
        }
        if let Some(v) = e.nonneg(&format!("recovery.{need}"))? {
            cfg.recovery[need] = v;
        }
        let key = format!("sons.{need}");
        if let Some(sons) = e.needs(&key)? {
            let line = e.line_of(&key);
            cfg.hierarchy.set_sons(need, sons).map_err(|err| ConfigError::Invalid {
                line,
                key: key.clone(),
                message: err.to_string(),
            })?;
        }
    }

    apply_params(&mut e, &mut cfg)?;

    for name in &agents {
        let pos = e.point(&format!("{name}.pos"))?.ok_or_else(|| ConfigError::Missing(format!("{name}.pos")))?;
        let mut a = AgentConfig::new(name.clone(), pos);
        a.decay = decay;
        if let Some(v) = e.nonneg(&format!("{name}.speed"))? {
            a.speed = v;
            a.flee_speed = v;
        }
        if let Some(v) = e.nonneg(&format!("{name}.flee_speed"))? {
            a.flee_speed = v;
        }
        if let Some(v) = e.positive(&format!("{name}.view"))? {
            a.view_radius = v;
        }
        if let Some(v) = e.nonneg(&format!("{name}.hearing"))? {
            a.hearing_radius = v;
        }
        let fkey = format!("{name}.friend");
        if let Some((line, f)) = e.take(&fkey) {
            if f == *name || !agents.contains(&f) {
                return Err(ConfigError::Invalid { line, key: fkey, message: format!("`{f}` is not another agent") });
            }
            a.friend = Some(f);
        }
        if let Some((_, items)) = e.words(&format!("{name}.possess")) {
            a.possessions = items;
        }
        for need in NeedId::ALL {
            let key = format!("{name}.sat.{need}");
            if let Some(v) = e.real(&key)? {
                if !(0.0..=S_MAX).contains(&v) {
                    return Err(e.invalid(&key, "must lie in [0, 10]"));
                }
                a.sat[need] = v;
            }
            if let Some(v) = e.nonneg(&format!("{name}.decay.{need}"))? {
                a.decay[need] = v;
            }
        }
        cfg.agents.push(a);
    }
    for name in &predators.1 {
        let pos = e.point(&format!("{name}.pos"))?.ok_or_else(|| ConfigError::Missing(format!("{name}.pos")))?;
        let mut p = PredatorConfig { name: name.clone(), position: pos, speed: 1.0, view_radius: 23.0 };
        if let Some(v) = e.nonneg(&format!("{name}.speed"))? {
            p.speed = v;
        }
        if let Some(v) = e.nonneg(&format!("{name}.view"))? {
            p.view_radius = v;
        }
        cfg.predators.push(p);
    }
    for name in &prey.1 {
        let pos = e.point(&format!("{name}.pos"))?.ok_or_else(|| ConfigError::Missing(format!("{name}.pos")))?;
        cfg.prey.push(PreyConfig { name: name.clone(), position: pos });
    }

    let sched_keys: Vec<String> = e.map.keys().filter(|k| k.starts_with("schedule.")).cloned().collect();
    let mut sched: Vec<(u64, ScheduledEvent)> = Vec::new();
    for key in sched_keys {
        let order: u64 = key["schedule.".len()..]
            .parse()
            .map_err(|_| ConfigError::UnknownKey { line: e.line_of(&key), key: key.clone() })?;
        let (line, v) = e.take(&key).expect("listed key");
        let ev = parse_action(&v, &cfg).map_err(|message| ConfigError::Invalid { line, key: key.clone(), message })?;
        sched.push((order, ev));
    }
    sched.sort_by_key(|(o, _)| *o);
    cfg.schedule = sched.into_iter().map(|(_, ev)| ev).collect();

    e.reject_unused()?;
    Ok(cfg)
}

fn parse_action(v: &str, cfg: &ScenarioConfig) -> Result<ScheduledEvent, String> {
    let w: Vec<&str> = v.split_whitespace().collect();
    let slot: u64 = w.first().and_then(|s| s.parse().ok()).ok_or("expected `<slot> <event> ...`")?;
    let is_agent = |n: &str| cfg.agents.iter().any(|a| a.name == n);
    let is_entity = |n: &str| {
        is_agent(n) || cfg.predators.iter().any(|p| p.name == n) || cfg.prey.iter().any(|p| p.name == n)
    };
    let num = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or(format!("bad number `{s}`"));
    let action = match w.get(1..) {
        Some(["sat", agent, need, value]) if is_agent(agent) => {
            let need: NeedId = need.parse().map_err(|_| format!("unknown need `{need}`"))?;
            let value = num(value)?;
            if !(0.0..=S_MAX).contains(&value) {
                return Err("satisfaction must lie in [0, 10]".into());
            }
            Action::SetSat { agent: agent.to_string(), need, value }
        }
        Some(["give", agent, item]) if is_agent(agent) => Action::Give { agent: agent.to_string(), item: item.to_string() },
        Some(["place", entity, x, y]) if is_entity(entity) => {
            Action::Place { entity: entity.to_string(), position: Vec2::new(num(x)?, num(y)?) }
        }
        _ => return Err(format!("bad event `{v}`")),
    };
    Ok(ScheduledEvent { slot, action })
}

/// Applies `params.*` keys. Per-level keys set every need of the level;
/// per-need keys override them.
fn apply_params(e: &mut Entries, cfg: &mut ScenarioConfig) -> Result<(), ConfigError> {
    let p = &mut cfg.params;
    for level in 1..=LEVEL_COUNT as u8 {
        for (coef, map) in [("alpha", &mut p.alpha), ("beta", &mut p.beta), ("gamma", &mut p.gamma)] {
            if let Some(v) = e.real(&format!("params.level{level}.{coef}"))? {
                for n in NeedId::at_level(level) {
                    map[n] = v;
                }
            }
        }
    }
    for need in NeedId::ALL {
        for (coef, map) in [("alpha", &mut p.alpha), ("beta", &mut p.beta), ("gamma", &mut p.gamma)] {
            if let Some(v) = e.real(&format!("params.{need}.{coef}"))? {
                map[need] = v;
            }
        }
    }
    for level in 1..=LEVEL_COUNT {
        if let Some(d) = e.nonneg(&format!("params.level{level}.delta"))? {
            p.delta[level - 1] = d;
            cfg.delta_auto[level - 1] = false;
        }
    }
    cfg.resolve_deltas();
    cfg.params.check_signs().map_err(|err| ConfigError::Semantic { key: "params".into(), message: err.to_string() })
}

/// Overlays a params fragment (only `params.*` keys) on `cfg`.
pub fn apply_params_fragment(cfg: &mut ScenarioConfig, source: &str) -> Result<(), ConfigError> {
    let mut e = Entries::parse(source)?;
    apply_params(&mut e, cfg)?;
    e.reject_unused()
}

fn fmt_point(p: Vec2) -> String {
    format!("{} {}", p.x, p.y)
}

fn names<T>(items: &[T], name: impl Fn(&T) -> &str) -> String {
    items.iter().map(name).collect::<Vec<_>>().join(" ")
}

/// Params as a fragment: every coefficient per need, corrections only where given.
pub fn print_params(params: &WeightParams, delta_auto: &[bool; 4]) -> String {
    let mut out = String::new();
    for need in NeedId::ALL {
        let _ = writeln!(out, "params.{need}.alpha = {}", params.alpha[need]);
        let _ = writeln!(out, "params.{need}.beta = {}", params.beta[need]);
        let _ = writeln!(out, "params.{need}.gamma = {}", params.gamma[need]);
    }
    for (level, (auto, delta)) in delta_auto.iter().zip(params.delta).enumerate() {
        if !auto {
            let _ = writeln!(out, "params.level{}.delta = {delta}", level + 1);
        }
    }
    out
}

fn print_map(out: &mut String, prefix: &str, map: &NeedMap<f64>) {
    for (need, v) in map.iter() {
        let _ = writeln!(out, "{prefix}.{need} = {v}");
    }
}

/// Canonical text for `cfg`; `parse_scenario` reads it back unchanged.
pub fn print_scenario(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agents = {}", names(&cfg.agents, |a| &a.name));
    if !cfg.predators.is_empty() {
        let _ = writeln!(out, "predators = {}", names(&cfg.predators, |p| &p.name));
    }
    if !cfg.prey.is_empty() {
        let _ = writeln!(out, "prey = {}", names(&cfg.prey, |p| &p.name));
    }
    let _ = writeln!(out, "horizon = {}", cfg.horizon);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "threshold = {}", cfg.threshold);
    let _ = writeln!(out, "capture_distance = {}", cfg.capture_distance);
    let _ = writeln!(out, "needs.active = {}", names(&cfg.active, |n| n.name()));
    print_map(&mut out, "recovery", &cfg.recovery);
    for need in NeedId::ALL.into_iter().filter(|n| n.level() > 1) {
        let _ = writeln!(out, "sons.{need} = {}", names(cfg.hierarchy.sons(need), |n| n.name()));
    }
    out.push_str(&print_params(&cfg.params, &cfg.delta_auto));
    for a in &cfg.agents {
        let n = &a.name;
        let _ = writeln!(out, "{n}.pos = {}", fmt_point(a.position));
        let _ = writeln!(out, "{n}.speed = {}", a.speed);
        let _ = writeln!(out, "{n}.flee_speed = {}", a.flee_speed);
        let _ = writeln!(out, "{n}.view = {}", a.view_radius);
        let _ = writeln!(out, "{n}.hearing = {}", a.hearing_radius);
        if let Some(f) = &a.friend {
            let _ = writeln!(out, "{n}.friend = {f}");
        }
        if !a.possessions.is_empty() {
            let _ = writeln!(out, "{n}.possess = {}", a.possessions.join(" "));
        }
        print_map(&mut out, &format!("{n}.sat"), &a.sat);
        print_map(&mut out, &format!("{n}.decay"), &a.decay);
    }
    for p in &cfg.predators {
        let _ = writeln!(out, "{}.pos = {}", p.name, fmt_point(p.position));
        let _ = writeln!(out, "{}.speed = {}", p.name, p.speed);
        let _ = writeln!(out, "{}.view = {}", p.name, p.view_radius);
    }
    for p in &cfg.prey {
        let _ = writeln!(out, "{}.pos = {}", p.name, fmt_point(p.position));
    }
    for (i, ev) in cfg.schedule.iter().enumerate() {
        let body = match &ev.action {
            Action::SetSat { agent, need, value } => format!("sat {agent} {need} {value}"),
            Action::Give { agent, item } => format!("give {agent} {item}"),
            Action::Place { entity, position } => format!("place {entity} {}", fmt_point(*position)),
        };
        let _ = writeln!(out, "schedule.{} = {} {body}", i + 1, ev.slot);
    }
    out
}
