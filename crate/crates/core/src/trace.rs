//! Trace events and their CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::geom::Vec2;

pub const CSV_HEADER: &str = "slot,agent,kind,need,label,value,x,y";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    NeedArise,
    ChunkSubmit,
    ChunkEmit,
    SlotAdmit,
    SlotEvict,
    Reduction,
    Decide,
    Subgoal,
    SkillStart,
    SkillDone,
    RemindSent,
    RemindHeard,
    FleeStart,
    EatDone,
    Death,
    SatisfactionSample,
}

impl EventKind {
    pub const ALL: [EventKind; 16] = [
        EventKind::NeedArise,
        EventKind::ChunkSubmit,
        EventKind::ChunkEmit,
        EventKind::SlotAdmit,
        EventKind::SlotEvict,
        EventKind::Reduction,
        EventKind::Decide,
        EventKind::Subgoal,
        EventKind::SkillStart,
        EventKind::SkillDone,
        EventKind::RemindSent,
        EventKind::RemindHeard,
        EventKind::FleeStart,
        EventKind::EatDone,
        EventKind::Death,
        EventKind::SatisfactionSample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::NeedArise => "need_arise",
            EventKind::ChunkSubmit => "chunk_submit",
            EventKind::ChunkEmit => "chunk_emit",
            EventKind::SlotAdmit => "slot_admit",
            EventKind::SlotEvict => "slot_evict",
            EventKind::Reduction => "reduction",
            EventKind::Decide => "decide",
            EventKind::Subgoal => "subgoal",
            EventKind::SkillStart => "skill_start",
            EventKind::SkillDone => "skill_done",
            EventKind::RemindSent => "remind_sent",
            EventKind::RemindHeard => "remind_heard",
            EventKind::FleeStart => "flee_start",
            EventKind::EatDone => "eat_done",
            EventKind::Death => "death",
            EventKind::SatisfactionSample => "satisfaction_sample",
        }
    }

    /// Events a caller can act on, as opposed to bookkeeping and samples.
    pub fn is_action(self) -> bool {
        matches!(
            self,
            EventKind::Decide
                | EventKind::Subgoal
                | EventKind::SkillStart
                | EventKind::SkillDone
                | EventKind::RemindSent
                | EventKind::FleeStart
                | EventKind::EatDone
        )
    }

    /// Kinds that make up the digest.
    pub fn is_salient(self) -> bool {
        matches!(
            self,
            EventKind::NeedArise
                | EventKind::EatDone
                | EventKind::FleeStart
                | EventKind::RemindSent
                | EventKind::Death
        )
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub slot: u64,
    pub agent_id: usize,
    pub agent: String,
    pub kind: EventKind,
    pub need: Option<String>,
    pub label: Option<String>,
    pub value: Option<f64>,
    pub position: Option<Vec2>,
}

impl TraceEvent {
    pub fn new(slot: u64, agent_id: usize, agent: &str, kind: EventKind) -> Self {
        TraceEvent {
            slot,
            agent_id,
            agent: agent.to_string(),
            kind,
            need: None,
            label: None,
            value: None,
            position: None,
        }
    }

    pub fn need(mut self, need: impl Into<String>) -> Self {
        self.need = Some(need.into());
        self
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn at(mut self, position: Vec2) -> Self {
        self.position = Some(position);
        self
    }
}

/// Stable sort by slot then agent, so each agent's events keep phase order.
pub fn sort_events(events: &mut [TraceEvent]) {
    events.sort_by_key(|e| (e.slot, e.agent_id));
}

fn num(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(events: &[TraceEvent], sink: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER.split(','))?;
    for e in events {
        w.write_record([
            e.slot.to_string(),
            e.agent.clone(),
            e.kind.to_string(),
            e.need.clone().unwrap_or_default(),
            e.label.clone().unwrap_or_default(),
            num(e.value),
            num(e.position.map(|p| p.x)),
            num(e.position.map(|p| p.y)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(events: &[TraceEvent]) -> String {
    let mut buf = Vec::new();
    write_csv(events, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Debug, thiserror::Error)]
pub enum TraceReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header must be `{CSV_HEADER}`")]
    Header,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Reads a trace file back. Agent ids are assigned in order of first appearance.
pub fn read_csv<R: Read>(source: R) -> Result<Vec<TraceEvent>, TraceReadError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    if r.headers()?.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(TraceReadError::Header);
    }
    let mut names: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |m: String| TraceReadError::Row { row, message: m };
        let field = |k: usize| rec.get(k).unwrap_or("");
        let opt_num = |k: usize| -> Result<Option<f64>, TraceReadError> {
            match field(k) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(format!("bad number `{s}`"))),
            }
        };
        let opt_str = |k: usize| Some(field(k).to_string()).filter(|s| !s.is_empty());
        let agent = field(1).to_string();
        let agent_id = match names.iter().position(|n| *n == agent) {
            Some(i) => i,
            None => {
                names.push(agent.clone());
                names.len() - 1
            }
        };
        let position = match (opt_num(6)?, opt_num(7)?) {
            (Some(x), Some(y)) => Some(Vec2::new(x, y)),
            _ => None,
        };
        out.push(TraceEvent {
            slot: field(0).parse().map_err(|_| bad("bad slot".into()))?,
            agent_id,
            agent,
            kind: field(2).parse().map_err(bad)?,
            need: opt_str(3),
            label: opt_str(4),
            value: opt_num(5)?,
            position,
        });
    }
    Ok(out)
}

/// Salient events in trace order, one line each.
pub fn summarize(events: &[TraceEvent]) -> Vec<String> {
    events
        .iter()
        .filter(|e| e.kind.is_salient())
        .map(|e| {
            let mut line = format!("{} {} {}", e.slot, e.agent, e.kind);
            if let Some(n) = &e.need {
                line.push(' ');
                line.push_str(n);
            }
            line
        })
        .collect()
}
