//! Hierarchy of needs, satisfaction dynamics and need weights.
//!
//! Every need has a satisfaction in `[0, S_MAX]`. The weight of a need is a
//! linear combination of its own satisfaction, the satisfactions of the
//! lower-level needs it predicts (its *sons*), and the satisfactions of the
//! whole level below, shifted by a per-level correction so that weights stay
//! nonnegative:
//!
//! ```text
//! w(i) = alpha(i) * s(i) + beta(i) * sum_{j in sons(i)} s(j)
//!      + gamma(i) * sum_{j in level(i) - 1} s(j) + delta(level(i))
//! ```

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use crate::error::NeedError;

/// Ceiling of every satisfaction value.
pub const S_MAX: f64 = 10.0;

/// Satisfaction below which a need arises.
pub const DEFAULT_THRESHOLD: f64 = 5.0;

pub const NEED_COUNT: usize = 10;
pub const LEVEL_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NeedId {
    Sleep,
    Energy,
    Water,
    Breed,
    PersonalSafety,
    PropertySafety,
    FamilyAffection,
    Friendship,
    Love,
    Respect,
}

impl NeedId {
    /// Canonical order; also the order used for tie-breaking.
    pub const ALL: [NeedId; NEED_COUNT] = [
        NeedId::Sleep,
        NeedId::Energy,
        NeedId::Water,
        NeedId::Breed,
        NeedId::PersonalSafety,
        NeedId::PropertySafety,
        NeedId::FamilyAffection,
        NeedId::Friendship,
        NeedId::Love,
        NeedId::Respect,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn level(self) -> u8 {
        match self {
            NeedId::Sleep | NeedId::Energy | NeedId::Water | NeedId::Breed => 1,
            NeedId::PersonalSafety | NeedId::PropertySafety => 2,
            NeedId::FamilyAffection | NeedId::Friendship | NeedId::Love => 3,
            NeedId::Respect => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NeedId::Sleep => "sleep",
            NeedId::Energy => "energy",
            NeedId::Water => "water",
            NeedId::Breed => "breed",
            NeedId::PersonalSafety => "personal_safety",
            NeedId::PropertySafety => "property_safety",
            NeedId::FamilyAffection => "family_affection",
            NeedId::Friendship => "friendship",
            NeedId::Love => "love",
            NeedId::Respect => "respect",
        }
    }

    /// The label a need carries once it is packed into a short-term memory slot.
    pub fn slot_label(self) -> &'static str {
        match self {
            NeedId::Sleep => "sleepy",
            NeedId::Energy => "hungry",
            NeedId::Water => "thirsty",
            NeedId::Breed => "breed",
            other => other.name(),
        }
    }

    pub fn from_slot_label(label: &str) -> Option<NeedId> {
        NeedId::ALL.into_iter().find(|n| n.slot_label() == label)
    }

    pub fn at_level(level: u8) -> impl Iterator<Item = NeedId> {
        NeedId::ALL.into_iter().filter(move |n| n.level() == level)
    }
}

impl fmt::Display for NeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NeedId {
    type Err = NeedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NeedId::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| NeedError::UnknownNeed(s.to_string()))
    }
}

/// Dense per-need table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeedMap<T>(pub [T; NEED_COUNT]);

impl<T: Copy> NeedMap<T> {
    pub fn splat(value: T) -> Self {
        NeedMap([value; NEED_COUNT])
    }

    pub fn from_fn(mut f: impl FnMut(NeedId) -> T) -> Self {
        NeedMap(NeedId::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NeedId, T)> + '_ {
        NeedId::ALL.into_iter().map(move |n| (n, self.0[n.index()]))
    }
}

impl<T> Index<NeedId> for NeedMap<T> {
    type Output = T;
    fn index(&self, need: NeedId) -> &T {
        &self.0[need.index()]
    }
}

impl<T> IndexMut<NeedId> for NeedMap<T> {
    fn index_mut(&mut self, need: NeedId) -> &mut T {
        &mut self.0[need.index()]
    }
}

/// Which lower-level needs each higher need predicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeedHierarchy {
    sons: [Vec<NeedId>; NEED_COUNT],
}

impl Default for NeedHierarchy {
    /// Personal safety predicts sleep, energy and water; every other higher
    /// need predicts the full level below it.
    fn default() -> Self {
        let sons = NeedId::ALL.map(|need| match need {
            NeedId::PersonalSafety => vec![NeedId::Sleep, NeedId::Energy, NeedId::Water],
            n if n.level() == 1 => Vec::new(),
            n => NeedId::at_level(n.level() - 1).collect(),
        });
        NeedHierarchy { sons }
    }
}

impl NeedHierarchy {
    /// Replaces the sons of `parent`. Every son must sit exactly one level below.
    pub fn set_sons(&mut self, parent: NeedId, sons: Vec<NeedId>) -> Result<(), NeedError> {
        for &son in &sons {
            if son.level() + 1 != parent.level() {
                return Err(NeedError::BadEdge { parent, son });
            }
        }
        let mut sons = sons;
        sons.sort();
        sons.dedup();
        self.sons[parent.index()] = sons;
        Ok(())
    }

    pub fn sons(&self, need: NeedId) -> &[NeedId] {
        &self.sons[need.index()]
    }

    pub fn level(&self, level: u8) -> impl Iterator<Item = NeedId> {
        NeedId::at_level(level)
    }
}

/// Per-need satisfaction plus the rates that move it.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionState {
    pub sat: NeedMap<f64>,
    pub decay_rate: NeedMap<f64>,
    pub recovery_rate: NeedMap<f64>,
    pub threshold: f64,
}

impl Default for SatisfactionState {
    fn default() -> Self {
        SatisfactionState {
            sat: NeedMap::splat(S_MAX),
            decay_rate: default_decay(),
            recovery_rate: default_recovery(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

pub fn default_decay() -> NeedMap<f64> {
    NeedMap::from_fn(|n| match n {
        NeedId::Energy => 0.10,
        NeedId::Water => 0.08,
        NeedId::Sleep => 0.05,
        NeedId::Breed => 0.02,
        _ => 0.0,
    })
}

pub fn default_recovery() -> NeedMap<f64> {
    NeedMap::from_fn(|n| match n {
        NeedId::PersonalSafety | NeedId::Friendship => 0.2,
        _ => 0.0,
    })
}

/// Events that move a satisfaction value other than plain decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeedEvent {
    Ate,
    Drank,
    Slept,
    Bred,
    /// Distance to the nearest threat and the observer's view radius.
    PredatorProximity { distance: f64, radius: f64 },
    /// Distance between the friend and the threat, and the observer's view radius.
    FriendThreat { distance: f64, radius: f64 },
    Recover(NeedId),
}

impl SatisfactionState {
    pub fn get(&self, need: NeedId) -> f64 {
        self.sat[need]
    }

    pub fn set(&mut self, need: NeedId, value: f64) {
        self.sat[need] = value.clamp(0.0, S_MAX);
    }

    pub fn is_arisen(&self, need: NeedId) -> bool {
        self.sat[need] < self.threshold
    }

    /// One slot of decay for the physiological needs. Higher levels are left alone.
    pub fn decay_tick(&mut self) {
        for need in NeedId::at_level(1) {
            let v = self.sat[need] - self.decay_rate[need];
            self.set(need, v);
        }
    }

    /// Applies `event`; a malformed event leaves the state untouched.
    pub fn apply_event(&mut self, event: NeedEvent) -> Result<(), NeedError> {
        match event {
            NeedEvent::Ate => self.set(NeedId::Energy, S_MAX),
            NeedEvent::Drank => self.set(NeedId::Water, S_MAX),
            NeedEvent::Slept => self.set(NeedId::Sleep, S_MAX),
            NeedEvent::Bred => self.set(NeedId::Breed, S_MAX),
            NeedEvent::PredatorProximity { distance, radius } => {
                let v = safety_satisfaction(distance, radius)?;
                self.set(NeedId::PersonalSafety, v);
            }
            NeedEvent::FriendThreat { distance, radius } => {
                let v = friendship_satisfaction(distance, radius)?;
                self.set(NeedId::Friendship, v);
            }
            NeedEvent::Recover(need) => {
                let v = self.sat[need] + self.recovery_rate[need];
                self.set(need, v);
            }
        }
        Ok(())
    }

    /// Dead once any physiological need is fully depleted.
    pub fn is_dead(&self) -> bool {
        NeedId::at_level(1).any(|n| self.sat[n] <= 0.0)
    }
}

/// Linear distance-to-satisfaction map: contact gives 0, the view boundary
/// lands on 5, twice the radius and beyond saturates at `S_MAX`.
pub fn safety_satisfaction(distance: f64, radius: f64) -> Result<f64, NeedError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(NeedError::BadRadius(radius));
    }
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(NeedError::BadDistance(distance));
    }
    Ok((S_MAX * distance / (2.0 * radius)).clamp(0.0, S_MAX))
}

/// Same map as [`safety_satisfaction`], fed with the friend-to-threat distance.
pub fn friendship_satisfaction(distance: f64, radius: f64) -> Result<f64, NeedError> {
    safety_satisfaction(distance, radius)
}

/// Coefficients of the weight formula.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    pub alpha: NeedMap<f64>,
    pub beta: NeedMap<f64>,
    pub gamma: NeedMap<f64>,
    /// Correction per level, index 0 is level 1.
    pub delta: [f64; LEVEL_COUNT],
}

impl Default for WeightParams {
    /// Hand-tuned scenario defaults. Personal safety reacts at half the
    /// rate of the other needs; corrections above level 1 come from
    /// [`WeightParams::with_auto_delta`].
    fn default() -> Self {
        let params = WeightParams {
            alpha: NeedMap::from_fn(|n| if n.level() == 2 { -0.5 } else { -1.0 }),
            beta: NeedMap::splat(-0.05),
            gamma: NeedMap::splat(0.02),
            delta: [S_MAX, 0.0, 0.0, 0.0],
        };
        params.with_auto_delta(&NeedHierarchy::default())
    }
}

impl WeightParams {
    /// Uniform coefficients on every need, explicit corrections.
    pub fn uniform(alpha: f64, beta: f64, gamma: f64, delta: [f64; LEVEL_COUNT]) -> Self {
        WeightParams {
            alpha: NeedMap::splat(alpha),
            beta: NeedMap::splat(beta),
            gamma: NeedMap::splat(gamma),
            delta,
        }
    }

    pub fn delta_for(&self, level: u8) -> f64 {
        self.delta[usize::from(level) - 1]
    }

    pub fn check_signs(&self) -> Result<(), NeedError> {
        for need in NeedId::ALL {
            let (a, b, g) = (self.alpha[need], self.beta[need], self.gamma[need]);
            if !(a < 0.0 && b < 0.0 && g > 0.0) {
                return Err(NeedError::BadSigns { need, alpha: a, beta: b, gamma: g });
            }
        }
        if self.delta.iter().any(|d| d.is_nan() || *d < 0.0) {
            return Err(NeedError::NegativeDelta);
        }
        Ok(())
    }

    /// Keeps the level-1 correction and replaces levels 2..=4 with the
    /// smallest correction that keeps every weight at that level nonnegative
    /// over the whole satisfaction box.
    pub fn with_auto_delta(mut self, hierarchy: &NeedHierarchy) -> Self {
        for level in 2..=LEVEL_COUNT as u8 {
            self.delta[usize::from(level) - 1] = auto_delta(&self, hierarchy, level);
        }
        self
    }
}

/// Smallest nonnegative correction for `level`.
pub fn auto_delta(params: &WeightParams, hierarchy: &NeedHierarchy, level: u8) -> f64 {
    NeedId::at_level(level)
        .map(|n| -uncorrected_minimum(params, hierarchy, n))
        .fold(0.0, f64::max)
}

/// Minimum of the weight without its correction over `[0, S_MAX]^k`. The
/// weight is linear in each satisfaction, so the minimum sits on a corner
/// and can be taken coordinate by coordinate.
fn uncorrected_minimum(params: &WeightParams, hierarchy: &NeedHierarchy, need: NeedId) -> f64 {
    let mut min = (params.alpha[need] * S_MAX).min(0.0);
    if need.level() > 1 {
        let sons = hierarchy.sons(need);
        for j in NeedId::at_level(need.level() - 1) {
            let mut coeff = params.gamma[need];
            if sons.contains(&j) {
                coeff += params.beta[need];
            }
            min += (coeff * S_MAX).min(0.0);
        }
    }
    min
}

/// Weight of a single need.
pub fn weight(
    params: &WeightParams,
    hierarchy: &NeedHierarchy,
    sat: &NeedMap<f64>,
    need: NeedId,
) -> f64 {
    let level = need.level();
    let mut w = params.alpha[need] * sat[need] + params.delta_for(level);
    if level > 1 {
        let sons: f64 = hierarchy.sons(need).iter().map(|&j| sat[j]).sum();
        let below: f64 = NeedId::at_level(level - 1).map(|j| sat[j]).sum();
        w += params.beta[need] * sons + params.gamma[need] * below;
    }
    w
}

/// Weights of all needs from one satisfaction snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedWeight {
    pub w: NeedMap<f64>,
    pub computed_at: u64,
}

impl NeedWeight {
    /// The strictly largest weight, or `None` on a tie for first place.
    pub fn unique_argmax(&self) -> Option<NeedId> {
        let mut best: Option<(NeedId, f64)> = None;
        let mut tied = false;
        for (need, w) in self.w.iter() {
            match best {
                Some((_, bw)) if w < bw => {}
                Some((_, bw)) if w == bw => tied = true,
                _ => {
                    best = Some((need, w));
                    tied = false;
                }
            }
        }
        if tied {
            None
        } else {
            best.map(|(n, _)| n)
        }
    }
}

pub fn all_weights(
    params: &WeightParams,
    hierarchy: &NeedHierarchy,
    sat: &NeedMap<f64>,
    slot: u64,
) -> NeedWeight {
    NeedWeight {
        w: NeedMap::from_fn(|n| weight(params, hierarchy, sat, n)),
        computed_at: slot,
    }
}
