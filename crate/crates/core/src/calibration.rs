//! Fitting weight coefficients: argmax agreement with labelled samples and
//! survival time in a scenario.
//!
//! Both searches draw level-uniform candidates (one α, β, γ and Δ per level)
//! from a seeded generator, then refine the best one coordinate by coordinate.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CalibrationError;
use crate::needs::{all_weights, NeedHierarchy, NeedId, NeedMap, WeightParams, LEVEL_COUNT, S_MAX};
use crate::world::{run, survival_slots, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub sats: NeedMap<f64>,
    pub label: NeedId,
}

impl LabeledSample {
    pub fn new(sats: NeedMap<f64>) -> Self {
        let sats = NeedMap::from_fn(|n| sats[n].clamp(0.0, S_MAX));
        LabeledSample { label: reference_label(&sats, 5.0), sats }
    }
}

/// The need a sensible agent attends to: the most depleted unmet need on the
/// lowest level that has one, else the most depleted need overall.
pub fn reference_label(sats: &NeedMap<f64>, threshold: f64) -> NeedId {
    let min_of = |it: &mut dyn Iterator<Item = NeedId>| {
        it.fold(None, |best: Option<NeedId>, n| match best {
            Some(b) if sats[b] <= sats[n] => Some(b),
            _ => Some(n),
        })
    };
    for level in 1..=LEVEL_COUNT as u8 {
        if let Some(n) = min_of(&mut NeedId::at_level(level).filter(|n| sats[*n] < threshold)) {
            return n;
        }
    }
    min_of(&mut NeedId::ALL.into_iter()).expect("ten needs")
}

/// `n` samples with satisfactions uniform on `[0, S_MAX]`.
pub fn generate_samples(seed: u64, n: usize) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| LabeledSample::new(NeedMap::from_fn(|_| rng.gen_range(0.0..=S_MAX))))
        .collect()
}

/// Samples whose strict weight argmax equals the label. Ties score nothing.
pub fn score(params: &WeightParams, hierarchy: &NeedHierarchy, samples: &[LabeledSample]) -> usize {
    samples
        .iter()
        .filter(|s| all_weights(params, hierarchy, &s.sats, 0).unique_argmax() == Some(s.label))
        .count()
}

const MARGIN: f64 = 0.02;

/// Sum of the label's shortfall against the best rival, each relative to
/// that sample's weight spread so that shrinking every coefficient gains
/// nothing. Zero when every sample is won; ranks candidates that tie on score.
fn shortfall(params: &WeightParams, hierarchy: &NeedHierarchy, samples: &[LabeledSample]) -> f64 {
    samples
        .iter()
        .map(|s| {
            let w = all_weights(params, hierarchy, &s.sats, 0).w;
            let rival = NeedId::ALL.into_iter().filter(|n| *n != s.label).map(|n| w[n]).fold(f64::MIN, f64::max);
            let (lo, hi) = w.iter().fold((f64::MAX, f64::MIN), |(lo, hi), (_, v)| (lo.min(v), hi.max(v)));
            let gap = if hi > lo { (w[s.label] - rival) / (hi - lo) } else { 0.0 };
            (gap - MARGIN).min(0.0)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpace {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
    pub delta: (f64, f64),
}

impl Default for ParamSpace {
    fn default() -> Self {
        ParamSpace { alpha: (-2.0, -0.01), beta: (-1.0, -0.001), gamma: (0.001, 1.0), delta: (0.0, 20.0) }
    }
}

impl ParamSpace {
    pub fn check(&self) -> Result<(), CalibrationError> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        let named = [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)];
        for (name, range) in named {
            if !ok(range) {
                return Err(CalibrationError::EmptyRange(name));
            }
        }
        if self.alpha.1 >= 0.0 || self.beta.1 >= 0.0 || self.gamma.0 <= 0.0 || self.delta.0 < 0.0 {
            return Err(CalibrationError::SignBounds);
        }
        Ok(())
    }

    fn range(&self, coord: Coord) -> (f64, f64) {
        match coord.kind {
            0 => self.alpha,
            1 => self.beta,
            2 => self.gamma,
            _ => self.delta,
        }
    }

    /// Bounds in search coordinates; see [`LevelParams::get_search`].
    fn search_range(&self, coord: Coord) -> (f64, f64) {
        let (lo, hi) = self.range(coord);
        match coord.kind {
            1 => (self.beta.0 + self.gamma.0, self.beta.1 + self.gamma.1),
            3 => (lo, hi),
            _ => {
                let (a, b) = (lo.abs().ln(), hi.abs().ln());
                (a.min(b), a.max(b))
            }
        }
    }

    pub fn contains(&self, params: &WeightParams) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
        NeedId::ALL.into_iter().all(|n| {
            inside(params.alpha[n], self.alpha) && inside(params.beta[n], self.beta) && inside(params.gamma[n], self.gamma)
        }) && params.delta.iter().all(|d| inside(*d, self.delta))
    }
}

/// One searchable coefficient: kind 0..4 is α, β, γ, Δ; level is 1-based.
#[derive(Debug, Clone, Copy)]
struct Coord {
    kind: usize,
    level: u8,
}

/// Level-uniform coefficients, `v[kind][level - 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelParams {
    v: [[f64; LEVEL_COUNT]; 4],
}

impl LevelParams {
    fn coords() -> impl Iterator<Item = Coord> {
        // β and γ never touch a level-1 weight.
        (0..4).flat_map(|kind| {
            (1..=LEVEL_COUNT as u8).filter(move |l| *l > 1 || kind == 0 || kind == 3).map(move |level| Coord { kind, level })
        })
    }

    fn get(&self, c: Coord) -> f64 {
        self.v[c.kind][usize::from(c.level) - 1]
    }

    fn set(&mut self, c: Coord, value: f64) {
        self.v[c.kind][usize::from(c.level) - 1] = value;
    }

    /// α, β and γ log-uniform in magnitude, Δ uniform.
    fn random(space: &ParamSpace, rng: &mut ChaCha8Rng) -> Self {
        let mut p = LevelParams { v: [[0.0; LEVEL_COUNT]; 4] };
        let log_uniform = |(lo, hi): (f64, f64), rng: &mut ChaCha8Rng| {
            let (a, b) = (lo.abs().ln(), hi.abs().ln());
            rng.gen_range(a.min(b)..=a.max(b)).exp()
        };
        for level in 0..LEVEL_COUNT {
            p.v[0][level] = -log_uniform(space.alpha, rng);
            p.v[1][level] = -log_uniform(space.beta, rng);
            p.v[2][level] = log_uniform(space.gamma, rng);
            p.v[3][level] = rng.gen_range(space.delta.0..=space.delta.1);
        }
        p
    }

    /// Search coordinates: α and γ by log magnitude, Δ as is, and in place
    /// of β the net son coefficient β + γ. Sons usually cover the whole
    /// level below, so only that sum matters there and searching β and γ
    /// separately would mean walking a diagonal ridge.
    fn get_search(&self, c: Coord) -> f64 {
        match c.kind {
            0 | 2 => self.get(c).abs().ln(),
            1 => self.get(c) + self.get(Coord { kind: 2, ..c }),
            _ => self.get(c),
        }
    }

    /// Inverse of [`LevelParams::get_search`], clamped so that every
    /// coefficient stays inside `space`.
    fn set_search(&mut self, c: Coord, u: f64, space: &ParamSpace) {
        let g = Coord { kind: 2, ..c };
        let b = Coord { kind: 1, ..c };
        match c.kind {
            0 => self.set(c, -u.exp()),
            1 => {
                let beta = (u - self.get(g)).clamp(space.beta.0, space.beta.1);
                self.set(b, beta);
            }
            2 => {
                let net = self.get(b) + self.get(g);
                let lo = space.gamma.0.max(net - space.beta.1);
                let hi = space.gamma.1.min(net - space.beta.0);
                let gamma = u.exp().clamp(lo.min(hi), hi.max(lo));
                self.set(g, gamma);
                self.set(b, (net - gamma).clamp(space.beta.0, space.beta.1));
            }
            _ => self.set(c, u),
        }
    }

    pub fn to_params(&self) -> WeightParams {
        let at = |kind: usize| NeedMap::from_fn(|n: NeedId| self.v[kind][usize::from(n.level()) - 1]);
        WeightParams { alpha: at(0), beta: at(1), gamma: at(2), delta: self.v[3] }
    }

    fn csv_fields(&self) -> Vec<String> {
        self.v.iter().flatten().map(|x| x.to_string()).collect()
    }
}

fn csv_header(objective: &str) -> String {
    let mut h = String::from("candidate");
    for kind in ["alpha", "beta", "gamma", "delta"] {
        for level in 1..=LEVEL_COUNT {
            let _ = write!(h, ",{kind}{level}");
        }
    }
    let _ = write!(h, ",{objective}");
    h
}

/// Every candidate the search looked at, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub index: usize,
    pub candidate: LevelParams,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub params: WeightParams,
    pub objective: f64,
    pub evaluations: Vec<Evaluation>,
}

impl SearchResult {
    pub fn write_csv<W: Write>(&self, objective: &str, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "{}", csv_header(objective))?;
        for e in &self.evaluations {
            writeln!(sink, "{},{},{}", e.index, e.candidate.csv_fields().join(","), e.objective)?;
        }
        Ok(())
    }
}

type Rank = (f64, f64);

fn better(a: Rank, b: Rank) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

/// Refinement follows the smooth component when there is one.
fn climbs(a: Rank, b: Rank) -> bool {
    if a.1 != b.1 {
        a.1 > b.1
    } else {
        a.0 > b.0
    }
}

/// Random search over `space` with the first half of the budget, then
/// coordinate refinement with step halving. Refinement starts from the best
/// random candidate and moves on to the next best whenever a start
/// converges. `rank` orders candidates; its first component is the reported
/// objective.
fn search(
    space: &ParamSpace,
    budget: usize,
    seed: u64,
    first: Option<LevelParams>,
    mut rank: impl FnMut(&LevelParams) -> Rank,
) -> Result<(LevelParams, Rank, Vec<Evaluation>), CalibrationError> {
    space.check()?;
    if budget == 0 {
        return Err(CalibrationError::ZeroBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Vec::with_capacity(budget);
    let mut ranks = Vec::with_capacity(budget);
    let mut eval = |p: LevelParams, log: &mut Vec<Evaluation>, ranks: &mut Vec<Rank>| {
        let r = rank(&p);
        log.push(Evaluation { index: log.len(), candidate: p, objective: r.0 });
        ranks.push(r);
        r
    };

    let start = first.unwrap_or_else(|| LevelParams::random(space, &mut rng));
    eval(start, &mut log, &mut ranks);
    while log.len() < budget.div_ceil(2) {
        eval(LevelParams::random(space, &mut rng), &mut log, &mut ranks);
    }
    let mut starts: Vec<usize> = (0..log.len()).collect();
    starts.sort_by(|&a, &b| ranks[b].0.total_cmp(&ranks[a].0).then(ranks[b].1.total_cmp(&ranks[a].1)).then(a.cmp(&b)));

    let coords: Vec<Coord> = LevelParams::coords().collect();
    let width = |c: &Coord| space.search_range(*c).1 - space.search_range(*c).0;
    for &s in &starts {
        if log.len() >= budget {
            break;
        }
        let mut here = (log[s].candidate, ranks[s]);
        let mut steps: Vec<f64> = coords.iter().map(|c| width(c) / 4.0).collect();
        'refine: while log.len() < budget {
            let mut moved = false;
            for (k, c) in coords.iter().enumerate() {
                let (lo, hi) = space.search_range(*c);
                for dir in [1.0, -1.0] {
                    if log.len() >= budget {
                        break 'refine;
                    }
                    let mut p = here.0;
                    let u = (p.get_search(*c) + dir * steps[k]).clamp(lo, hi);
                    if u == p.get_search(*c) {
                        continue;
                    }
                    p.set_search(*c, u, space);
                    let r = eval(p, &mut log, &mut ranks);
                    if climbs(r, here.1) {
                        here = (p, r);
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                // Kinks block single-coordinate moves; probe a few diagonals.
                for _ in 0..coords.len() {
                    if log.len() >= budget {
                        break 'refine;
                    }
                    let mut p = here.0;
                    for (k, c) in coords.iter().enumerate() {
                        let (lo, hi) = space.search_range(*c);
                        let u = p.get_search(*c) + rng.gen_range(-1.0..=1.0) * steps[k];
                        p.set_search(*c, u.clamp(lo, hi), space);
                    }
                    let r = eval(p, &mut log, &mut ranks);
                    if climbs(r, here.1) {
                        here = (p, r);
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                if steps.iter().all(|s| *s < 1e-3) {
                    break;
                }
                for s in &mut steps {
                    *s /= 2.0;
                }
            }
        }
    }

    // Earliest evaluation among those ranked highest.
    let mut best = 0;
    for i in 1..log.len() {
        if better(ranks[i], ranks[best]) {
            best = i;
        }
    }
    Ok((log[best].candidate, ranks[best], log))
}

/// Fits level-uniform coefficients to `samples`. The returned objective is
/// the score; it is the highest score among all evaluated candidates.
pub fn calibrate(
    samples: &[LabeledSample],
    hierarchy: &NeedHierarchy,
    space: &ParamSpace,
    budget: usize,
    seed: u64,
) -> Result<SearchResult, CalibrationError> {
    let (best, r, log) = search(space, budget, seed, None, |p| {
        let params = p.to_params();
        (score(&params, hierarchy, samples) as f64, shortfall(&params, hierarchy, samples))
    })?;
    Ok(SearchResult { params: best.to_params(), objective: r.0, evaluations: log })
}

/// Mean slots survived per agent over `repeats` runs, seeds `seed..seed+repeats`.
pub fn mean_survival(scenario: &ScenarioConfig, repeats: usize, seed: u64) -> f64 {
    let mut total = 0.0;
    for r in 0..repeats {
        let cfg = ScenarioConfig { seed: seed.wrapping_add(r as u64), ..scenario.clone() };
        let trace = run(&cfg);
        let per_agent: u64 = cfg.agents.iter().map(|a| survival_slots(&trace, &a.name, cfg.horizon)).sum();
        total += per_agent as f64 / cfg.agents.len().max(1) as f64;
    }
    total / repeats.max(1) as f64
}

/// Searches for coefficients that keep the scenario's agents alive longest.
/// The scenario's own coefficients are the first candidate when they are
/// level-uniform and inside `space`; corrections the scenario derives
/// automatically are re-derived for every candidate.
pub fn survival_optimize(
    scenario: &ScenarioConfig,
    space: &ParamSpace,
    budget: usize,
    repeats: usize,
    seed: u64,
) -> Result<SearchResult, CalibrationError> {
    if repeats == 0 {
        return Err(CalibrationError::ZeroBudget);
    }
    let realise = |p: &LevelParams| {
        let mut cfg = scenario.clone();
        cfg.params = p.to_params();
        cfg.resolve_deltas();
        cfg
    };
    let first = level_uniform(&scenario.params).filter(|p| space.contains(&p.to_params()));
    let (best, r, log) = search(space, budget, seed, first, |p| (mean_survival(&realise(p), repeats, seed), 0.0))?;
    Ok(SearchResult { params: realise(&best).params, objective: r.0, evaluations: log })
}

/// The level-uniform form of `params`, if it has one.
pub fn level_uniform(params: &WeightParams) -> Option<LevelParams> {
    let mut p = LevelParams { v: [[0.0; LEVEL_COUNT]; 4] };
    p.v[3] = params.delta;
    for level in 1..=LEVEL_COUNT as u8 {
        let mut needs = NeedId::at_level(level);
        let head = needs.next()?;
        let row = [params.alpha[head], params.beta[head], params.gamma[head]];
        for n in needs {
            if [params.alpha[n], params.beta[n], params.gamma[n]] != row {
                return None;
            }
        }
        for (kind, v) in row.into_iter().enumerate() {
            p.v[kind][usize::from(level) - 1] = v;
        }
    }
    Some(p)
}
