//! Event timelines and pairwise space-like separation checks.
//!
//! Every event time is a linear combination of independent primitive
//! quantities (device delays and fiber transit times). Uncertainties are
//! propagated from the net coefficients, so a quantity that enters two
//! times cancels in their difference instead of being counted twice.
//!
//! The default layout (geometry, delays, event definitions, pair list) is
//! embedded from `data/default_layout.json`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Vacuum speed of light in m/ns.
pub const SPEED_OF_LIGHT: f64 = 0.299792;

const DEFAULT_LAYOUT: &str = include_str!("../data/default_layout.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub sigma: f64,
}

impl Quantity {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distance {
    pub a: String,
    pub b: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fiber {
    pub name: String,
    pub a: String,
    pub b: String,
    pub value: f64,
    pub sigma: f64,
}

/// Straight-line distances between nodes and fiber lengths (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryTable {
    pub nodes: Vec<String>,
    pub distances: Vec<Distance>,
    pub fibers: Vec<Fiber>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Delay {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

/// Named device delays (nanoseconds).
pub type DelayTable = Vec<Delay>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRef {
    pub event: String,
    pub edge: Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Delay,
    /// Fiber transit time `length / fiber_speed`.
    Fiber,
}

fn plus_one() -> f64 {
    1.0
}

fn is_plus_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub kind: TermKind,
    pub name: String,
    #[serde(default = "plus_one", skip_serializing_if = "is_plus_one")]
    pub sign: f64,
}

/// `base + Σ sign·term`; a missing base is the trial origin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeExpr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<EventRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDefinition {
    pub label: String,
    pub position: String,
    pub start: TimeExpr,
    pub end: TimeExpr,
}

/// Everything needed for an audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeLayout {
    /// Signal speed in fiber, m/ns.
    pub fiber_speed: f64,
    #[serde(default = "default_c")]
    pub speed_of_light: f64,
    pub geometry: GeometryTable,
    pub delays: DelayTable,
    pub events: Vec<EventDefinition>,
    pub pairs: Vec<[String; 2]>,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

impl SpacetimeLayout {
    /// Geometry, delays and event topology of the reference experiment.
    pub fn default_layout() -> Self {
        serde_json::from_str(DEFAULT_LAYOUT).expect("embedded layout parses")
    }

    pub fn delay_mut(&mut self, name: &str) -> Option<&mut Delay> {
        self.delays.iter_mut().find(|d| d.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_speed.is_finite() && self.fiber_speed > 0.0) {
            return Err(out_of_range("spacetime.fiber_speed", "must be positive"));
        }
        if !(self.speed_of_light.is_finite() && self.speed_of_light > 0.0) {
            return Err(out_of_range("spacetime.speed_of_light", "must be positive"));
        }
        for d in &self.delays {
            if !(d.value.is_finite() && d.value >= 0.0 && d.sigma >= 0.0) {
                return Err(out_of_range(&format!("spacetime.delays.{}", d.name), "delay and sigma must be >= 0"));
            }
        }
        let g = &self.geometry;
        for d in &g.distances {
            if !(d.value.is_finite() && d.value > 0.0 && d.sigma >= 0.0) {
                return Err(out_of_range(
                    &format!("spacetime.geometry.distances.{}-{}", d.a, d.b),
                    "distance must be positive",
                ));
            }
            for n in [&d.a, &d.b] {
                if !g.nodes.contains(n) {
                    return Err(Error::Missing(format!("spacetime.geometry.nodes: {n}")));
                }
            }
        }
        for f in &g.fibers {
            if !(f.value.is_finite() && f.value > 0.0 && f.sigma >= 0.0) {
                return Err(out_of_range(&format!("spacetime.geometry.fibers.{}", f.name), "length must be positive"));
            }
        }
        check_triangles(g)?;
        for e in &self.events {
            if !g.nodes.contains(&e.position) {
                return Err(Error::Missing(format!("spacetime.geometry.nodes: {}", e.position)));
            }
        }
        Ok(())
    }
}

/// Every fully listed triple satisfies the triangle inequality within the summed uncertainties.
fn check_triangles(g: &GeometryTable) -> Result<()> {
    let n = g.nodes.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let (a, b, c) = (&g.nodes[i], &g.nodes[j], &g.nodes[k]);
                if let (Some(ab), Some(bc), Some(ac)) = (lookup(g, a, b), lookup(g, b, c), lookup(g, a, c)) {
                    if ac.value > ab.value + bc.value + ab.sigma + bc.sigma + ac.sigma {
                        return Err(out_of_range(
                            &format!("spacetime.geometry.distances.{a}-{c}"),
                            format!("violates the triangle inequality through {b}"),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn lookup(g: &GeometryTable, a: &str, b: &str) -> Option<Quantity> {
    if a == b {
        return Some(Quantity::new(0.0, 0.0));
    }
    g.distances
        .iter()
        .find(|d| (d.a == a && d.b == b) || (d.a == b && d.b == a))
        .map(|d| Quantity::new(d.value, d.sigma))
}

/// Linear combination over primitive quantities keyed `"delay:NAME"` / `"fiber:NAME"`.
type Combination = BTreeMap<String, f64>;

/// Resolved start/end of one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventWindow {
    pub label: String,
    pub position: String,
    pub start: Quantity,
    pub end: Quantity,
    #[serde(skip)]
    start_terms: Combination,
    #[serde(skip)]
    end_terms: Combination,
}

struct Resolver<'a> {
    layout: &'a SpacetimeLayout,
    primitives: HashMap<String, Quantity>,
    cache: HashMap<(String, bool), Combination>,
    visiting: Vec<(String, bool)>,
}

impl Resolver<'_> {
    fn edge(&mut self, event: &str, end: bool) -> Result<Combination> {
        let key = (event.to_string(), end);
        if let Some(c) = self.cache.get(&key) {
            return Ok(c.clone());
        }
        if self.visiting.contains(&key) {
            return Err(Error::InvalidModel(format!("cyclic event definition at {event}")));
        }
        let def = self
            .layout
            .events
            .iter()
            .find(|e| e.label == event)
            .ok_or_else(|| Error::Missing(format!("spacetime.events: {event}")))?;
        let expr = if end { &def.end } else { &def.start };
        self.visiting.push(key.clone());
        let mut comb = match &expr.base {
            Some(r) => self.edge(&r.event, r.edge == Edge::End)?,
            None => Combination::new(),
        };
        self.visiting.pop();
        for t in &expr.terms {
            let id = match t.kind {
                TermKind::Delay => format!("delay:{}", t.name),
                TermKind::Fiber => format!("fiber:{}", t.name),
            };
            if !self.primitives.contains_key(&id) {
                let table = match t.kind {
                    TermKind::Delay => "delays",
                    TermKind::Fiber => "geometry.fibers",
                };
                return Err(Error::Missing(format!("spacetime.{table}: {}", t.name)));
            }
            *comb.entry(id).or_insert(0.0) += t.sign;
        }
        self.cache.insert(key, comb.clone());
        Ok(comb)
    }

    fn evaluate(&self, comb: &Combination) -> Quantity {
        let mut value = 0.0;
        let mut var = 0.0;
        for (id, coef) in comb {
            let q = self.primitives[id];
            value += coef * q.value;
            var += (coef * q.sigma).powi(2);
        }
        Quantity::new(value, var.sqrt())
    }
}

fn primitives(layout: &SpacetimeLayout) -> HashMap<String, Quantity> {
    let mut p = HashMap::new();
    for d in &layout.delays {
        p.insert(format!("delay:{}", d.name), Quantity::new(d.value, d.sigma));
    }
    for f in &layout.geometry.fibers {
        p.insert(
            format!("fiber:{}", f.name),
            Quantity::new(f.value / layout.fiber_speed, f.sigma / layout.fiber_speed),
        );
    }
    p
}

/// Start and end of every defined event, in definition order.
pub fn compute_event_windows(layout: &SpacetimeLayout) -> Result<Vec<EventWindow>> {
    layout.validate()?;
    let mut r = Resolver {
        layout,
        primitives: primitives(layout),
        cache: HashMap::new(),
        visiting: Vec::new(),
    };
    let mut out = Vec::with_capacity(layout.events.len());
    for e in &layout.events {
        let start_terms = r.edge(&e.label, false)?;
        let end_terms = r.edge(&e.label, true)?;
        let start = r.evaluate(&start_terms);
        let end = r.evaluate(&end_terms);
        if start.value > end.value {
            return Err(out_of_range(
                &format!("spacetime.events.{}", e.label),
                format!("start {:.3} ns is after end {:.3} ns", start.value, end.value),
            ));
        }
        out.push(EventWindow {
            label: e.label.clone(),
            position: e.position.clone(),
            start,
            end,
            start_terms,
            end_terms,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationResult {
    pub first: String,
    pub second: String,
    pub distance: Quantity,
    pub delta_t: Quantity,
    pub interval: Quantity,
    pub spacelike: bool,
}

/// `Δs² = d² − c²Δt²` with `σ = √((2dσ_d)² + (2c²Δtσ_Δt)²)`.
pub fn interval(distance: Quantity, delta_t: Quantity, c: f64) -> Quantity {
    let c2 = c * c;
    let value = distance.value.powi(2) - c2 * delta_t.value.powi(2);
    let sigma = ((2.0 * distance.value * distance.sigma).powi(2) + (2.0 * c2 * delta_t.value * delta_t.sigma).powi(2)).sqrt();
    Quantity::new(value, sigma)
}

fn difference(resolver_primitives: &HashMap<String, Quantity>, a: &Combination, b: &Combination) -> Quantity {
    let mut comb = a.clone();
    for (id, coef) in b {
        *comb.entry(id.clone()).or_insert(0.0) -= coef;
    }
    let mut value = 0.0;
    let mut var = 0.0;
    for (id, coef) in &comb {
        let q = resolver_primitives[id];
        value += coef * q.value;
        var += (coef * q.sigma).powi(2);
    }
    Quantity::new(value, var.sqrt())
}

/// Separation of two events; `Δt` is the larger of the two cross-window gaps.
pub fn separation(pair: (&str, &str), windows: &[EventWindow], layout: &SpacetimeLayout) -> Result<SeparationResult> {
    let find = |label: &str| {
        windows
            .iter()
            .find(|w| w.label == label)
            .ok_or_else(|| Error::Missing(format!("spacetime.events: {label}")))
    };
    let (w1, w2) = (find(pair.0)?, find(pair.1)?);
    let distance = lookup(&layout.geometry, &w1.position, &w2.position).ok_or_else(|| {
        Error::Missing(format!("spacetime.geometry.distances: {}-{}", w1.position, w2.position))
    })?;
    let prims = primitives(layout);
    let gap1 = difference(&prims, &w1.start_terms, &w2.end_terms);
    let gap2 = difference(&prims, &w1.end_terms, &w2.start_terms);
    let delta_t = if gap1.value.abs() >= gap2.value.abs() { gap1 } else { gap2 };
    let delta_t = Quantity::new(delta_t.value.abs(), delta_t.sigma);
    let iv = interval(distance, delta_t, layout.speed_of_light);
    Ok(SeparationResult {
        first: pair.0.to_string(),
        second: pair.1.to_string(),
        distance,
        delta_t,
        interval: iv,
        spacelike: iv.value > 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub windows: Vec<EventWindow>,
    pub results: Vec<SeparationResult>,
    pub k_sigma: f64,
    /// Every pair has `Δs² − k·σ > 0`.
    pub all_spacelike: bool,
}

impl AuditReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("first,second,d,sigma_d,delta_t,sigma_delta_t,interval,sigma_interval,spacelike\n");
        for r in &self.results {
            s.push_str(&format!(
                "{},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{}\n",
                r.first,
                r.second,
                r.distance.value,
                r.distance.sigma,
                r.delta_t.value,
                r.delta_t.sigma,
                r.interval.value,
                r.interval.sigma,
                r.spacelike
            ));
        }
        s
    }
}

/// Audits every pair in the layout.
pub fn audit_all(layout: &SpacetimeLayout, k_sigma: f64) -> Result<AuditReport> {
    if !(k_sigma.is_finite() && k_sigma >= 0.0) {
        return Err(out_of_range("spacetime.k_sigma", "must be >= 0"));
    }
    let windows = compute_event_windows(layout)?;
    let results = layout
        .pairs
        .iter()
        .map(|[a, b]| separation((a, b), &windows, layout))
        .collect::<Result<Vec<_>>>()?;
    let all_spacelike = results.iter().all(|r| r.interval.value - k_sigma * r.interval.sigma > 0.0);
    Ok(AuditReport {
        windows,
        results,
        k_sigma,
        all_spacelike,
    })
}
