use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::entropy::coding::{coding_map_check, CodingReport};
use crate::entropy::growth::{growth_series, GrowthMeasure, GrowthSeries};
use crate::entropy::witness::{delta_path_between, pad_arms, pingpong_witness, WitnessSummary};
use crate::entropy::Caps;
use crate::error::{Error, Result};
use crate::geometry::{bounded_geometry_evidence, BGEvidence, BGRecord, BGVerdict};
use crate::spaces::{find_triangle_violation, GrowthAnnotation, GrowthClass, GrowthQuantity, MetricSpace};

pub const SCHEMA_VERSION: &str = "v1";

/// Slope below which growth counts as zero-evidence.
pub const ZERO_SLOPE: f64 = 0.05;
/// Slope above which growth counts as positive-evidence.
pub const POSITIVE_SLOPE: f64 = 0.2;

const ULTRAMETRIC_CHECK_LIMIT: usize = 200;
const WITNESS_CHECK_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Zero,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    BoundedComponents,
    Ultrametric,
    BoundedGeometryGrowthZero,
    BoundedGeometryGrowthPositive,
    MeasuredVolume,
    NotCoarselyBoundedGeometry,
    VertexTransitiveGrowth,
    /// Zero entropy from the checkpoint coding map into a net.
    CodingMap,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::BoundedComponents => "bounded-components",
            Rule::Ultrametric => "ultrametric",
            Rule::BoundedGeometryGrowthZero => "bounded-geometry-growth-zero",
            Rule::BoundedGeometryGrowthPositive => "bounded-geometry-growth-positive",
            Rule::MeasuredVolume => "measured-volume",
            Rule::NotCoarselyBoundedGeometry => "not-coarsely-bounded-geometry",
            Rule::VertexTransitiveGrowth => "vertex-transitive-growth",
            Rule::CodingMap => "coding-map",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeClass {
    ZeroEvidence,
    PositiveEvidence,
    Undecided,
}

impl SlopeClass {
    pub fn of(slope: f64) -> Self {
        if slope < ZERO_SLOPE {
            SlopeClass::ZeroEvidence
        } else if slope > POSITIVE_SLOPE {
            SlopeClass::PositiveEvidence
        } else {
            SlopeClass::Undecided
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    /// Step size for growth series.
    pub delta: Dist,
    /// Largest growth radius.
    pub l_max: usize,
    /// Most points in one growth ball.
    pub point_cap: usize,
    /// Separation `s` for bounded-geometry evidence.
    pub bg_s: Dist,
    /// Diameter bound `D` for bounded-geometry evidence.
    pub bg_diameter: Dist,
    pub bg_depths: Vec<u64>,
    /// Largest ball solved exactly in bounded-geometry evidence.
    pub bg_exact: usize,
    /// Ping-pong repetitions in the attached witness.
    pub witness_p: usize,
    pub coding_delta: Dist,
    pub coding_radius: Dist,
    /// Number of coding checkpoints `m`; lengths `q, 2q, …, mq` are checked.
    pub coding_blocks: usize,
    /// Rules allowed to fire; empty means all.
    pub rules: Vec<Rule>,
    pub caps: Caps,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            delta: Dist::int(1),
            l_max: 48,
            point_cap: 100_000,
            bg_s: Dist::int(2),
            bg_diameter: Dist::int(2),
            bg_depths: (1..=8).collect(),
            bg_exact: 200,
            witness_p: 2,
            coding_delta: Dist::int(2),
            coding_radius: Dist::int(17),
            coding_blocks: 3,
            rules: Vec::new(),
            caps: Caps::default(),
        }
    }
}

impl ClassifyConfig {
    fn allows(&self, rule: Rule) -> bool {
        self.rules.is_empty() || self.rules.contains(&rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<GrowthAnnotation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_class: Option<SlopeClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounded_geometry: Option<BGEvidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coding: Vec<CodingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ultrametric_checked_points: Option<usize>,
    /// Evidence that could not be computed, with the reason.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema: String,
    pub space: String,
    pub params: serde_json::Value,
    pub verdict: Verdict,
    /// The rule that fired, or the best candidate when the verdict is inconclusive.
    pub rule: Option<Rule>,
    pub certified: bool,
    /// What the candidate rule would conclude, for inconclusive reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggested: Option<Verdict>,
    pub basis: String,
    pub evidence: Evidence,
    pub caveat: String,
}

const WINDOW_CAVEAT: &str = "All series are finite-window truncations; no limit was evaluated.";

struct Outcome {
    verdict: Verdict,
    rule: Rule,
    basis: String,
}

fn certified(verdict: Verdict, rule: Rule, basis: impl Into<String>) -> Option<Outcome> {
    Some(Outcome { verdict, rule, basis: basis.into() })
}

fn soft<T>(skipped: &mut Vec<String>, what: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            skipped.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Applies the classification rules in priority order. Only a hypothesis
/// certified by a catalog annotation or an exhaustive finite check yields a
/// zero or infinite verdict; window evidence alone is reported as a suggestion.
pub fn classify(space: &dyn MetricSpace, config: &ClassifyConfig) -> Result<ClassificationReport> {
    let flags = space.flags().clone();
    let x = space.basepoint();
    let mut ev = Evidence::default();
    let mut candidate: Option<(Rule, Verdict)> = None;

    let outcome = 'rules: {
        // bounded components
        if flags.ultrametric && config.allows(Rule::Ultrametric) {
            break 'rules certified(Verdict::Zero, Rule::Ultrametric, "catalog annotation: ultrametric");
        }
        if flags.finite {
            if config.allows(Rule::Ultrametric) {
                if let Ok(pts) = space.window(None) {
                    if pts.len() <= ULTRAMETRIC_CHECK_LIMIT && find_triangle_violation(space, &pts, true)?.is_none() {
                        ev.ultrametric_checked_points = Some(pts.len());
                        break 'rules certified(
                            Verdict::Zero,
                            Rule::Ultrametric,
                            "exhaustive check: strong triangle inequality on every triple",
                        );
                    }
                }
            }
            if config.allows(Rule::BoundedComponents) {
                break 'rules certified(Verdict::Zero, Rule::BoundedComponents, "finite space");
            }
        }
        if flags.bounded_components && config.allows(Rule::BoundedComponents) {
            break 'rules certified(Verdict::Zero, Rule::BoundedComponents, "catalog annotation: bounded δ-components");
        }

        // quasi-geodesic without coarsely bounded geometry
        if flags.quasi_geodesic == Some(true) && config.allows(Rule::NotCoarselyBoundedGeometry) {
            let bg = soft(
                &mut ev.skipped,
                "bounded-geometry evidence",
                bounded_geometry_evidence(
                    space,
                    &config.bg_s,
                    &config.bg_diameter,
                    &config.bg_depths,
                    config.bg_exact,
                    config.caps.exec,
                ),
            );
            let unbounded = bg.as_ref().is_some_and(|b| b.verdict == BGVerdict::UnboundedEvidence);
            if let Some(b) = &bg {
                if unbounded || flags.coarsely_bounded_geometry == Some(false) {
                    ev.witness = soft(&mut ev.skipped, "witness", star_witness(space, b, config));
                }
            }
            ev.bounded_geometry = bg;
            if flags.coarsely_bounded_geometry == Some(false) {
                break 'rules certified(
                    Verdict::Infinite,
                    Rule::NotCoarselyBoundedGeometry,
                    "catalog annotation: quasi-geodesic, not coarsely of bounded geometry",
                );
            }
            if unbounded {
                candidate.get_or_insert((Rule::NotCoarselyBoundedGeometry, Verdict::Infinite));
            }
        }

        // coding map into a net
        if flags.coding_map_zero && config.allows(Rule::CodingMap) {
            let r = config.coding_radius.to_f64() / 4.0;
            let q = (r / config.coding_delta.to_f64()).floor().max(1.0) as usize;
            for m in 1..=config.coding_blocks {
                let rep = coding_map_check(space, x, m * q, &config.coding_delta, &config.coding_radius, &config.caps);
                if let Some(rep) = soft(&mut ev.skipped, &format!("coding check n = {}", m * q), rep) {
                    ev.coding.push(rep);
                }
            }
            if ev.coding.iter().any(|c| !c.holds) {
                return Err(Error::Precondition("coding map check failed on an annotated space".into()));
            }
            break 'rules certified(
                Verdict::Zero,
                Rule::CodingMap,
                "catalog annotation: checkpoint coding into a net has subexponential image",
            );
        }

        // growth of balls under bounded geometry
        let bounded = flags.bounded_geometry == Some(true) || flags.degree_bound.is_some();
        if bounded {
            let g = soft(
                &mut ev.skipped,
                "growth series",
                growth_series(space, x, &config.delta, config.l_max, GrowthMeasure::Counting, config.point_cap),
            );
            if let Some(g) = g {
                ev.slope = g.slope();
                ev.slope_class = ev.slope.map(SlopeClass::of);
                ev.growth = Some(g);
            }
            let qg = flags.quasi_geodesic == Some(true);
            if let Some(a) = flags.growth.clone() {
                ev.annotation = Some(a.clone());
                let applies = a.quantity == GrowthQuantity::StepBall || qg;
                let (verdict, rule) = match a.class {
                    _ if flags.vertex_transitive && qg && a.quantity == GrowthQuantity::SupBall => {
                        let v = if a.class == GrowthClass::Exponential { Verdict::Infinite } else { Verdict::Zero };
                        (v, Rule::VertexTransitiveGrowth)
                    }
                    GrowthClass::Subexponential => (Verdict::Zero, Rule::BoundedGeometryGrowthZero),
                    GrowthClass::Exponential => (Verdict::Infinite, Rule::BoundedGeometryGrowthPositive),
                };
                if applies && config.allows(rule) {
                    break 'rules certified(verdict, rule, format!("catalog growth annotation: {}", a.formula));
                }
            }
            let rule_of = |v: Verdict| match (flags.vertex_transitive && qg, v) {
                (true, _) => Rule::VertexTransitiveGrowth,
                (false, Verdict::Zero) => Rule::BoundedGeometryGrowthZero,
                _ => Rule::BoundedGeometryGrowthPositive,
            };
            match ev.slope_class {
                Some(SlopeClass::ZeroEvidence) => {
                    candidate.get_or_insert((rule_of(Verdict::Zero), Verdict::Zero));
                }
                Some(SlopeClass::PositiveEvidence) => {
                    candidate.get_or_insert((rule_of(Verdict::Infinite), Verdict::Infinite));
                }
                _ => {}
            }
        }

        // measured volume growth
        if space.has_measure() && config.allows(Rule::MeasuredVolume) {
            let g = soft(
                &mut ev.skipped,
                "volume series",
                growth_series(space, x, &config.delta, config.l_max, GrowthMeasure::Measure, config.point_cap),
            );
            if let Some(g) = g {
                let slope = g.slope();
                if ev.growth.is_none() {
                    ev.slope = slope;
                    ev.slope_class = slope.map(SlopeClass::of);
                    ev.growth = Some(g);
                }
                match slope.map(SlopeClass::of) {
                    Some(SlopeClass::PositiveEvidence) => {
                        candidate.get_or_insert((Rule::MeasuredVolume, Verdict::Infinite));
                    }
                    Some(SlopeClass::ZeroEvidence) => {
                        candidate.get_or_insert((Rule::MeasuredVolume, Verdict::Zero));
                    }
                    _ => {}
                }
            }
        }
        None
    };

    let (verdict, rule, is_certified, suggested, basis) = match outcome {
        Some(o) => (o.verdict, Some(o.rule), true, None, o.basis),
        None => match candidate {
            Some((rule, v)) => (
                Verdict::Inconclusive,
                Some(rule),
                false,
                Some(v),
                format!("finite-window evidence only (slope thresholds {ZERO_SLOPE} / {POSITIVE_SLOPE})"),
            ),
            None => (Verdict::Inconclusive, None, false, None, "no rule applies".to_string()),
        },
    };
    let caveat = if is_certified {
        format!("Verdict rests on a certified hypothesis. {WINDOW_CAVEAT}")
    } else {
        format!("Not certified: finite-window evidence cannot decide an asymptotic property. {WINDOW_CAVEAT}")
    };
    Ok(ClassificationReport {
        schema: SCHEMA_VERSION.into(),
        space: space.tag().into(),
        params: space.params(),
        verdict,
        rule,
        certified: is_certified,
        suggested,
        basis,
        evidence: ev,
        caveat,
    })
}

/// Ping-pong family over the largest separated set that can be reached: a
/// path from the basepoint to one member, and arms from there to every member.
fn star_witness(space: &dyn MetricSpace, bg: &BGEvidence, config: &ClassifyConfig) -> Result<WitnessSummary> {
    let mut records: Vec<&BGRecord> = bg.records.iter().collect();
    records.sort_by_key(|r| std::cmp::Reverse(r.cardinality));
    let mut last = Error::Precondition("no bounded-geometry records".into());
    for rec in records {
        match star_family(space, rec, &bg.s, config) {
            Ok(w) => return Ok(w),
            Err(e @ Error::Budget(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn star_family(space: &dyn MetricSpace, rec: &BGRecord, s: &Dist, config: &ClassifyConfig) -> Result<WitnessSummary> {
    let hub = rec.set[0];
    let delta = config.delta;
    let base = delta_path_between(space, space.basepoint(), hub, &delta, config.point_cap)?;
    let arms = rec
        .set
        .iter()
        .map(|&a| delta_path_between(space, hub, a, &delta, config.point_cap))
        .collect::<Result<Vec<_>>>()?;
    let arms = pad_arms(&arms)?;
    let fam = pingpong_witness(space, space.basepoint(), &base, &arms, config.witness_p, s)?;
    let ok = fam.verify_separated(space, WITNESS_CHECK_LIMIT, config.caps.exec)?;
    Ok(fam.summary(ok))
}

/// Monotonicity under coarse embeddings: a space of infinite coarse entropy
/// admits no coarse embedding into one of zero coarse entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub schema: String,
    pub source: String,
    pub target: String,
    pub source_verdict: Verdict,
    pub target_verdict: Verdict,
    pub source_certified: bool,
    pub target_certified: bool,
    pub obstruction: bool,
    pub statement: String,
}

pub fn obstruct(source: &ClassificationReport, target: &ClassificationReport) -> ObstructionReport {
    let obstruction = source.certified
        && target.certified
        && source.verdict == Verdict::Infinite
        && target.verdict == Verdict::Zero;
    let statement = if obstruction {
        format!(
            "no coarse embedding of {} into {}: coarse entropy is monotone under coarse embeddings",
            source.space, target.space
        )
    } else {
        format!(
            "no obstruction derived: source is {:?}, target is {:?}",
            source.verdict, target.verdict
        )
        .to_lowercase()
    };
    ObstructionReport {
        schema: SCHEMA_VERSION.into(),
        source: source.space.clone(),
        target: target.space.clone(),
        source_verdict: source.verdict,
        target_verdict: target.verdict,
        source_certified: source.certified,
        target_certified: target.certified,
        obstruction,
        statement,
    }
}
