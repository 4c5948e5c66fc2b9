use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use coarse_entropy::entropy::{
    branch_tree_arms, classify, obstruct, pingpong_witness, rate_series, tree_line_arms, Caps,
    ClassificationReport, ClassifyConfig, GrowthMeasure, Quantity, Verdict, SCHEMA_VERSION,
};
use coarse_entropy::extremal::GREEDY_COVER_LIMIT;
use coarse_entropy::geometry::{bounded_geometry_evidence, quasi_geodesic_check};
use coarse_entropy::paths::{count_orbits, enumerate_orbits};
use coarse_entropy::spaces::catalog::{make_example, BranchTree, BranchTreeParams, TreeLine, TreeLineParams};
use coarse_entropy::spaces::read_edge_csv;
use coarse_entropy::{Dist, Exec, MetricSpace, SpaceHandle};

use crate::config::{Command, RunConfig};
use crate::output::{dist, dist_decimal, num, rational, rational_decimal, Report};
use crate::CliError;

const WITNESS_CHECK_LIMIT: u64 = 10_000;

/// Catalog space from tag and parameters, or a graph read from an edge list.
pub fn build_space(
    tag: Option<&str>,
    params: Option<&Value>,
    edges: Option<&Path>,
    window: Option<u64>,
) -> Result<SpaceHandle, CliError> {
    if let Some(path) = edges {
        let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let g = read_edge_csv(file)?.into_graph()?;
        return Ok(Arc::new(g));
    }
    let tag = tag.ok_or_else(|| CliError::Config("missing --space".into()))?;
    let mut params = params.cloned().unwrap_or(Value::Null);
    if let Some(w) = window {
        let key = match tag {
            "branch_tree" | "regular_tree" => "max_depth",
            "coarse_union" => return Err(CliError::Config("coarse_union has no window; its pieces are explicit".into())),
            _ => "window",
        };
        if params.is_null() {
            params = json!({});
        }
        let obj = params.as_object_mut().ok_or_else(|| CliError::Config("--params must be a JSON object".into()))?;
        obj.insert(key.into(), json!(w));
    }
    Ok(make_example(tag, &params)?)
}

pub struct Ctx {
    pub config: RunConfig,
    pub exec: Exec,
    pub ln_base: f64,
}

impl Ctx {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let ln_base = config.log_base()?.ln_base();
        let exec = if config.sequential { Exec::Sequential } else { Exec::default() };
        Ok(Ctx { config, exec, ln_base })
    }

    fn caps(&self) -> Caps {
        Caps {
            orbit_cap: self.config.orbit_cap(),
            point_cap: self.config.point_cap(),
            exec: self.exec,
            ..Caps::default()
        }
    }

    fn space(&self) -> Result<SpaceHandle, CliError> {
        let c = &self.config;
        build_space(c.space.as_deref(), c.params.as_ref(), c.edges.as_deref(), c.window)
    }

    fn target(&self) -> Result<SpaceHandle, CliError> {
        let c = &self.config;
        build_space(c.target.as_deref(), c.target_params.as_ref(), c.target_edges.as_deref(), None)
    }

    /// Converts a natural-log quantity into the configured base.
    fn log(&self, x: f64) -> Value {
        num(x / self.ln_base)
    }

    fn header(&self, command: Command, space: &dyn MetricSpace) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(command.as_str()));
        m.insert("space".into(), json!(space.tag()));
        m.insert("params".into(), space.params());
        m.insert("log_base".into(), json!(self.config.log_base().map(|b| b.label()).unwrap_or_default()));
        m
    }

    pub fn run(&self) -> Result<Report, CliError> {
        let cmd = self.config.command.ok_or_else(|| CliError::Config("no command given".into()))?;
        match cmd {
            Command::Growth => self.growth(),
            Command::Orbits => self.orbits(),
            Command::Rates => self.rates(),
            Command::Witness => self.witness(),
            Command::Classify => self.classify(),
            Command::Qgcheck => self.qgcheck(),
            Command::Bgcheck => self.bgcheck(),
            Command::Obstruct => self.obstruct(),
        }
    }

    fn growth(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let delta = self.config.delta();
        let l_max = *self.config.n_list(&[16]).last().unwrap_or(&16);
        let measure = self.config.measure.unwrap_or(GrowthMeasure::Counting);
        let g = coarse_entropy::entropy::growth_series(
            space.as_ref(),
            space.basepoint(),
            &delta,
            l_max,
            measure,
            self.config.point_cap(),
        )?;
        let mut r = Report::new(self.header(Command::Growth, space.as_ref()));
        r.insert("delta", delta)?;
        r.insert("l_max", l_max)?;
        r.insert("series", &g)?;
        r.insert("slope", g.slope().map(|s| self.log(s)))?;
        r.headers = vec!["l", "value", "value_decimal", "log_value"];
        for (l, (v, ln)) in g.values.iter().zip(g.ln_values()).enumerate() {
            r.rows.push(vec![json!(l), rational(v), rational_decimal(v), self.log(ln)]);
        }
        Ok(r)
    }

    fn orbits(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let delta = self.config.delta();
        let ns = self.config.n_list(&[4]);
        let x0 = space.basepoint();
        let cap = self.config.orbit_cap();
        let mut r = Report::new(self.header(Command::Orbits, space.as_ref()));
        r.insert("delta", delta)?;
        r.insert("x0", space.encode(x0))?;
        r.headers = vec!["n", "count"];
        let mut counts = Vec::new();
        for &n in &ns {
            let c = count_orbits(space.as_ref(), x0, n, &delta, u128::MAX - 1)?;
            counts.push(json!({ "n": n, "count": c.to_string() }));
            r.rows.push(vec![json!(n), json!(c.to_string())]);
        }
        r.insert("counts", counts)?;
        if self.config.paths {
            let [n] = ns[..] else {
                return Err(CliError::Config("--paths needs a single --n".into()));
            };
            let set = enumerate_orbits(space.as_ref(), x0, n, &delta, cap, self.exec)?;
            let paths: Vec<Vec<Value>> = set.iter().map(|p| p.iter().map(|&x| space.encode(x)).collect()).collect();
            r.insert("paths", paths)?;
        }
        Ok(r)
    }

    fn rates(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let delta = self.config.delta();
        let radius = self.config.radius();
        let mut ns = self.config.n_list(&[1, 2, 3, 4, 5, 6]);
        ns.sort_unstable();
        ns.dedup();
        let quantity = self.config.quantity.unwrap_or(Quantity::Separated);
        let x0 = space.basepoint();
        let points = rate_series(space.as_ref(), x0, &delta, &radius, &ns, quantity, &self.caps())?;
        let mut r = Report::new(self.header(Command::Rates, space.as_ref()));
        r.insert("delta", delta)?;
        r.insert("radius", radius)?;
        r.insert("quantity", quantity)?;
        r.insert("x0", space.encode(x0))?;
        r.headers = vec!["n", "count", "certificate", "rate", "covering_log_bound"];
        let mut rows = Vec::new();
        for p in &points {
            let cert = serde_json::to_value(p.certificate)?;
            let cover = p.covering.as_ref().map(|c| self.log(c.ln_bound)).unwrap_or(Value::Null);
            rows.push(json!({
                "n": p.n,
                "count": p.count,
                "certificate": cert,
                "rate": self.log(p.rate),
                "covering_log_bound": cover,
            }));
            r.rows.push(vec![json!(p.n), json!(p.count), cert, self.log(p.rate), cover]);
        }
        r.insert("rows", rows)?;
        if let Some(c) = points.iter().find_map(|p| p.covering.as_ref()) {
            r.insert("checkpoint_spacing", c.k)?;
            r.insert("step_ball_size", c.v_k)?;
            r.insert("step_ball_exact", c.exact_v)?;
        }
        Ok(r)
    }

    fn witness(&self) -> Result<Report, CliError> {
        let c = &self.config;
        let p = c.p.unwrap_or(1);
        let tag = c.space.as_deref().unwrap_or("");
        let mut params = c.params.clone().unwrap_or(json!({}));
        let (space, base, arms, radius): (SpaceHandle, _, _, Dist) = match tag {
            "tree_line" => {
                if let Some(w) = c.window {
                    params.as_object_mut().map(|o| o.insert("window".into(), json!(w)));
                }
                let tp: TreeLineParams =
                    serde_json::from_value(params).map_err(|e| CliError::Config(format!("tree_line params: {e}")))?;
                let s = TreeLine::new(tp)?;
                let delta = whole(&c.delta(), "delta")?;
                let radius = whole(&c.radius.unwrap_or(Dist::int(4)), "radius")?;
                let (base, arms) = tree_line_arms(&s, delta, radius)?;
                (Arc::new(s), base, arms, Dist::int(radius as i64))
            }
            "branch_tree" => {
                if let Some(w) = c.window {
                    params.as_object_mut().map(|o| o.insert("max_depth".into(), json!(w)));
                }
                let bp: BranchTreeParams =
                    serde_json::from_value(params).map_err(|e| CliError::Config(format!("branch_tree params: {e}")))?;
                let s = BranchTree::new(bp)?;
                let k = c.depth.unwrap_or(3);
                let (base, arms) = branch_tree_arms(&s, k)?;
                (Arc::new(s), base, arms, Dist::int(2))
            }
            other => {
                return Err(CliError::Config(format!(
                    "witness is available for tree_line and branch_tree, not `{other}`"
                )))
            }
        };
        let fam = pingpong_witness(space.as_ref(), space.basepoint(), &base, &arms, p, &radius)?;
        let verified = match fam.size() {
            Some(n) if n <= WITNESS_CHECK_LIMIT => fam.verify_separated(space.as_ref(), n, self.exec)?,
            _ => false,
        };
        let summary = fam.summary(verified);
        let mut r = Report::new(self.header(Command::Witness, space.as_ref()));
        r.insert("witness", &summary)?;
        r.insert("rate_bound", self.log(summary.rate_bound))?;
        r.headers = vec!["arms", "p", "path_length", "family_size", "radius", "delta", "rate_bound", "separation_verified"];
        r.rows.push(vec![
            json!(summary.arms),
            json!(summary.p),
            json!(summary.path_length),
            json!(summary.family_size),
            dist(&summary.radius),
            dist(&summary.delta),
            self.log(summary.rate_bound),
            json!(summary.separation_verified),
        ]);
        Ok(r)
    }

    fn classify_config(&self) -> ClassifyConfig {
        let c = &self.config;
        let mut cc = c.classify.clone().unwrap_or_default();
        if let Some(d) = c.delta {
            cc.delta = d;
        }
        if let Some(n) = c.n.as_ref().and_then(|v| v.last()) {
            cc.l_max = *n as usize;
        }
        if let Some(p) = c.point_cap {
            cc.point_cap = p;
        }
        if let Some(cap) = c.cap {
            cc.caps.orbit_cap = cap;
        }
        if let Some(p) = c.p {
            cc.witness_p = p;
        }
        cc.caps.exec = self.exec;
        cc
    }

    fn classification_row(&self, rep: &ClassificationReport) -> Vec<Value> {
        vec![
            json!(rep.space),
            json!(rep.verdict),
            json!(rep.rule.map(|r| r.as_str())),
            json!(rep.certified),
            json!(rep.suggested),
            rep.evidence.slope.map(|s| self.log(s)).unwrap_or(Value::Null),
            json!(rep.basis),
        ]
    }

    fn classify(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let rep = classify(space.as_ref(), &self.classify_config())?;
        let mut r = Report::new(self.header(Command::Classify, space.as_ref()));
        r.extend(&rep)?;
        r.headers = vec!["space", "verdict", "rule", "certified", "suggested", "slope", "basis"];
        r.rows.push(self.classification_row(&rep));
        r.inconclusive = rep.verdict == Verdict::Inconclusive;
        Ok(r)
    }

    fn obstruct(&self) -> Result<Report, CliError> {
        let source = self.space()?;
        let target = self.target()?;
        let cc = self.classify_config();
        let a = classify(source.as_ref(), &cc)?;
        let b = classify(target.as_ref(), &cc)?;
        let o = obstruct(&a, &b);
        let mut r = Report::new(self.header(Command::Obstruct, source.as_ref()));
        r.extend(&o)?;
        r.insert("source_report", &a)?;
        r.insert("target_report", &b)?;
        r.headers = vec!["source", "target", "source_verdict", "target_verdict", "obstruction", "statement"];
        r.rows.push(vec![
            json!(o.source),
            json!(o.target),
            json!(o.source_verdict),
            json!(o.target_verdict),
            json!(o.obstruction),
            json!(o.statement),
        ]);
        r.inconclusive = !o.obstruction && (a.verdict == Verdict::Inconclusive || b.verdict == Verdict::Inconclusive);
        Ok(r)
    }

    fn qgcheck(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let delta = self.config.delta();
        let pairs = space.sample_pairs();
        let rep = quasi_geodesic_check(space.as_ref(), &delta, &pairs, self.config.point_cap().max(GREEDY_COVER_LIMIT), self.exec)?;
        let mut r = Report::new(self.header(Command::Qgcheck, space.as_ref()));
        r.extend(&rep)?;
        r.headers = vec!["a", "b", "distance", "distance_decimal", "bound", "hops", "pass"];
        for p in &rep.pairs {
            r.rows.push(vec![
                json!(p.a.to_string()),
                json!(p.b.to_string()),
                dist(&p.distance),
                dist_decimal(&p.distance),
                json!(p.bound),
                json!(p.hops),
                json!(p.pass),
            ]);
        }
        Ok(r)
    }

    fn bgcheck(&self) -> Result<Report, CliError> {
        let space = self.space()?;
        let c = &self.config;
        let s = c.s.unwrap_or(Dist::int(2));
        let d = c.diameter.unwrap_or(Dist::int(2));
        let depths = c.depths.clone().unwrap_or_else(|| (1..=8).collect());
        let exact = ClassifyConfig::default().bg_exact;
        let ev = bounded_geometry_evidence(space.as_ref(), &s, &d, &depths, exact, self.exec)?;
        let mut r = Report::new(self.header(Command::Bgcheck, space.as_ref()));
        r.extend(&ev)?;
        r.headers = vec!["depth", "cardinality", "center", "certificate"];
        for rec in &ev.records {
            r.rows.push(vec![json!(rec.depth), json!(rec.cardinality), json!(rec.center.to_string()), serde_json::to_value(rec.certificate)?]);
        }
        Ok(r)
    }
}

fn whole(d: &Dist, name: &str) -> Result<u64, CliError> {
    match (d.floor_u64(), d.ceil_u64()) {
        (Some(a), Some(b)) if a == b && a > 0 => Ok(a),
        _ => Err(CliError::Config(format!("--{name} must be a positive integer here, got {d}"))),
    }
}
