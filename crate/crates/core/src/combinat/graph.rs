use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::blocks::BlockTable;
use super::endo::{nn_endofunction, nn_indicator, Endofunction};
use super::hairy::{check_schedule, component_order, decompose_subset, ScheduleStep};
use crate::corr_core::{distance, PointConfiguration};
use crate::quad::LemmaId;
use crate::{Error, Result};

/// Default proximity factor `δ`; the claim needs `δ >= 4`.
pub const DEFAULT_DELTA: f64 = 4.0;

/// Nearest-neighbor edges `τ` on `V` together with short witness edges `σ` on
/// the bad vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSigmaGraph {
    pub tau: Endofunction,
    /// `σ(a)` for bad `a`, `None` for good vertices.
    pub sigma: Vec<Option<usize>>,
    pub bad: Vec<bool>,
    /// Whether each vertex is an `X` vertex.
    pub x_side: Vec<bool>,
    /// `L^r`.
    pub scale: f64,
    pub delta: f64,
}

impl TauSigmaGraph {
    /// Validates that `σ` is a fixed-point-free endofunction of the bad set and
    /// that `τ` maps bad vertices to bad vertices.
    pub fn new(tau: Endofunction, sigma: Vec<Option<usize>>, bad: Vec<bool>, x_side: Vec<bool>) -> Result<Self> {
        let p = tau.p();
        if sigma.len() != p || bad.len() != p || x_side.len() != p {
            return Err(Error::Format("graph arrays have different lengths".into()));
        }
        for a in 0..p {
            match (bad[a], sigma[a]) {
                (true, Some(s)) => {
                    if s >= p || s == a || !bad[s] {
                        return Err(Error::Format(format!("σ({a}) = {s} is not another bad vertex")));
                    }
                }
                (true, None) => return Err(Error::Format(format!("bad vertex {a} has no σ edge"))),
                (false, Some(_)) => return Err(Error::Format(format!("good vertex {a} has a σ edge"))),
                (false, None) => {}
            }
            if bad[a] && !bad[tau.apply(a)] {
                return Err(Error::Format(format!("τ maps bad vertex {a} to a good vertex")));
            }
        }
        Ok(TauSigmaGraph {
            tau,
            sigma,
            bad,
            x_side,
            scale: 1.0,
            delta: DEFAULT_DELTA,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.p()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn good(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| !self.bad[a]).collect()
    }

    pub fn bad_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.bad[a]).collect()
    }

    /// Graph in Graphviz DOT form: one node per vertex with its block tag,
    /// solid `τ` edges and dashed `σ` edges.
    pub fn to_dot(&self, table: Option<&BlockTable>) -> String {
        let mut s = String::from("digraph tau_sigma {\n");
        for a in 0..self.len() {
            let (name, tag) = match table {
                Some(t) => (t.name(a), t.vertices[a].block.tag().to_string()),
                None => (a.to_string(), if self.bad[a] { "bad".into() } else { "good".into() }),
            };
            let _ = writeln!(s, "  v{a} [label=\"{name}\", block=\"{tag}\"];");
        }
        for a in 0..self.len() {
            let _ = writeln!(s, "  v{a} -> v{} [kind=tau];", self.tau.apply(a));
        }
        for (a, t) in self.sigma.iter().enumerate() {
            if let Some(t) = t {
                let _ = writeln!(s, "  v{a} -> v{t} [kind=sigma, style=dashed];");
            }
        }
        s.push_str("}\n");
        s
    }
}

fn min_distance(pts: &[Vec<f64>], a: usize, among: &[usize]) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for &b in among {
        if b != a {
            let d = distance(&pts[a], &pts[b]);
            if d < best.0 {
                best = (d, Some(b));
            }
        }
    }
    best
}

/// Evaluate the term's support indicators: pairing of `Y` vertices with their
/// partners within `2L^r`, repulsion of good `X` vertices beyond `δL^r`, and
/// clustering of bad `X` vertices within `δL^r`. Returns the first failing
/// condition.
pub fn support_violation(config: &PointConfiguration, table: &BlockTable, scale: f64, delta: f64) -> Option<String> {
    let pts = config.points();
    let vx = table.v_x();
    for a in table.v_bad_y() {
        let d = distance(&pts[a], &pts[table.iota[a]]);
        if d > 2.0 * scale {
            return Some(format!("vertex {} is {d:e} from its partner", table.name(a)));
        }
    }
    for a in table.v_good() {
        let (d, _) = min_distance(pts, a, &vx);
        if d <= delta * scale {
            return Some(format!("good vertex {} has an X neighbor at {d:e}", table.name(a)));
        }
    }
    for a in table.v_bad_x() {
        let (d, _) = min_distance(pts, a, &vx);
        if d > delta * scale {
            return Some(format!("bad vertex {} is isolated ({d:e})", table.name(a)));
        }
    }
    None
}

/// Construct `(τ, σ)` for a configuration of the vertex set of `table`.
///
/// `τ` is the nearest-neighbor map on `V`; `σ` sends a bad `Y` vertex to its
/// partner and a bad `X` vertex to its nearest other `X` vertex. Returns
/// [`Error::EmptyTerm`] when the configuration lies outside the support of the
/// term, and verifies all indicators of the resulting graph.
pub fn construct_tau_sigma(
    config: &PointConfiguration,
    table: &BlockTable,
    delta: f64,
    base: f64,
    r: i32,
) -> Result<TauSigmaGraph> {
    if !(delta >= 4.0) {
        return Err(Error::Range(format!("δ must be at least 4, got {delta}")));
    }
    if config.len() != table.len() {
        return Err(Error::Format(format!(
            "configuration has {} points for {} vertices",
            config.len(),
            table.len()
        )));
    }
    let scale = base.powi(r);
    if let Some(reason) = support_violation(config, table, scale, delta) {
        return Err(Error::EmptyTerm(reason));
    }
    let tau = nn_endofunction(config)?;
    let pts = config.points();
    let vx = table.v_x();
    let sigma: Vec<Option<usize>> = (0..table.len())
        .map(|a| {
            if table.is_good(a) {
                None
            } else if table.is_x(a) {
                min_distance(pts, a, &vx).1
            } else {
                Some(table.iota[a])
            }
        })
        .collect();
    let bad: Vec<bool> = (0..table.len()).map(|a| !table.is_good(a)).collect();
    let x_side: Vec<bool> = (0..table.len()).map(|a| table.is_x(a)).collect();
    let check = verify_claim_raw(config, &tau, &sigma, &bad, scale, delta);
    if !check.all() {
        return Err(Error::Schedule(format!("constructed graph violates the claim: {check:?}")));
    }
    let mut g = TauSigmaGraph::new(tau, sigma, bad, x_side)?;
    g.scale = scale;
    g.delta = delta;
    Ok(g)
}

/// The three indicator groups of the covering claim, plus closure of the bad
/// set under `τ` and `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub nearest_neighbor: bool,
    pub sigma_short: bool,
    pub tau_short: bool,
    pub closure: bool,
}

impl ClaimCheck {
    pub fn all(&self) -> bool {
        self.nearest_neighbor && self.sigma_short && self.tau_short && self.closure
    }
}

fn verify_claim_raw(
    config: &PointConfiguration,
    tau: &Endofunction,
    sigma: &[Option<usize>],
    bad: &[bool],
    scale: f64,
    delta: f64,
) -> ClaimCheck {
    let pts = config.points();
    let limit = delta * scale;
    let bad_set: Vec<usize> = (0..bad.len()).filter(|&a| bad[a]).collect();
    ClaimCheck {
        nearest_neighbor: nn_indicator(config, tau),
        sigma_short: bad_set
            .iter()
            .all(|&a| sigma[a].is_some_and(|s| distance(&pts[a], &pts[s]) <= limit)),
        tau_short: bad_set.iter().all(|&a| distance(&pts[a], &pts[tau.apply(a)]) <= limit),
        closure: bad_set
            .iter()
            .all(|&a| bad[tau.apply(a)] && sigma[a].is_some_and(|s| bad[s])),
    }
}

/// Evaluate the claim's indicators for a graph on a configuration.
pub fn verify_claim(config: &PointConfiguration, g: &TauSigmaGraph) -> ClaimCheck {
    verify_claim_raw(config, &g.tau, &g.sigma, &g.bad, g.scale, g.delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub vertex: usize,
    pub lemma: LemmaId,
}

/// Integration plan for a two-scale graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoScalePlan {
    pub steps: Vec<PlanStep>,
    /// Roots of isolated good hairy cycles.
    pub good_roots: Vec<usize>,
    /// Components `W_i` of the bad set under `τ ∪ σ`.
    pub components: Vec<Vec<usize>>,
    /// `τ`-components `W_{i,j}` of each `W_i`; `W_{i,1}` first.
    pub subcomponents: Vec<Vec<Vec<usize>>>,
    /// `σ` edges kept to connect the `W_{i,j}` of each `W_i` into a tree.
    pub kept_sigma: Vec<(usize, usize)>,
    /// Roots `b_i ∈ W_{i,1}`.
    pub roots: Vec<usize>,
}

impl TwoScalePlan {
    /// Number of bad components `q`.
    pub fn q(&self) -> usize {
        self.components.len()
    }

    pub fn lemma_count(&self, lemma: LemmaId) -> usize {
        self.steps.iter().filter(|s| s.lemma == lemma).count()
    }
}

fn undirected_components(vertices: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in &set {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = vec![s];
        seen.insert(s);
        let mut k = 0;
        while k < comp.len() {
            let v = comp[k];
            for &(a, b) in edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if set.contains(&w) && seen.insert(w) {
                    comp.push(w);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by_key(|c| c[0]);
    out
}

fn tag_steps(order: super::hairy::ComponentOrder, l1: LemmaId, beta: LemmaId, last: LemmaId) -> Vec<PlanStep> {
    let mut steps: Vec<PlanStep> = order
        .before_beta
        .into_iter()
        .map(|vertex| PlanStep { vertex, lemma: l1 })
        .collect();
    steps.push(PlanStep {
        vertex: order.beta,
        lemma: beta,
    });
    let n_after = order.after_beta.len();
    for (k, vertex) in order.after_beta.into_iter().enumerate() {
        let lemma = if k + 1 == n_after { last } else { l1 };
        steps.push(PlanStep { vertex, lemma });
    }
    steps
}

/// Two-scale pin-and-sum plan.
///
/// Good vertices go first with the global lemmas: isolated hairy cycles are
/// scheduled from their lowest cycle vertex, trees hanging off the bad set are
/// removed leaf-first. The bad set is split into `τ ∪ σ` components `W_i` and
/// each `W_i` into `τ`-components `W_{i,j}`; `σ` edges inside a `W_{i,j}` are
/// dropped and the remaining ones, sorted by endpoints, are kept greedily as a
/// spanning tree. The component tree is integrated in post-order from
/// `W_{i,1}`: each child is scheduled with the contrarian rule rooted at its
/// endpoint of the kept `σ` edge and uses the local lemmas, and the root
/// `b_i` (lowest vertex of `W_{i,1}`) is removed last with the global L1 lemma.
pub fn two_scale_schedule(g: &TauSigmaGraph) -> Result<TwoScalePlan> {
    let tau = &g.tau;
    let mut steps = Vec::new();
    let mut good_roots = Vec::new();
    let good = g.good();
    let good_edges: Vec<(usize, usize)> = good
        .iter()
        .filter(|&&a| !g.bad[tau.apply(a)])
        .map(|&a| (a, tau.apply(a)))
        .collect();
    for comp in undirected_components(&good, &good_edges) {
        let closed = comp.iter().all(|&a| !g.bad[tau.apply(a)]);
        if closed {
            let dec = decompose_subset(tau, &comp);
            let hc = &dec.components[0];
            let root = *hc.cycle.iter().min().unwrap();
            good_roots.push(root);
            steps.extend(tag_steps(
                component_order(tau, hc, root),
                LemmaId::GlobalL1,
                LemmaId::GlobalBeta,
                LemmaId::GlobalL1,
            ));
        } else {
            let mut alive: BTreeSet<usize> = comp.iter().copied().collect();
            while let Some(v) = alive
                .iter()
                .copied()
                .find(|&v| !alive.iter().any(|&w| w != v && tau.apply(w) == v))
            {
                alive.remove(&v);
                steps.push(PlanStep {
                    vertex: v,
                    lemma: LemmaId::GlobalL1,
                });
            }
            if !alive.is_empty() {
                return Err(Error::Schedule("good tree contains a cycle".into()));
            }
        }
    }

    let bad = g.bad_vertices();
    let sigma_edges: Vec<(usize, usize)> = bad.iter().map(|&a| (a, g.sigma[a].unwrap())).collect();
    let tau_bad: Vec<(usize, usize)> = bad.iter().map(|&a| (a, tau.apply(a))).collect();
    let all_edges: Vec<(usize, usize)> = tau_bad.iter().chain(&sigma_edges).copied().collect();
    let components = undirected_components(&bad, &all_edges);
    let mut subcomponents = Vec::new();
    let mut kept_sigma = Vec::new();
    let mut roots = Vec::new();
    for w in &components {
        let dec = decompose_subset(tau, w);
        let mut subs: Vec<Vec<usize>> = dec.components.iter().map(|c| c.vertices.clone()).collect();
        subs.sort_by_key(|c| c[0]);
        let sub_of = |v: usize| subs.iter().position(|c| c.contains(&v)).unwrap();
        // Cross σ edges, sorted by endpoints, kept greedily as a spanning forest.
        let mut cross: Vec<(usize, usize)> = sigma_edges
            .iter()
            .filter(|&&(a, b)| w.contains(&a) && sub_of(a) != sub_of(b))
            .copied()
            .collect();
        cross.sort_by_key(|&(a, b)| (a.min(b), a.max(b)));
        let mut uf: Vec<usize> = (0..subs.len()).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            uf[x] = r;
            r
        }
        let mut kept = Vec::new();
        for (a, b) in cross {
            let (ra, rb) = (find(&mut uf, sub_of(a)), find(&mut uf, sub_of(b)));
            if ra != rb {
                uf[ra] = rb;
                kept.push((a, b));
            }
        }
        if kept.len() + 1 != subs.len() {
            return Err(Error::Schedule("σ edges do not connect a bad component".into()));
        }
        // Component tree from W_{i,1}: (component, attach vertex, parent).
        let b_i = w[0];
        let mut order: Vec<(usize, usize)> = vec![(0, b_i)];
        let mut k = 0;
        let mut placed = vec![false; subs.len()];
        placed[0] = true;
        while k < order.len() {
            let (c, _) = order[k];
            let mut children: Vec<(usize, usize)> = Vec::new();
            for &(a, b) in &kept {
                let (sa, sb) = (sub_of(a), sub_of(b));
                if sa == c && !placed[sb] {
                    children.push((sb, b));
                } else if sb == c && !placed[sa] {
                    children.push((sa, a));
                }
            }
            children.sort_by_key(|&(s, _)| subs[s][0]);
            for (s, attach) in children {
                placed[s] = true;
                order.push((s, attach));
            }
            k += 1;
        }
        // Reverse BFS order integrates every child before its parent.
        for &(c, attach) in order.iter().rev() {
            let hc = dec
                .components
                .iter()
                .find(|h| h.contains(attach))
                .expect("attach vertex lies in a τ-component");
            let last = if c == 0 { LemmaId::GlobalL1 } else { LemmaId::LocalL1 };
            debug_assert_eq!(hc.vertices, subs[c]);
            steps.extend(tag_steps(
                component_order(tau, hc, attach),
                LemmaId::LocalL1,
                LemmaId::LocalBeta,
                last,
            ));
        }
        roots.push(b_i);
        subcomponents.push(subs);
        kept_sigma.extend(kept);
    }
    Ok(TwoScalePlan {
        steps,
        good_roots,
        components,
        subcomponents,
        kept_sigma,
        roots,
    })
}

/// Check a plan step by step: L1 lemmas need exactly one live edge (none for
/// a root using the global L1 lemma), beta lemmas need two and consume both.
/// Good vertices must come first and use global lemmas; bad vertices use
/// local lemmas except the roots `b_i`, exactly one per component, which use
/// the global L1 lemma. Also checks `2q <= |V_B^X|`.
pub fn check_two_scale_plan(g: &TauSigmaGraph, plan: &TwoScalePlan) -> Result<()> {
    let n = g.len();
    let mut edges: Vec<(usize, usize)> = g.tau.edges();
    for &(a, b) in &plan.kept_sigma {
        if g.sigma.get(a).copied().flatten() != Some(b) {
            return Err(Error::Schedule(format!("kept edge ({a}, {b}) is not a σ edge")));
        }
        edges.push((a, b));
    }
    let mut seen_bad = false;
    let mut roots_used = Vec::new();
    for (k, s) in plan.steps.iter().enumerate() {
        let global = matches!(s.lemma, LemmaId::GlobalL1 | LemmaId::GlobalBeta);
        if g.bad[s.vertex] {
            seen_bad = true;
            let is_root = plan.roots.contains(&s.vertex);
            if is_root != (s.lemma == LemmaId::GlobalL1) || (!is_root && global) {
                return Err(Error::Schedule(format!(
                    "step {k}: bad vertex {} uses {:?}",
                    s.vertex, s.lemma
                )));
            }
            if is_root {
                roots_used.push(s.vertex);
            }
        } else {
            if seen_bad {
                return Err(Error::Schedule(format!("step {k}: good vertex after bad ones")));
            }
            if !global {
                return Err(Error::Schedule(format!("step {k}: good vertex uses a local lemma")));
            }
        }
    }
    for (i, w) in plan.components.iter().enumerate() {
        let in_w = plan.roots.iter().filter(|r| w.contains(r)).count();
        if in_w != 1 || !w.contains(&plan.roots[i]) {
            return Err(Error::Schedule(format!("component {i} must have exactly one root")));
        }
    }
    if roots_used.len() != plan.q() {
        return Err(Error::Schedule(format!(
            "{} global roots for q = {}",
            roots_used.len(),
            plan.q()
        )));
    }
    let bad_x = (0..n).filter(|&a| g.bad[a] && g.x_side[a]).count();
    if 2 * plan.q() > bad_x {
        return Err(Error::Schedule(format!("2q = {} exceeds |V_B^X| = {bad_x}", 2 * plan.q())));
    }
    let rule_steps: Vec<ScheduleStep> = plan
        .steps
        .iter()
        .map(|s| match s.lemma {
            LemmaId::GlobalL1 | LemmaId::LocalL1 => ScheduleStep::l1(s.vertex),
            LemmaId::GlobalBeta | LemmaId::LocalBeta => ScheduleStep::beta(s.vertex),
        })
        .collect();
    let zero_edge_roots: Vec<usize> = plan.good_roots.iter().chain(&plan.roots).copied().collect();
    let vertices: Vec<usize> = (0..n).collect();
    check_schedule(&vertices, &edges, &zero_edge_roots, &rule_steps)
}
