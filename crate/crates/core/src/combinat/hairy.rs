use serde::{Deserialize, Serialize};

use super::endo::Endofunction;
use crate::{Error, Result};

/// One connected component of the functional digraph of `τ`: a central cycle
/// with trees oriented into it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HairyComponent {
    /// Cycle vertices in `τ` order, starting from the lowest one.
    pub cycle: Vec<usize>,
    /// All vertices of the component, sorted.
    pub vertices: Vec<usize>,
}

impl HairyComponent {
    pub fn on_cycle(&self, v: usize) -> bool {
        self.cycle.contains(&v)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HairyCycleDecomposition {
    pub tau: Endofunction,
    /// Components sorted by their lowest vertex.
    pub components: Vec<HairyComponent>,
}

impl HairyCycleDecomposition {
    pub fn component_of(&self, v: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(v))
    }
}

/// Decompose the functional digraph of `τ` into hairy cycles.
pub fn hairy_decompose(tau: &Endofunction) -> HairyCycleDecomposition {
    decompose_subset(tau, &(0..tau.p()).collect::<Vec<_>>())
}

/// Hairy-cycle decomposition of `τ` restricted to a `τ`-closed vertex subset.
pub(crate) fn decompose_subset(tau: &Endofunction, subset: &[usize]) -> HairyCycleDecomposition {
    let p = tau.p();
    let mut in_subset = vec![false; p];
    for &v in subset {
        in_subset[v] = true;
    }
    // Cycle detection by iterated walks with colouring.
    let mut state = vec![0u8; p];
    let mut on_cycle = vec![false; p];
    for &s in subset {
        if state[s] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = s;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = tau.apply(v);
        }
        if state[v] == 1 {
            let start = path.iter().position(|&u| u == v).unwrap();
            for &u in &path[start..] {
                on_cycle[u] = true;
            }
        }
        for &u in &path {
            state[u] = 2;
        }
    }
    // Label each vertex by the lowest vertex of the cycle it drains into.
    let root_of = |mut v: usize| {
        while !on_cycle[v] {
            v = tau.apply(v);
        }
        let mut best = v;
        let mut u = tau.apply(v);
        while u != v {
            best = best.min(u);
            u = tau.apply(u);
        }
        best
    };
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &v in subset {
        groups.entry(root_of(v)).or_default().push(v);
    }
    let mut components: Vec<HairyComponent> = groups
        .into_iter()
        .map(|(start, mut vertices)| {
            vertices.sort_unstable();
            let mut cycle = vec![start];
            let mut u = tau.apply(start);
            while u != start {
                cycle.push(u);
                u = tau.apply(u);
            }
            HairyComponent { cycle, vertices }
        })
        .collect();
    components.sort_by_key(|c| c.vertices[0]);
    HairyCycleDecomposition {
        tau: tau.clone(),
        components,
    }
}

/// Integration rule used when removing a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// One remaining bound edge (or none for the root).
    L1,
    /// Two remaining bound edges, both consumed.
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub vertex: usize,
    pub rule: Rule,
}

impl ScheduleStep {
    pub fn l1(vertex: usize) -> Self {
        ScheduleStep { vertex, rule: Rule::L1 }
    }

    pub fn beta(vertex: usize) -> Self {
        ScheduleStep {
            vertex,
            rule: Rule::Beta,
        }
    }
}

/// Leaf-first removal order for one hairy component with a given root.
///
/// Vertices are returned without rules; the caller attaches them. `c0` is the
/// cycle vertex where the root path enters the cycle, the beta vertex is
/// `τ(c0)`.
pub(crate) struct ComponentOrder {
    pub before_beta: Vec<usize>,
    pub beta: usize,
    pub after_beta: Vec<usize>,
}

pub(crate) fn component_order(tau: &Endofunction, comp: &HairyComponent, root: usize) -> ComponentOrder {
    let mut path = vec![root];
    let mut v = root;
    while !comp.on_cycle(v) {
        v = tau.apply(v);
        path.push(v);
    }
    let c0 = v;
    let beta = tau.apply(c0);
    let mut alive: std::collections::BTreeSet<usize> = comp.vertices.iter().copied().collect();
    let indegree = |alive: &std::collections::BTreeSet<usize>, u: usize| {
        alive.iter().filter(|&&w| w != u && tau.apply(w) == u).count()
    };
    // Phase 1: hair not on the root path.
    let protected = |u: usize| comp.on_cycle(u) || path.contains(&u);
    let mut before_beta = Vec::new();
    loop {
        let next = alive
            .iter()
            .copied()
            .find(|&u| !protected(u) && indegree(&alive, u) == 0);
        match next {
            Some(u) => {
                alive.remove(&u);
                before_beta.push(u);
            }
            None => break,
        }
    }
    // Phase 2: open the cycle at τ(c0), then peel the remaining tree (in the
    // undirected sense) toward the root.
    alive.remove(&beta);
    let degree = |alive: &std::collections::BTreeSet<usize>, u: usize| {
        let out = usize::from(alive.contains(&tau.apply(u)));
        out + indegree(alive, u)
    };
    let mut after_beta = Vec::new();
    while alive.len() > 1 {
        let u = alive
            .iter()
            .copied()
            .find(|&u| u != root && degree(&alive, u) == 1)
            .expect("a finite tree minus its root has a leaf");
        alive.remove(&u);
        after_beta.push(u);
    }
    after_beta.push(root);
    ComponentOrder {
        before_beta,
        beta,
        after_beta,
    }
}

/// Integration schedule for the component containing `root`.
///
/// Without `contrarian`, the root must lie on the cycle. With it, the root may
/// sit anywhere in the hair and the cycle is opened away from the point where
/// the root's path enters it. The final step is the root itself with rule
/// [`Rule::L1`] and no remaining edge.
pub fn integration_schedule(
    decomp: &HairyCycleDecomposition,
    root: usize,
    contrarian: bool,
) -> Result<Vec<ScheduleStep>> {
    let idx = decomp
        .component_of(root)
        .ok_or_else(|| Error::Schedule(format!("root {root} is not a vertex")))?;
    let comp = &decomp.components[idx];
    if !contrarian && !comp.on_cycle(root) {
        return Err(Error::Schedule(format!(
            "root {root} is off the cycle; use a contrarian schedule"
        )));
    }
    let order = component_order(&decomp.tau, comp, root);
    let mut steps: Vec<ScheduleStep> = order.before_beta.into_iter().map(ScheduleStep::l1).collect();
    steps.push(ScheduleStep::beta(order.beta));
    steps.extend(order.after_beta.into_iter().map(ScheduleStep::l1));
    Ok(steps)
}

/// Schedules for every component, each rooted at its lowest cycle vertex.
pub fn full_schedule(decomp: &HairyCycleDecomposition) -> Result<Vec<ScheduleStep>> {
    let mut steps = Vec::new();
    for comp in &decomp.components {
        let root = *comp.cycle.iter().min().unwrap();
        steps.extend(integration_schedule(decomp, root, false)?);
    }
    Ok(steps)
}

/// Check a removal schedule against a multiset of undirected bound edges.
///
/// Each step must remove a live vertex carrying exactly one live edge for
/// [`Rule::L1`] (or none if it is listed in `roots`) and exactly two for
/// [`Rule::Beta`]; its edges are then deleted. At the end every vertex of
/// `vertices` must have been removed once and no edge may remain.
pub fn check_schedule(
    vertices: &[usize],
    edges: &[(usize, usize)],
    roots: &[usize],
    steps: &[ScheduleStep],
) -> Result<()> {
    let mut live_edges: Vec<(usize, usize)> = edges.to_vec();
    let mut alive: std::collections::BTreeSet<usize> = vertices.iter().copied().collect();
    if alive.len() != vertices.len() {
        return Err(Error::Schedule("duplicate vertex in the vertex list".into()));
    }
    for (k, step) in steps.iter().enumerate() {
        let v = step.vertex;
        if !alive.remove(&v) {
            return Err(Error::Schedule(format!("step {k}: vertex {v} is not live")));
        }
        let count = live_edges.iter().filter(|&&(a, b)| a == v || b == v).count();
        let ok = match step.rule {
            Rule::L1 => count == 1 || (count == 0 && roots.contains(&v)),
            Rule::Beta => count == 2,
        };
        if !ok {
            return Err(Error::Schedule(format!(
                "step {k}: vertex {v} has {count} live edges, incompatible with {:?}",
                step.rule
            )));
        }
        live_edges.retain(|&(a, b)| a != v && b != v);
    }
    if !alive.is_empty() {
        return Err(Error::Schedule(format!("vertices never removed: {alive:?}")));
    }
    if !live_edges.is_empty() {
        return Err(Error::Schedule(format!("edges left over: {live_edges:?}")));
    }
    Ok(())
}

/// Check a schedule for one component of a hairy-cycle decomposition.
pub fn check_component_schedule(
    decomp: &HairyCycleDecomposition,
    root: usize,
    steps: &[ScheduleStep],
) -> Result<()> {
    let idx = decomp
        .component_of(root)
        .ok_or_else(|| Error::Schedule(format!("root {root} is not a vertex")))?;
    let comp = &decomp.components[idx];
    let edges: Vec<(usize, usize)> = comp.vertices.iter().map(|&v| (v, decomp.tau.apply(v))).collect();
    if steps.last().map(|s| s.vertex) != Some(root) {
        return Err(Error::Schedule(format!("schedule does not end at the root {root}")));
    }
    let betas = steps.iter().filter(|s| s.rule == Rule::Beta).count();
    if betas != 1 {
        return Err(Error::Schedule(format!("expected one beta step per cycle, got {betas}")));
    }
    check_schedule(&comp.vertices, &edges, &[root], steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(steps: &[ScheduleStep]) -> Vec<(usize, Rule)> {
        steps.iter().map(|s| (s.vertex + 1, s.rule)).collect()
    }

    #[test]
    fn small_decompositions() {
        let t = Endofunction::from_one_based(&[2, 3, 2]).unwrap();
        let d = hairy_decompose(&t);
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].cycle, vec![1, 2]);
        let t = Endofunction::from_one_based(&[2, 1, 4, 3]).unwrap();
        assert_eq!(hairy_decompose(&t).components.len(), 2);
    }

    #[test]
    fn documented_schedules() {
        let t = Endofunction::from_one_based(&[2, 3, 2]).unwrap();
        let d = hairy_decompose(&t);
        let s = integration_schedule(&d, 1, false).unwrap();
        assert_eq!(one_based(&s), vec![(1, Rule::L1), (3, Rule::Beta), (2, Rule::L1)]);
        check_component_schedule(&d, 1, &s).unwrap();
        let s = integration_schedule(&d, 0, true).unwrap();
        assert_eq!(one_based(&s), vec![(3, Rule::Beta), (2, Rule::L1), (1, Rule::L1)]);
        check_component_schedule(&d, 0, &s).unwrap();
        assert!(matches!(integration_schedule(&d, 0, false), Err(Error::Schedule(_))));
    }

    #[test]
    fn checker_rejects_bad_orders() {
        let t = Endofunction::from_one_based(&[2, 3, 2]).unwrap();
        let d = hairy_decompose(&t);
        let bad = vec![ScheduleStep::beta(1), ScheduleStep::l1(0), ScheduleStep::l1(2)];
        assert!(check_component_schedule(&d, 2, &bad).is_err());
    }
}
