//! Class responsibility assignment: Features with dependencies are to be
//! assigned to Classes. Every Class encapsulates at least one Feature and
//! every Feature is encapsulated by exactly one Class.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::evolution::Mutation;
use crate::graph::{
    parse_instance, parse_type_graph, problem_graph_of, CrossoverPoint, EdgeId, EdgeTypeId, InstanceGraph, NodeId,
    NodeTypeId, TypeGraph,
};
use crate::trace::DecisionTrace;

pub const FEATURE: NodeTypeId = NodeTypeId(0);
pub const CLASS: NodeTypeId = NodeTypeId(1);
pub const DEPENDS_ON: EdgeTypeId = EdgeTypeId(0);
pub const ENCAPSULATES: EdgeTypeId = EdgeTypeId(1);

pub const TYPE_GRAPH_FILE: &str = include_str!("../../../fixtures/cra.typegraph");
pub const FIG2_G_INSTANCE: &str = include_str!("../../../fixtures/fig2_g.instance");
pub const FIG2_H_INSTANCE: &str = include_str!("../../../fixtures/fig2_h.instance");
pub const FIG3_G1H2_INSTANCE: &str = include_str!("../../../fixtures/fig3_g1h2.instance");
pub const EXAMPLE4_TRACE: &str = include_str!("../../../fixtures/example4.trace");
pub const EXAMPLE2_TRACE: &str = include_str!("../../../fixtures/example2.trace");

pub fn type_graph() -> TypeGraph {
    parse_type_graph(TYPE_GRAPH_FILE).expect("shipped type graph parses")
}

/// The two worked-example parents, the desirable offspring, and the traces
/// that produce it.
#[derive(Debug, Clone)]
pub struct Fixtures {
    pub tg: TypeGraph,
    pub g: InstanceGraph,
    pub h: InstanceGraph,
    pub g1h2: InstanceGraph,
    pub secure_trace: DecisionTrace,
    pub generic_trace: DecisionTrace,
    pub f1: NodeId,
    pub f2: NodeId,
    pub f3: NodeId,
    pub c1: NodeId,
    pub c2: NodeId,
    pub c3: NodeId,
    pub c4: NodeId,
    /// Edge c1 -> f3 in G.
    pub c1_f3: EdgeId,
}

pub fn fixtures() -> Fixtures {
    let inst = |t: &str| parse_instance(t).expect("shipped instance parses").graph;
    Fixtures {
        tg: type_graph(),
        g: inst(FIG2_G_INSTANCE),
        h: inst(FIG2_H_INSTANCE),
        g1h2: inst(FIG3_G1H2_INSTANCE),
        secure_trace: DecisionTrace::parse(EXAMPLE4_TRACE).expect("shipped trace parses"),
        generic_trace: DecisionTrace::parse(EXAMPLE2_TRACE).expect("shipped trace parses"),
        f1: NodeId(1),
        f2: NodeId(2),
        f3: NodeId(3),
        c1: NodeId(10),
        c2: NodeId(20),
        c3: NodeId(21),
        c4: NodeId(22),
        c1_f3: EdgeId(12),
    }
}

/// The hand-built splits and crossover point of the generic worked example:
/// `(G1, G2, H1, H2, CP)`.
pub fn example2_split() -> (InstanceGraph, InstanceGraph, InstanceGraph, InstanceGraph, CrossoverPoint) {
    let fx = fixtures();
    let mut g1 = fx.g.clone();
    g1.remove_edge(fx.c1_f3);
    let g2 = fx.g.clone();
    let mut h1 = fx.h.clone();
    h1.remove_edge(EdgeId(22));
    let mut h2 = fx.h.clone();
    h2.remove_node(fx.c3);

    let mut cp = CrossoverPoint::identity(problem_graph_of(&fx.g, &fx.tg));
    cp.graph.add_node(fx.c1, CLASS).unwrap();
    cp.graph.add_edge(EdgeId(10), ENCAPSULATES, fx.c1, fx.f1).unwrap();
    cp.nodes_a.insert(fx.c1, fx.c1);
    cp.nodes_b.insert(fx.c1, fx.c2);
    cp.edges_a.insert(EdgeId(10), EdgeId(10));
    cp.edges_b.insert(EdgeId(10), EdgeId(20));
    (g1, g2, h1, h2, cp)
}

/// Classes of each Feature and Features of each Class.
fn assignment(g: &InstanceGraph) -> (BTreeMap<NodeId, Vec<NodeId>>, BTreeMap<NodeId, Vec<NodeId>>) {
    let mut owners: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut members: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (n, ty) in g.nodes() {
        if ty == FEATURE {
            owners.insert(n, Vec::new());
        } else if ty == CLASS {
            members.insert(n, Vec::new());
        }
    }
    for (_, e) in g.edges() {
        if e.ty == ENCAPSULATES {
            owners.entry(e.tar).or_default().push(e.src);
            members.entry(e.src).or_default().push(e.tar);
        }
    }
    (owners, members)
}

/// Substitute CRA fitness: the fraction of dependencies kept inside a Class
/// minus the fraction crossing Classes, with a penalty of one per
/// unassigned Feature. Higher is better.
pub fn cra_fitness(g: &InstanceGraph) -> f64 {
    let (owners, _) = assignment(g);
    let deps: Vec<_> = g.edges().filter(|(_, e)| e.ty == DEPENDS_ON).map(|(_, e)| *e).collect();
    let total = deps.len().max(1) as f64;
    let mut internal = 0usize;
    let mut crossing = 0usize;
    for e in &deps {
        let (a, b) = (&owners[&e.src], &owners[&e.tar]);
        if a.is_empty() || b.is_empty() {
            continue;
        }
        if a.iter().any(|c| b.contains(c)) {
            internal += 1;
        } else {
            crossing += 1;
        }
    }
    let unassigned = owners.values().filter(|o| o.is_empty()).count();
    (internal as f64 - crossing as f64) / total - unassigned as f64
}

/// Canonical form of a CRA solution: the Feature sets of its Classes.
pub fn partition(g: &InstanceGraph) -> BTreeSet<BTreeSet<NodeId>> {
    let (_, members) = assignment(g);
    members.into_values().map(|m| m.into_iter().collect()).collect()
}

/// Encapsulates edges whose Class owns at least one other Feature.
fn movable_edges(g: &InstanceGraph) -> Vec<(EdgeId, NodeId, NodeId)> {
    let (_, members) = assignment(g);
    g.edges()
        .filter(|(_, e)| e.ty == ENCAPSULATES && members[&e.src].len() >= 2)
        .map(|(id, e)| (id, e.src, e.tar))
        .collect()
}

/// Reassigns one Feature to another existing Class.
#[derive(Debug, Clone, Copy, Default)]
pub struct MoveFeature;

impl Mutation for MoveFeature {
    fn name(&self) -> &str {
        "moveFeature"
    }

    fn apply(&self, g: &mut InstanceGraph, rng: &mut dyn RngCore) -> bool {
        let (owners, _) = assignment(g);
        let classes: Vec<NodeId> = g.nodes().filter(|(_, t)| *t == CLASS).map(|(n, _)| n).collect();
        let options: Vec<(EdgeId, NodeId)> = movable_edges(g)
            .into_iter()
            .flat_map(|(e, _, f)| {
                let owned = &owners[&f];
                classes.iter().filter(|c| !owned.contains(c)).map(move |&c| (e, c))
            })
            .collect();
        let Some(&(e, c)) = options.choose(rng) else { return false };
        g.resource_edge(e, c).expect("class exists");
        true
    }
}

/// Moves one Feature into a fresh Class of its own.
#[derive(Debug, Clone, Copy, Default)]
pub struct CreateClassWithFeature;

impl Mutation for CreateClassWithFeature {
    fn name(&self) -> &str {
        "createClassWithFeature"
    }

    fn apply(&self, g: &mut InstanceGraph, rng: &mut dyn RngCore) -> bool {
        let options = movable_edges(g);
        let Some(&(e, _, _)) = options.choose(rng) else { return false };
        let c = g.fresh_node_id();
        g.add_node(c, CLASS).expect("fresh id");
        g.resource_edge(e, c).expect("class exists");
        true
    }
}

/// Removes one Class without Features.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeleteEmptyClass;

impl Mutation for DeleteEmptyClass {
    fn name(&self) -> &str {
        "deleteEmptyClass"
    }

    fn apply(&self, g: &mut InstanceGraph, rng: &mut dyn RngCore) -> bool {
        let (_, members) = assignment(g);
        let empty: Vec<NodeId> = members.iter().filter(|(_, m)| m.is_empty()).map(|(c, _)| *c).collect();
        let Some(&c) = empty.choose(rng) else { return false };
        g.remove_node(c);
        true
    }
}

pub fn cra_mutations() -> Vec<Box<dyn Mutation>> {
    vec![Box::new(MoveFeature), Box::new(CreateClassWithFeature), Box::new(DeleteEmptyClass)]
}

/// A problem instance with `features` Features (IDs `0..features`) and each
/// ordered pair of distinct Features depending on each other with
/// probability `p_dep`.
pub fn random_problem(features: usize, p_dep: f64, rng: &mut impl Rng) -> InstanceGraph {
    let mut g = InstanceGraph::new();
    for i in 0..features {
        g.add_node(NodeId(i as u32), FEATURE).unwrap();
    }
    let mut next = 0u32;
    for i in 0..features {
        for j in 0..features {
            if i != j && rng.gen_bool(p_dep) {
                g.add_edge(EdgeId(next), DEPENDS_ON, NodeId(i as u32), NodeId(j as u32)).unwrap();
                next += 1;
            }
        }
    }
    g
}

/// A feasible solution for `problem` with a uniformly drawn number of
/// Classes, each owning at least one Feature.
pub fn random_solution(problem: &InstanceGraph, rng: &mut impl Rng) -> InstanceGraph {
    let mut features: Vec<NodeId> = problem.nodes().filter(|(_, t)| *t == FEATURE).map(|(n, _)| n).collect();
    let mut g = problem.clone();
    if features.is_empty() {
        return g;
    }
    let k = rng.gen_range(1..=features.len());
    features.shuffle(rng);
    let first_class = g.fresh_node_id().0;
    let classes: Vec<NodeId> = (0..k as u32).map(|i| NodeId(first_class + i)).collect();
    for &c in &classes {
        g.add_node(c, CLASS).unwrap();
    }
    let mut owner: Vec<(NodeId, NodeId)> = Vec::new();
    for (i, &f) in features.iter().enumerate() {
        let c = if i < k { classes[i] } else { classes[rng.gen_range(0..k)] };
        owner.push((f, c));
    }
    owner.sort();
    for (f, c) in owner {
        let id = g.fresh_edge_id();
        g.add_edge(id, ENCAPSULATES, c, f).unwrap();
    }
    g
}

/// Parents and forced decisions from which secure crossover rebuilds the
/// target solution `o`.
#[derive(Debug, Clone)]
pub struct CoverageCase {
    pub g: InstanceGraph,
    pub h: InstanceGraph,
    pub trace: DecisionTrace,
}

/// Splits the Classes of `o` into a part kept from `g` and the rest taken
/// from `h`. `g` holds the kept Classes plus one Class owning every other
/// Feature; `h` holds the remaining Classes plus one Class owning the
/// Features of the kept ones. The trace declines `h`'s extra Class, merges
/// one remaining Class into `g`'s extra Class and moves every other
/// remaining Class in by edge swaps, so the offspring is `o` up to renaming.
pub fn coverage_case(o: &InstanceGraph, rng: &mut impl Rng) -> CoverageCase {
    let (_, members) = assignment(o);
    let pip = problem_graph_of(o, &type_graph());
    let classes: Vec<NodeId> = members.keys().copied().collect();
    let kept: BTreeSet<NodeId> = classes.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let rest: Vec<NodeId> = classes.iter().copied().filter(|c| !kept.contains(c)).collect();
    let merged_away = rest.choose(rng).copied();
    let rest_features: BTreeSet<NodeId> = rest.iter().flat_map(|c| members[c].iter().copied()).collect();
    let kept_features: BTreeSet<NodeId> = kept.iter().flat_map(|c| members[c].iter().copied()).collect();

    let mut g = pip.clone();
    for c in &kept {
        g.add_node(*c, CLASS).unwrap();
        for &f in &members[c] {
            let e = g.fresh_edge_id();
            g.add_edge(e, ENCAPSULATES, *c, f).unwrap();
        }
    }
    if !rest_features.is_empty() {
        let m = g.fresh_node_id();
        g.add_node(m, CLASS).unwrap();
        for &f in &rest_features {
            let e = g.fresh_edge_id();
            g.add_edge(e, ENCAPSULATES, m, f).unwrap();
        }
    }

    let mut h = pip;
    let mut trace = DecisionTrace::new();
    for c in &rest {
        h.add_node(*c, CLASS).unwrap();
        let merged = Some(*c) == merged_away;
        for &f in &members[c] {
            let e = h.fresh_edge_id();
            h.add_edge(e, ENCAPSULATES, *c, f).unwrap();
            trace.push(format!("cp.node:{}", e.0), 1);
            trace.push(format!("cp.edge:{}", e.0), 1);
            trace.push(format!("cp.swap:{}", e.0), !merged as u64);
            trace.push(format!("cp.node_to_cp:{}", e.0), 0);
        }
        if !merged {
            trace.push(format!("free.to_cp:{}", c.0), 0);
        }
    }
    if !kept_features.is_empty() {
        let m = h.fresh_node_id();
        h.add_node(m, CLASS).unwrap();
        for &f in &kept_features {
            let e = h.fresh_edge_id();
            h.add_edge(e, ENCAPSULATES, m, f).unwrap();
            trace.push(format!("cp.node:{}", e.0), 0);
        }
    }
    CoverageCase { g, h, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_multiplicities, same_search_space};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_class(features: usize, deps: &[(u32, u32)]) -> InstanceGraph {
        let mut g = InstanceGraph::new();
        for i in 0..features as u32 {
            g.add_node(NodeId(i), FEATURE).unwrap();
        }
        for (k, &(a, b)) in deps.iter().enumerate() {
            g.add_edge(EdgeId(k as u32), DEPENDS_ON, NodeId(a), NodeId(b)).unwrap();
        }
        g
    }

    #[test]
    fn fitness_one_class_is_one() {
        let mut g = one_class(3, &[(0, 1), (1, 2)]);
        g.add_node(NodeId(9), CLASS).unwrap();
        for i in 0..3 {
            g.add_edge(EdgeId(10 + i), ENCAPSULATES, NodeId(9), NodeId(i)).unwrap();
        }
        assert_eq!(cra_fitness(&g), 1.0);
    }

    #[test]
    fn fitness_singleton_classes_is_minus_one() {
        let mut g = one_class(3, &[(0, 1), (1, 2), (2, 0)]);
        for i in 0..3 {
            g.add_node(NodeId(10 + i), CLASS).unwrap();
            g.add_edge(EdgeId(10 + i), ENCAPSULATES, NodeId(10 + i), NodeId(i)).unwrap();
        }
        // direct evaluation: cohesion 0/3, coupling 3/3
        assert_eq!(cra_fitness(&g), 0.0 / 3.0 - 3.0 / 3.0);
    }

    #[test]
    fn fitness_without_dependencies_is_zero() {
        let mut g = one_class(2, &[]);
        g.add_node(NodeId(9), CLASS).unwrap();
        g.add_edge(EdgeId(1), ENCAPSULATES, NodeId(9), NodeId(0)).unwrap();
        g.add_edge(EdgeId(2), ENCAPSULATES, NodeId(9), NodeId(1)).unwrap();
        assert_eq!(cra_fitness(&g), 0.0);
    }

    #[test]
    fn fitness_penalizes_unassigned_features() {
        let g = one_class(2, &[(0, 1)]);
        assert_eq!(cra_fitness(&g), -2.0);
    }

    #[test]
    fn fitness_ignores_relabeling() {
        let fx = fixtures();
        assert_eq!(cra_fitness(&fx.g), 1.0);
        let mut relabeled = problem_graph_of(&fx.g, &fx.tg);
        relabeled.add_node(NodeId(500), CLASS).unwrap();
        for (i, f) in [fx.f1, fx.f2, fx.f3].into_iter().enumerate() {
            relabeled.add_edge(EdgeId(900 - i as u32), ENCAPSULATES, NodeId(500), f).unwrap();
        }
        assert_eq!(cra_fitness(&relabeled), cra_fitness(&fx.g));
    }

    #[test]
    fn fresh_class_for_f3_gives_g1h2_pattern() {
        let fx = fixtures();
        // only edge 12 is movable away from a multi-Feature class alone when
        // forced; try seeds until f3 is the one moved
        for seed in 0..64 {
            let mut g = fx.g.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert!(CreateClassWithFeature.apply(&mut g, &mut rng));
            if g.edge(fx.c1_f3).unwrap().src != fx.c1 {
                assert_eq!(partition(&g), partition(&fx.g1h2));
                return;
            }
        }
        panic!("f3 never moved");
    }

    #[test]
    fn coverage_case_rebuilds_target() {
        use crate::graph::isomorphic_over_problem;
        use crate::secure::{secure_crossover, SecureConfig};
        let tg = type_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..100u64 {
            let p = random_problem(rng.gen_range(1..=6), 0.3, &mut rng);
            let o = random_solution(&p, &mut rng);
            let case = coverage_case(&o, &mut rng);
            assert!(check_multiplicities(&case.g, &tg).unwrap().is_empty());
            assert!(check_multiplicities(&case.h, &tg).unwrap().is_empty());
            let d = crate::Decider::forced(&case.trace, i);
            let out = secure_crossover(&case.g, &case.h, &tg, &SecureConfig::default(), d).unwrap();
            assert!(
                isomorphic_over_problem(&out.offspring, &o, &tg),
                "case {i}: {:?} vs {:?}",
                partition(&out.offspring),
                partition(&o)
            );
        }
    }

    #[test]
    fn delete_empty_class_is_noop_on_feasible() {
        let fx = fixtures();
        let mut g = fx.g.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(!DeleteEmptyClass.apply(&mut g, &mut rng));
        assert_eq!(g, fx.g);
    }

    #[test]
    fn mutations_preserve_feasibility_and_problem() {
        let tg = type_graph();
        let muts = cra_mutations();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut applied = 0;
        for round in 0..100 {
            let problem = random_problem(2 + round % 9, 0.2, &mut rng);
            let mut g = random_solution(&problem, &mut rng);
            for _ in 0..10 {
                let m = &muts[rng.gen_range(0..muts.len())];
                let before = g.clone();
                m.apply(&mut g, &mut rng);
                applied += 1;
                assert!(same_search_space(&before, &g, &tg), "{} changed the problem", m.name());
                assert!(check_multiplicities(&g, &tg).unwrap().is_empty(), "{} broke feasibility", m.name());
            }
        }
        assert_eq!(applied, 1000);
    }

    #[test]
    fn random_solutions_are_feasible() {
        let tg = type_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..15 {
            let p = random_problem(n, 0.3, &mut rng);
            let s = random_solution(&p, &mut rng);
            assert!(check_multiplicities(&s, &tg).unwrap().is_empty());
            assert!(same_search_space(&p, &s, &tg));
        }
    }
}
