//! Shortest paths in a discretized horocyclic product against the closed
//! form millefeuille distance.

use millefeuille::heintze::{level_metric, ExpandingStructure};
use millefeuille::madic::MAdicPoint;
use millefeuille::mille::{mille_distance, MillePoint};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DEPTH: i64 = 6;
const GRID: usize = 64;
const STEP: f64 = 0.125;

struct Model {
    graph: UnGraph<(), f64>,
    offsets: Vec<usize>,
}

impl Model {
    // Height h carries 2^(DEPTH - h) balls times GRID positions.
    fn build() -> Self {
        let mut graph = UnGraph::new_undirected();
        let mut offsets = Vec::new();
        for h in 0..=DEPTH {
            offsets.push(graph.node_count());
            for _ in 0..(1usize << (DEPTH - h)) * GRID {
                graph.add_node(());
            }
        }
        let mut model = Self { graph, offsets };
        for h in 0..=DEPTH {
            let horizontal = (-(h as f64)).exp() * STEP;
            for ball in 0..(1usize << (DEPTH - h)) {
                for k in 0..GRID {
                    let here = model.node(h, ball, k);
                    if k + 1 < GRID {
                        let right = model.node(h, ball, k + 1);
                        model.graph.add_edge(here, right, horizontal);
                    }
                    if h < DEPTH {
                        let up = model.node(h + 1, ball >> 1, k);
                        model.graph.add_edge(here, up, 1.0);
                    }
                }
            }
        }
        model
    }

    fn node(&self, h: i64, ball: usize, k: usize) -> NodeIndex {
        NodeIndex::new(self.offsets[h as usize] + ball * GRID + k)
    }
}

// Ball id at height h of the point with binary digits `bits` at heights 0..DEPTH.
fn ball_id(bits: usize, h: i64) -> usize {
    bits >> h
}

fn to_madic(bits: usize) -> MAdicPoint {
    MAdicPoint::new(2, (0..DEPTH).map(|h| (h, ((bits >> h) & 1) as u32))).unwrap()
}

#[test]
fn horizontal_edges_follow_the_level_metric() {
    let e = ExpandingStructure::diagonal(&[(1.0, 1)]).unwrap();
    for h in 0..=DEPTH {
        let d = level_metric(&e, h as f64, &[0.0], &[STEP]).unwrap();
        assert!((d - (-(h as f64)).exp() * STEP).abs() < 1e-15);
    }
}

#[test]
fn closed_form_matches_graph_shortest_paths() {
    let e = ExpandingStructure::diagonal(&[(1.0, 1)]).unwrap();
    let model = Model::build();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let (bp, bq) = (rng.gen_range(0..1usize << DEPTH), rng.gen_range(0..1usize << DEPTH));
        let (kp, kq) = (rng.gen_range(0..GRID), rng.gen_range(0..GRID));
        let (sp, sq) = (rng.gen_range(0..=DEPTH), rng.gen_range(0..=DEPTH));
        let source = model.node(sp, ball_id(bp, sp), kp);
        let target = model.node(sq, ball_id(bq, sq), kq);
        let graph = *dijkstra(&model.graph, source, Some(target), |e| *e.weight())
            .get(&target)
            .unwrap();
        let p = MillePoint::new(vec![kp as f64 * STEP], to_madic(bp), sp as f64);
        let q = MillePoint::new(vec![kq as f64 * STEP], to_madic(bq), sq as f64);
        let formula = mille_distance(&e, 2, &p, &q).unwrap();
        // the graph only turns at integer heights, so it can only be longer
        assert!(graph >= formula - 1e-9, "graph {graph} below formula {formula}");
        assert!(graph <= formula + 2.0, "graph {graph} vs formula {formula}");
        worst = worst.max(graph - formula);
    }
    assert!(worst > 0.0);
}
