//! Builds each graph family and prints its structural summary, then writes the
//! 3-dimensional torus of side 3 as an edge list.

use loopcover::graph::{
    build_complete, build_cycle, build_cycle_with_chords, build_torus, build_tree_ball, random_connected,
    structural_report,
};
use loopcover::rng::replicate_rng;

fn main() -> loopcover::Result<()> {
    let graphs = [
        ("cycle(12)", build_cycle(12)?),
        ("complete(6)", build_complete(6)?),
        ("torus(2, 5)", build_torus(2, 5)?),
        ("tree_ball(3, 4)", build_tree_ball(3, 4)?),
        ("cycle_with_chords(8)", build_cycle_with_chords(8)?),
        ("random(10)", random_connected(10, 0.2, (0.5, 2.0), &mut replicate_rng(1, 0))?),
    ];
    for (name, g) in &graphs {
        let r = structural_report(g);
        println!(
            "{name:22} m={:3} edges={:3} connected={} bipartite={} degrees {}..{}",
            g.vertex_count(),
            g.edge_count(),
            r.connected,
            r.bipartite,
            r.bounds.min_degree,
            r.bounds.max_degree
        );
    }
    print!("{}", build_torus(3, 3)?.to_edge_list());
    Ok(())
}
