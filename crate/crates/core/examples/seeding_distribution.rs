//! Empirical second-head law of D^2 seeding on four collinear nodes.
//!
//! With the first head at x = 0, the others sit at squared distances
//! 1, 4 and 100, so they should be drawn 1:4:100.

use kmax_wsn::clustering::{seed_heads, QualityContext};
use kmax_wsn::rng::stream;
use kmax_wsn::{NodeKind, Position, SensorNode, WeightMode};

fn main() -> kmax_wsn::Result<()> {
    let alive: Vec<SensorNode> = [0.0, 1.0, 2.0, 10.0]
        .into_iter()
        .enumerate()
        .map(|(i, x)| SensorNode::new(i + 1, Position::new(x, 0.0), NodeKind::Normal, 0.5))
        .collect();
    let ctx = QualityContext::cold_start(&alive, 0.5, 16.0);
    let mut rng = stream(1, "seeding-demo");

    let mut counts = [0u32; 3];
    let mut trials = 0u32;
    while trials < 50_000 {
        let heads = seed_heads(&alive, 2, WeightMode::PlainD2, &ctx, &mut rng)?;
        if heads[0] == 1 {
            counts[heads[1] - 2] += 1;
            trials += 1;
        }
    }
    for (i, (c, expect)) in counts.iter().zip([1.0, 4.0, 100.0]).enumerate() {
        println!(
            "x = {:>4}: {:.4} observed, {:.4} expected",
            alive[i + 1].pos.x,
            *c as f64 / trials as f64,
            expect / 105.0
        );
    }
    Ok(())
}
