//! Derives the proximity thresholds from pooled pair distances.
//!
//! "Were these two devices within X metres?" needs concrete values of X.
//! Rather than hand-picking them, the pipeline pools every simultaneous
//! pair distance below an elbow, floors the distances to whole metres with
//! multiplicity as weights, and runs an exact dynamic-programming weighted
//! k-means over the 1-D values. Cluster boundaries (midpoints between
//! adjacent cluster edges) become the thresholds, and the last threshold is
//! pinned to the elbow so the widest indicator always matches the pooling
//! rule.

use std::error::Error;

use copresence::dyads::pooled_distances;
use copresence::ingest::build_grid;
use copresence::synth::{generate, SynthConfig};
use copresence::thresholds::{cluster_1d, eccdf};

fn main() -> Result<(), Box<dyn Error>> {
    let config = SynthConfig {
        n_nodes: 20,
        house_residents: 5,
        days: 14,
        seed: 9,
        ..SynthConfig::default()
    };
    let data = generate(&config)?;
    let grids = build_grid(&data.locations, &data.wifi, &data.study);

    let elbow = data.study.distance_elbow_m;
    let pooled = pooled_distances(&grids, elbow);
    let total_weight: f64 = pooled.iter().map(|s| s.weight).sum();
    println!(
        "pooled {} distinct metre values (weight {}) below the {} m elbow",
        pooled.len(),
        total_weight,
        elbow
    );

    // The empirical CCDF shows how concentrated co-presence is: most
    // simultaneous observations of a pair happen either very close (same
    // room/building) or not meaningfully close at all.
    let curve = eccdf(&pooled)?;
    println!();
    println!("fraction of pair observations beyond x metres:");
    for target in [10.0, 50.0, 100.0, 250.0, 500.0, 1000.0] {
        let survival = curve
            .points
            .iter()
            .take_while(|&&(v, _)| v <= target)
            .last()
            .map(|&(_, s)| s)
            .unwrap_or(1.0);
        println!("  > {target:>6.0} m  {survival:.4}");
    }

    let set = cluster_1d(&pooled, 10, elbow)?;
    println!();
    println!("fitted proximity thresholds (m): {:?}", set.thresholds_m);
    println!();
    println!("each threshold becomes one binary series per dyad:");
    for (i, t) in set.thresholds_m.iter().enumerate().take(3) {
        println!("  within_t{}: both devices observed and closer than {t} m", i + 1);
    }
    println!("  ... and so on up to within_t{}", set.thresholds_m.len());
    Ok(())
}
