//! Stability-filtered correlation-based feature selection.
//!
//! With 2,513 candidate columns and a few hundred rows, a single selection
//! run is noisy: tiny label perturbations swap which of several correlated
//! columns gets picked. The stability filter therefore splits the rows into
//! ten folds, runs correlation-based best-first selection on each
//! leave-one-fold-out complement, and keeps only the columns chosen in at
//! least nine of the ten runs. What survives is a short, interpretable list
//! of behavioural signatures.

use std::collections::BTreeSet;
use std::error::Error;

use copresence::dyads::{eligible_dyads, pooled_distances};
use copresence::features::extract_matrix;
use copresence::ingest::build_grid;
use copresence::learn::{assemble, cfs};
use copresence::networks::{build_label_table, build_networks, Target};
use copresence::substream;
use copresence::synth::{generate, SynthConfig};
use copresence::thresholds::cluster_1d;

fn main() -> Result<(), Box<dyn Error>> {
    let seed = 13;
    let synth = SynthConfig {
        n_nodes: 14,
        house_residents: 4,
        days: 14,
        co_location_lift: 0.8,
        seed,
        ..SynthConfig::default()
    };
    let data = generate(&synth)?;
    let grids = build_grid(&data.locations, &data.wifi, &data.study);
    let pooled = pooled_distances(&grids, data.study.distance_elbow_m);
    let thresholds = cluster_1d(&pooled, 10, data.study.distance_elbow_m)?;
    let nodes: BTreeSet<String> = data.truth.nodes.iter().cloned().collect();
    let (dyads, _) = eligible_dyads(&grids, &nodes);
    let matrix = extract_matrix(&grids, &dyads, &thresholds, &data.study, true)?;

    let networks = build_networks(&data.ties);
    let available: BTreeSet<_> = matrix.rows.iter().map(|r| (r.dyad.clone(), r.period)).collect();
    let table = build_label_table(Target::Friend, &networks, &available)?;
    let ds = assemble(&matrix, &table)?;
    println!(
        "selecting from {} columns on {} rows ({} positive)",
        ds.width,
        ds.x.len(),
        table.positives()
    );

    let candidates: Vec<usize> = (0..ds.width).collect();
    let mut rng = substream(seed, "select-demo");
    let result = cfs::stability_select(&ds.x, &ds.y, &candidates, 10, 9, 5, &mut rng)?;

    println!();
    println!("columns picked in >= 9 of 10 leave-one-fold-out runs:");
    for &idx in &result.selected {
        println!(
            "  {:<40} picked {}x",
            matrix.schema.columns[idx], result.counts[&idx]
        );
    }
    println!();
    println!(
        "{} columns were picked at least once but failed the stability bar",
        result.counts.len() - result.selected.len()
    );
    Ok(())
}
