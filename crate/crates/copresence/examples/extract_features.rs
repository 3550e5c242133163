//! Extracts the full dyadic feature matrix and explains its layout.
//!
//! Every dyad-and-period row crosses each per-bin series with seven local-
//! time frames (all, weekday, weekend, night, morning, afternoon, evening)
//! and a fixed stat block: nine statistics for the continuous distance
//! series (mean/median/SD over the raw, log, and inverse-squared scales)
//! and twenty-five for each binary series (counts, proportions, missingness,
//! transitions, and the full span/gap run-length suite). With ten proximity
//! thresholds and WiFi enabled the grand total is 2,513 columns; dropping
//! the two WiFi series removes exactly 350.

use std::collections::BTreeSet;
use std::error::Error;

use copresence::dyads::{eligible_dyads, pooled_distances};
use copresence::features::extract_matrix;
use copresence::ingest::build_grid;
use copresence::synth::{generate, SynthConfig};
use copresence::thresholds::cluster_1d;

fn main() -> Result<(), Box<dyn Error>> {
    let config = SynthConfig {
        n_nodes: 10,
        house_residents: 3,
        days: 14,
        seed: 17,
        ..SynthConfig::default()
    };
    let data = generate(&config)?;
    let grids = build_grid(&data.locations, &data.wifi, &data.study);
    let pooled = pooled_distances(&grids, data.study.distance_elbow_m);
    let thresholds = cluster_1d(&pooled, 10, data.study.distance_elbow_m)?;
    let nodes: BTreeSet<String> = data.truth.nodes.iter().cloned().collect();
    let (dyads, eligibility) = eligible_dyads(&grids, &nodes);

    println!(
        "{} of {} potential dyads have overlapping coverage",
        eligibility.eligible, eligibility.potential
    );

    let with_wifi = extract_matrix(&grids, &dyads, &thresholds, &data.study, true)?;
    let without_wifi = extract_matrix(&grids, &dyads, &thresholds, &data.study, false)?;
    println!(
        "matrix: {} rows ({} dyads x 2 periods), {} columns with WiFi, {} without",
        with_wifi.rows.len(),
        dyads.len(),
        with_wifi.schema.width(),
        without_wifi.schema.width()
    );
    println!("schema hash: {}", &with_wifi.schema.hash()[..16]);
    println!();

    // Column names are `{series}_{timeframe}_{stat}`, ordered series-major,
    // so each series occupies one contiguous block of 7 x stats columns.
    println!("first columns: {:?}", &with_wifi.schema.columns[..4]);
    let wifi_start = without_wifi.schema.width();
    println!("first WiFi column (index {wifi_start}): {:?}", with_wifi.schema.columns[wifi_start]);
    println!();

    // Show one row's headline numbers.
    let row = &with_wifi.rows[0];
    let col = |name: &str| {
        let idx = with_wifi
            .schema
            .columns
            .iter()
            .position(|c| c == name)
            .expect("column exists");
        row.values[idx]
    };
    println!(
        "example row: dyad {} - {}, period {}",
        row.dyad.a,
        row.dyad.b,
        row.period.label()
    );
    for name in [
        "distance_all_mean",
        "distance_night_mean",
        "within_t1_all_ones_prop",
        "within_t1_all_span_max",
        "common_wifi_all_ones",
    ] {
        println!("  {name:<28} {:>12.3}", col(name));
    }
    Ok(())
}
