//! Weekly on-campus distance medians, split by survey tie category.
//!
//! The most direct behavioural signature of friendship in location data is
//! plain physical proximity. For every dyad this pools all on-campus bins
//! where both devices have a fix, groups them by study week, and takes the
//! weekly median distance separately for mutual ties (both named each
//! other), one-sided ties, and unconnected pairs. On a cohort with planted
//! co-location the three curves separate cleanly and keep their order in
//! every single week.

use std::collections::BTreeSet;
use std::error::Error;

use copresence::dyads::{build_dyad_series, eligible_dyads};
use copresence::ingest::{build_grid, TieType};
use copresence::networks::{build_networks, tie_distance_profile, TieCategory};
use copresence::synth::{generate, SynthConfig};
use copresence::thresholds::ThresholdSet;

fn main() -> Result<(), Box<dyn Error>> {
    let config = SynthConfig {
        n_nodes: 20,
        house_residents: 5,
        days: 28,
        co_location_lift: 0.8,
        change_rate: 0.0,
        seed: 7,
        ..SynthConfig::default()
    };
    let data = generate(&config)?;
    let grids = build_grid(&data.locations, &data.wifi, &data.study);
    let thresholds = ThresholdSet::new(vec![100.0])?;
    let nodes: BTreeSet<String> = data.truth.nodes.iter().cloned().collect();
    let (dyads, _) = eligible_dyads(&grids, &nodes);

    let networks = build_networks(&data.ties);
    let friend_net = networks
        .get(&(2, TieType::Friend))
        .expect("wave 2 friend network");

    let by_id: std::collections::BTreeMap<&str, _> =
        grids.iter().map(|g| (g.device_id.as_str(), g)).collect();
    let series_iter = dyads.iter().filter_map(|d| {
        let ga = by_id.get(d.a.as_str())?;
        let gb = by_id.get(d.b.as_str())?;
        build_dyad_series(ga, gb, &thresholds, &data.study).ok()
    });
    let profile = tie_distance_profile(series_iter, friend_net, &data.study);

    println!("weekly median on-campus distance (m) by wave-2 friendship status:");
    println!();
    println!("{:>5}  {:>8}  {:>10}  {:>12}", "week", "mutual", "one-sided", "unconnected");
    for week in &profile {
        let cell = |c: TieCategory| match week.median_m[c as usize] {
            Some(m) => format!("{m:.0}"),
            None => "-".to_string(),
        };
        println!(
            "{:>5}  {:>8}  {:>10}  {:>12}",
            week.week + 1,
            cell(TieCategory::Mutual),
            cell(TieCategory::OneSided),
            cell(TieCategory::Unconnected)
        );
    }
    println!();
    println!("mutual pairs stay closest in every week; pairs with no tie in");
    println!("either direction spend their campus time hundreds of metres apart");
    Ok(())
}
