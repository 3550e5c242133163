//! Survey tie networks and the label tables built from them.
//!
//! A network is one (wave, tie type) slice of the survey: directed edges
//! from respondents to the people they named. Non-response matters: an
//! absent edge from a respondent is a reported "no", while anything about a
//! non-respondent ego is unknown and never becomes a label row.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::{Period, StudyConfig};
use crate::dyads::{Dyad, DyadSeries};
use crate::error::{Error, Result};
use crate::ingest::{SurveyTie, TieType};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieNetwork {
    pub wave: u8,
    pub tie_type: TieType,
    /// Everyone seen anywhere in the survey file.
    pub nodes: BTreeSet<String>,
    /// Egos with at least one answer row for this wave and tie type.
    pub respondents: BTreeSet<String>,
    /// Directed (ego, alter) pairs the ego reported as present.
    pub edges: BTreeSet<(String, String)>,
}

impl TieNetwork {
    /// True/false when the ego answered this wave, None otherwise.
    pub fn directed_value(&self, ego: &str, alter: &str) -> Option<bool> {
        if !self.respondents.contains(ego) {
            return None;
        }
        Some(self.edges.contains(&(ego.to_string(), alter.to_string())))
    }

    pub fn is_mutual(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&(a.to_string(), b.to_string()))
            && self.edges.contains(&(b.to_string(), a.to_string()))
    }

    /// Fraction of directed edges whose reverse edge also exists.
    pub fn reciprocity(&self) -> f64 {
        if self.edges.is_empty() {
            return f64::NAN;
        }
        let mutual = self
            .edges
            .iter()
            .filter(|(a, b)| self.edges.contains(&(b.clone(), a.clone())))
            .count();
        mutual as f64 / self.edges.len() as f64
    }
}

/// Split the survey rows into one network per (wave, tie type).
pub fn build_networks(ties: &[SurveyTie]) -> BTreeMap<(u8, TieType), TieNetwork> {
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    for t in ties {
        nodes.insert(t.ego.clone());
        nodes.insert(t.alter.clone());
    }
    let mut networks: BTreeMap<(u8, TieType), TieNetwork> = BTreeMap::new();
    for t in ties {
        let net = networks.entry((t.wave, t.tie_type)).or_insert_with(|| TieNetwork {
            wave: t.wave,
            tie_type: t.tie_type,
            nodes: nodes.clone(),
            respondents: BTreeSet::new(),
            edges: BTreeSet::new(),
        });
        net.respondents.insert(t.ego.clone());
        if t.value {
            net.edges.insert((t.ego.clone(), t.alter.clone()));
        }
    }
    // The roster is global, so late-inserted nodes must reach every network.
    for net in networks.values_mut() {
        net.nodes = nodes.clone();
    }
    networks
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    /// Shared directed ties over twice the number of unordered pairs among
    /// common respondents. Insensitive to agreement on absent ties and
    /// bounded by the density of the denser network.
    PairNormalized,
    /// Plain Jaccard of the directed edge sets restricted to common
    /// respondents: shared ties over ties present in either network.
    Jaccard,
}

/// Similarity of two directed networks, restricted to egos who responded in
/// both. Returns NaN when fewer than two common respondents exist.
pub fn network_similarity(a: &TieNetwork, b: &TieNetwork, mode: SimilarityMode) -> f64 {
    let common: BTreeSet<&String> = a.respondents.intersection(&b.respondents).collect();
    let n = common.len();
    if n < 2 {
        return f64::NAN;
    }
    let in_scope = |edge: &(String, String)| common.contains(&edge.0) && common.contains(&edge.1);
    let ea: BTreeSet<&(String, String)> = a.edges.iter().filter(|e| in_scope(e)).collect();
    let eb: BTreeSet<&(String, String)> = b.edges.iter().filter(|e| in_scope(e)).collect();
    let shared = ea.intersection(&eb).count() as f64;
    match mode {
        SimilarityMode::PairNormalized => {
            let pairs = (n * (n - 1)) as f64; // 2 * C(n, 2)
            shared / pairs
        }
        SimilarityMode::Jaccard => {
            let union = ea.union(&eb).count();
            if union == 0 {
                return f64::NAN;
            }
            shared / union as f64
        }
    }
}

/// What a classifier is asked to predict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Ego names alter as a friend at the wave closing the feature period.
    Friend,
    /// Among reported friends: ego names alter as a close friend.
    CloseFriend,
    /// Ego's friend report about alter differs between the waves bounding
    /// the feature period.
    Change,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Friend, Target::CloseFriend, Target::Change];

    pub fn label(&self) -> &'static str {
        match self {
            Target::Friend => "friend",
            Target::CloseFriend => "close",
            Target::Change => "change",
        }
    }

    pub fn parse(s: &str) -> Result<Target> {
        match s {
            "friend" => Ok(Target::Friend),
            "close" => Ok(Target::CloseFriend),
            "change" => Ok(Target::Change),
            other => Err(Error::contract(format!("unknown target {other:?}"))),
        }
    }
}

/// One directed labelled observation. `wave` is the wave that resolves the
/// label: the closing wave for tie targets, the later wave for change.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelRow {
    pub ego: String,
    pub alter: String,
    pub dyad: Dyad,
    pub period: Period,
    pub wave: u8,
    pub label: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelTable {
    pub target: Target,
    pub rows: Vec<LabelRow>,
}

impl LabelTable {
    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label).count()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "target,wave,period,ego,alter,dyad_a,dyad_b,label")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.target.label(),
                r.wave,
                r.period.label(),
                r.ego,
                r.alter,
                r.dyad.a,
                r.dyad.b,
                r.label as u8
            )?;
        }
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<LabelTable> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::contract(format!("label csv: {e}")))?
            .ok_or_else(|| Error::contract("label csv: empty file"))?;
        if header != "target,wave,period,ego,alter,dyad_a,dyad_b,label" {
            return Err(Error::contract("label csv: unexpected header"));
        }
        let mut target: Option<Target> = None;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::contract(format!("label csv line {}: {e}", i + 2)))?;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::contract(format!("label csv line {}: expected 8 fields", i + 2)));
            }
            let t = Target::parse(f[0])?;
            match target {
                None => target = Some(t),
                Some(prev) if prev != t => {
                    return Err(Error::contract(format!("label csv line {}: mixed targets", i + 2)))
                }
                _ => {}
            }
            let wave: u8 = f[1]
                .parse()
                .map_err(|_| Error::contract(format!("label csv line {}: bad wave", i + 2)))?;
            let label = match f[7] {
                "0" => false,
                "1" => true,
                _ => return Err(Error::contract(format!("label csv line {}: bad label", i + 2))),
            };
            rows.push(LabelRow {
                ego: f[3].to_string(),
                alter: f[4].to_string(),
                dyad: Dyad::new(f[5], f[6])?,
                period: Period::parse(f[2])?,
                wave,
                label,
            });
        }
        let target = target.ok_or_else(|| Error::contract("label csv: no rows"))?;
        Ok(LabelTable { target, rows })
    }
}

/// Build the label table for a target from the survey networks, keeping
/// only rows whose (dyad, period) has a feature row. Rows are directed:
/// both orientations of a pair appear when both egos responded, and they
/// share the canonical dyad's features.
pub fn build_label_table(
    target: Target,
    networks: &BTreeMap<(u8, TieType), TieNetwork>,
    available: &BTreeSet<(Dyad, Period)>,
) -> Result<LabelTable> {
    let need = |wave: u8, tie: TieType| -> Result<&TieNetwork> {
        networks
            .get(&(wave, tie))
            .ok_or_else(|| Error::contract(format!("survey has no wave {wave} {} rows", tie.label())))
    };
    let mut rows = Vec::new();
    match target {
        Target::Friend | Target::CloseFriend => {
            for period in Period::ALL {
                let wave = period.closing_wave();
                let friend = need(wave, TieType::Friend)?;
                let close = if target == Target::CloseFriend {
                    Some(need(wave, TieType::CloseFriend)?)
                } else {
                    None
                };
                for ego in &friend.respondents {
                    for alter in &friend.nodes {
                        if ego == alter {
                            continue;
                        }
                        let dyad = Dyad::new(ego, alter)?;
                        if !available.contains(&(dyad.clone(), period)) {
                            continue;
                        }
                        let is_friend = friend
                            .directed_value(ego, alter)
                            .expect("ego is a respondent");
                        let label = match close {
                            None => is_friend,
                            Some(close) => {
                                // Close friendship is only asked about friends.
                                if !is_friend {
                                    continue;
                                }
                                match close.directed_value(ego, alter) {
                                    Some(v) => v,
                                    None => continue,
                                }
                            }
                        };
                        rows.push(LabelRow {
                            ego: ego.clone(),
                            alter: alter.clone(),
                            dyad,
                            period,
                            wave,
                            label,
                        });
                    }
                }
            }
        }
        Target::Change => {
            for period in Period::ALL {
                let (w_from, w_to) = match period {
                    Period::P1 => (1, 2),
                    Period::P2 => (2, 3),
                };
                let from = need(w_from, TieType::Friend)?;
                let to = need(w_to, TieType::Friend)?;
                for ego in from.respondents.intersection(&to.respondents) {
                    for alter in &from.nodes {
                        if ego == alter {
                            continue;
                        }
                        let dyad = Dyad::new(ego, alter)?;
                        if !available.contains(&(dyad.clone(), period)) {
                            continue;
                        }
                        let before = from.directed_value(ego, alter).expect("respondent");
                        let after = to.directed_value(ego, alter).expect("respondent");
                        rows.push(LabelRow {
                            ego: ego.clone(),
                            alter: alter.clone(),
                            dyad,
                            period,
                            wave: w_to,
                            label: before != after,
                        });
                    }
                }
            }
        }
    }
    rows.sort_by(|x, y| {
        (&x.dyad, x.period, &x.ego)
            .cmp(&(&y.dyad, y.period, &y.ego))
    });
    Ok(LabelTable { target, rows })
}

/// How a pair relates in a directed friendship network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieCategory {
    Mutual,
    OneSided,
    Unconnected,
}

impl TieCategory {
    pub const ALL: [TieCategory; 3] = [TieCategory::Mutual, TieCategory::OneSided, TieCategory::Unconnected];

    pub fn label(&self) -> &'static str {
        match self {
            TieCategory::Mutual => "mutual",
            TieCategory::OneSided => "one_sided",
            TieCategory::Unconnected => "unconnected",
        }
    }

    pub fn of(net: &TieNetwork, a: &str, b: &str) -> TieCategory {
        let ab = net.edges.contains(&(a.to_string(), b.to_string()));
        let ba = net.edges.contains(&(b.to_string(), a.to_string()));
        match (ab, ba) {
            (true, true) => TieCategory::Mutual,
            (false, false) => TieCategory::Unconnected,
            _ => TieCategory::OneSided,
        }
    }
}

/// Median pairwise distance per study week and tie category, restricted to
/// bins where both devices are on campus. `None` where a category has no
/// co-observed on-campus bin that week.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeekProfile {
    pub week: usize,
    pub median_m: [Option<f64>; 3],
}

pub fn tie_distance_profile(
    series_list: impl IntoIterator<Item = DyadSeries>,
    net: &TieNetwork,
    config: &StudyConfig,
) -> Vec<WeekProfile> {
    const WEEK_MS: i64 = 7 * 24 * 3_600_000;
    let mut pooled: BTreeMap<(usize, TieCategory), Vec<f64>> = BTreeMap::new();
    let mut max_week = 0usize;
    for s in series_list {
        let category = TieCategory::of(net, &s.dyad.a, &s.dyad.b);
        for i in 0..s.len() {
            if s.both_on_campus[i] != Some(true) {
                continue;
            }
            let Some(d) = s.distance_m[i] else { continue };
            let week = ((s.bin_starts[i] - config.study_start_ms) / WEEK_MS) as usize;
            max_week = max_week.max(week);
            pooled.entry((week, category)).or_default().push(d);
        }
    }
    (0..=max_week)
        .map(|week| {
            let median_m = TieCategory::ALL.map(|cat| {
                pooled.get(&(week, cat)).map(|values| {
                    let mut v = values.clone();
                    v.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                    let n = v.len();
                    if n % 2 == 1 {
                        v[n / 2]
                    } else {
                        (v[n / 2 - 1] + v[n / 2]) / 2.0
                    }
                })
            });
            WeekProfile { week, median_m }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn tie(wave: u8, ego: &str, alter: &str, tie_type: TieType, value: bool) -> SurveyTie {
        SurveyTie {
            wave,
            ego: ego.to_string(),
            alter: alter.to_string(),
            tie_type,
            value,
        }
    }

    fn three_node_friend_wave(wave: u8, edges: &[(&str, &str)]) -> Vec<SurveyTie> {
        let nodes = ["a", "b", "c"];
        let mut rows = Vec::new();
        for ego in nodes {
            for alter in nodes {
                if ego == alter {
                    continue;
                }
                let value = edges.contains(&(ego, alter));
                rows.push(tie(wave, ego, alter, TieType::Friend, value));
            }
        }
        rows
    }

    #[test]
    fn identical_networks_with_three_ties_score_half() {
        // Three respondents, three directed ties, identical networks: the
        // pair-normalized score is 3 / (2 * C(3,2)) = 0.5, while plain
        // Jaccard is 1.
        let rows = three_node_friend_wave(1, &[("a", "b"), ("b", "a"), ("c", "a")]);
        let nets = build_networks(&rows);
        let net = &nets[&(1, TieType::Friend)];
        assert_eq!(network_similarity(net, net, SimilarityMode::PairNormalized), 0.5);
        assert_eq!(network_similarity(net, net, SimilarityMode::Jaccard), 1.0);
    }

    #[test]
    fn reciprocity_counts_mutual_edge_endpoints() {
        // Edges a->b, b->a, c->a: the two mutual endpoints out of three.
        let rows = three_node_friend_wave(1, &[("a", "b"), ("b", "a"), ("c", "a")]);
        let nets = build_networks(&rows);
        let r = nets[&(1, TieType::Friend)].reciprocity();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_respondents_are_unknown_not_false() {
        let rows = vec![tie(1, "a", "b", TieType::Friend, true)];
        let nets = build_networks(&rows);
        let net = &nets[&(1, TieType::Friend)];
        assert_eq!(net.directed_value("a", "b"), Some(true));
        assert_eq!(net.directed_value("a", "c"), Some(false));
        assert_eq!(net.directed_value("b", "a"), None);
    }

    fn available_all(nodes: &[&str]) -> BTreeSet<(Dyad, Period)> {
        let mut out = BTreeSet::new();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                for p in Period::ALL {
                    out.insert((Dyad::new(nodes[i], nodes[j]).unwrap(), p));
                }
            }
        }
        out
    }

    #[test]
    fn friend_labels_are_directed_and_period_aligned() {
        let mut rows = three_node_friend_wave(2, &[("a", "b")]);
        rows.extend(three_node_friend_wave(3, &[("b", "a")]));
        let nets = build_networks(&rows);
        let table = build_label_table(Target::Friend, &nets, &available_all(&["a", "b", "c"])).unwrap();
        // 3 respondents x 2 alters x 2 periods.
        assert_eq!(table.rows.len(), 12);
        let find = |ego: &str, alter: &str, period: Period| {
            table
                .rows
                .iter()
                .find(|r| r.ego == ego && r.alter == alter && r.period == period)
                .unwrap()
                .label
        };
        assert!(find("a", "b", Period::P1));
        assert!(!find("b", "a", Period::P1));
        assert!(!find("a", "b", Period::P2));
        assert!(find("b", "a", Period::P2));
        assert_eq!(table.positives(), 2);
    }

    #[test]
    fn close_labels_exist_only_for_friends() {
        let mut rows = three_node_friend_wave(2, &[("a", "b"), ("a", "c")]);
        rows.extend(three_node_friend_wave(3, &[("a", "b")]));
        for (ego, alter, v) in [("a", "b", true), ("a", "c", false)] {
            rows.push(tie(2, ego, alter, TieType::CloseFriend, v));
        }
        rows.push(tie(3, "a", "b", TieType::CloseFriend, false));
        let nets = build_networks(&rows);
        let table = build_label_table(Target::CloseFriend, &nets, &available_all(&["a", "b", "c"])).unwrap();
        // Wave 2: a->b (close), a->c (not close). Wave 3: a->b (not close).
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.positives(), 1);
        assert!(table.rows.iter().all(|r| r.ego == "a"));
    }

    #[test]
    fn change_labels_compare_consecutive_waves() {
        let mut rows = three_node_friend_wave(1, &[("a", "b")]);
        rows.extend(three_node_friend_wave(2, &[("a", "b"), ("a", "c")]));
        rows.extend(three_node_friend_wave(3, &[("a", "c")]));
        let nets = build_networks(&rows);
        let table = build_label_table(Target::Change, &nets, &available_all(&["a", "b", "c"])).unwrap();
        assert_eq!(table.rows.len(), 12);
        let find = |ego: &str, alter: &str, period: Period| {
            table
                .rows
                .iter()
                .find(|r| r.ego == ego && r.alter == alter && r.period == period)
                .unwrap()
                .label
        };
        assert!(!find("a", "b", Period::P1)); // friend both waves
        assert!(find("a", "c", Period::P1)); // gained
        assert!(find("a", "b", Period::P2)); // lost
        assert!(!find("b", "a", Period::P2));
    }

    #[test]
    fn label_rows_require_feature_rows() {
        let rows = three_node_friend_wave(2, &[("a", "b")]);
        let mut rows = rows;
        rows.extend(three_node_friend_wave(3, &[]));
        let nets = build_networks(&rows);
        let mut available = BTreeSet::new();
        available.insert((Dyad::new("a", "b").unwrap(), Period::P1));
        let table = build_label_table(Target::Friend, &nets, &available).unwrap();
        // Only the a|b dyad in P1 exists: rows a->b and b->a.
        assert_eq!(table.rows.len(), 2);
    }

    #[test]
    fn label_csv_round_trips() {
        let rows = three_node_friend_wave(2, &[("a", "b")]);
        let mut rows = rows;
        rows.extend(three_node_friend_wave(3, &[("c", "a")]));
        let nets = build_networks(&rows);
        let table = build_label_table(Target::Friend, &nets, &available_all(&["a", "b", "c"])).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let parsed = LabelTable::read_csv(Cursor::new(&buf)).unwrap();
        assert_eq!(parsed, table);
    }

    #[test]
    fn tie_categories_cover_both_directions() {
        let rows = three_node_friend_wave(1, &[("a", "b"), ("b", "a"), ("c", "a")]);
        let nets = build_networks(&rows);
        let net = &nets[&(1, TieType::Friend)];
        assert_eq!(TieCategory::of(net, "a", "b"), TieCategory::Mutual);
        assert_eq!(TieCategory::of(net, "b", "a"), TieCategory::Mutual);
        assert_eq!(TieCategory::of(net, "a", "c"), TieCategory::OneSided);
        assert_eq!(TieCategory::of(net, "b", "c"), TieCategory::Unconnected);
    }
}
