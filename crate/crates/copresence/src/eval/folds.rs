//! Fold assignment under three leakage policies.
//!
//! The directed label rows carry heavy structure: both orientations of a
//! pair share one feature vector, and both periods of a pair share a
//! history. Row-level assignment ignores that; the dyadic schema keeps
//! every row of a pair in one fold; the temporal schema trains strictly on
//! the first period and tests on the second.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Period;
use crate::dyads::Dyad;
use crate::error::{Error, Result};
use crate::networks::LabelRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvSchema {
    /// Rows drop into folds independently and uniformly.
    Unrestricted,
    /// All rows of a canonical dyad (both directions, both periods) share a
    /// uniformly drawn fold.
    Dyadic,
    /// Two folds fixed by period: train on the first, test on the second,
    /// one pass, no rotation.
    TemporalBlock,
}

impl CvSchema {
    pub const ALL: [CvSchema; 3] = [CvSchema::Unrestricted, CvSchema::Dyadic, CvSchema::TemporalBlock];

    pub fn label(&self) -> &'static str {
        match self {
            CvSchema::Unrestricted => "unrestricted",
            CvSchema::Dyadic => "dyadic",
            CvSchema::TemporalBlock => "temporal",
        }
    }

    pub fn parse(s: &str) -> Result<CvSchema> {
        match s {
            "unrestricted" => Ok(CvSchema::Unrestricted),
            "dyadic" => Ok(CvSchema::Dyadic),
            "temporal" => Ok(CvSchema::TemporalBlock),
            other => Err(Error::contract(format!("unknown cv schema {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub schema: CvSchema,
    pub folds: usize,
    /// Fold index per label row.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    /// (train, test) row-index pairs. Rotating schemas yield one split per
    /// fold; the temporal schema yields exactly one split.
    pub fn splits(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let one = |test_fold: usize| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, &f) in self.assignment.iter().enumerate() {
                if f == test_fold {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
            (train, test)
        };
        match self.schema {
            CvSchema::TemporalBlock => vec![one(1)],
            _ => (0..self.folds).map(one).collect(),
        }
    }
}

/// Assign each label row to a fold. `folds` is ignored by the temporal
/// schema, which always uses its two period blocks.
pub fn assign_folds(
    schema: CvSchema,
    rows: &[LabelRow],
    folds: usize,
    rng: &mut impl Rng,
) -> Result<FoldPlan> {
    if rows.is_empty() {
        return Err(Error::contract("no label rows to fold"));
    }
    match schema {
        CvSchema::Unrestricted => {
            if folds < 2 || folds > rows.len() {
                return Err(Error::contract(format!("fold count {folds} out of range")));
            }
            let assignment = rows.iter().map(|_| rng.random_range(0..folds)).collect();
            Ok(FoldPlan {
                schema,
                folds,
                assignment,
            })
        }
        CvSchema::Dyadic => {
            if folds < 2 {
                return Err(Error::contract(format!("fold count {folds} out of range")));
            }
            let mut by_dyad: BTreeMap<&Dyad, usize> = BTreeMap::new();
            let assignment = rows
                .iter()
                .map(|r| {
                    *by_dyad
                        .entry(&r.dyad)
                        .or_insert_with(|| rng.random_range(0..folds))
                })
                .collect();
            Ok(FoldPlan {
                schema,
                folds: folds.min(by_dyad.len()),
                assignment,
            })
        }
        CvSchema::TemporalBlock => {
            let assignment: Vec<usize> = rows
                .iter()
                .map(|r| match r.period {
                    Period::P1 => 0,
                    Period::P2 => 1,
                })
                .collect();
            if !assignment.contains(&0) || !assignment.contains(&1) {
                return Err(Error::contract("temporal folding needs rows in both periods"));
            }
            Ok(FoldPlan {
                schema,
                folds: 2,
                assignment,
            })
        }
    }
}
