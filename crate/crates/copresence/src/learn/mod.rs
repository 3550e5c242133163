//! Classifiers and feature selection over the dyadic feature matrix.
//!
//! All models consume rows as plain `&[f64]` with NaN as the missing
//! marker, and none of them impute: trees route missing values down a
//! branch chosen at fit time, and correlation-based selection drops
//! incomplete pairs.

pub mod boost;
pub mod cfs;
pub mod forest;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::networks::LabelTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Forest,
    Adaboost,
    Tree,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Forest => "forest",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Tree => "tree",
        }
    }

    pub fn parse(s: &str) -> Result<ModelKind> {
        match s {
            "forest" => Ok(ModelKind::Forest),
            "adaboost" => Ok(ModelKind::Adaboost),
            "tree" => Ok(ModelKind::Tree),
            other => Err(Error::contract(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Tree(tree::DecisionTree),
    Forest(forest::RandomForest),
    Adaboost(boost::AdaBoost),
}

impl TrainedModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            TrainedModel::Tree(m) => m.predict(row),
            TrainedModel::Forest(m) => m.predict(row),
            TrainedModel::Adaboost(m) => m.predict(row),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Tree(_) => ModelKind::Tree,
            TrainedModel::Forest(_) => ModelKind::Forest,
            TrainedModel::Adaboost(_) => ModelKind::Adaboost,
        }
    }
}

/// A trained model bound to the feature layout it was fit on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_hash: String,
    pub target: String,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self).expect("model serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
    }

    /// Refuse to predict on a matrix with a different column layout.
    pub fn check_schema(&self, matrix: &FeatureMatrix) -> Result<()> {
        let hash = matrix.schema.hash();
        if hash != self.schema_hash {
            return Err(Error::contract(format!(
                "model was fit on schema {} but the matrix has schema {hash}",
                self.schema_hash
            )));
        }
        Ok(())
    }
}

/// Label rows joined to their feature vectors, in label-table order.
pub struct Dataset<'a> {
    pub x: Vec<&'a [f64]>,
    pub y: Vec<bool>,
    pub width: usize,
}

pub fn assemble<'a>(matrix: &'a FeatureMatrix, table: &LabelTable) -> Result<Dataset<'a>> {
    let index = matrix.row_index();
    let mut x = Vec::with_capacity(table.rows.len());
    let mut y = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let key = (row.dyad.clone(), row.period);
        let &i = index.get(&key).ok_or_else(|| {
            Error::invariant(format!(
                "label row {}|{} {} has no feature row",
                row.dyad.a,
                row.dyad.b,
                row.period.label()
            ))
        })?;
        x.push(matrix.rows[i].values.as_slice());
        y.push(row.label);
    }
    Ok(Dataset {
        x,
        y,
        width: matrix.schema.width(),
    })
}
