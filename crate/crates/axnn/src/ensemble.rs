//! The trained ensemble: ordered base learners with mixture weights, the
//! GAMnet/xNN stage boundary, link, input scaler, and global offset — plus
//! the versioned JSON model format.

use crate::config::{sigmoid, Loss};
use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::learner::{BaseLearner, DenseLayer, LearnerKind, LearnerSpec, RidgeNet};
use crate::matrix::Matrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
}

impl Loss {
    pub fn link(&self) -> Link {
        match self {
            Loss::Squared => Link::Identity,
            Loss::Logistic => Link::Logit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    /// Learners in training order: `[0, stage_boundary)` are GAMnets,
    /// the rest xNNs.
    pub learners: Vec<BaseLearner>,
    pub stage_boundary: usize,
    pub link: Link,
    pub scaler: Scaler,
    pub global_offset: f64,
}

impl Ensemble {
    pub fn num_features(&self) -> usize {
        self.scaler.num_features()
    }

    /// Link-scale prediction: `global_offset + sum_j w_j * forward(h_j, x)`.
    pub fn predict_link(&self, x_raw: &Matrix) -> Result<Vec<f64>> {
        let xs = self.scaler.apply(x_raw)?;
        self.predict_link_scaled(&xs)
    }

    /// Same, on inputs already standardized by this ensemble's scaler.
    pub(crate) fn predict_link_scaled(&self, x_scaled: &Matrix) -> Result<Vec<f64>> {
        let mut preds = vec![self.global_offset; x_scaled.rows()];
        for learner in &self.learners {
            if learner.mixture_weight == 0.0 {
                continue;
            }
            let out = learner.forward(x_scaled)?;
            for (p, o) in preds.iter_mut().zip(&out) {
                *p += learner.mixture_weight * o;
            }
        }
        Ok(preds)
    }

    /// Response-scale prediction: identity link passes through, logit link
    /// applies the sigmoid.
    pub fn predict_response(&self, x_raw: &Matrix) -> Result<Vec<f64>> {
        let mut preds = self.predict_link(x_raw)?;
        if self.link == Link::Logit {
            for p in &mut preds {
                *p = sigmoid(*p);
            }
        }
        Ok(preds)
    }

    /// Check every structural invariant: stage partition, parameter shapes,
    /// positive scaler stds, finite parameters.
    pub fn validate(&self) -> Result<()> {
        let p = self.num_features();
        if self.stage_boundary > self.learners.len() {
            return Err(Error::InvariantViolation(format!(
                "stage boundary {} exceeds learner count {}",
                self.stage_boundary,
                self.learners.len()
            )));
        }
        for (j, learner) in self.learners.iter().enumerate() {
            let expected = if j < self.stage_boundary {
                LearnerKind::Gamnet
            } else {
                LearnerKind::Xnn
            };
            if learner.spec.kind != expected {
                return Err(Error::InvariantViolation(format!(
                    "learner {} should be {} by the stage partition (j1 = {}), found {}",
                    j + 1,
                    expected,
                    self.stage_boundary,
                    learner.spec.kind
                )));
            }
            learner.spec.validate(p).map_err(|e| {
                Error::InvariantViolation(format!("learner {}: {e}", j + 1))
            })?;
            if learner.num_features() != p {
                return Err(Error::InvariantViolation(format!(
                    "learner {} expects {} covariates, scaler has {}",
                    j + 1,
                    learner.num_features(),
                    p
                )));
            }
            if !learner.params_finite() || !learner.mixture_weight.is_finite() {
                return Err(Error::InvariantViolation(format!(
                    "learner {} has non-finite parameters",
                    j + 1
                )));
            }
        }
        if self.scaler.stds.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvariantViolation(
                "scaler stds must all be positive".into(),
            ));
        }
        if !self.global_offset.is_finite() {
            return Err(Error::InvariantViolation("global offset is not finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let file = ModelFile::from_ensemble(self);
        serde_json::to_string_pretty(&file)
            .map_err(|e| Error::MalformedModel(format!("serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Ensemble> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::MalformedModel(format!("not valid JSON: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::MalformedModel("missing format_version".into()))?;
        if version != FORMAT_VERSION as u64 {
            return Err(Error::VersionMismatch(format!(
                "file is format version {version}, this build reads {FORMAT_VERSION}"
            )));
        }
        let file: ModelFile = serde_json::from_value(value)
            .map_err(|e| Error::MalformedModel(format!("unexpected document structure: {e}")))?;
        let ensemble = file.into_ensemble()?;
        ensemble.validate()?;
        Ok(ensemble)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Ensemble> {
        let text = std::fs::read_to_string(path)?;
        Ensemble::from_json(&text)
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    link: Link,
    scaler: Scaler,
    global_offset: f64,
    j1: usize,
    learners: Vec<LearnerFile>,
}

#[derive(Serialize, Deserialize)]
struct LearnerFile {
    kind: LearnerKind,
    w: f64,
    spec: SpecFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    projections: Option<Vec<Vec<f64>>>,
    ridges: Vec<RidgeFile>,
    combination_weights: Vec<f64>,
    combination_bias: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    k: usize,
    widths: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RidgeFile {
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    /// Row-major (in_dim x out_dim) weights.
    w: Vec<Vec<f64>>,
    /// Empty for the bias-free ridge output unit.
    b: Vec<f64>,
}

impl ModelFile {
    fn from_ensemble(e: &Ensemble) -> ModelFile {
        ModelFile {
            format_version: FORMAT_VERSION,
            link: e.link,
            scaler: e.scaler.clone(),
            global_offset: e.global_offset,
            j1: e.stage_boundary,
            learners: e
                .learners
                .iter()
                .map(|l| LearnerFile {
                    kind: l.spec.kind,
                    w: l.mixture_weight,
                    spec: SpecFile {
                        k: l.spec.num_ridges,
                        widths: l.spec.subnet.hidden.clone(),
                    },
                    projections: l.projections.as_ref().map(matrix_to_rows),
                    ridges: l
                        .ridges
                        .iter()
                        .map(|r| RidgeFile {
                            layers: r
                                .layers
                                .iter()
                                .map(|layer| LayerFile {
                                    w: matrix_to_rows(&layer.weights),
                                    b: layer.bias.clone(),
                                })
                                .collect(),
                        })
                        .collect(),
                    combination_weights: l.combination_weights.clone(),
                    combination_bias: l.combination_bias,
                })
                .collect(),
        }
    }

    fn into_ensemble(self) -> Result<Ensemble> {
        let p = self.scaler.means.len();
        if self.scaler.stds.len() != p {
            return Err(Error::InvariantViolation(format!(
                "scaler has {} means but {} stds",
                p,
                self.scaler.stds.len()
            )));
        }
        let mut learners = Vec::with_capacity(self.learners.len());
        for (j, lf) in self.learners.into_iter().enumerate() {
            let spec = LearnerSpec {
                kind: lf.kind,
                num_ridges: lf.spec.k,
                subnet: crate::learner::SubnetSpec::new(lf.spec.widths.clone()),
            };
            let projections = match lf.projections {
                Some(rows) => Some(rows_to_matrix(&rows, &format!("learner {} projections", j + 1))?),
                None => None,
            };
            let mut ridges = Vec::with_capacity(lf.ridges.len());
            for (k, rf) in lf.ridges.into_iter().enumerate() {
                let mut layers = Vec::with_capacity(rf.layers.len());
                for (l, layer) in rf.layers.into_iter().enumerate() {
                    let weights = rows_to_matrix(
                        &layer.w,
                        &format!("learner {} ridge {} layer {}", j + 1, k + 1, l + 1),
                    )?;
                    layers.push(DenseLayer {
                        weights,
                        bias: layer.b,
                    });
                }
                ridges.push(RidgeNet { layers });
            }
            let learner = BaseLearner::from_parts(
                spec,
                p,
                projections,
                ridges,
                lf.combination_weights,
                lf.combination_bias,
                lf.w,
            )?;
            learners.push(learner);
        }
        Ok(Ensemble {
            learners,
            stage_boundary: self.j1,
            link: self.link,
            scaler: self.scaler,
            global_offset: self.global_offset,
        })
    }
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(Error::InvariantViolation(format!("{what}: empty matrix")));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvariantViolation(format!("{what}: ragged rows")));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Matrix::from_vec(rows.len(), cols, data)
        .map_err(|e| Error::InvariantViolation(format!("{what}: {e}")))
}
