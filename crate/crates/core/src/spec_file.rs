//! JSON group specifications and branch-system files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auxiliary::Walls;
use crate::branch::{Branch, BranchSystem, Facing, Provenance};
use crate::group::{GroupError, GroupPresentation};
use crate::moebius::{Moebius, MoebiusError, DEFAULT_EPS};
use crate::transfer::Rect;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("generator `{label}`: determinant {det} is not positive")]
    BadDeterminant { label: String, det: f64 },
    #[error("generator `{label}`: {source}")]
    InvalidMatrix { label: String, source: MoebiusError },
    #[error("transition ({from}, {to}): {source}")]
    InvalidTransition {
        from: usize,
        to: usize,
        source: MoebiusError,
    },
    #[error("transition key `{0}` is not of the form \"j,k\"")]
    TransitionKey(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub label: String,
    pub matrix: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallsSpec {
    pub alpha_prime: f64,
    pub beta_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    /// Defaults to the 1-based position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub x: f64,
    pub facing: Facing,
}

/// On-disk form of a branch system. Transition keys are `"j,k"`, values
/// row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSystemFile {
    #[serde(default)]
    pub group_ref: String,
    pub branches: Vec<BranchSpec>,
    /// Omitted transitions are recomputed by shooting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BTreeMap<String, Vec<[f64; 4]>>>,
}

fn parse_key(key: &str) -> Option<(usize, usize)> {
    let (j, k) = key.split_once(',')?;
    Some((j.trim().parse().ok()?, k.trim().parse().ok()?))
}

impl BranchSystemFile {
    pub fn from_system(sys: &BranchSystem) -> Self {
        BranchSystemFile {
            group_ref: sys.group_ref.clone(),
            branches: sys
                .branches
                .iter()
                .map(|b| BranchSpec {
                    label: Some(b.label),
                    x: b.x,
                    facing: b.facing,
                })
                .collect(),
            transitions: Some(
                sys.transitions
                    .iter()
                    .map(|((j, k), gs)| {
                        (format!("{j},{k}"), gs.iter().map(|g| g.entries()).collect())
                    })
                    .collect(),
            ),
        }
    }

    /// The branch system, and whether transitions were supplied.
    pub fn to_system(&self) -> Result<(BranchSystem, bool), SpecError> {
        let mut sys = BranchSystem::new(
            self.branches
                .iter()
                .enumerate()
                .map(|(i, b)| Branch {
                    label: b.label.unwrap_or(i + 1),
                    x: b.x,
                    facing: b.facing,
                })
                .collect(),
            Provenance::UserSupplied,
            &self.group_ref,
        );
        let Some(ts) = &self.transitions else {
            return Ok((sys, false));
        };
        for (key, elements) in ts {
            let (from, to) = parse_key(key).ok_or_else(|| SpecError::TransitionKey(key.clone()))?;
            let gs = elements
                .iter()
                .map(|m| {
                    Moebius::try_from(*m).map_err(|source| SpecError::InvalidTransition {
                        from,
                        to,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            sys.transitions.entry((from, to)).or_default().extend(gs);
        }
        Ok((sys, true))
    }
}

/// Numerical settings shared by the pipeline stages. Every field has a
/// default, so specs may omit the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub seed: u64,
    /// Classes up to this length enter the Euler product.
    pub l_max: f64,
    pub k_max: usize,
    pub order: usize,
    pub grid: usize,
    /// Samples per property in the branch verifier.
    pub samples: usize,
    /// Interior samples for the auxiliary Ford-type check.
    pub aux_samples: usize,
    /// Ball radius for the auxiliary checks.
    pub aux_cutoff: usize,
    pub iso_samples: usize,
    /// Classes up to this length supply limit points.
    pub limit_length: f64,
    /// Ball radius for membership of transitions in Γ.
    pub descent_cutoff: usize,
    pub padding: f64,
    pub s_values: Vec<[f64; 2]>,
    pub scan: Rect,
    pub scan_grid: usize,
    pub re_floor: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 1,
            l_max: 6.0,
            k_max: 40,
            order: 24,
            grid: 32,
            samples: 16,
            aux_samples: 200,
            aux_cutoff: 4,
            iso_samples: 50,
            limit_length: 12.0,
            descent_cutoff: 6,
            padding: crate::transfer::DEFAULT_PADDING,
            s_values: vec![[1.0, 0.0], [1.5, 0.0], [2.0, 0.0]],
            scan: Rect {
                re_min: 0.5,
                re_max: 2.5,
                im_min: -1.0,
                im_max: 1.0,
            },
            scan_grid: 12,
            re_floor: crate::transfer::DEFAULT_RE_FLOOR,
        }
    }
}

impl Settings {
    pub fn s_list(&self) -> Vec<Complex64> {
        self.s_values
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpecFile {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    pub word_cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auxiliary: Option<WallsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_system: Option<BranchSystemFile>,
    #[serde(default)]
    pub settings: Settings,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl GroupSpecFile {
    pub fn presentation(&self) -> Result<GroupPresentation, SpecError> {
        let gens = self
            .generators
            .iter()
            .map(|g| {
                let [a, b, c, d] = g.matrix;
                Moebius::new(a, b, c, d)
                    .map(|m| (g.label.clone(), m))
                    .map_err(|e| match e {
                        MoebiusError::BadDeterminant { det } => SpecError::BadDeterminant {
                            label: g.label.clone(),
                            det,
                        },
                        source => SpecError::InvalidMatrix {
                            label: g.label.clone(),
                            source,
                        },
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupPresentation::new(
            gens,
            self.epsilon,
            self.word_cutoff,
        )?)
    }

    pub fn walls(&self) -> Walls {
        match self.auxiliary {
            Some(w) => Walls::Explicit {
                alpha_prime: w.alpha_prime,
                beta_prime: w.beta_prime,
            },
            None => Walls::Default,
        }
    }
}

fn read(path: &Path) -> Result<String, SpecError> {
    fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_group_spec_str(
    text: &str,
    path: &Path,
) -> Result<(GroupSpecFile, GroupPresentation), SpecError> {
    let spec: GroupSpecFile = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let group = spec.presentation()?;
    Ok((spec, group))
}

/// Reads and validates a group specification.
pub fn parse_group_spec(path: &Path) -> Result<(GroupSpecFile, GroupPresentation), SpecError> {
    parse_group_spec_str(&read(path)?, path)
}

pub fn load_branch_system(path: &Path) -> Result<BranchSystemFile, SpecError> {
    serde_json::from_str(&read(path)?).map_err(|e| SpecError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn branch_system_json(sys: &BranchSystem) -> String {
    let mut s = serde_json::to_string_pretty(&BranchSystemFile::from_system(sys))
        .expect("branch files serialize");
    s.push('\n');
    s
}
