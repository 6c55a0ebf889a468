//! JSON model documents (schema version "1").
//!
//! A document names either a builder with its parameters or an explicit list
//! of chains with their coordinates. Parsing rejects unknown fields, and the
//! whole document is checked structurally before any numerics run.
//!
//! ```json
//! { "schema_version": "1",
//!   "manipulator": { "builder": "3-PRPaR", "params": { "leg_length": 310.0 } } }
//! ```
//!
//! Lengths are mm, forces N, angles rad.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::chain::{ChainCoordinates, ChainDescription, ChainElement};
use crate::error::{Error, Result};
use crate::kinetostatics::{manipulator_stiffness, ManipulatorStiffness, Wrench};
use crate::link::{beam_compliance, read_external_compliance, BeamSpec, LinkCompliance};
use crate::linalg::{from_rows6, rows6};
use crate::orthoglide::{Architecture, AssemblyMode, IkSolution, OrthoglideModel, OrthoglideParams};
use crate::spatial::{Axis, ElementaryAxis, MotionKind, Transform};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: String,
    pub manipulator: ManipulatorDoc,
}

/// Exactly one of `builder` or `chains` must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulatorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<Architecture>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<ChainDoc>>,
}

/// Orthoglide parameters; omitted fields take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsDoc {
    pub leg_length: f64,
    pub foot: BeamSpec,
    pub bar: BeamSpec,
    pub parallelogram_width: f64,
    pub actuator_stiffness: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub foot_compliance: Option<LinkSource>,
    pub assembly_mode: AssemblyMode,
}

impl Default for ParamsDoc {
    fn default() -> Self {
        let p = OrthoglideParams::default();
        Self {
            leg_length: p.leg_length,
            foot: p.foot,
            bar: p.bar,
            parallelogram_width: p.parallelogram_width,
            actuator_stiffness: p.actuator_stiffness,
            foot_compliance: None,
            assembly_mode: p.assembly_mode,
        }
    }
}

/// Where a six-dof spring gets its matrix from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkSource {
    /// Row-major stiffness (N/mm, N, N·mm/rad).
    Stiffness([[f64; 6]; 6]),
    /// Row-major compliance.
    Compliance([[f64; 6]; 6]),
    Beam(BeamSpec),
    /// Path to an external compliance file, relative to the model file.
    External(PathBuf),
}

impl LinkSource {
    fn resolve(&self, base: &Path) -> Result<LinkCompliance> {
        match self {
            LinkSource::Stiffness(rows) => {
                let k = from_rows6(rows);
                let c = k
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidArgument("spring stiffness is singular".into()))?;
                LinkCompliance::new((c + c.transpose()) * 0.5, crate::link::ComplianceSource::External)
            }
            LinkSource::Compliance(rows) => LinkCompliance::new(from_rows6(rows), crate::link::ComplianceSource::External),
            LinkSource::Beam(spec) => beam_compliance(spec),
            LinkSource::External(path) => read_external_compliance(&base.join(path)),
        }
    }

    fn stiffness(&self, base: &Path) -> Result<Matrix6<f64>> {
        match self {
            // keep the given matrix as is, so validation sees the user's numbers
            LinkSource::Stiffness(rows) => Ok(from_rows6(rows)),
            other => Ok(other.resolve(base)?.stiffness()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    pub name: String,
    pub elements: Vec<ElementDoc>,
    pub coordinates: CoordinatesDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinatesDoc {
    #[serde(default)]
    pub q_act: f64,
    #[serde(default)]
    pub q_passive: Vec<f64>,
    /// Virtual spring deflections; zeros when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

/// Rigid transform: rotation matrix (row-major, orthonormal) then
/// translation. Both default to identity.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub translation: [f64; 3],
}

impl TransformDoc {
    fn to_transform(&self) -> Result<Transform> {
        let r = match &self.rotation {
            Some(rows) => Matrix3::from_fn(|i, j| rows[i][j]),
            None => Matrix3::identity(),
        };
        Transform::new_projected(r, Vector3::from(self.translation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementDoc {
    Rigid {
        #[serde(flatten)]
        transform: TransformDoc,
    },
    Actuated {
        axis: Axis,
        kind: MotionKind,
        stiffness: f64,
    },
    Spring6 {
        label: String,
        source: LinkSource,
    },
    PassiveU {
        first: Axis,
        second: Axis,
    },
    PassiveR {
        axis: Axis,
    },
    Parallelogram {
        axis: Axis,
        link: TransformDoc,
    },
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.check_structure()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builder(arch: Architecture, params: ParamsDoc) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            manipulator: ManipulatorDoc {
                builder: Some(arch),
                params: Some(params),
                chains: None,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialise")
    }

    fn check_structure(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema_version \"{}\" (expected \"{SCHEMA_VERSION}\")",
                self.schema_version
            )));
        }
        let m = &self.manipulator;
        match (&m.builder, &m.chains) {
            (Some(_), None) => Ok(()),
            (None, Some(chains)) => {
                if m.params.is_some() {
                    return Err(Error::InvalidArgument("'params' only applies to builder models".into()));
                }
                if chains.is_empty() {
                    return Err(Error::InvalidArgument("'chains' must not be empty".into()));
                }
                Ok(())
            }
            _ => Err(Error::InvalidArgument(
                "manipulator needs exactly one of 'builder' or 'chains'".into(),
            )),
        }
    }

    /// Builds the numerical model. Relative external paths resolve against
    /// `base` (normally the model file's directory).
    pub fn build(&self, base: &Path) -> Result<Model> {
        self.check_structure()?;
        let m = &self.manipulator;
        if let Some(arch) = m.builder {
            let params = m.params.clone().unwrap_or_default().to_params(base)?;
            return Ok(Model::Builder(OrthoglideModel::new(params, arch)?));
        }
        let chains = m
            .chains
            .as_ref()
            .expect("checked")
            .iter()
            .map(|c| c.build(base))
            .collect::<Result<Vec<_>>>()?;
        Ok(Model::Explicit(chains))
    }
}

impl ParamsDoc {
    pub fn to_params(&self, base: &Path) -> Result<OrthoglideParams> {
        let params = OrthoglideParams {
            leg_length: self.leg_length,
            foot: self.foot,
            bar: self.bar,
            parallelogram_width: self.parallelogram_width,
            actuator_stiffness: self.actuator_stiffness,
            foot_compliance: self.foot_compliance.as_ref().map(|s| s.resolve(base)).transpose()?,
            assembly_mode: self.assembly_mode,
        };
        params.validate()?;
        Ok(params)
    }
}

impl ChainDoc {
    fn build(&self, base: &Path) -> Result<(ChainDescription, ChainCoordinates)> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                Ok(match e {
                    ElementDoc::Rigid { transform } => ChainElement::RigidLink {
                        transform: transform.to_transform()?,
                    },
                    ElementDoc::Actuated { axis, kind, stiffness } => ChainElement::ActuatedJoint {
                        axis: ElementaryAxis { axis: *axis, kind: *kind },
                        stiffness: *stiffness,
                    },
                    ElementDoc::Spring6 { label, source } => ChainElement::Spring6 {
                        label: label.clone(),
                        stiffness: source.stiffness(base).map_err(|err| {
                            Error::validation(format!("chain '{}' spring6 '{label}'", self.name), err.to_string())
                        })?,
                    },
                    ElementDoc::PassiveU { first, second } => ChainElement::PassiveU {
                        first: *first,
                        second: *second,
                    },
                    ElementDoc::PassiveR { axis } => ChainElement::PassiveR { axis: *axis },
                    ElementDoc::Parallelogram { axis, link } => ChainElement::Parallelogram {
                        axis: *axis,
                        link: link.to_transform()?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let chain = ChainDescription::new(self.name.clone(), elements)?;
        let c = &self.coordinates;
        let theta = c.theta.clone().unwrap_or_else(|| vec![0.0; chain.n_theta()]);
        let coords = ChainCoordinates::new(c.q_act, c.q_passive.clone(), theta);
        chain.check_coordinates(&coords)?;
        Ok((chain, coords))
    }
}

impl ElementDoc {
    pub fn from_element(e: &ChainElement) -> Self {
        let doc = |t: &Transform| {
            let r = t.rotation();
            TransformDoc {
                rotation: Some([
                    [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                    [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                    [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
                ]),
                translation: (*t.translation()).into(),
            }
        };
        match e {
            ChainElement::RigidLink { transform } => ElementDoc::Rigid { transform: doc(transform) },
            ChainElement::ActuatedJoint { axis, stiffness } => ElementDoc::Actuated {
                axis: axis.axis,
                kind: axis.kind,
                stiffness: *stiffness,
            },
            ChainElement::Spring6 { label, stiffness } => ElementDoc::Spring6 {
                label: label.clone(),
                source: LinkSource::Stiffness(rows6(stiffness)),
            },
            ChainElement::PassiveU { first, second } => ElementDoc::PassiveU {
                first: *first,
                second: *second,
            },
            ChainElement::PassiveR { axis } => ElementDoc::PassiveR { axis: *axis },
            ChainElement::Parallelogram { axis, link } => ElementDoc::Parallelogram {
                axis: *axis,
                link: doc(link),
            },
        }
    }
}

impl ChainDoc {
    pub fn from_chain(chain: &ChainDescription, coords: &ChainCoordinates) -> Self {
        Self {
            name: chain.name().to_string(),
            elements: chain.elements().iter().map(ElementDoc::from_element).collect(),
            coordinates: CoordinatesDoc {
                q_act: coords.q_act,
                q_passive: coords.q_passive.clone(),
                theta: Some(coords.theta.clone()),
            },
        }
    }
}

/// A model ready for evaluation.
#[derive(Debug, Clone)]
pub enum Model {
    Builder(OrthoglideModel),
    /// Chains posed by their own coordinates; the end pose is fixed.
    Explicit(Vec<(ChainDescription, ChainCoordinates)>),
}

/// Stiffness of a posed model together with its posture.
#[derive(Debug, Clone)]
pub struct Posed {
    pub point: Vector3<f64>,
    pub stiffness: ManipulatorStiffness,
    pub ik: Option<IkSolution>,
}

impl Model {
    pub fn label(&self) -> String {
        match self {
            Model::Builder(m) => m.architecture().label().to_string(),
            Model::Explicit(_) => "explicit".to_string(),
        }
    }

    pub fn supports_pose(&self) -> bool {
        matches!(self, Model::Builder(_))
    }

    /// Evaluates the stiffness at `point`. Explicit models ignore `None` and
    /// require a given point to match their own end position.
    pub fn evaluate(&self, point: Option<&Vector3<f64>>, load: Option<&Wrench>) -> Result<Posed> {
        match self {
            Model::Builder(m) => {
                let p = point.copied().unwrap_or_else(Vector3::zeros);
                let posed = m.at(&p)?;
                let stiffness = posed.stiffness(load)?;
                Ok(Posed {
                    point: p,
                    stiffness,
                    ik: Some(posed.ik),
                })
            }
            Model::Explicit(chains) => {
                let stiffness = manipulator_stiffness(chains, load)?;
                let end = *stiffness.end_pose.translation();
                if let Some(p) = point {
                    if (p - end).norm() > crate::kinetostatics::POSE_TRANSLATION_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "explicit chains end at ({}, {}, {}); they cannot be moved to another pose",
                            end.x, end.y, end.z
                        )));
                    }
                }
                Ok(Posed {
                    point: end,
                    stiffness,
                    ik: None,
                })
            }
        }
    }
}
