//! Orthoglide-type translational manipulators: three orthogonal prismatic
//! rails, each carrying a foot and a leg that ends on the moving platform.
//!
//! Two leg architectures share the same rails and feet:
//!
//! * **3-PUU**: a single limb between two U-joints. The limb stands in for a
//!   parallelogram and uses a bar with twice the cross-section area.
//! * **3-PRPaR**: revolute, parallelogram, revolute. The parallelogram is the
//!   equivalent chain `Ry(q2)·Tx(L)·Ry(−q2)` followed by a six-dof spring
//!   whose compliance comes from the two bars in parallel.
//!
//! Chain frames. The X chain is described in world axes; the Y and Z chains
//! are the X chain rotated by the cyclic permutation x→y→z. In chain axes the
//! rail is the line `y = −f, z = 0` and the carriage sits at `ρ` on it. The
//! foot is a cantilever of length `f` along +y, so the first leg joint is at
//! `(ρ, 0, 0)` and the leg line passes through the platform point.
//!
//! The leg vector is `p − (ρ, 0, 0)` and the actuated coordinate solves
//! `(p_x − ρ)² + p_y² + p_z² = L²`. [`AssemblyMode`] picks the root. The
//! joint frame after the foot is oriented so that the leg runs along its
//! local +x axis at zero joint angles; with `q1` about z and `q2` about y the
//! leg direction is `±(cos q1 cos q2, sin q1 cos q2)` in x–y and `−sin q2`
//! along z, the sign being that of the leg along the rail.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::chain::{forward_transform, ChainCoordinates, ChainDescription, ChainElement};
use crate::error::{Error, Result};
use crate::kinetostatics::{
    chain_stiffness_unloaded, compliance, manipulator_stiffness, ManipulatorStiffness, StiffnessIndices, Wrench,
};
use crate::link::{beam_compliance, BeamSpec, ComplianceSource, LinkCompliance, Section};
use crate::spatial::{axis_rotation, displacement_between, trans, Axis, ElementaryAxis, Transform};

/// Relative discriminant below which a posture is flagged as near-singular.
pub const NEAR_SINGULAR_TOL: f64 = 1e-9;
/// IK closure tolerance (mm).
pub const CLOSURE_TOL: f64 = 1e-9;

/// Table points on the workspace diagonal (mm).
pub const Q0: [f64; 3] = [0.0, 0.0, 0.0];
pub const Q1: [f64; 3] = [-73.65, -73.65, -73.65];
pub const Q2: [f64; 3] = [126.35, 126.35, 126.35];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "3-PUU")]
    Puu,
    #[serde(rename = "3-PRPaR")]
    Prpar,
}

impl Architecture {
    pub fn label(self) -> &'static str {
        match self {
            Architecture::Puu => "3-PUU",
            Architecture::Prpar => "3-PRPaR",
        }
    }

    pub fn passive_dof(self) -> usize {
        match self {
            Architecture::Puu => 4,
            Architecture::Prpar => 3,
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "3-PUU" | "PUU" => Ok(Architecture::Puu),
            "3-PRPAR" | "PRPAR" => Ok(Architecture::Prpar),
            _ => Err(Error::InvalidArgument(format!("unknown architecture '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoglideParams {
    /// Leg length L between the joint centres (mm).
    pub leg_length: f64,
    /// Foot beam from the carriage to the first leg joint; its length is the
    /// joint offset from the rail.
    pub foot: BeamSpec,
    /// One parallelogram bar. Its length must equal `leg_length`.
    pub bar: BeamSpec,
    /// Distance between the two parallelogram bars (mm).
    pub parallelogram_width: f64,
    /// Actuator stiffness along the rail (N/mm).
    pub actuator_stiffness: f64,
    /// Replaces the analytic foot beam, expressed in the foot beam axes.
    pub foot_compliance: Option<LinkCompliance>,
    pub assembly_mode: AssemblyMode,
}

impl Default for OrthoglideParams {
    /// Steel placeholder geometry; not taken from any published prototype.
    fn default() -> Self {
        let steel = |length, section| BeamSpec {
            length,
            elastic_modulus: 2.1e5,
            shear_modulus: 8.0e4,
            section,
        };
        Self {
            leg_length: 310.0,
            foot: steel(120.0, Section::Rectangle { width: 26.0, height: 36.0 }),
            bar: steel(310.0, Section::Rectangle { width: 16.0, height: 16.0 }),
            parallelogram_width: 120.0,
            actuator_stiffness: 1e4,
            foot_compliance: None,
            assembly_mode: AssemblyMode::default(),
        }
    }
}

impl OrthoglideParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("leg_length", self.leg_length)?;
        positive("parallelogram_width", self.parallelogram_width)?;
        positive("actuator_stiffness", self.actuator_stiffness)?;
        self.foot.validate()?;
        self.bar.validate()?;
        if (self.bar.length - self.leg_length).abs() > 1e-9 * self.leg_length {
            return Err(Error::InvalidArgument(format!(
                "bar length {} must equal leg_length {}",
                self.bar.length, self.leg_length
            )));
        }
        Ok(())
    }

    /// Limb of the 3-PUU legs: one bar with doubled cross-section area.
    pub fn limb(&self) -> BeamSpec {
        BeamSpec {
            section: self.bar.section.doubled(),
            ..self.bar
        }
    }

    fn foot_offset(&self) -> f64 {
        self.foot.length
    }
}

/// Rotation taking chain axes to world axes for chain `k` (0 = X, 1 = Y, 2 = Z).
pub fn chain_axes(k: usize) -> Matrix3<f64> {
    let p = Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    match k % 3 {
        0 => Matrix3::identity(),
        1 => p,
        _ => p * p,
    }
}

const CHAIN_NAMES: [&str; 3] = ["X", "Y", "Z"];

/// Which root of the rail equation the inverse kinematics takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMode {
    /// `ρ ≥ p_x`: the carriage is ahead of the platform on its rail and the
    /// leg points back along −x.
    RailAhead,
    /// `ρ ≤ p_x`: the carriage trails the platform and the leg points along
    /// +x. The table points Q1 and Q2 are then where the velocity
    /// transmission factors reach 1/2 and 2.
    #[default]
    RailBehind,
}

impl AssemblyMode {
    /// +1 when the leg points along +x of the chain axes.
    fn leg_sign(self) -> f64 {
        match self {
            AssemblyMode::RailAhead => -1.0,
            AssemblyMode::RailBehind => 1.0,
        }
    }
}

/// Orientation of the first leg-joint frame in chain axes: the leg runs
/// along its local +x axis at zero joint angles.
fn joint_frame(mode: AssemblyMode) -> Matrix3<f64> {
    match mode {
        AssemblyMode::RailAhead => axis_rotation(Axis::Z, std::f64::consts::PI),
        AssemblyMode::RailBehind => Matrix3::identity(),
    }
}

/// Foot compliance in the first leg-joint frame.
fn foot_compliance_in_joint_frame(params: &OrthoglideParams) -> Result<LinkCompliance> {
    let beam = match &params.foot_compliance {
        Some(c) => c.clone(),
        None => beam_compliance(&params.foot)?,
    };
    // beam x runs along chain +y
    let to_joint = joint_frame(params.assembly_mode).transpose();
    Ok(beam.rotated(&(to_joint * axis_rotation(Axis::Z, std::f64::consts::FRAC_PI_2))))
}

/// Compliance of the parallelogram at the end of its equivalent chain, in the
/// axes of the link before the first pivot.
///
/// Each bar is a beam between two pivots about y; the bars sit at z = ±d/2
/// in the start link. The two bar chains are summed as parallel stiffnesses.
/// That sum is singular along the parallelogram's own motion (translation
/// perpendicular to the bars in the x–z plane), which the equivalent chain
/// already carries as its passive coordinate; that direction is given the
/// clamped transverse stiffness of the two bars so the matrix is invertible.
pub fn parallelogram_compliance(params: &OrthoglideParams, q2: f64) -> Result<LinkCompliance> {
    params.validate()?;
    if !(q2.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("parallelogram angle {q2} outside (-pi/2, pi/2)")));
    }
    let bar = beam_compliance(&params.bar)?;
    let k_bar = bar.stiffness();
    let half = 0.5 * params.parallelogram_width;
    let mut k = Matrix6::zeros();
    for z in [half, -half] {
        let chain = ChainDescription::new(
            "bar",
            vec![
                ChainElement::RigidLink { transform: trans(0.0, 0.0, z) },
                ChainElement::PassiveR { axis: Axis::Y },
                ChainElement::RigidLink { transform: trans(params.bar.length, 0.0, 0.0) },
                ChainElement::Spring6 { label: "bar".into(), stiffness: k_bar },
                ChainElement::PassiveR { axis: Axis::Y },
                ChainElement::RigidLink { transform: trans(0.0, 0.0, -z) },
            ],
        )?;
        let coords = ChainCoordinates::new(0.0, vec![q2, -q2], vec![0.0; 6]);
        k += chain_stiffness_unloaded(&chain, &coords)?.k_chain;
    }
    let p = params.bar.section.properties()?;
    let l = params.bar.length;
    let k_mech = 2.0 * 12.0 * params.bar.elastic_modulus * p.i_y / l.powi(3);
    let dir = axis_rotation(Axis::Y, q2) * Vector3::z();
    let m = Vector6::new(dir.x, dir.y, dir.z, 0.0, 0.0, 0.0);
    let k = (k + k.transpose()) * 0.5 + m * m.transpose() * k_mech;
    let c = k
        .try_inverse()
        .ok_or_else(|| Error::Numerical("parallelogram stiffness is singular".into()))?;
    LinkCompliance::new((c + c.transpose()) * 0.5, ComplianceSource::Parallelogram)
}

/// Joint values of one chain for a platform position.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainIk {
    /// Carriage position ρ along the rail (mm).
    pub rho: f64,
    /// Joint angle about z at the foot (rad).
    pub q1: f64,
    /// Leg elevation about y (rad).
    pub q2: f64,
    /// `L² − p_y² − p_z²` in chain axes (mm²).
    pub discriminant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub chains: [ChainIk; 3],
    /// A rail is perpendicular to its leg (discriminant ≈ 0).
    pub near_singular: bool,
}

impl IkSolution {
    pub fn coordinates(&self, arch: Architecture, chain: usize) -> ChainCoordinates {
        let c = &self.chains[chain];
        let passive = match arch {
            Architecture::Puu => vec![c.q1, c.q2, -c.q2, -c.q1],
            Architecture::Prpar => vec![c.q1, c.q2, -c.q1],
        };
        let n_theta = 13;
        ChainCoordinates::new(c.rho, passive, vec![0.0; n_theta])
    }
}

/// Squared-distance discriminants of the three chains at `target`.
pub fn discriminants(leg_length: f64, target: &Vector3<f64>) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, d) in out.iter_mut().enumerate() {
        let p = chain_axes(k).transpose() * target;
        *d = leg_length * leg_length - p.y * p.y - p.z * p.z;
    }
    out
}

/// Reachability predicate used by sweeps: every discriminant non-negative.
pub fn is_reachable(leg_length: f64, target: &Vector3<f64>) -> bool {
    discriminants(leg_length, target).iter().all(|&d| d >= 0.0)
}

pub fn inverse_kinematics(params: &OrthoglideParams, target: &Vector3<f64>) -> Result<IkSolution> {
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("target must be finite".into()));
    }
    let l = params.leg_length;
    let disc = discriminants(l, target);
    let mut near_singular = false;
    let mut chains = Vec::with_capacity(3);
    for k in 0..3 {
        let p = chain_axes(k).transpose() * target;
        let d = disc[k];
        if d < 0.0 {
            return Err(Error::OutOfWorkspace {
                chain: CHAIN_NAMES[k].to_string(),
                target: [target.x, target.y, target.z],
                discriminant: d,
            });
        }
        near_singular |= d <= NEAR_SINGULAR_TOL * l * l;
        let sign = params.assembly_mode.leg_sign();
        let rho = p.x - sign * d.sqrt();
        let v = p - Vector3::new(rho, 0.0, 0.0);
        let q1 = (sign * v.y).atan2(sign * v.x);
        let q2 = (-v.z / l).clamp(-1.0, 1.0).asin();
        chains.push(ChainIk {
            rho,
            q1,
            q2,
            discriminant: d,
        });
    }
    let chains: [ChainIk; 3] = chains.try_into().expect("three chains");
    Ok(IkSolution { chains, near_singular })
}

/// Builder for one of the two architectures with fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoglideModel {
    params: OrthoglideParams,
    architecture: Architecture,
}

pub fn build_3puu(params: OrthoglideParams) -> Result<OrthoglideModel> {
    OrthoglideModel::new(params, Architecture::Puu)
}

pub fn build_3prpar(params: OrthoglideParams) -> Result<OrthoglideModel> {
    OrthoglideModel::new(params, Architecture::Prpar)
}

/// Three chains posed at one platform position.
#[derive(Debug, Clone, PartialEq)]
pub struct PosturedManipulator {
    pub chains: Vec<(ChainDescription, ChainCoordinates)>,
    pub end_pose: Transform,
    pub ik: IkSolution,
}

impl PosturedManipulator {
    pub fn stiffness(&self, load: Option<&Wrench>) -> Result<ManipulatorStiffness> {
        manipulator_stiffness(&self.chains, load)
    }
}

impl OrthoglideModel {
    pub fn new(params: OrthoglideParams, architecture: Architecture) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, architecture })
    }

    pub fn params(&self) -> &OrthoglideParams {
        &self.params
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    /// Chain `k` with the leg spring evaluated for leg elevation `q2`. Only
    /// the 3-PRPaR leg spring depends on `q2`.
    pub fn chain(&self, k: usize, q2: f64) -> Result<ChainDescription> {
        let p = &self.params;
        let axes = chain_axes(k);
        let turn = joint_frame(p.assembly_mode);
        let f = p.foot_offset();
        // the rail runs at −f along chain y so the leg line meets the platform point
        let base = Transform::new(axes, axes * Vector3::new(0.0, -f, 0.0))?;
        let foot_link = Transform::new(turn, Vector3::new(0.0, f, 0.0))?;
        let tool = Transform::new((axes * turn).transpose(), Vector3::zeros())?;
        let foot = foot_compliance_in_joint_frame(p)?;

        let mut elements = vec![
            ChainElement::RigidLink { transform: base },
            ChainElement::ActuatedJoint {
                axis: ElementaryAxis::translation(Axis::X),
                stiffness: p.actuator_stiffness,
            },
            ChainElement::RigidLink { transform: foot_link },
            ChainElement::Spring6 {
                label: "foot".into(),
                stiffness: foot.stiffness(),
            },
        ];
        match self.architecture {
            Architecture::Puu => {
                let limb = beam_compliance(&p.limb())?;
                elements.extend([
                    ChainElement::PassiveU { first: Axis::Z, second: Axis::Y },
                    ChainElement::RigidLink { transform: trans(p.leg_length, 0.0, 0.0) },
                    ChainElement::Spring6 {
                        label: "leg".into(),
                        stiffness: limb.stiffness(),
                    },
                    ChainElement::PassiveU { first: Axis::Y, second: Axis::Z },
                ]);
            }
            Architecture::Prpar => {
                let pa = parallelogram_compliance(p, q2)?;
                elements.extend([
                    ChainElement::PassiveR { axis: Axis::Z },
                    ChainElement::Parallelogram {
                        axis: Axis::Y,
                        link: trans(p.leg_length, 0.0, 0.0),
                    },
                    ChainElement::Spring6 {
                        label: "parallelogram".into(),
                        stiffness: pa.stiffness(),
                    },
                    ChainElement::PassiveR { axis: Axis::Z },
                ]);
            }
        }
        elements.push(ChainElement::RigidLink { transform: tool });
        ChainDescription::new(format!("{}-{}", self.architecture.label(), CHAIN_NAMES[k]), elements)
    }

    /// Solves the inverse kinematics and poses all three chains at `target`.
    pub fn at(&self, target: &Vector3<f64>) -> Result<PosturedManipulator> {
        let ik = inverse_kinematics(&self.params, target)?;
        let end_pose = Transform::from_translation(*target);
        let mut chains = Vec::with_capacity(3);
        for k in 0..3 {
            let chain = self.chain(k, ik.chains[k].q2)?;
            let coords = ik.coordinates(self.architecture, k);
            let pose = forward_transform(&chain, &coords)?;
            let gap = displacement_between(&end_pose, &pose);
            if gap.dp.norm() > CLOSURE_TOL * self.params.leg_length.max(1.0) || gap.dphi.norm() > 1e-12 {
                return Err(Error::Numerical(format!(
                    "chain {} does not close on the target ({:.3e} mm)",
                    CHAIN_NAMES[k],
                    gap.dp.norm()
                )));
            }
            chains.push((chain, coords));
        }
        Ok(PosturedManipulator { chains, end_pose, ik })
    }
}

/// One architecture evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub architecture: Architecture,
    pub k_total: Matrix6<f64>,
    pub compliance: Option<Matrix6<f64>>,
    pub indices: StiffnessIndices,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub point: Vector3<f64>,
    pub puu: VariantResult,
    pub prpar: VariantResult,
    /// `k_rot(3-PRPaR) / k_rot(3-PUU)`.
    pub rotational_ratio: f64,
    /// `k_tran(3-PRPaR) / k_tran(3-PUU)`.
    pub translational_ratio: f64,
}

pub fn evaluate_variant(model: &OrthoglideModel, point: &Vector3<f64>) -> Result<VariantResult> {
    let ms = model.at(point)?.stiffness(None)?;
    Ok(VariantResult {
        architecture: model.architecture(),
        compliance: compliance(&ms.k_total),
        indices: StiffnessIndices::from_matrix(&ms.k_total),
        k_total: ms.k_total,
    })
}

/// Evaluates both architectures with the same parameters at every point.
pub fn comparative_study(params: &OrthoglideParams, points: &[Vector3<f64>]) -> Result<Vec<ComparisonRow>> {
    let puu = build_3puu(params.clone())?;
    let prpar = build_3prpar(params.clone())?;
    points
        .iter()
        .map(|p| {
            let a = evaluate_variant(&puu, p)?;
            let b = evaluate_variant(&prpar, p)?;
            Ok(ComparisonRow {
                point: *p,
                rotational_ratio: b.indices.k_rot / a.indices.k_rot,
                translational_ratio: b.indices.k_tran / a.indices.k_tran,
                puu: a,
                prpar: b,
            })
        })
        .collect()
}

pub fn table_points() -> [Vector3<f64>; 3] {
    [Vector3::from(Q0), Vector3::from(Q1), Vector3::from(Q2)]
}
