//! Serial description of one kinematic chain with virtual springs.
//!
//! A chain is an ordered list of elements. Each element expands into a run of
//! factors, either constant transforms or elementary joint transforms whose
//! value is a linear combination of chain coordinates. Coordinates come in
//! three groups:
//!
//! * the actuated coordinate `q_act` (at most one actuated joint per chain),
//! * passive joint angles `q_passive`, one per PassiveR, two per PassiveU and
//!   one per Parallelogram element,
//! * virtual-spring coordinates `theta`: one for the actuator spring, six for
//!   every `Spring6`, numbered in element order.
//!
//! A `Spring6` expands as `Tx·Ty·Tz·Rx·Ry·Rz`, so its 6×6 stiffness is ordered
//! (translation x, y, z; rotation x, y, z) in the frame where it sits.

use nalgebra::{DMatrix, Matrix6};

use crate::error::{Error, Result};
use crate::spatial::{elementary, Axis, ElementaryAxis, MotionKind, Transform};

/// Relative symmetry tolerance for spring stiffness blocks.
pub const SPRING_SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ChainElement {
    RigidLink {
        transform: Transform,
    },
    /// One-dof actuated joint `V(q_act + θ)` with a scalar spring.
    ActuatedJoint {
        axis: ElementaryAxis,
        stiffness: f64,
    },
    /// Six-dof virtual spring, stiffness ordered translations then rotations.
    Spring6 {
        label: String,
        stiffness: Matrix6<f64>,
    },
    PassiveU {
        first: Axis,
        second: Axis,
    },
    PassiveR {
        axis: Axis,
    },
    /// Parallelogram equivalent `R(q)·link·R(−q)`: both pivots are driven by
    /// one passive coordinate, so the end link keeps its orientation.
    Parallelogram {
        axis: Axis,
        link: Transform,
    },
}

impl ChainElement {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ChainElement::RigidLink { .. } => "rigid_link",
            ChainElement::ActuatedJoint { .. } => "actuated_joint",
            ChainElement::Spring6 { .. } => "spring6",
            ChainElement::PassiveU { .. } => "passive_u",
            ChainElement::PassiveR { .. } => "passive_r",
            ChainElement::Parallelogram { .. } => "parallelogram",
        }
    }

    pub fn passive_dof(&self) -> usize {
        match self {
            ChainElement::PassiveU { .. } => 2,
            ChainElement::PassiveR { .. } | ChainElement::Parallelogram { .. } => 1,
            _ => 0,
        }
    }

    pub fn spring_dof(&self) -> usize {
        match self {
            ChainElement::ActuatedJoint { .. } => 1,
            ChainElement::Spring6 { .. } => 6,
            _ => 0,
        }
    }
}

/// Which chain coordinate a factor term refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Actuated,
    Passive(usize),
    Theta(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum Factor {
    Fixed(Transform),
    Joint {
        axis: ElementaryAxis,
        /// Factor value is `Σ coefficient · coordinate`.
        terms: Vec<(Coord, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDescription {
    name: String,
    elements: Vec<ChainElement>,
    n_passive: usize,
    n_theta: usize,
    has_actuator: bool,
}

impl ChainDescription {
    pub fn new(name: impl Into<String>, elements: Vec<ChainElement>) -> Result<Self> {
        let name = name.into();
        let mut actuators = 0;
        for (i, e) in elements.iter().enumerate() {
            let tag = || format!("chain '{name}' element #{i} ({})", describe(e));
            match e {
                ChainElement::ActuatedJoint { stiffness, .. } => {
                    actuators += 1;
                    if !(stiffness.is_finite() && *stiffness > 0.0) {
                        return Err(Error::validation(tag(), format!("actuator stiffness {stiffness} must be > 0")));
                    }
                }
                ChainElement::Spring6 { stiffness, .. } => {
                    check_spring_block(stiffness).map_err(|reason| Error::validation(tag(), reason))?;
                }
                ChainElement::PassiveU { first, second } if first == second => {
                    return Err(Error::validation(tag(), "U-joint axes must be distinct"));
                }
                _ => {}
            }
        }
        if actuators > 1 {
            return Err(Error::validation(
                format!("chain '{name}'"),
                format!("{actuators} actuated joints, at most one is supported"),
            ));
        }
        let n_passive = elements.iter().map(ChainElement::passive_dof).sum();
        let n_theta = elements.iter().map(ChainElement::spring_dof).sum();
        Ok(Self {
            name,
            elements,
            n_passive,
            n_theta,
            has_actuator: actuators == 1,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn elements(&self) -> &[ChainElement] {
        &self.elements
    }

    pub fn n_passive(&self) -> usize {
        self.n_passive
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn has_actuator(&self) -> bool {
        self.has_actuator
    }

    pub fn spring6_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, ChainElement::Spring6 { .. }))
            .count()
    }

    /// Coordinates with every entry zero, sized for this chain.
    pub fn zero_coordinates(&self) -> ChainCoordinates {
        ChainCoordinates {
            q_act: 0.0,
            q_passive: vec![0.0; self.n_passive],
            theta: vec![0.0; self.n_theta],
        }
    }

    pub fn check_coordinates(&self, coords: &ChainCoordinates) -> Result<()> {
        if coords.q_passive.len() != self.n_passive {
            return Err(Error::SizeMismatch {
                what: "passive coordinates",
                expected: self.n_passive,
                actual: coords.q_passive.len(),
            });
        }
        if coords.theta.len() != self.n_theta {
            return Err(Error::SizeMismatch {
                what: "spring coordinates",
                expected: self.n_theta,
                actual: coords.theta.len(),
            });
        }
        let finite = coords.q_act.is_finite()
            && coords.q_passive.iter().chain(&coords.theta).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("chain coordinates must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn factors(&self) -> Vec<Factor> {
        let mut out = Vec::new();
        let mut p = 0;
        let mut t = 0;
        for e in &self.elements {
            match e {
                ChainElement::RigidLink { transform } => out.push(Factor::Fixed(*transform)),
                ChainElement::ActuatedJoint { axis, .. } => {
                    out.push(Factor::Joint {
                        axis: *axis,
                        terms: vec![(Coord::Actuated, 1.0), (Coord::Theta(t), 1.0)],
                    });
                    t += 1;
                }
                ChainElement::Spring6 { .. } => {
                    for (k, kind) in [MotionKind::Translation, MotionKind::Rotation]
                        .into_iter()
                        .flat_map(|kind| Axis::ALL.into_iter().map(move |a| (a, kind)))
                        .enumerate()
                    {
                        let (axis, kind) = kind;
                        out.push(Factor::Joint {
                            axis: ElementaryAxis { axis, kind },
                            terms: vec![(Coord::Theta(t + k), 1.0)],
                        });
                    }
                    t += 6;
                }
                ChainElement::PassiveU { first, second } => {
                    out.push(Factor::Joint {
                        axis: ElementaryAxis::rotation(*first),
                        terms: vec![(Coord::Passive(p), 1.0)],
                    });
                    out.push(Factor::Joint {
                        axis: ElementaryAxis::rotation(*second),
                        terms: vec![(Coord::Passive(p + 1), 1.0)],
                    });
                    p += 2;
                }
                ChainElement::PassiveR { axis } => {
                    out.push(Factor::Joint {
                        axis: ElementaryAxis::rotation(*axis),
                        terms: vec![(Coord::Passive(p), 1.0)],
                    });
                    p += 1;
                }
                ChainElement::Parallelogram { axis, link } => {
                    out.push(Factor::Joint {
                        axis: ElementaryAxis::rotation(*axis),
                        terms: vec![(Coord::Passive(p), 1.0)],
                    });
                    out.push(Factor::Fixed(*link));
                    out.push(Factor::Joint {
                        axis: ElementaryAxis::rotation(*axis),
                        terms: vec![(Coord::Passive(p), -1.0)],
                    });
                    p += 1;
                }
            }
        }
        out
    }
}

fn describe(e: &ChainElement) -> String {
    match e {
        ChainElement::Spring6 { label, .. } if !label.is_empty() => format!("spring6 '{label}'"),
        other => other.kind_name().to_string(),
    }
}

/// Returns a reason when `k` is not a symmetric positive definite block.
pub(crate) fn check_spring_block(k: &Matrix6<f64>) -> std::result::Result<(), String> {
    if !k.iter().all(|v| v.is_finite()) {
        return Err("stiffness has non-finite entries".into());
    }
    let scale = k.amax();
    if scale == 0.0 {
        return Err("stiffness is identically zero".into());
    }
    let asym = (k - k.transpose()).amax();
    if asym > SPRING_SYMMETRY_TOL * scale {
        return Err(format!("stiffness is not symmetric (relative asymmetry {:.3e})", asym / scale));
    }
    let sym = (k + k.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig <= 0.0 {
        return Err(format!("stiffness is not positive definite (eigenvalue {min_eig:.6e})"));
    }
    Ok(())
}

impl Coord {
    pub(crate) fn value(self, c: &ChainCoordinates) -> f64 {
        match self {
            Coord::Actuated => c.q_act,
            Coord::Passive(i) => c.q_passive[i],
            Coord::Theta(i) => c.theta[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainCoordinates {
    pub q_act: f64,
    pub q_passive: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ChainCoordinates {
    pub fn new(q_act: f64, q_passive: Vec<f64>, theta: Vec<f64>) -> Self {
        Self {
            q_act,
            q_passive,
            theta,
        }
    }

    /// Same joint values with every spring coordinate reset to zero.
    pub fn rigid(&self) -> Self {
        Self {
            q_act: self.q_act,
            q_passive: self.q_passive.clone(),
            theta: vec![0.0; self.theta.len()],
        }
    }
}

pub(crate) fn factor_transform(f: &Factor, coords: &ChainCoordinates) -> Transform {
    match f {
        Factor::Fixed(t) => *t,
        Factor::Joint { axis, terms } => {
            let v: f64 = terms.iter().map(|(c, k)| k * c.value(coords)).sum();
            elementary(*axis, v)
        }
    }
}

/// End-effector transform: the ordered product of every element factor.
pub fn forward_transform(chain: &ChainDescription, coords: &ChainCoordinates) -> Result<Transform> {
    chain.check_coordinates(coords)?;
    Ok(chain
        .factors()
        .iter()
        .fold(Transform::identity(), |acc, f| acc.compose(&factor_transform(f, coords))))
}

/// One diagonal block of the aggregated spring stiffness.
#[derive(Debug, Clone, PartialEq)]
pub enum SpringBlock {
    Scalar(f64),
    Block6(Matrix6<f64>),
}

impl SpringBlock {
    pub fn dim(&self) -> usize {
        match self {
            SpringBlock::Scalar(_) => 1,
            SpringBlock::Block6(_) => 6,
        }
    }
}

/// Block-diagonal stiffness of all virtual springs of a chain, in theta order.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSpringStiffness {
    blocks: Vec<SpringBlock>,
}

impl AggregateSpringStiffness {
    pub fn blocks(&self) -> &[SpringBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(SpringBlock::dim).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.assemble(|b| match b {
            SpringBlock::Scalar(k) => DMatrix::from_element(1, 1, *k),
            SpringBlock::Block6(k) => DMatrix::from_iterator(6, 6, k.iter().copied()),
        })
    }

    /// Inverse assembled from the inverses of the individual blocks.
    pub fn inverse_dense(&self) -> DMatrix<f64> {
        self.assemble(|b| match b {
            SpringBlock::Scalar(k) => DMatrix::from_element(1, 1, 1.0 / k),
            SpringBlock::Block6(k) => {
                let inv = spd_inverse6(k);
                DMatrix::from_iterator(6, 6, inv.iter().copied())
            }
        })
    }

    fn assemble(&self, f: impl Fn(&SpringBlock) -> DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            let d = b.dim();
            m.view_mut((off, off), (d, d)).copy_from(&f(b));
            off += d;
        }
        m
    }
}

/// Inverse of a symmetric positive definite 6×6 block via Cholesky, with an
/// LU fallback for blocks that are only numerically PD.
pub(crate) fn spd_inverse6(k: &Matrix6<f64>) -> Matrix6<f64> {
    let sym = (k + k.transpose()) * 0.5;
    match sym.cholesky() {
        Some(ch) => ch.inverse(),
        None => sym.try_inverse().expect("validated spring block is invertible"),
    }
}

/// `diag(k_act, K_1, K_2, …)` in element order.
pub fn aggregate_spring_stiffness(chain: &ChainDescription) -> AggregateSpringStiffness {
    let blocks = chain
        .elements()
        .iter()
        .filter_map(|e| match e {
            ChainElement::ActuatedJoint { stiffness, .. } => Some(SpringBlock::Scalar(*stiffness)),
            ChainElement::Spring6 { stiffness, .. } => Some(SpringBlock::Block6(*stiffness)),
            _ => None,
        })
        .collect();
    AggregateSpringStiffness { blocks }
}
