//! 6×6 link compliance matrices.
//!
//! Beams are Euler–Bernoulli cantilevers along their local x axis, clamped at
//! the start and loaded at the free end; shear deformation is ignored.
//! Compliance entries are ordered (δx, δy, δz, φx, φy, φz) against
//! (Fx, Fy, Fz, Mx, My, Mz) and expressed at the free end in beam axes.
//! A section's `width` runs along local y and its `height` along local z.

use nalgebra::{Matrix3, Matrix6};
use serde::{Deserialize, Serialize};

use crate::chain::{aggregate_spring_stiffness, ChainDescription, ChainElement};
use crate::error::{Error, Result};
use crate::jacobian::chain_jacobians;
use crate::linalg::{from_rows6, rows6};
use crate::spatial::{trans, Transform};

/// Relative symmetry tolerance on accepted compliance matrices.
pub const COMPLIANCE_SYMMETRY_TOL: f64 = 1e-10;
/// Looser tolerance for externally computed matrices, which are symmetrised.
pub const EXTERNAL_SYMMETRY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Section {
    Rectangle { width: f64, height: f64 },
    Circle { diameter: f64 },
}

/// Area and second moments of a cross-section (mm², mm⁴).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionProperties {
    pub area: f64,
    /// About local y (bending in the x–z plane).
    pub i_y: f64,
    /// About local z (bending in the x–y plane).
    pub i_z: f64,
    pub torsion: f64,
}

impl Section {
    pub fn properties(&self) -> Result<SectionProperties> {
        match *self {
            Section::Rectangle { width, height } => {
                if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
                    return Err(Error::InvalidArgument(format!("degenerate rectangle section {width} x {height}")));
                }
                Ok(SectionProperties {
                    area: width * height,
                    i_y: width * height.powi(3) / 12.0,
                    i_z: height * width.powi(3) / 12.0,
                    torsion: rectangle_torsion_constant(width, height),
                })
            }
            Section::Circle { diameter } => {
                if !(diameter.is_finite() && diameter > 0.0) {
                    return Err(Error::InvalidArgument(format!("degenerate circular section {diameter}")));
                }
                let i = std::f64::consts::PI * diameter.powi(4) / 64.0;
                Ok(SectionProperties {
                    area: std::f64::consts::PI * diameter * diameter / 4.0,
                    i_y: i,
                    i_z: i,
                    torsion: 2.0 * i,
                })
            }
        }
    }

    /// Section with twice the area, doubling the extent along local z.
    /// Circles keep their shape and scale the diameter by √2.
    pub fn doubled(&self) -> Section {
        match *self {
            Section::Rectangle { width, height } => Section::Rectangle {
                width,
                height: 2.0 * height,
            },
            Section::Circle { diameter } => Section::Circle {
                diameter: diameter * std::f64::consts::SQRT_2,
            },
        }
    }
}

/// Single-term approximation `J = a b³ (1/3 − 0.21 (b/a)(1 − b⁴/(12 a⁴)))`, a ≥ b.
pub fn rectangle_torsion_constant(width: f64, height: f64) -> f64 {
    let (a, b) = if width >= height { (width, height) } else { (height, width) };
    let r = b / a;
    a * b.powi(3) * (1.0 / 3.0 - 0.21 * r * (1.0 - r.powi(4) / 12.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    /// mm
    pub length: f64,
    /// N/mm²
    pub elastic_modulus: f64,
    /// N/mm²
    pub shear_modulus: f64,
    pub section: Section,
}

impl BeamSpec {
    pub fn validate(&self) -> Result<SectionProperties> {
        for (name, v) in [
            ("length", self.length),
            ("elastic_modulus", self.elastic_modulus),
            ("shear_modulus", self.shear_modulus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("beam {name} must be > 0, got {v}")));
            }
        }
        self.section.properties()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplianceSource {
    AnalyticBeam,
    BeamChain,
    External,
    Parallelogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkCompliance {
    c: Matrix6<f64>,
    source: ComplianceSource,
}

impl LinkCompliance {
    /// Accepts a symmetric positive definite compliance.
    pub fn new(c: Matrix6<f64>, source: ComplianceSource) -> Result<Self> {
        check_compliance(&c, COMPLIANCE_SYMMETRY_TOL)?;
        Ok(Self { c, source })
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.c
    }

    pub fn source(&self) -> ComplianceSource {
        self.source
    }

    pub fn stiffness(&self) -> Matrix6<f64> {
        let k = crate::chain::spd_inverse6(&self.c);
        (k + k.transpose()) * 0.5
    }

    /// Same compliance expressed in a frame rotated by `r` (the columns of `r`
    /// are the old axes in new coordinates).
    pub fn rotated(&self, r: &Matrix3<f64>) -> LinkCompliance {
        let mut b = Matrix6::zeros();
        b.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
        b.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
        let c = b * self.c * b.transpose();
        LinkCompliance {
            c: (c + c.transpose()) * 0.5,
            source: self.source,
        }
    }
}

fn check_compliance(c: &Matrix6<f64>, sym_tol: f64) -> Result<()> {
    if !c.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("compliance has non-finite entries".into()));
    }
    let scale = c.amax();
    let asym = (c - c.transpose()).amax();
    if scale == 0.0 || asym > sym_tol * scale {
        return Err(Error::InvalidArgument(format!(
            "compliance is not symmetric (relative asymmetry {:.3e})",
            if scale == 0.0 { f64::INFINITY } else { asym / scale }
        )));
    }
    let eig = ((c + c.transpose()) * 0.5).symmetric_eigenvalues();
    let min = eig.min();
    if min <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "compliance is not positive definite (eigenvalues {:?})",
            eig.as_slice()
        )));
    }
    Ok(())
}

/// Tip compliance of a cantilever beam in its own axes.
pub fn beam_compliance(spec: &BeamSpec) -> Result<LinkCompliance> {
    let p = spec.validate()?;
    let (l, e, g) = (spec.length, spec.elastic_modulus, spec.shear_modulus);
    let mut c = Matrix6::zeros();
    c[(0, 0)] = l / (e * p.area);
    c[(3, 3)] = l / (g * p.torsion);
    // bending in x–y: Fy deflects +y and turns the tip about +z
    c[(1, 1)] = l.powi(3) / (3.0 * e * p.i_z);
    c[(1, 5)] = l * l / (2.0 * e * p.i_z);
    c[(5, 1)] = c[(1, 5)];
    c[(5, 5)] = l / (e * p.i_z);
    // bending in x–z: Fz deflects +z and turns the tip about −y
    c[(2, 2)] = l.powi(3) / (3.0 * e * p.i_y);
    c[(2, 4)] = -l * l / (2.0 * e * p.i_y);
    c[(4, 2)] = c[(2, 4)];
    c[(4, 4)] = l / (e * p.i_y);
    LinkCompliance::new(c, ComplianceSource::AnalyticBeam)
}

/// Builds the spring-only serial chain for a list of beams. Each beam starts
/// at the end of the previous one composed with its offset.
pub fn beam_chain(beams: &[(BeamSpec, Transform)]) -> Result<ChainDescription> {
    if beams.is_empty() {
        return Err(Error::InvalidArgument("beam chain needs at least one beam".into()));
    }
    let mut elements = Vec::with_capacity(beams.len() * 3);
    for (i, (spec, offset)) in beams.iter().enumerate() {
        let c = beam_compliance(spec)?;
        elements.push(ChainElement::RigidLink { transform: *offset });
        elements.push(ChainElement::RigidLink { transform: trans(spec.length, 0.0, 0.0) });
        elements.push(ChainElement::Spring6 {
            label: format!("beam{i}"),
            stiffness: c.stiffness(),
        });
    }
    ChainDescription::new("beam-chain", elements)
}

/// Compliance `J_b K_b⁻¹ J_bᵀ` of a serial chain of beams, at the end of the
/// last beam in the axes of the chain base.
pub fn chain_link_compliances(beams: &[(BeamSpec, Transform)]) -> Result<LinkCompliance> {
    let chain = beam_chain(beams)?;
    let jac = chain_jacobians(&chain, &chain.zero_coordinates())?;
    let kinv = aggregate_spring_stiffness(&chain).inverse_dense();
    let c = &jac.j_theta * kinv * jac.j_theta.transpose();
    let c = Matrix6::from_fn(|i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    LinkCompliance::new(c, ComplianceSource::BeamChain)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub force: String,
}

/// On-disk form of an externally computed compliance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCompliance {
    /// Row-major 6×6.
    pub matrix: [[f64; 6]; 6],
    pub units: Units,
}

impl ExternalCompliance {
    pub fn from_matrix(c: &Matrix6<f64>) -> Self {
        Self {
            matrix: rows6(c),
            units: Units {
                length: "mm".into(),
                force: "N".into(),
            },
        }
    }
}

/// Accepts a compliance from an external solver after unit, symmetry and
/// definiteness checks; the stored matrix is `(C + Cᵀ)/2`.
pub fn load_external_compliance(data: &ExternalCompliance) -> Result<LinkCompliance> {
    if data.units.length != "mm" || data.units.force != "N" {
        return Err(Error::Units(format!(
            "expected length \"mm\" and force \"N\", got \"{}\" / \"{}\"",
            data.units.length, data.units.force
        )));
    }
    let c = from_rows6(&data.matrix);
    check_compliance(&c, EXTERNAL_SYMMETRY_TOL)?;
    Ok(LinkCompliance {
        c: (c + c.transpose()) * 0.5,
        source: ComplianceSource::External,
    })
}

pub fn read_external_compliance(path: &std::path::Path) -> Result<LinkCompliance> {
    let text = std::fs::read_to_string(path)?;
    let data: ExternalCompliance = serde_json::from_str(&text)?;
    load_external_compliance(&data)
}
