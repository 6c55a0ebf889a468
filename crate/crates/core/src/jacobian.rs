//! Differential model `δt = Jθ·δθ + Jq·δq` of a chain.
//!
//! Every coordinate enters the chain product through elementary factors, so
//! the transform splits as `T = A · V(x) · B` with `A`, `B` constant at the
//! evaluation point. Differentiating the middle factor gives the unit twist
//! of the joint in frame `A·V`, which is then carried to the end-effector
//! origin and expressed in base axes.

use nalgebra::{DMatrix, Vector3};

use crate::chain::{factor_transform, ChainCoordinates, ChainDescription, Coord, Factor};
use crate::error::{Error, Result};
use crate::spatial::{displacement_between, Transform};
use crate::chain::forward_transform;

pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainJacobians {
    /// 6 × n_theta.
    pub j_theta: DMatrix<f64>,
    /// 6 × n_passive.
    pub j_q: DMatrix<f64>,
}

impl ChainJacobians {
    fn zeros(chain: &ChainDescription) -> Self {
        Self {
            j_theta: DMatrix::zeros(6, chain.n_theta()),
            j_q: DMatrix::zeros(6, chain.n_passive()),
        }
    }

    /// Largest entrywise difference over both Jacobians.
    pub fn max_abs_diff(&self, other: &ChainJacobians) -> f64 {
        let a = (&self.j_theta - &other.j_theta).amax();
        let b = (&self.j_q - &other.j_q).amax();
        a.max(b)
    }
}

/// Analytic Jacobians at `coords`.
pub fn chain_jacobians(chain: &ChainDescription, coords: &ChainCoordinates) -> Result<ChainJacobians> {
    chain.check_coordinates(coords)?;
    let factors = chain.factors();

    // frames[i] is the frame just after factor i
    let mut frames = Vec::with_capacity(factors.len());
    let mut acc = Transform::identity();
    for f in &factors {
        acc = acc.compose(&factor_transform(f, coords));
        frames.push(acc);
    }
    let end = *acc.translation();

    let mut jac = ChainJacobians::zeros(chain);
    for (f, frame) in factors.iter().zip(&frames) {
        let Factor::Joint { axis, terms } = f else { continue };
        let twist = axis.unit_twist();
        let r = frame.rotation();
        let w: Vector3<f64> = r * twist.fixed_rows::<3>(3);
        let v: Vector3<f64> = r * twist.fixed_rows::<3>(0) + w.cross(&(end - frame.translation()));
        for &(coord, coef) in terms {
            let col = match coord {
                Coord::Actuated => continue,
                Coord::Passive(i) => jac.j_q.column_mut(i),
                Coord::Theta(i) => jac.j_theta.column_mut(i),
            };
            let mut col = col;
            for k in 0..3 {
                col[k] += coef * v[k];
                col[k + 3] += coef * w[k];
            }
        }
    }
    Ok(jac)
}

/// Central-difference Jacobians, one column per spring and passive
/// coordinate. Used to validate [`chain_jacobians`].
pub fn finite_difference_jacobians(
    chain: &ChainDescription,
    coords: &ChainCoordinates,
    step: f64,
) -> Result<ChainJacobians> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step {step} must be > 0")));
    }
    let nominal = forward_transform(chain, coords)?;
    let column = |perturb: &dyn Fn(&mut ChainCoordinates, f64)| -> Result<[f64; 6]> {
        let mut plus = coords.clone();
        perturb(&mut plus, step);
        let mut minus = coords.clone();
        perturb(&mut minus, -step);
        let dp = displacement_between(&nominal, &forward_transform(chain, &plus)?).to_vector();
        let dm = displacement_between(&nominal, &forward_transform(chain, &minus)?).to_vector();
        let c = (dp - dm) / (2.0 * step);
        Ok([c[0], c[1], c[2], c[3], c[4], c[5]])
    };

    let mut jac = ChainJacobians::zeros(chain);
    for i in 0..chain.n_theta() {
        let c = column(&|cc, h| cc.theta[i] += h)?;
        jac.j_theta.column_mut(i).copy_from_slice(&c);
    }
    for i in 0..chain.n_passive() {
        let c = column(&|cc, h| cc.q_passive[i] += h)?;
        jac.j_q.column_mut(i).copy_from_slice(&c);
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainElement;
    use crate::spatial::{rot, trans, Axis, ElementaryAxis};
    use nalgebra::Matrix6;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_chain() -> ChainDescription {
        let k = Matrix6::identity();
        ChainDescription::new(
            "ref",
            vec![
                ChainElement::RigidLink { transform: rot(Axis::Z, 0.3).compose(&trans(0.0, 0.0, 20.0)) },
                ChainElement::ActuatedJoint {
                    axis: ElementaryAxis::translation(Axis::X),
                    stiffness: 1e4,
                },
                ChainElement::RigidLink { transform: rot(Axis::Z, std::f64::consts::PI).compose(&trans(0.0, 100.0, 0.0)) },
                ChainElement::Spring6 { label: "foot".into(), stiffness: k },
                ChainElement::PassiveU { first: Axis::Z, second: Axis::Y },
                ChainElement::RigidLink { transform: trans(310.0, 0.0, 0.0) },
                ChainElement::Spring6 { label: "leg".into(), stiffness: k },
                ChainElement::PassiveU { first: Axis::Y, second: Axis::Z },
                ChainElement::RigidLink { transform: trans(0.0, 100.0, 0.0) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn prismatic_at_chain_start() {
        let c = ChainDescription::new(
            "p",
            vec![
                ChainElement::PassiveR { axis: Axis::Z },
                ChainElement::RigidLink { transform: trans(0.0, 0.0, 0.0) },
            ],
        )
        .unwrap();
        // use a spring translation coordinate as the prismatic joint
        let s = ChainDescription::new(
            "s",
            vec![
                ChainElement::ActuatedJoint {
                    axis: ElementaryAxis::translation(Axis::X),
                    stiffness: 1.0,
                },
                ChainElement::RigidLink { transform: trans(40.0, -3.0, 2.0) },
            ],
        )
        .unwrap();
        let j = chain_jacobians(&s, &s.zero_coordinates()).unwrap();
        assert_eq!(j.j_theta.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(j.j_q.ncols(), 0);
        let j = chain_jacobians(&c, &c.zero_coordinates()).unwrap();
        assert_eq!(j.j_q.column(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn revolute_at_base_origin() {
        let p = (120.0, -45.0, 30.0);
        let c = ChainDescription::new(
            "r",
            vec![
                ChainElement::PassiveR { axis: Axis::Z },
                ChainElement::RigidLink { transform: trans(p.0, p.1, p.2) },
            ],
        )
        .unwrap();
        let coords = c.zero_coordinates();
        let j = chain_jacobians(&c, &coords).unwrap();
        let expected = [-p.1, p.0, 0.0, 0.0, 0.0, 1.0];
        let fd = finite_difference_jacobians(&c, &coords, 1e-6).unwrap();
        for k in 0..6 {
            assert!((j.j_q[(k, 0)] - expected[k]).abs() < 1e-12);
            assert!((fd.j_q[(k, 0)] - expected[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn analytic_matches_fd_on_reference_chain() {
        let c = reference_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let coords = ChainCoordinates {
                q_act: rng.gen_range(-100.0..100.0),
                q_passive: (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                theta: (0..13).map(|_| rng.gen_range(-1e-2..1e-2)).collect(),
            };
            let a = chain_jacobians(&c, &coords).unwrap();
            for step in [1e-5, 1e-6, 1e-7] {
                let fd = finite_difference_jacobians(&c, &coords, step).unwrap();
                let err = a.max_abs_diff(&fd);
                assert!(err < 1e-5, "step {step}: {err}");
            }
        }
    }

    #[test]
    fn fd_error_is_second_order() {
        let c = reference_chain();
        let coords = ChainCoordinates {
            q_act: 12.0,
            q_passive: vec![0.4, -0.3, 0.5, 0.2],
            theta: vec![0.0; 13],
        };
        let a = chain_jacobians(&c, &coords).unwrap();
        let e4 = a.max_abs_diff(&finite_difference_jacobians(&c, &coords, 1e-4).unwrap());
        let e5 = a.max_abs_diff(&finite_difference_jacobians(&c, &coords, 1e-5).unwrap());
        let ratio = e4 / e5;
        assert!((20.0..=500.0).contains(&ratio), "ratio {ratio} ({e4:e} / {e5:e})");
    }

    #[test]
    fn rigid_chain_has_no_columns() {
        let c = ChainDescription::new("rigid", vec![ChainElement::RigidLink { transform: trans(1.0, 2.0, 3.0) }]).unwrap();
        let fd = finite_difference_jacobians(&c, &c.zero_coordinates(), 1e-6).unwrap();
        assert_eq!(fd.j_theta.ncols(), 0);
        assert_eq!(fd.j_q.ncols(), 0);
        assert!(finite_difference_jacobians(&c, &c.zero_coordinates(), 0.0).is_err());
    }

    #[test]
    fn trailing_joint_has_no_translation() {
        // the end frame sits on the last joint axis, so it only rotates
        let c = ChainDescription::new(
            "tail",
            vec![
                ChainElement::RigidLink { transform: trans(50.0, 20.0, 0.0) },
                ChainElement::PassiveR { axis: Axis::X },
            ],
        )
        .unwrap();
        let j = chain_jacobians(&c, &c.zero_coordinates()).unwrap();
        assert_eq!(j.j_q.fixed_view::<3, 1>(0, 0).amax(), 0.0);
        assert_eq!(j.j_q[(3, 0)], 1.0);
    }

    #[test]
    fn j_theta_at_zero_depends_only_on_q() {
        let c = reference_chain();
        let mut a = c.zero_coordinates();
        a.q_passive = vec![0.1, 0.2, -0.2, -0.1];
        let mut b = a.clone();
        b.theta = vec![1e-3; 13];
        let ja = chain_jacobians(&c, &a).unwrap();
        let jb = chain_jacobians(&c, &b.rigid()).unwrap();
        assert_eq!(ja, jb);
    }
}
