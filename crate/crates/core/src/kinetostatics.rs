//! Chain and manipulator stiffness from the kinetostatic block system.
//!
//! For one chain the unknowns are the end-effector wrench `f` and the passive
//! joint variation `δq`:
//!
//! ```text
//! [ Sθ   Jq ] [ f  ]   [ δt ]
//! [ Jqᵀ  Sq ] [ δq ] = [ 0  ]
//! ```
//!
//! with `Sθ = Jθ Kθ⁻¹ Jθᵀ` and `Sq = 0` for an unloaded chain. The chain
//! stiffness is the 6×6 block of the inverse at the `Sθ` position. Passive
//! joints make the system singular at some postures, so it is equilibrated
//! and pseudo-inverted with an explicit rank instead of being inverted.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};

use crate::chain::{aggregate_spring_stiffness, forward_transform, ChainCoordinates, ChainDescription};
use crate::error::{Error, Result};
use crate::jacobian::{chain_jacobians, ChainJacobians, DEFAULT_FD_STEP};
use crate::linalg::{
    max_eigenvalue3, min_eigenvalue3, pseudo_inverse, stiffness_null_space, symmetric_pseudo_inverse, stiffness_rank,
    BLOCK_RANK_TOL,
};
use crate::spatial::{displacement_between, SmallDisplacement, Transform};

/// Chains must meet within this distance to be summed (mm).
pub const POSE_TRANSLATION_TOL: f64 = 1e-6;
/// Chains must meet within this rotation to be summed (rad).
pub const POSE_ROTATION_TOL: f64 = 1e-8;

/// Force (N) and torque (N·mm) acting on the end-effector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>) -> Result<Self> {
        if !force.iter().chain(torque.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("wrench entries must be finite".into()));
        }
        Ok(Self { force, torque })
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            force: v.fixed_rows::<3>(0).into_owned(),
            torque: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStiffnessResult {
    pub k_chain: Matrix6<f64>,
    /// Numerical rank of `k_chain` after unit balancing.
    pub rank: usize,
    /// Numerical rank of `Jq` at the posture.
    pub passive_rank: usize,
    /// Rank kept when pseudo-inverting the block system.
    pub block_rank: usize,
}

/// Equilibrated and pseudo-inverted block system.
struct BlockSystem {
    inverse: DMatrix<f64>,
    rank: usize,
    passive_rank: usize,
}

impl BlockSystem {
    fn new(s: &DMatrix<f64>, jq: &DMatrix<f64>, sq: Option<&DMatrix<f64>>) -> Self {
        let nq = jq.ncols();
        let n = 6 + nq;
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (6, 6)).copy_from(s);
        m.view_mut((0, 6), (6, nq)).copy_from(jq);
        m.view_mut((6, 0), (nq, 6)).copy_from(&jq.transpose());
        if let Some(sq) = sq {
            m.view_mut((6, 6), (nq, nq)).copy_from(sq);
        }

        // symmetric diagonal scaling: unit diagonal on the compliance block,
        // unit columns on the scaled passive Jacobian
        let mut d = DVector::from_element(n, 1.0);
        for i in 0..6 {
            let sii = s[(i, i)].abs();
            if sii > 0.0 {
                d[i] = 1.0 / sii.sqrt();
            }
        }
        let mut scaled_jq = jq.clone();
        for i in 0..6 {
            scaled_jq.row_mut(i).scale_mut(d[i]);
        }
        for j in 0..nq {
            let norm = scaled_jq.column(j).norm();
            if norm > 0.0 {
                d[6 + j] = 1.0 / norm;
                scaled_jq.column_mut(j).scale_mut(d[6 + j]);
            }
        }
        let passive_rank = crate::linalg::numerical_rank(&scaled_jq, 1e-9);

        let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
        // the unloaded system is symmetric by construction; loaded ones only
        // when the load terms happen to be
        let asym = (&scaled - scaled.transpose()).amax();
        let p = if asym <= 1e-12 * scaled.amax() {
            symmetric_pseudo_inverse(&scaled, BLOCK_RANK_TOL)
        } else {
            pseudo_inverse(&scaled, BLOCK_RANK_TOL)
        };
        let inverse = DMatrix::from_fn(n, n, |i, j| p.inverse[(i, j)] * d[i] * d[j]);
        Self {
            inverse,
            rank: p.rank,
            passive_rank,
        }
    }

    fn stiffness(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| self.inverse[(i, j)])
    }

    fn solve(&self, dt: &Vector6<f64>) -> (Vector6<f64>, DVector<f64>) {
        let n = self.inverse.nrows();
        let mut rhs = DVector::zeros(n);
        rhs.rows_mut(0, 6).copy_from(dt);
        let x = &self.inverse * rhs;
        let f = Vector6::from_fn(|i, _| x[i]);
        (f, x.rows(6, n - 6).into_owned())
    }

    fn result(&self) -> ChainStiffnessResult {
        let k_chain = self.stiffness();
        ChainStiffnessResult {
            rank: stiffness_rank(&k_chain),
            k_chain,
            passive_rank: self.passive_rank,
            block_rank: self.rank,
        }
    }
}

fn unloaded_block_system(chain: &ChainDescription, coords: &ChainCoordinates) -> Result<(BlockSystem, ChainJacobians)> {
    let jac = chain_jacobians(chain, coords)?;
    if chain.n_theta() == 0 {
        return Err(Error::validation(format!("chain '{}'", chain.name()), "chain has no virtual springs"));
    }
    let kinv = aggregate_spring_stiffness(chain).inverse_dense();
    let s = &jac.j_theta * kinv * jac.j_theta.transpose();
    let s = (&s + s.transpose()) * 0.5;
    Ok((BlockSystem::new(&s, &jac.j_q, None), jac))
}

/// Stiffness of one chain linearised at `coords` with no external load.
///
/// Rank-deficient block systems are not an error: the pseudo-inverse is used
/// and the reduced rank is reported.
pub fn chain_stiffness_unloaded(chain: &ChainDescription, coords: &ChainCoordinates) -> Result<ChainStiffnessResult> {
    let (block, _) = unloaded_block_system(chain, coords)?;
    Ok(block.result())
}

/// Wrench and passive-joint motion of an unloaded chain for an imposed
/// end-effector displacement.
pub fn solve_chain_displacement(
    chain: &ChainDescription,
    coords: &ChainCoordinates,
    dt: &SmallDisplacement,
) -> Result<(Wrench, DVector<f64>)> {
    let (block, _) = unloaded_block_system(chain, coords)?;
    let (f, dq) = block.solve(&dt.to_vector());
    Ok((Wrench::from_vector(&f), dq))
}

/// Central-difference derivative of `x ↦ J(x)ᵀ f` for one coordinate group.
fn jacobian_transpose_derivative(
    chain: &ChainDescription,
    coords: &ChainCoordinates,
    f: &Vector6<f64>,
    passive: bool,
    step: f64,
) -> Result<DMatrix<f64>> {
    let n = if passive { chain.n_passive() } else { chain.n_theta() };
    let project = |c: &ChainCoordinates| -> Result<DVector<f64>> {
        let j = chain_jacobians(chain, c)?;
        let m = if passive { j.j_q } else { j.j_theta };
        Ok(m.transpose() * f)
    };
    let mut d = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut plus = coords.clone();
        let mut minus = coords.clone();
        if passive {
            plus.q_passive[k] += step;
            minus.q_passive[k] -= step;
        } else {
            plus.theta[k] += step;
            minus.theta[k] -= step;
        }
        let col = (project(&plus)? - project(&minus)?) / (2.0 * step);
        d.column_mut(k).copy_from(&col);
    }
    Ok(d)
}

/// Stiffness of one chain in a loaded equilibrium.
///
/// `coords` must already be the equilibrium under `f_ext`. The spring block
/// becomes `Kθ − ∂(Jθᵀf)/∂θ` and the passive block gains `∂(Jqᵀf)/∂q`; both
/// derivatives are taken by central differences. The result need not be
/// symmetric.
pub fn chain_stiffness_loaded(
    chain: &ChainDescription,
    coords: &ChainCoordinates,
    f_ext: &Wrench,
) -> Result<ChainStiffnessResult> {
    let jac = chain_jacobians(chain, coords)?;
    if chain.n_theta() == 0 {
        return Err(Error::validation(format!("chain '{}'", chain.name()), "chain has no virtual springs"));
    }
    let f = f_ext.to_vector();
    let d_theta = jacobian_transpose_derivative(chain, coords, &f, false, DEFAULT_FD_STEP)?;
    let d_q = jacobian_transpose_derivative(chain, coords, &f, true, DEFAULT_FD_STEP)?;

    let k_mod = aggregate_spring_stiffness(chain).to_dense() - d_theta;
    let sym = (&k_mod + k_mod.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig <= 0.0 {
        return Err(Error::LoadedInstability {
            chain: chain.name().to_string(),
            eigenvalue: min_eig,
        });
    }
    let lu = k_mod.lu();
    let x = lu
        .solve(&jac.j_theta.transpose())
        .ok_or_else(|| Error::Numerical(format!("load-modified spring stiffness of chain '{}' is singular", chain.name())))?;
    let s = &jac.j_theta * x;
    Ok(BlockSystem::new(&s, &jac.j_q, Some(&d_q)).result())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManipulatorStiffness {
    pub k_total: Matrix6<f64>,
    pub per_chain: Vec<ChainStiffnessResult>,
    /// Common end-effector pose the chains were checked against.
    pub end_pose: Transform,
}

/// Sum of chain stiffnesses at a common end-effector pose.
///
/// With a non-zero `load`, each chain carries the share `f_i = K_i K_m⁻¹ f`
/// of the unloaded superposition and is evaluated with the loaded formulas
/// at the supplied coordinates.
pub fn manipulator_stiffness(
    chains: &[(ChainDescription, ChainCoordinates)],
    load: Option<&Wrench>,
) -> Result<ManipulatorStiffness> {
    let Some((first_chain, first_coords)) = chains.first() else {
        return Err(Error::InvalidArgument("manipulator has no chains".into()));
    };
    let end_pose = forward_transform(first_chain, first_coords)?;
    for (chain, coords) in &chains[1..] {
        let pose = forward_transform(chain, coords)?;
        let gap = displacement_between(&end_pose, &pose);
        let (dt, dr) = (gap.dp.norm(), gap.dphi.norm());
        if dt > POSE_TRANSLATION_TOL || dr > POSE_ROTATION_TOL {
            return Err(Error::InconsistentPose {
                chain: chain.name().to_string(),
                translation_gap: dt,
                rotation_gap: dr,
            });
        }
    }

    let per_chain = chains
        .iter()
        .map(|(c, q)| chain_stiffness_unloaded(c, q))
        .collect::<Result<Vec<_>>>()?;
    let k_total = per_chain.iter().map(|r| r.k_chain).sum::<Matrix6<f64>>();

    let load = match load {
        Some(w) if !w.is_zero() => w,
        _ => {
            return Ok(ManipulatorStiffness {
                k_total,
                per_chain,
                end_pose,
            })
        }
    };

    let rank = stiffness_rank(&k_total);
    let inv = match k_total.try_inverse() {
        Some(inv) if rank == 6 => inv,
        _ => {
            return Err(Error::SingularStiffness {
                rank,
                null_space: stiffness_null_space(&k_total),
            })
        }
    };
    let dt = inv * load.to_vector();
    let loaded = chains
        .iter()
        .zip(&per_chain)
        .map(|((c, q), r)| chain_stiffness_loaded(c, q, &Wrench::from_vector(&(r.k_chain * dt))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ManipulatorStiffness {
        k_total: loaded.iter().map(|r| r.k_chain).sum(),
        per_chain: loaded,
        end_pose,
    })
}

/// `δt = K⁻¹ w`.
pub fn deflection_under_load(ms: &ManipulatorStiffness, w: &Wrench) -> Result<SmallDisplacement> {
    let rank = stiffness_rank(&ms.k_total);
    if rank < 6 {
        return Err(Error::SingularStiffness {
            rank,
            null_space: stiffness_null_space(&ms.k_total),
        });
    }
    let lu = ms.k_total.lu();
    let dt = lu
        .solve(&w.to_vector())
        .ok_or_else(|| Error::Numerical("stiffness matrix LU failed".into()))?;
    Ok(SmallDisplacement::from_vector(&dt))
}

/// Scalar stiffness indices of a 6×6 stiffness matrix.
///
/// `k_tran` / `k_rot` are the smallest eigenvalues of the translational and
/// rotational diagonal blocks of `K`. `c_tran` / `c_rot` are the largest
/// eigenvalues of the corresponding blocks of `K⁻¹` and are absent when `K`
/// is singular.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessIndices {
    pub k_tran: f64,
    pub k_rot: f64,
    pub c_tran: Option<f64>,
    pub c_rot: Option<f64>,
    pub translational_block: Matrix3<f64>,
    pub rotational_block: Matrix3<f64>,
}

impl StiffnessIndices {
    pub fn from_matrix(k: &Matrix6<f64>) -> Self {
        let tb = k.fixed_view::<3, 3>(0, 0).into_owned();
        let rb = k.fixed_view::<3, 3>(3, 3).into_owned();
        let (c_tran, c_rot) = match compliance(k) {
            Some(c) => (
                Some(max_eigenvalue3(&c.fixed_view::<3, 3>(0, 0).into_owned())),
                Some(max_eigenvalue3(&c.fixed_view::<3, 3>(3, 3).into_owned())),
            ),
            None => (None, None),
        };
        Self {
            k_tran: min_eigenvalue3(&tb),
            k_rot: min_eigenvalue3(&rb),
            c_tran,
            c_rot,
            translational_block: tb,
            rotational_block: rb,
        }
    }
}

pub fn stiffness_indices(ms: &ManipulatorStiffness) -> StiffnessIndices {
    StiffnessIndices::from_matrix(&ms.k_total)
}

/// `K⁻¹` when `K` has full balanced rank.
pub fn compliance(k: &Matrix6<f64>) -> Option<Matrix6<f64>> {
    if stiffness_rank(k) < 6 {
        return None;
    }
    k.try_inverse()
}

/// 2-norm condition number of the unit-balanced stiffness matrix.
pub fn balanced_condition_number(k: &Matrix6<f64>) -> f64 {
    let sv = crate::linalg::balanced(k).singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainElement;
    use crate::spatial::{rot, trans, Axis, ElementaryAxis};

    fn spd(seed: u64, t: f64, r: f64) -> Matrix6<f64> {
        let a = Matrix6::from_fn(|i, j| (((i * 13 + j * 7 + seed as usize * 3) % 11) as f64 - 5.0) / 5.0);
        let d = Matrix6::from_diagonal(&Vector6::new(t, t, t, r, r, r).map(f64::sqrt));
        d * (a * a.transpose() + Matrix6::identity()) * d
    }

    fn reference_chain() -> ChainDescription {
        ChainDescription::new(
            "ref",
            vec![
                ChainElement::ActuatedJoint {
                    axis: ElementaryAxis::translation(Axis::X),
                    stiffness: 1e4,
                },
                ChainElement::RigidLink { transform: rot(Axis::Z, std::f64::consts::PI).compose(&trans(0.0, 100.0, 0.0)) },
                ChainElement::Spring6 { label: "foot".into(), stiffness: spd(1, 3e4, 1e8) },
                ChainElement::PassiveU { first: Axis::Z, second: Axis::Y },
                ChainElement::RigidLink { transform: trans(310.0, 0.0, 0.0) },
                ChainElement::Spring6 { label: "leg".into(), stiffness: spd(2, 3e5, 5e7) },
                ChainElement::PassiveU { first: Axis::Y, second: Axis::Z },
                ChainElement::RigidLink { transform: trans(0.0, 100.0, 0.0) },
            ],
        )
        .unwrap()
    }

    fn posture() -> ChainCoordinates {
        ChainCoordinates::new(40.0, vec![0.3, -0.2, 0.2, -0.3], vec![0.0; 13])
    }

    #[test]
    fn spring_passes_through() {
        let k = spd(4, 2e4, 3e7);
        let c = ChainDescription::new("s", vec![ChainElement::Spring6 { label: "only".into(), stiffness: k }]).unwrap();
        let r = chain_stiffness_unloaded(&c, &c.zero_coordinates()).unwrap();
        let rel = (r.k_chain - k).amax() / k.amax();
        assert!(rel < 1e-10, "{rel}");
        assert_eq!(r.rank, 6);
        assert_eq!(r.passive_rank, 0);
    }

    #[test]
    fn passive_motion_is_free() {
        let c = reference_chain();
        let q = posture();
        let r = chain_stiffness_unloaded(&c, &q).unwrap();
        let jq = chain_jacobians(&c, &q).unwrap().j_q;
        let svd = jq.clone().svd(true, false);
        let u = svd.u.unwrap();
        for k in 0..4 {
            let dt = Vector6::from_fn(|i, _| u[(i, k)]);
            let f = r.k_chain * dt;
            assert!(f.amax() <= 1e-9 * r.k_chain.amax(), "{}", f.amax());
        }
        assert_eq!(r.passive_rank, 4);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn unloaded_is_symmetric_psd() {
        let c = reference_chain();
        let r = chain_stiffness_unloaded(&c, &posture()).unwrap();
        let k = r.k_chain;
        assert!((k - k.transpose()).amax() < 1e-8 * k.amax());
        let sym = (k + k.transpose()) * 0.5;
        assert!(sym.symmetric_eigenvalues().min() >= -1e-8 * k.norm());
    }

    #[test]
    fn scaling_springs_scales_stiffness() {
        let c = reference_chain();
        let scaled: Vec<_> = c
            .elements()
            .iter()
            .map(|e| match e {
                ChainElement::ActuatedJoint { axis, stiffness } => ChainElement::ActuatedJoint { axis: *axis, stiffness: stiffness * 3.5 },
                ChainElement::Spring6 { label, stiffness } => ChainElement::Spring6 { label: label.clone(), stiffness: stiffness * 3.5 },
                other => other.clone(),
            })
            .collect();
        let c2 = ChainDescription::new("scaled", scaled).unwrap();
        let k1 = chain_stiffness_unloaded(&c, &posture()).unwrap().k_chain;
        let k2 = chain_stiffness_unloaded(&c2, &posture()).unwrap().k_chain;
        assert!((k2 - k1 * 3.5).amax() < 1e-10 * k2.amax());
    }

    #[test]
    fn zero_load_matches_unloaded() {
        let c = reference_chain();
        let k0 = chain_stiffness_unloaded(&c, &posture()).unwrap().k_chain;
        let kl = chain_stiffness_loaded(&c, &posture(), &Wrench::default()).unwrap().k_chain;
        assert!((kl - k0).amax() < 1e-9 * k0.amax());
    }

    #[test]
    fn load_response_is_linear() {
        let c = reference_chain();
        let k0 = chain_stiffness_unloaded(&c, &posture()).unwrap().k_chain;
        let dir = Wrench::new(Vector3::new(0.6, -0.48, 0.64), Vector3::zeros()).unwrap();
        let delta = |eps: f64| {
            let w = Wrench::from_vector(&(dir.to_vector() * eps));
            (chain_stiffness_loaded(&c, &posture(), &w).unwrap().k_chain - k0).norm()
        };
        let (d3, d4) = (delta(1e-3), delta(1e-4));
        let ratio = d3 / d4;
        assert!((5.0..20.0).contains(&ratio), "{ratio} ({d3:e}, {d4:e})");
    }

    #[test]
    fn buckling_load_reports_eigenvalue() {
        let soft = ChainDescription::new(
            "soft",
            vec![
                ChainElement::Spring6 { label: "root".into(), stiffness: Matrix6::identity() },
                ChainElement::RigidLink { transform: trans(1000.0, 0.0, 0.0) },
            ],
        )
        .unwrap();
        // compressive load on a long soft cantilever
        let w = Wrench::new(Vector3::new(-100.0, 0.0, 0.0), Vector3::zeros()).unwrap();
        match chain_stiffness_loaded(&soft, &soft.zero_coordinates(), &w) {
            Err(Error::LoadedInstability { eigenvalue, .. }) => assert!(eigenvalue <= 0.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn superposition_of_identical_chains() {
        let c = reference_chain();
        let q = posture();
        let single = manipulator_stiffness(&[(c.clone(), q.clone())], None).unwrap();
        let r = chain_stiffness_unloaded(&c, &q).unwrap();
        assert_eq!(single.k_total, r.k_chain);
        let triple = manipulator_stiffness(&[(c.clone(), q.clone()), (c.clone(), q.clone()), (c, q)], None).unwrap();
        assert!((triple.k_total - r.k_chain * 3.0).amax() <= 1e-12 * r.k_chain.amax());
    }

    #[test]
    fn mismatched_poses_rejected() {
        let c = reference_chain();
        let mut other = posture();
        other.q_act += 1.0;
        let err = manipulator_stiffness(&[(c.clone(), posture()), (c, other)], None).unwrap_err();
        assert!(matches!(err, Error::InconsistentPose { .. }));
    }

    #[test]
    fn deflection_round_trip_and_spectrum() {
        let k = spd(5, 1e4, 1e7);
        let ms = ManipulatorStiffness {
            k_total: k,
            per_chain: vec![],
            end_pose: Transform::identity(),
        };
        let zero = deflection_under_load(&ms, &Wrench::default()).unwrap();
        assert_eq!(zero.to_vector(), Vector6::zeros());

        let w = Wrench::from_vector(&Vector6::new(3.0, -1.0, 2.0, 100.0, 50.0, -20.0));
        let dt = deflection_under_load(&ms, &w).unwrap().to_vector();
        assert!((k * dt - w.to_vector()).norm() <= 1e-9 * w.to_vector().norm());

        let eig = k.symmetric_eigen();
        let v = eig.eigenvectors.column(2).into_owned();
        let dt = deflection_under_load(&ms, &Wrench::from_vector(&v)).unwrap().to_vector();
        assert!((dt - v / eig.eigenvalues[2]).norm() <= 1e-9 * dt.norm());

        let mut sing = k;
        sing.row_mut(0).fill(0.0);
        sing.column_mut(0).fill(0.0);
        let ms = ManipulatorStiffness { k_total: sing, ..ms };
        match deflection_under_load(&ms, &w) {
            Err(Error::SingularStiffness { rank, null_space }) => {
                assert_eq!(rank, 5);
                assert_eq!(null_space.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indices() {
        let k = Matrix6::from_diagonal(&Vector6::new(2.0, 2.0, 2.0, 7.0, 7.0, 7.0));
        let i = StiffnessIndices::from_matrix(&k);
        assert!((i.k_tran - 2.0).abs() < 1e-12 && (i.k_rot - 7.0).abs() < 1e-12);
        let k = Matrix6::from_diagonal(&Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        let i = StiffnessIndices::from_matrix(&k);
        assert!((i.k_tran - 1.0).abs() < 1e-12 && (i.k_rot - 4.0).abs() < 1e-12);
        assert!((i.c_tran.unwrap() - 1.0).abs() < 1e-12);
        assert!((i.c_rot.unwrap() - 0.25).abs() < 1e-12);
    }
}
