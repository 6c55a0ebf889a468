//! Independent reference solution of the chain kinetostatics.
//!
//! Minimises the spring energy `½ θᵀ Kθ θ` over `(θ, δq)` subject to the
//! displacement constraint `Jθ θ + Jq δq = δt`. The Lagrange multiplier of the
//! constraint is the end-effector wrench. The full KKT system is factored
//! directly with the dense (not inverted) spring stiffness, so it shares no
//! algebra with the reduced block system in [`crate::kinetostatics`].

use nalgebra::{DMatrix, DVector, Vector6};

use crate::chain::{aggregate_spring_stiffness, ChainCoordinates, ChainDescription};
use crate::error::{Error, Result};
use crate::jacobian::chain_jacobians;
use crate::spatial::SmallDisplacement;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub wrench: Vector6<f64>,
    pub dq: DVector<f64>,
    pub theta: DVector<f64>,
}

pub fn constrained_least_squares(
    chain: &ChainDescription,
    coords: &ChainCoordinates,
    dt: &SmallDisplacement,
) -> Result<OracleSolution> {
    let jac = chain_jacobians(chain, coords)?;
    let k = aggregate_spring_stiffness(chain).to_dense();
    let (nt, nq) = (chain.n_theta(), chain.n_passive());
    let n = nt + nq + 6;

    // [ Kθ   0   −Jθᵀ ] [θ ]   [0 ]
    // [ 0    0   −Jqᵀ ] [δq] = [0 ]
    // [ Jθ   Jq   0   ] [f ]   [δt]
    let mut kkt = DMatrix::zeros(n, n);
    kkt.view_mut((0, 0), (nt, nt)).copy_from(&k);
    kkt.view_mut((0, nt + nq), (nt, 6)).copy_from(&(-jac.j_theta.transpose()));
    kkt.view_mut((nt, nt + nq), (nq, 6)).copy_from(&(-jac.j_q.transpose()));
    kkt.view_mut((nt + nq, 0), (6, nt)).copy_from(&jac.j_theta);
    kkt.view_mut((nt + nq, nt), (6, nq)).copy_from(&jac.j_q);

    let mut rhs = DVector::zeros(n);
    rhs.rows_mut(nt + nq, 6).copy_from(&dt.to_vector());

    let lu = kkt.full_piv_lu();
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("oracle KKT system is singular".into()))?;
    Ok(OracleSolution {
        theta: x.rows(0, nt).into_owned(),
        dq: x.rows(nt, nq).into_owned(),
        wrench: Vector6::from_fn(|i, _| x[nt + nq + i]),
    })
}
