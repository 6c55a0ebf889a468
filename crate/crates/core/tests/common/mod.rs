//! Shared fixtures and independent reference computations for the
//! integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};
use rand::Rng;

use pkm_stiffness::chain::{aggregate_spring_stiffness, forward_transform};
use pkm_stiffness::jacobian::ChainJacobians;
use pkm_stiffness::spatial::{rot, trans};
use pkm_stiffness::{Axis, ChainCoordinates, ChainDescription, ChainElement, ElementaryAxis, Transform};

/// Random symmetric positive definite 6×6 with translational scale `t` and
/// rotational scale `r`.
pub fn random_spd<R: Rng>(rng: &mut R, t: f64, r: f64) -> Matrix6<f64> {
    let a = Matrix6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let d = Matrix6::from_diagonal(&Vector6::new(t, t, t, r, r, r).map(f64::sqrt));
    let k = d * (a * a.transpose() + Matrix6::identity() * 0.5) * d;
    (k + k.transpose()) * 0.5
}

/// Prismatic actuator, foot spring, U joint, leg, leg spring, U joint:
/// 13 spring coordinates and 4 passive ones.
pub fn reference_chain<R: Rng>(rng: &mut R) -> ChainDescription {
    ChainDescription::new(
        "reference",
        vec![
            ChainElement::RigidLink {
                transform: rot(Axis::Z, 0.4).compose(&trans(5.0, -120.0, 10.0)),
            },
            ChainElement::ActuatedJoint {
                axis: ElementaryAxis::translation(Axis::X),
                stiffness: 1e4,
            },
            ChainElement::RigidLink {
                transform: rot(Axis::Z, std::f64::consts::PI).compose(&trans(0.0, 120.0, 0.0)),
            },
            ChainElement::Spring6 {
                label: "foot".into(),
                stiffness: random_spd(rng, 3e4, 1e8),
            },
            ChainElement::PassiveU {
                first: Axis::Z,
                second: Axis::Y,
            },
            ChainElement::RigidLink {
                transform: trans(310.0, 0.0, 0.0),
            },
            ChainElement::Spring6 {
                label: "leg".into(),
                stiffness: random_spd(rng, 2e5, 5e7),
            },
            ChainElement::PassiveU {
                first: Axis::Y,
                second: Axis::Z,
            },
        ],
    )
    .unwrap()
}

pub fn random_reference_posture<R: Rng>(rng: &mut R) -> ChainCoordinates {
    ChainCoordinates::new(
        rng.gen_range(-150.0..150.0),
        (0..4).map(|_| rng.gen_range(-1.2..1.2)).collect(),
        (0..13).map(|_| rng.gen_range(-1e-3..1e-3)).collect(),
    )
}

fn random_axis<R: Rng>(rng: &mut R) -> Axis {
    [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)]
}

fn random_transform<R: Rng>(rng: &mut R) -> Transform {
    rot(random_axis(rng), rng.gen_range(-3.0..3.0))
        .compose(&rot(random_axis(rng), rng.gen_range(-3.0..3.0)))
        .compose(&trans(
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-200.0..200.0),
            rng.gen_range(-200.0..200.0),
        ))
}

/// Random serial chain: an optional actuator, one to three six-dof springs,
/// and one to five passive coordinates (R and U joints), separated by random
/// rigid links.
pub fn random_chain<R: Rng>(rng: &mut R) -> (ChainDescription, ChainCoordinates) {
    let mut elements = vec![ChainElement::RigidLink {
        transform: random_transform(rng),
    }];
    if rng.gen_bool(0.7) {
        let axis = if rng.gen_bool(0.5) {
            ElementaryAxis::translation(random_axis(rng))
        } else {
            ElementaryAxis::rotation(random_axis(rng))
        };
        elements.push(ChainElement::ActuatedJoint {
            axis,
            stiffness: rng.gen_range(1e3..1e6),
        });
    }
    let n_springs = rng.gen_range(1..=3);
    let n_passive_target = rng.gen_range(1..=5);
    let mut springs = 0;
    let mut passive = 0;
    while springs < n_springs || passive < n_passive_target {
        elements.push(ChainElement::RigidLink {
            transform: random_transform(rng),
        });
        let want_spring = springs < n_springs && (passive >= n_passive_target || rng.gen_bool(0.5));
        if want_spring {
            let (t, r) = (rng.gen_range(1e3..1e6), rng.gen_range(1e6..1e9));
            elements.push(ChainElement::Spring6 {
                label: format!("s{springs}"),
                stiffness: random_spd(rng, t, r),
            });
            springs += 1;
        } else if n_passive_target - passive >= 2 && rng.gen_bool(0.5) {
            let first = random_axis(rng);
            let second = loop {
                let a = random_axis(rng);
                if a != first {
                    break a;
                }
            };
            elements.push(ChainElement::PassiveU { first, second });
            passive += 2;
        } else {
            elements.push(ChainElement::PassiveR { axis: random_axis(rng) });
            passive += 1;
        }
    }
    elements.push(ChainElement::RigidLink {
        transform: random_transform(rng),
    });
    let chain = ChainDescription::new("random", elements).unwrap();
    let coords = ChainCoordinates::new(
        rng.gen_range(-1.0..1.0),
        (0..chain.n_passive()).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        vec![0.0; chain.n_theta()],
    );
    (chain, coords)
}

fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    let a = (m - m.transpose()) * 0.5;
    Vector3::new(a[(2, 1)], a[(0, 2)], a[(1, 0)])
}

/// Central differences of the homogeneous end pose: translation from the
/// position difference, rotation from the skew part of `(R₊ − R₋) R₀ᵀ`.
pub fn fd_jacobians(chain: &ChainDescription, coords: &ChainCoordinates, h: f64) -> ChainJacobians {
    let r0 = forward_transform(chain, coords).unwrap().to_homogeneous();
    let r0t = r0.fixed_view::<3, 3>(0, 0).transpose();
    let column = |plus: ChainCoordinates, minus: ChainCoordinates| -> Vector6<f64> {
        let tp = forward_transform(chain, &plus).unwrap().to_homogeneous();
        let tm = forward_transform(chain, &minus).unwrap().to_homogeneous();
        let dp = (tp.fixed_view::<3, 1>(0, 3) - tm.fixed_view::<3, 1>(0, 3)) / (2.0 * h);
        let dr = (tp.fixed_view::<3, 3>(0, 0) - tm.fixed_view::<3, 3>(0, 0)) * r0t / (2.0 * h);
        let w = vee(&dr);
        Vector6::new(dp[0], dp[1], dp[2], w[0], w[1], w[2])
    };
    let mut j_theta = DMatrix::zeros(6, chain.n_theta());
    for k in 0..chain.n_theta() {
        let (mut p, mut m) = (coords.clone(), coords.clone());
        p.theta[k] += h;
        m.theta[k] -= h;
        j_theta.set_column(k, &column(p, m));
    }
    let mut j_q = DMatrix::zeros(6, chain.n_passive());
    for k in 0..chain.n_passive() {
        let (mut p, mut m) = (coords.clone(), coords.clone());
        p.q_passive[k] += h;
        m.q_passive[k] -= h;
        j_q.set_column(k, &column(p, m));
    }
    ChainJacobians { j_theta, j_q }
}

/// Null-space form of the chain stiffness: wrenches are restricted to the
/// annihilator `N` of the passive motions, `K = N (Nᵀ S N)⁻¹ Nᵀ` with
/// `S = Jθ Kθ⁻¹ Jθᵀ`.
pub fn null_space_stiffness(chain: &ChainDescription, jac: &ChainJacobians) -> Matrix6<f64> {
    let kt = aggregate_spring_stiffness(chain).to_dense();
    let chol = kt.cholesky().expect("spring stiffness must be SPD");
    let s = &jac.j_theta * chol.solve(&jac.j_theta.transpose());
    let n = annihilator(&jac.j_q);
    if n.ncols() == 0 {
        return Matrix6::zeros();
    }
    let reduced = n.transpose() * &s * &n;
    let inv = reduced.cholesky().expect("reduced compliance must be SPD").inverse();
    let k = &n * inv * n.transpose();
    Matrix6::from_fn(|i, j| 0.5 * (k[(i, j)] + k[(j, i)]))
}

/// Numerical column rank after normalising each column.
pub fn column_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let mut m = m.clone();
    for mut c in m.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    let sv = m.svd(false, false).singular_values;
    let max = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * max).count()
}

/// Orthonormal basis of the wrenches `f` with `Jqᵀ f = 0`.
pub fn annihilator(jq: &DMatrix<f64>) -> DMatrix<f64> {
    let r = column_rank(jq);
    if jq.ncols() == 0 {
        return DMatrix::identity(6, 6);
    }
    let mut full = DMatrix::zeros(6, 6.max(jq.ncols()));
    full.view_mut((0, 0), (6, jq.ncols())).copy_from(jq);
    let svd = full.svd(true, false);
    // columns of U beyond the rank span the orthogonal complement
    let u = svd.u.unwrap();
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let cols: Vec<_> = order[r..].iter().map(|&k| u.column(k).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Entrywise difference scaled by `√(Kᵢᵢ Kⱼⱼ)`, which makes mixed
/// translational/rotational units comparable.
pub fn balanced_error(a: &Matrix6<f64>, b: &Matrix6<f64>) -> f64 {
    let d: Vec<f64> = (0..6).map(|i| b[(i, i)].abs().max(a[(i, i)].abs())).collect();
    let mut worst = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let s = (d[i] * d[j]).sqrt();
            if s > 0.0 {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / s);
            }
        }
    }
    worst
}

/// Tip deflection of a cantilever under a transverse tip load by the unit
/// load method, `δ = ∫ M m / (E I) dx`, integrated with composite Simpson.
pub fn unit_load_tip_deflection(force: f64, length: f64, e: f64, i: f64) -> f64 {
    let n = 64;
    let h = length / n as f64;
    let integrand = |x: f64| force * (length - x) * (length - x) / (e * i);
    let mut sum = integrand(0.0) + integrand(length);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(k as f64 * h);
    }
    sum * h / 3.0
}
