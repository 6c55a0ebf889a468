//! Point evaluation, grid sweeps, two-model comparisons and the seeded
//! validation suite behind the command-line tool.
//!
//! Numbers in CSV output use Rust's shortest round-trip formatting in
//! exponent form (`{:e}`), so parsing a cell recovers the exact `f64`.

use std::io::Write;

use nalgebra::{Matrix6, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{ChainCoordinates, ChainDescription};
use crate::error::{Error, Result};
use crate::jacobian::{chain_jacobians, finite_difference_jacobians};
use crate::kinetostatics::{
    balanced_condition_number, chain_stiffness_unloaded, compliance, solve_chain_displacement, StiffnessIndices,
    Wrench,
};
use crate::linalg::{balancing_length, rows6, stiffness_rank};
use crate::model::{Model, Posed};
use crate::oracle::constrained_least_squares;
use crate::orthoglide::discriminants;
use crate::spatial::{MotionKind, SmallDisplacement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Reachable, but the stiffness matrix has rank below 6.
    Singular,
    Unreachable,
    /// A numerical failure other than reachability.
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Singular => "singular",
            Status::Unreachable => "unreachable",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicesReport {
    pub k_tran: f64,
    pub k_rot: f64,
    pub c_tran: Option<f64>,
    pub c_rot: Option<f64>,
    pub translational_block: [[f64; 3]; 3],
    pub rotational_block: [[f64; 3]; 3],
}

impl From<&StiffnessIndices> for IndicesReport {
    fn from(ix: &StiffnessIndices) -> Self {
        let block = |m: &nalgebra::Matrix3<f64>| {
            let mut out = [[0.0; 3]; 3];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = m[(i, j)];
                }
            }
            out
        };
        Self {
            k_tran: ix.k_tran,
            k_rot: ix.k_rot,
            c_tran: ix.c_tran,
            c_rot: ix.c_rot,
            translational_block: block(&ix.translational_block),
            rotational_block: block(&ix.rotational_block),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub name: String,
    pub rank: usize,
    pub passive_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainIkReport {
    pub rho: f64,
    pub q1: f64,
    pub q2: f64,
    pub discriminant: f64,
}

/// Full result of evaluating one model at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub model: String,
    pub point_mm: [f64; 3],
    pub load: Option<[f64; 6]>,
    pub status: Status,
    pub rank: usize,
    pub k_total: [[f64; 6]; 6],
    pub compliance: Option<[[f64; 6]; 6]>,
    pub indices: IndicesReport,
    /// Balanced 2-norm condition number; `None` when singular.
    pub condition_number: Option<f64>,
    pub near_singular: bool,
    pub chains: Vec<ChainReport>,
    pub ik: Option<Vec<ChainIkReport>>,
}

impl EvalReport {
    fn from_posed(model: &Model, posed: &Posed, load: Option<&Wrench>) -> Self {
        let k = posed.stiffness.k_total;
        let rank = stiffness_rank(&k);
        let c = if rank == 6 { compliance(&k) } else { None };
        let indices = StiffnessIndices::from_matrix(&k);
        let cond = balanced_condition_number(&k);
        Self {
            model: model.label(),
            point_mm: posed.point.into(),
            load: load.map(|w| w.to_vector().into()),
            status: if c.is_some() { Status::Ok } else { Status::Singular },
            rank,
            k_total: rows6(&k),
            compliance: c.as_ref().map(rows6),
            indices: IndicesReport::from(&indices),
            condition_number: (c.is_some() && cond.is_finite()).then_some(cond),
            near_singular: posed.ik.as_ref().is_some_and(|ik| ik.near_singular),
            chains: posed
                .stiffness
                .per_chain
                .iter()
                .zip(chain_names(model, posed))
                .map(|(r, name)| ChainReport {
                    name,
                    rank: r.rank,
                    passive_rank: r.passive_rank,
                })
                .collect(),
            ik: posed.ik.as_ref().map(|ik| {
                ik.chains
                    .iter()
                    .map(|c| ChainIkReport {
                        rho: c.rho,
                        q1: c.q1,
                        q2: c.q2,
                        discriminant: c.discriminant,
                    })
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

fn chain_names(model: &Model, posed: &Posed) -> Vec<String> {
    match model {
        Model::Explicit(chains) => chains.iter().map(|(c, _)| c.name().to_string()).collect(),
        Model::Builder(m) => (0..posed.stiffness.per_chain.len())
            .map(|k| {
                let q2 = posed.ik.as_ref().map_or(0.0, |ik| ik.chains[k].q2);
                m.chain(k, q2).map(|c| c.name().to_string()).unwrap_or_default()
            })
            .collect(),
    }
}

/// `cmd_eval`: stiffness of a model at one point, optionally loaded.
pub fn evaluate_point(model: &Model, point: Option<&Vector3<f64>>, load: Option<&Wrench>) -> Result<EvalReport> {
    let posed = model.evaluate(point, load)?;
    Ok(EvalReport::from_posed(model, &posed, load))
}

/// One sweep point. Unreachable and failed points keep their row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point_mm: [f64; 3],
    pub status: Status,
    pub rank: Option<usize>,
    pub k_tran: Option<f64>,
    pub k_rot: Option<f64>,
    pub c_tran: Option<f64>,
    pub c_rot: Option<f64>,
    pub condition_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_total: Option<[[f64; 6]; 6]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SweepRow {
    fn from_report(r: &EvalReport, full: bool) -> Self {
        Self {
            point_mm: r.point_mm,
            status: r.status,
            rank: Some(r.rank),
            k_tran: Some(r.indices.k_tran),
            k_rot: Some(r.indices.k_rot),
            c_tran: r.indices.c_tran,
            c_rot: r.indices.c_rot,
            condition_number: r.condition_number,
            k_total: full.then_some(r.k_total),
            message: None,
        }
    }

    fn from_error(point: &Vector3<f64>, err: &Error) -> Self {
        let status = match err {
            Error::OutOfWorkspace { .. } => Status::Unreachable,
            _ => Status::Failed,
        };
        Self {
            point_mm: (*point).into(),
            status,
            rank: None,
            k_tran: None,
            k_rot: None,
            c_tran: None,
            c_rot: None,
            condition_number: None,
            k_total: None,
            message: Some(err.to_string()),
        }
    }
}

/// Row for `point`, never an error: failures become a status.
pub fn sweep_row(model: &Model, point: &Vector3<f64>, full: bool) -> SweepRow {
    match evaluate_point(model, Some(point), None) {
        Ok(r) => SweepRow::from_report(&r, full),
        Err(e) => SweepRow::from_error(point, &e),
    }
}

/// Per-axis `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub axes: [AxisRange; 3],
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `"xmin:xmax:nx,ymin:ymax:ny,zmin:zmax:nz"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("grid '{s}': {why}"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("expected three comma-separated axes"));
        }
        let mut axes = [AxisRange {
            min: 0.0,
            max: 0.0,
            count: 1,
        }; 3];
        for (axis, part) in axes.iter_mut().zip(&parts) {
            let f: Vec<&str> = part.split(':').collect();
            if f.len() != 3 {
                return Err(bad("each axis is min:max:count"));
            }
            let min: f64 = f[0].trim().parse().map_err(|_| bad("min is not a number"))?;
            let max: f64 = f[1].trim().parse().map_err(|_| bad("max is not a number"))?;
            let count: usize = f[2].trim().parse().map_err(|_| bad("count is not a positive integer"))?;
            if !(min.is_finite() && max.is_finite()) || max < min {
                return Err(bad("need finite min <= max"));
            }
            if count == 0 || (count == 1 && min != max) {
                return Err(bad("count must be >= 1, and 1 only when min == max"));
            }
            *axis = AxisRange { min, max, count };
        }
        Ok(Self { axes })
    }
}

impl GridSpec {
    /// Points in lexicographic order of (ix, iy, iz), z varying fastest.
    pub fn points(&self) -> Vec<Vector3<f64>> {
        let [xs, ys, zs] = [self.axes[0].values(), self.axes[1].values(), self.axes[2].values()];
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(Vector3::new(x, y, z));
                }
            }
        }
        out
    }
}

/// `cmd_sweep`: rows in grid order, evaluated in parallel.
pub fn sweep(model: &Model, points: &[Vector3<f64>], full: bool) -> Result<Vec<SweepRow>> {
    if !model.supports_pose() {
        return Err(Error::InvalidArgument(
            "sweeps need a builder model; explicit chains have a fixed pose".into(),
        ));
    }
    Ok(points.par_iter().map(|p| sweep_row(model, p, full)).collect())
}

/// Reachability by the rail discriminants alone, independent of the solver.
pub fn reachable(leg_length: f64, point: &Vector3<f64>) -> bool {
    discriminants(leg_length, point).iter().all(|&d| d >= 0.0)
}

/// Shortest round-trip text for a number; empty for `None`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Units of `K[i][j]` in mm, N, rad.
fn k_unit(i: usize, j: usize) -> &'static str {
    match (i < 3, j < 3) {
        (true, true) => "N/mm",
        (false, false) => "N*mm/rad",
        (true, false) => "N/rad",
        (false, true) => "N",
    }
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "x[mm]",
    "y[mm]",
    "z[mm]",
    "status",
    "rank",
    "k_tran[N/mm]",
    "k_rot[N*mm/rad]",
    "c_tran[mm/N]",
    "c_rot[rad/(N*mm)]",
    "cond[-]",
];

pub fn sweep_header(full: bool) -> Vec<String> {
    let mut h: Vec<String> = SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect();
    if full {
        for i in 0..6 {
            for j in 0..6 {
                h.push(format!("K{}{}[{}]", i + 1, j + 1, k_unit(i, j)));
            }
        }
    }
    h
}

fn row_cells(r: &SweepRow, full: bool) -> Vec<String> {
    let mut cells = vec![
        fmt_num(r.point_mm[0]),
        fmt_num(r.point_mm[1]),
        fmt_num(r.point_mm[2]),
        r.status.as_str().to_string(),
        r.rank.map(|v| v.to_string()).unwrap_or_default(),
        opt(r.k_tran),
        opt(r.k_rot),
        opt(r.c_tran),
        opt(r.c_rot),
        opt(r.condition_number),
    ];
    if full {
        match &r.k_total {
            Some(k) => cells.extend(k.iter().flatten().map(|&v| fmt_num(v))),
            None => cells.extend(std::iter::repeat_n(String::new(), 36)),
        }
    }
    cells
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow], full: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sweep_header(full)).map_err(csv_err)?;
    for r in rows {
        w.write_record(row_cells(r, full)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_json<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Two models evaluated at the same point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub point_mm: [f64; 3],
    pub a: SweepRow,
    pub b: SweepRow,
    /// `k_tran(b) / k_tran(a)`.
    pub ratio_k_tran: Option<f64>,
    /// `k_rot(b) / k_rot(a)`.
    pub ratio_k_rot: Option<f64>,
    /// `c_rot(a) / c_rot(b)`: effective rotational stiffness ratio.
    pub ratio_c_rot: Option<f64>,
}

pub fn compare(a: &Model, b: &Model, points: &[Vector3<f64>]) -> Result<Vec<CompareRow>> {
    let ra = sweep(a, points, false)?;
    let rb = sweep(b, points, false)?;
    let div = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) if y != 0.0 => Some(x / y),
        _ => None,
    };
    Ok(ra
        .into_iter()
        .zip(rb)
        .map(|(a, b)| CompareRow {
            point_mm: a.point_mm,
            ratio_k_tran: div(b.k_tran, a.k_tran),
            ratio_k_rot: div(b.k_rot, a.k_rot),
            ratio_c_rot: div(a.c_rot, b.c_rot),
            a,
            b,
        })
        .collect())
}

pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow], labels: [&str; 2]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = SWEEP_COLUMNS[..3].iter().map(|s| s.to_string()).collect();
    for label in labels {
        for col in &SWEEP_COLUMNS[3..] {
            header.push(format!("{label}:{col}"));
        }
    }
    header.extend(["ratio_k_tran[-]", "ratio_k_rot[-]", "ratio_c_rot[-]"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut cells: Vec<String> = r.point_mm.iter().map(|&v| fmt_num(v)).collect();
        cells.extend(row_cells(&r.a, false).into_iter().skip(3));
        cells.extend(row_cells(&r.b, false).into_iter().skip(3));
        cells.extend([opt(r.ratio_k_tran), opt(r.ratio_k_rot), opt(r.ratio_c_rot)]);
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_eval_csv<W: Write>(out: W, report: &EvalReport, full: bool) -> Result<()> {
    write_sweep_csv(out, &[SweepRow::from_report(report, full)], full)
}

// ---------------------------------------------------------------------------
// validation suite

/// Pinned tolerances of the validation suite.
pub mod tolerances {
    /// Analytic vs central-difference Jacobian, absolute, per 1000 mm of
    /// the largest Jacobian entry (at least 1).
    pub const JACOBIAN: f64 = 1e-6;
    /// `‖K − Kᵀ‖∞ / ‖K‖∞`.
    pub const SYMMETRY: f64 = 1e-8;
    /// Smallest eigenvalue of `K` relative to its largest.
    pub const PSD: f64 = 1e-8;
    /// Block system vs constrained least squares, unit-balanced.
    pub const ORACLE: f64 = 1e-7;
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    pub postures: usize,
    pub fd_step: f64,
    /// Also report the Jacobian error for FD steps 1e-4 … 1e-8.
    pub fd_sweep: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            postures: 50,
            fd_step: crate::jacobian::DEFAULT_FD_STEP,
            fd_sweep: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub check: String,
    pub posture: usize,
    /// Seed that regenerates this posture on its own.
    pub posture_seed: u64,
    pub chain: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub runs: usize,
    pub failures: usize,
    /// Largest measured error (check-specific units, see tolerances).
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSweepEntry {
    pub step: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub postures: usize,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<CheckFailure>,
    pub fd_sweep: Option<Vec<FdSweepEntry>>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("validation: seed {} / {} postures\n", self.seed, self.postures);
        for c in &self.checks {
            s += &format!(
                "{:<10} {}  runs {:>4}  worst {:.3e}  tol {:.1e}\n",
                c.check,
                if c.failures == 0 { "PASS" } else { "FAIL" },
                c.runs,
                c.worst,
                c.tolerance
            );
        }
        if let Some(sweep) = &self.fd_sweep {
            s += "fd-step sweep (max |analytic - FD|):\n";
            for e in sweep {
                s += &format!("  h = {:.0e}: {:.3e}\n", e.step, e.max_error);
            }
        }
        for f in &self.failures {
            s += &format!(
                "FAIL {} posture {} (seed {}) chain '{}': {}\n",
                f.check, f.posture, f.posture_seed, f.chain, f.detail
            );
        }
        s
    }
}

const FD_SWEEP_STEPS: [f64; 5] = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

type Posture = Vec<(ChainDescription, ChainCoordinates)>;

/// Random posture of a model, as closed chains and as the same chains with
/// small random spring deflections.
fn random_posture(model: &Model, seed: u64) -> Result<(Posture, Posture)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chains: Vec<(ChainDescription, ChainCoordinates)> = match model {
        Model::Builder(m) => {
            let l = m.params().leg_length;
            // keep clear of the rail-perpendicular boundary
            let p = loop {
                let p = Vector3::from_fn(|_, _| rng.gen_range(-0.45 * l..0.45 * l));
                if discriminants(l, &p).iter().all(|&d| d > 0.1 * l * l) {
                    break p;
                }
            };
            m.at(&p)?.chains
        }
        Model::Explicit(chains) => chains
            .iter()
            .map(|(c, q)| {
                let mut q = q.clone();
                let act_scale = match actuated_kind(c) {
                    Some(MotionKind::Translation) => 10.0,
                    _ => 0.2,
                };
                q.q_act += rng.gen_range(-act_scale..act_scale);
                for v in &mut q.q_passive {
                    *v += rng.gen_range(-0.3..0.3);
                }
                (c.clone(), q)
            })
            .collect(),
    };
    // small spring deflections make the chain-level checks generic; they
    // break the common end pose, so they are kept separate
    let deflected = chains
        .iter()
        .map(|(c, q)| {
            let mut q = q.clone();
            for t in &mut q.theta {
                *t = rng.gen_range(-1e-3..1e-3);
            }
            (c.clone(), q)
        })
        .collect();
    Ok((chains, deflected))
}

fn actuated_kind(c: &ChainDescription) -> Option<MotionKind> {
    c.elements().iter().find_map(|e| match e {
        crate::chain::ChainElement::ActuatedJoint { axis, .. } => Some(axis.kind),
        _ => None,
    })
}

struct Measured {
    check: &'static str,
    value: f64,
    tolerance: f64,
    chain: String,
    detail: String,
}

fn balanced_dense(k: &Matrix6<f64>, l: f64) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| {
        let si = if i < 3 { 1.0 } else { 1.0 / l };
        let sj = if j < 3 { 1.0 } else { 1.0 / l };
        k[(i, j)] * si * sj
    })
}

fn check_chain(chain: &ChainDescription, coords: &ChainCoordinates, fd_step: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Measured>> {
    let name = chain.name().to_string();
    let mut out = Vec::new();
    let m = |check, value: f64, tolerance, detail: String| Measured {
        check,
        value,
        tolerance,
        chain: name.clone(),
        detail,
    };

    let an = chain_jacobians(chain, coords)?;
    let fd = finite_difference_jacobians(chain, coords, fd_step)?;
    let scale = (an.j_theta.amax().max(an.j_q.amax()) / 1e3).max(1.0);
    let err = an.max_abs_diff(&fd) / scale;
    out.push(m(
        "jacobian",
        err,
        tolerances::JACOBIAN,
        format!("max |analytic - FD| = {err:.3e} (step {fd_step:e})"),
    ));

    let r = chain_stiffness_unloaded(chain, coords)?;
    let k = r.k_chain;
    let asym = (k - k.transpose()).amax() / k.amax().max(f64::MIN_POSITIVE);
    out.push(m("symmetry", asym, tolerances::SYMMETRY, format!("relative asymmetry {asym:.3e}")));

    let eig = ((k + k.transpose()) * 0.5).symmetric_eigenvalues();
    let top = eig.amax().max(f64::MIN_POSITIVE);
    let neg = (-eig.min() / top).max(0.0);
    out.push(m("psd", neg, tolerances::PSD, format!("min eigenvalue {:.3e} of {:.3e}", eig.min(), top)));

    let expected = 6 - r.passive_rank;
    out.push(m(
        "rank",
        if r.rank == expected { 0.0 } else { 1.0 },
        0.5,
        format!("rank(K) = {}, 6 - rank(Jq) = {expected}", r.rank),
    ));

    // oracle: stiffness columns from the constrained least-squares problem
    let mut k_oracle = Matrix6::zeros();
    for c in 0..6 {
        let mut dt = nalgebra::Vector6::zeros();
        dt[c] = 1.0;
        let sol = constrained_least_squares(chain, coords, &SmallDisplacement::from_vector(&dt))?;
        k_oracle.set_column(c, &sol.wrench);
    }
    let l = balancing_length(&k_oracle);
    let diff = balanced_dense(&(k - k_oracle), l).amax() / balanced_dense(&k_oracle, l).amax().max(f64::MIN_POSITIVE);
    // and one random displacement through the solver's own entry point
    let dt = nalgebra::Vector6::from_fn(|i, _| if i < 3 { rng.gen_range(-1e-2..1e-2) } else { rng.gen_range(-1e-4..1e-4) });
    let (w, _) = solve_chain_displacement(chain, coords, &SmallDisplacement::from_vector(&dt))?;
    let sol = constrained_least_squares(chain, coords, &SmallDisplacement::from_vector(&dt))?;
    let wb = |v: &nalgebra::Vector6<f64>| nalgebra::Vector6::from_fn(|i, _| if i < 3 { v[i] } else { v[i] / l });
    let wdiff = (wb(&w.to_vector()) - wb(&sol.wrench)).amax() / wb(&sol.wrench).amax().max(f64::MIN_POSITIVE);
    let worst = diff.max(wdiff);
    out.push(m(
        "oracle",
        worst,
        tolerances::ORACLE,
        format!("stiffness {diff:.3e}, wrench {wdiff:.3e} (balanced relative)"),
    ));
    Ok(out)
}

/// `cmd_validate`: seeded invariant checks at random postures.
pub fn validate(model: &Model, opts: &ValidateOptions) -> Result<ValidationReport> {
    if !(opts.fd_step.is_finite() && opts.fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!("fd step {} must be > 0", opts.fd_step)));
    }
    let mut master = ChaCha8Rng::seed_from_u64(opts.seed);
    let seeds: Vec<u64> = (0..opts.postures).map(|_| master.gen()).collect();

    let per_posture: Vec<Result<(Vec<(usize, u64, Measured)>, Vec<f64>)>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let (chains, deflected) = random_posture(model, seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut measured = Vec::new();
            for (c, q) in &deflected {
                for m in check_chain(c, q, opts.fd_step, &mut rng)? {
                    measured.push((i, seed, m));
                }
            }
            let mut k_sum = Matrix6::zeros();
            for (c, q) in &chains {
                k_sum += chain_stiffness_unloaded(c, q)?.k_chain;
            }
            if let Model::Builder(_) = model {
                let ms = crate::kinetostatics::manipulator_stiffness(&chains, None)?;
                let agg = (ms.k_total - k_sum).amax();
                measured.push((
                    i,
                    seed,
                    Measured {
                        check: "aggregate",
                        value: agg,
                        tolerance: 0.0,
                        chain: "all".into(),
                        detail: format!("|K_m - sum K_i| = {agg:e}"),
                    },
                ));
                let min_eig = ((ms.k_total + ms.k_total.transpose()) * 0.5).symmetric_eigenvalues().min();
                measured.push((
                    i,
                    seed,
                    Measured {
                        check: "definite",
                        value: if min_eig > 0.0 { 0.0 } else { 1.0 },
                        tolerance: 0.5,
                        chain: "all".into(),
                        detail: format!("min eigenvalue of K_m {min_eig:.3e}"),
                    },
                ));
            }
            let mut sweep = Vec::new();
            if opts.fd_sweep {
                for &h in &FD_SWEEP_STEPS {
                    let mut worst: f64 = 0.0;
                    for (c, q) in &deflected {
                        let an = chain_jacobians(c, q)?;
                        worst = worst.max(an.max_abs_diff(&finite_difference_jacobians(c, q, h)?));
                    }
                    sweep.push(worst);
                }
            }
            Ok((measured, sweep))
        })
        .collect();

    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut failures = Vec::new();
    let mut fd = vec![0.0f64; FD_SWEEP_STEPS.len()];
    for (i, res) in per_posture.into_iter().enumerate() {
        let (measured, sweep) = match res {
            Ok(v) => v,
            Err(e) => {
                failures.push(CheckFailure {
                    check: "evaluate".into(),
                    posture: i,
                    posture_seed: seeds[i],
                    chain: String::new(),
                    detail: e.to_string(),
                });
                continue;
            }
        };
        for (k, v) in sweep.into_iter().enumerate() {
            fd[k] = fd[k].max(v);
        }
        for (posture, seed, m) in measured {
            let idx = match checks.iter().position(|c| c.check == m.check) {
                Some(idx) => idx,
                None => {
                    checks.push(CheckSummary {
                        check: m.check.to_string(),
                        runs: 0,
                        failures: 0,
                        worst: 0.0,
                        tolerance: m.tolerance,
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            c.runs += 1;
            c.worst = c.worst.max(m.value);
            if !(m.value <= m.tolerance) {
                c.failures += 1;
                failures.push(CheckFailure {
                    check: m.check.to_string(),
                    posture,
                    posture_seed: seed,
                    chain: m.chain,
                    detail: m.detail,
                });
            }
        }
    }
    Ok(ValidationReport {
        seed: opts.seed,
        postures: opts.postures,
        checks,
        failures,
        fd_sweep: opts.fd_sweep.then(|| {
            FD_SWEEP_STEPS
                .iter()
                .zip(fd)
                .map(|(&step, max_error)| FdSweepEntry { step, max_error })
                .collect()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelDocument, ParamsDoc};
    use crate::orthoglide::Architecture;
    use std::path::Path;

    fn model(arch: Architecture) -> Model {
        ModelDocument::builder(arch, ParamsDoc::default()).build(Path::new(".")).unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "-10:10:3, 0:0:1 ,5:6:2".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], Vector3::new(-10.0, 0.0, 5.0));
        assert_eq!(pts[1], Vector3::new(-10.0, 0.0, 6.0));
        assert_eq!(pts[5], Vector3::new(10.0, 0.0, 6.0));
        for bad in ["1:2:3", "a:1:2,0:0:1,0:0:1", "0:1:1,0:0:1,0:0:1", "1:0:2,0:0:1,0:0:1", "0:1:0,0:0:1,0:0:1"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -73.65, 1.0 / 3.0, 2.78e-4, 6.02e23, 0.0, -0.0, f64::MIN_POSITIVE] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn unreachable_points_keep_their_row() {
        let m = model(Architecture::Puu);
        let rows = sweep(&m, &[Vector3::zeros(), Vector3::new(0.0, 300.0, 300.0)], false).unwrap();
        assert_eq!(rows[0].status, Status::Ok);
        assert_eq!(rows[1].status, Status::Unreachable);
        assert!(rows[1].message.as_ref().unwrap().contains('X'));
    }

    #[test]
    fn csv_header_is_stable() {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[], false).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim_end(),
            "x[mm],y[mm],z[mm],status,rank,k_tran[N/mm],k_rot[N*mm/rad],c_tran[mm/N],c_rot[rad/(N*mm)],cond[-]"
        );
        assert_eq!(sweep_header(true).len(), 46);
    }

    #[test]
    fn validation_passes_on_default_models() {
        for arch in [Architecture::Puu, Architecture::Prpar] {
            let r = validate(
                &model(arch),
                &ValidateOptions {
                    postures: 4,
                    fd_sweep: true,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(r.passed(), "{}", r.to_text());
            assert_eq!(r.fd_sweep.as_ref().unwrap().len(), 5);
        }
    }
}
