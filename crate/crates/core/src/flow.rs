//! The curvature ODE `dR/dt = Q(R) = R² + R#`.
//!
//! `R#` is defined through its quadratic form
//! `⟨R#η, η⟩ = −½ Σᵢ ⟨[η, R[η, R ωᵢ]], ωᵢ⟩` for an orthonormal basis `ωᵢ` of
//! Λ²ℝ⁴, and recovered by polarization. A structure-constant version,
//! `R#_ab = −½ tr(ad_a R ad_b R)`, is kept as a fast path.

use std::io::Write;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cones::ConeId;
use crate::curvature::{scalar, CurvatureOperator, OperatorDocument};
use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, substream, Execution};
use crate::lambda2::{ad, bracket, inner, Bivector, Lambda2Map, Sign};
use crate::sampling::random_bianchi;

/// Relative Bianchi drift tolerated along a trajectory.
pub const DRIFT_TOL: f64 = 1e-8;

/// Quadratic form of `R#` at `η`, summed over the orthonormal basis given by
/// the columns of `basis`.
pub fn sharp_quadratic_in(r: &CurvatureOperator, eta: &Bivector, basis: &Lambda2Map) -> f64 {
    let mut acc = 0.0;
    for k in 0..6 {
        let w = Bivector(basis.column(k).into_owned());
        let inner_term = r.apply(&bracket(eta, &r.apply(&w)));
        acc += inner(&bracket(eta, &inner_term), &w);
    }
    -0.5 * acc
}

pub fn sharp_quadratic(r: &CurvatureOperator, eta: &Bivector) -> f64 {
    sharp_quadratic_in(r, eta, &Lambda2Map::identity())
}

/// `R#` by polarization of its quadratic form, using `basis` for the sum.
pub fn sharp_in(r: &CurvatureOperator, basis: &Lambda2Map) -> CurvatureOperator {
    let mut m = Lambda2Map::zeros();
    for a in 0..6 {
        let ea = Bivector::unit(a);
        m[(a, a)] = sharp_quadratic_in(r, &ea, basis);
        for b in (a + 1)..6 {
            let eb = Bivector::unit(b);
            let v = 0.25
                * (sharp_quadratic_in(r, &(ea + eb), basis)
                    - sharp_quadratic_in(r, &(ea - eb), basis));
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    CurvatureOperator::from_symmetric(m)
}

pub fn sharp(r: &CurvatureOperator) -> CurvatureOperator {
    sharp_in(r, &Lambda2Map::identity())
}

fn basis_ad() -> &'static [Lambda2Map; 6] {
    static AD: OnceLock<[Lambda2Map; 6]> = OnceLock::new();
    AD.get_or_init(|| std::array::from_fn(|k| ad(&Bivector::unit(k))))
}

/// `R#_ab = −½ tr(ad_a R ad_b R)` from precomputed structure constants.
pub fn sharp_fast(r: &CurvatureOperator) -> CurvatureOperator {
    let ads = basis_ad();
    let rm = r.matrix();
    let prods: [Lambda2Map; 6] = std::array::from_fn(|k| ads[k] * rm);
    let mut m = Lambda2Map::zeros();
    for a in 0..6 {
        for b in a..6 {
            let v = -0.5 * (prods[a] * prods[b]).trace();
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    CurvatureOperator::from_symmetric(m)
}

/// `Q(R) = R² + R#`.
pub fn q_vf(r: &CurvatureOperator) -> CurvatureOperator {
    r.square() + sharp_fast(r)
}

/// Polarization of `Q`: `B(R, S) = ½(Q(R+S) − Q(R) − Q(S))`.
pub fn bilinear_b(r: &CurvatureOperator, s: &CurvatureOperator) -> CurvatureOperator {
    (q_vf(&(*r + *s)) - q_vf(r) - q_vf(s)) * 0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub t_max: f64,
    pub dt: f64,
    /// Rescale after each step so the scalar curvature keeps its initial value.
    pub normalize: bool,
    pub blowup_norm: f64,
    /// Cones whose margins are checked against `margin_floor`.
    pub margin_cones: Vec<ConeId>,
    pub margin_floor: Option<f64>,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            dt: 1e-3,
            normalize: false,
            blowup_norm: 1e8,
            margin_cones: ConeId::ALL.to_vec(),
            margin_floor: None,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidFlowParams(msg.to_string()));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad("t_max must be positive");
        }
        if self.dt >= self.t_max {
            return bad("dt must be smaller than t_max");
        }
        if !(self.blowup_norm > 0.0) {
            return bad("blowup_norm must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Blowup,
    MarginViolation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub op: CurvatureOperator,
    pub scal: f64,
    /// Margins in [`ConeId::ALL`] order.
    pub margins: [f64; 4],
}

impl FlowSample {
    fn new(t: f64, op: CurvatureOperator) -> Self {
        Self {
            t,
            scal: scalar(&op),
            margins: margins_of(&op),
            op,
        }
    }

    pub fn margin(&self, cone: ConeId) -> f64 {
        self.margins[cone_index(cone)]
    }
}

fn cone_index(cone: ConeId) -> usize {
    ConeId::ALL.iter().position(|&c| c == cone).expect("listed cone")
}

/// Margins of an operator assumed Bianchi-valid.
pub fn margins_of(r: &CurvatureOperator) -> [f64; 4] {
    let scal = scalar(r);
    let half = |sign| {
        let nu = eigenvalues(&r.block(sign))[2] - scal / 12.0;
        scal / 6.0 - nu
    };
    let (p, m) = (half(Sign::Plus), half(Sign::Minus));
    [scal, p, m, p.min(m)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory holds the initial sample")
    }

    /// Trajectory CSV: `t,scal,margin_scal,margin_icplus,margin_icminus,margin_ic,norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
        for s in &self.samples {
            let row = [s.t, s.scal, s.margins[0], s.margins[1], s.margins[2], s.margins[3], s.op.norm()];
            w.write_record(row.iter().map(|x| format_17(*x))).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Operator snapshots as a JSON array of `{t, basis, matrix}`.
    pub fn snapshots_json(&self) -> String {
        #[derive(Serialize)]
        struct Snapshot {
            t: f64,
            #[serde(flatten)]
            doc: OperatorDocument,
        }
        let snaps: Vec<Snapshot> = self
            .samples
            .iter()
            .map(|s| Snapshot {
                t: s.t,
                doc: OperatorDocument::from_operator(&s.op),
            })
            .collect();
        serde_json::to_string_pretty(&snaps).expect("finite snapshots")
    }
}

pub const TRAJECTORY_HEADER: [&str; 7] = [
    "t",
    "scal",
    "margin_scal",
    "margin_icplus",
    "margin_icminus",
    "margin_ic",
    "norm",
];

/// Scientific notation with 17 significant digits.
pub fn format_17(x: f64) -> String {
    format!("{x:.16e}")
}

fn rk4_step(r: &CurvatureOperator, h: f64) -> CurvatureOperator {
    let k1 = q_vf(r);
    let k2 = q_vf(&(*r + k1 * (h / 2.0)));
    let k3 = q_vf(&(*r + k2 * (h / 2.0)));
    let k4 = q_vf(&(*r + k3 * h));
    *r + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fixed-step classical Runge–Kutta integration of `dR/dt = Q(R)`.
pub fn integrate(r0: &CurvatureOperator, p: &FlowParams) -> Result<FlowTrajectory> {
    p.validate()?;
    r0.check_bianchi()?;
    let scal0 = scalar(r0);
    if p.normalize && !(scal0 > 0.0) {
        return Err(Error::NonPositiveScalar(scal0));
    }
    let tracked: Vec<usize> = p.margin_cones.iter().map(|&c| cone_index(c)).collect();
    let violates = |s: &FlowSample| {
        p.margin_floor
            .is_some_and(|floor| tracked.iter().any(|&k| s.margins[k] < floor))
    };

    let first = FlowSample::new(0.0, *r0);
    if violates(&first) {
        return Ok(FlowTrajectory {
            samples: vec![first],
            termination: Termination::MarginViolation,
        });
    }
    let mut samples = vec![first];
    let mut r = *r0;
    let mut step = 0u64;
    let termination = loop {
        let t = step as f64 * p.dt;
        if t >= p.t_max * (1.0 - 1e-12) {
            break Termination::Completed;
        }
        let h = p.dt.min(p.t_max - t);
        let mut next = rk4_step(&r, h);
        step += 1;
        let t_next = if h < p.dt { p.t_max } else { step as f64 * p.dt };
        if p.normalize {
            let s = scalar(&next);
            if !(s > 0.0) || !s.is_finite() {
                break Termination::Blowup;
            }
            next = next * (scal0 / s);
        }
        let norm = next.norm();
        if !norm.is_finite() {
            break Termination::Blowup;
        }
        let drift = crate::curvature::bianchi_trace(&next).abs() / 2.0;
        if drift > DRIFT_TOL * (1.0 + norm) {
            return Err(Error::BianchiViolation {
                defect: drift,
                tolerance: DRIFT_TOL * (1.0 + norm),
            });
        }
        r = next;
        let sample = FlowSample::new(t_next, r);
        let bad = violates(&sample);
        samples.push(sample);
        if norm > p.blowup_norm {
            break Termination::Blowup;
        }
        if bad {
            break Termination::MarginViolation;
        }
    };
    Ok(FlowTrajectory {
        samples,
        termination,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Fraction of seeds placed at margin in `[0, 1e-6]`.
    pub boundary_fraction: f64,
    /// Interior seeds get a margin uniform in `[0, interior_margin]`.
    pub interior_margin: f64,
    /// Start every seed outside the cone (harness self-test).
    pub outside: bool,
    /// Violation threshold: a sample violates when its margin falls below
    /// `-violation_tol * (1 + |R|)`.
    pub violation_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            boundary_fraction: 0.25,
            interior_margin: 1.0,
            outside: false,
            violation_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub cone: ConeId,
    pub trajectories: usize,
    /// Smallest raw margin seen along any trajectory.
    pub min_margin: f64,
    /// Smallest `margin / (1 + |R|)` seen along any trajectory.
    pub min_relative_margin: f64,
    /// Index of the trajectory attaining `min_relative_margin`; its seed
    /// operator comes from substream `(seed, worst_index)`.
    pub worst_index: usize,
    pub worst_time: f64,
    pub seed: u64,
    pub violations: usize,
    pub blowups: usize,
}

impl ProbeReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.min_relative_margin >= -tol
    }
}

/// Random Bianchi-valid operator shifted along `Id` to a prescribed margin.
pub fn cone_seed<R: Rng + ?Sized>(
    rng: &mut R,
    cone: ConeId,
    opts: &ProbeOptions,
) -> CurvatureOperator {
    let r = random_bianchi(rng);
    let u: f64 = rng.random();
    let target = if opts.outside {
        -(1e-3 + u * opts.interior_margin)
    } else if rng.random::<f64>() < opts.boundary_fraction {
        u * 1e-6
    } else {
        u * opts.interior_margin
    };
    let current = margins_of(&r)[cone_index(cone)];
    // shifting by μ·Id moves scal by 12μ and the IC margins by 2μ
    let per_unit = if cone == ConeId::Scal { 12.0 } else { 2.0 };
    r + CurvatureOperator::identity() * ((target - current) / per_unit)
}

/// Integrates `n` random cone seeds and reports the worst margin seen.
pub fn invariance_probe(
    cone: ConeId,
    n: usize,
    seed: u64,
    p: &FlowParams,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    invariance_probe_with(Execution::default(), cone, n, seed, p, opts)
}

pub fn invariance_probe_with(
    exec: Execution,
    cone: ConeId,
    n: usize,
    seed: u64,
    p: &FlowParams,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    p.validate()?;
    let k = cone_index(cone);
    let runs = map_indexed(exec, n, |i| -> Result<(f64, f64, f64, bool, bool)> {
        let mut rng = substream(seed, i as u64);
        let r0 = cone_seed(&mut rng, cone, opts);
        let mut params = p.clone();
        params.margin_floor = None;
        if params.normalize && scalar(&r0) <= 0.0 {
            params.normalize = false;
        }
        let traj = integrate(&r0, &params)?;
        let mut min_raw = f64::INFINITY;
        let mut min_rel = (f64::INFINITY, 0.0);
        let mut violated = false;
        for s in &traj.samples {
            let m = s.margins[k];
            let scale = 1.0 + s.op.norm();
            min_raw = min_raw.min(m);
            if m / scale < min_rel.0 {
                min_rel = (m / scale, s.t);
            }
            violated |= m < -opts.violation_tol * scale;
        }
        Ok((min_raw, min_rel.0, min_rel.1, violated, traj.termination == Termination::Blowup))
    });
    let mut report = ProbeReport {
        cone,
        trajectories: n,
        min_margin: f64::INFINITY,
        min_relative_margin: f64::INFINITY,
        worst_index: 0,
        worst_time: 0.0,
        seed,
        violations: 0,
        blowups: 0,
    };
    for (i, run) in runs.into_iter().enumerate() {
        let (raw, rel, t, violated, blew) = run?;
        report.min_margin = report.min_margin.min(raw);
        if rel < report.min_relative_margin {
            report.min_relative_margin = rel;
            report.worst_index = i;
            report.worst_time = t;
        }
        report.violations += violated as usize;
        report.blowups += blew as usize;
    }
    Ok(report)
}
