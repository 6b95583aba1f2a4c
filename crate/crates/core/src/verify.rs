//! Seeded property suites, one per library module, reporting worst-case
//! residuals against fixed tolerances.

use std::fmt;

use serde::Serialize;

use crate::cones::{min_isotropic_with, pic_margin, two_positive_margin};
use crate::curvature::{
    act, bianchi_defect, bianchi_project, bianchi_trace, decompose, half_projection, model,
    recompose, scalar, CurvatureOperator, ModelName,
};
use crate::error::Result;
use crate::exec::{map_indexed, substream, Execution};
use crate::flow::{bilinear_b, integrate, invariance_probe_with, q_vf, sharp, sharp_fast, FlowParams, ProbeOptions};
use crate::group_actions::{average_with, exact_average, lift_selfdual_rotation, maximality_witness, Factor};
use crate::lambda2::{haar_rotation, induced_map, restrict, Rotation4, Sign};
use crate::sampling::{random_bianchi, random_rotation3, random_symmetric, random_unit_bianchi};
use crate::cones::ConeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PicEquivalence,
    Invariance,
    Averaging,
    Identities,
    Bianchi,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::PicEquivalence,
        Suite::Invariance,
        Suite::Averaging,
        Suite::Identities,
        Suite::Bianchi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::PicEquivalence => "pic-equivalence",
            Suite::Invariance => "invariance",
            Suite::Averaging => "averaging",
            Suite::Identities => "identities",
            Suite::Bianchi => "bianchi",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Worst residual seen; for lower-bound checks, the smallest value.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, worst: f64, tolerance: f64) -> Self {
        Check { name: name.into(), worst, tolerance, passed: worst <= tolerance }
    }

    fn at_least(name: &str, worst: f64, bound: f64) -> Self {
        Check { name: name.into(), worst, tolerance: bound, passed: worst >= bound }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: format!("{name} in [{lo}, {hi}]"),
            worst: value,
            tolerance: hi,
            passed: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {}  worst={:e}  tol={:e}", c.name, c.worst, c.tolerance)?;
        }
        let ok = self.checks.iter().filter(|c| c.passed).count();
        write!(
            f,
            "suite {}: {} ({ok}/{} checks, samples={}, seed={})",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.samples,
            self.seed
        )
    }
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    run_suite_with(Execution::default(), suite, samples, seed)
}

pub fn run_suite_with(exec: Execution, suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let samples = samples.max(1);
    let checks = match suite {
        Suite::PicEquivalence => pic_equivalence(exec, samples, seed)?,
        Suite::Invariance => invariance(exec, samples, seed)?,
        Suite::Averaging => averaging(exec, samples, seed)?,
        Suite::Identities => identities(samples, seed),
        Suite::Bianchi => bianchi(samples, seed),
    };
    Ok(SuiteReport { suite, samples, seed, checks })
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn dist(a: &CurvatureOperator, b: &CurvatureOperator) -> f64 {
    (a.matrix() - b.matrix()).norm()
}

fn identities(samples: usize, seed: u64) -> Vec<Check> {
    let id = CurvatureOperator::identity();
    let cp2 = model(ModelName::Cp2, 12.0).expect("positive scale");
    let mut rng = substream(seed, 0);
    let ops: Vec<_> = (0..samples).map(|_| random_bianchi(&mut rng)).collect();
    let rots: Vec<_> = (0..samples).map(|_| haar_rotation(&mut rng)).collect();
    vec![
        Check::at_most("Q(Id) = 3 Id", dist(&q_vf(&id), &(id * 3.0)), 1e-12),
        Check::at_most("B(Id,Id) = 3 Id", dist(&bilinear_b(&id, &id), &(id * 3.0)), 1e-12),
        Check::at_most("Id# = 2 Id", dist(&sharp(&id), &(id * 2.0)), 1e-12),
        Check::at_most("Q(cp2) = 3 cp2 at scal 12", dist(&q_vf(&cp2), &(cp2 * 3.0)), 1e-9),
        Check::at_most(
            "structure-constant R# = polarized R#",
            max_of(ops.iter().map(|r| dist(&sharp_fast(r), &sharp(r)) / (1.0 + r.norm().powi(2)))),
            1e-12,
        ),
        Check::at_most(
            "Q preserves the Bianchi identity",
            max_of(ops.iter().map(|r| bianchi_trace(&q_vf(r)).abs() / (1.0 + r.norm().powi(2)))),
            1e-12,
        ),
        Check::at_most(
            "Q is SO(4)-equivariant",
            max_of(ops.iter().zip(&rots).map(|(r, g)| {
                dist(&q_vf(&act(g, r)), &act(g, &q_vf(r))) / (1.0 + r.norm().powi(2))
            })),
            1e-12,
        ),
    ]
}

fn bianchi(samples: usize, seed: u64) -> Vec<Check> {
    let mut rng = substream(seed, 0);
    let sym: Vec<_> = (0..samples).map(|_| random_symmetric(&mut rng)).collect();
    let ops: Vec<_> = (0..samples).map(|_| random_bianchi(&mut rng)).collect();
    let rots: Vec<_> = (0..samples).map(|_| haar_rotation(&mut rng)).collect();
    vec![
        Check::at_most(
            "cyclic defect = |tr(R*)|/2",
            max_of(sym.iter().map(|r| (bianchi_defect(r) - bianchi_trace(r).abs() / 2.0).abs())),
            1e-12,
        ),
        Check::at_most(
            "projection is Bianchi-valid",
            max_of(sym.iter().map(|r| bianchi_defect(&bianchi_project(r)) / (1.0 + r.norm()))),
            1e-12,
        ),
        Check::at_most(
            "decompose/recompose round trip",
            max_of(ops.iter().map(|r| {
                dist(&recompose(&decompose(r).expect("valid")).expect("valid"), r) / (1.0 + r.norm())
            })),
            1e-12,
        ),
        Check::at_most(
            "components are orthogonal",
            max_of(ops.iter().map(|r| {
                let c = decompose(r).expect("valid").components();
                let mut worst: f64 = 0.0;
                for i in 0..4 {
                    for j in i + 1..4 {
                        worst = worst.max(c[i].dot(&c[j]).abs());
                    }
                }
                worst / (1.0 + r.norm().powi(2))
            })),
            1e-12,
        ),
        Check::at_most(
            "isometries preserve the Bianchi identity",
            max_of(ops.iter().zip(&rots).map(|(r, g)| bianchi_defect(&act(g, r)) / (1.0 + r.norm()))),
            1e-12,
        ),
    ]
}

fn pic_equivalence(exec: Execution, samples: usize, seed: u64) -> Result<Vec<Check>> {
    const BAND: f64 = 1e-9;
    let mut rng = substream(seed, 0);
    let ops: Vec<_> = (0..samples).map(|_| random_bianchi(&mut rng)).collect();
    let mut disagreements = 0usize;
    let mut dual = 0.0f64;
    let reflection = Rotation4::reflection();
    for r in &ops {
        for sign in [Sign::Plus, Sign::Minus] {
            let a = pic_margin(r, sign)?;
            let b = two_positive_margin(&r.block(sign));
            if a.abs() > BAND && b.abs() > BAND && (a > 0.0) != (b > 0.0) {
                disagreements += 1;
            }
        }
        let flipped = act(&reflection, r);
        dual = dual.max((pic_margin(&flipped, Sign::Plus)? - pic_margin(r, Sign::Minus)?).abs());
    }
    // frame search per operator; the sampler itself runs sequentially inside
    let polished = map_indexed(exec, ops.len(), |i| -> Result<(f64, f64)> {
        let r = &ops[i];
        let mut worst = 0.0f64;
        let mut below = 0.0f64;
        for (k, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
            let exact = 2.0 * two_positive_margin(&r.block(sign));
            let got = min_isotropic_with(Execution::Sequential, r, sign, 2_000, seed ^ (2 * i + k) as u64, true)?;
            worst = worst.max((got - exact).abs());
            below = below.max(exact - got);
        }
        Ok((worst, below))
    });
    let mut worst = 0.0f64;
    let mut below = 0.0f64;
    for p in polished {
        let (w, b) = p?;
        worst = worst.max(w);
        below = below.max(b);
    }
    Ok(vec![
        Check::at_most("sign disagreements outside the 1e-9 band", disagreements as f64, 0.0),
        Check::at_most("polished min isotropic = 2 x 2-positivity margin", worst, 1e-4),
        Check::at_most("sampled minimum never undershoots", below, 1e-10),
        Check::at_most("reflection exchanges the IC+ and IC- margins", dual, 1e-10),
    ])
}

fn invariance(exec: Execution, samples: usize, seed: u64) -> Result<Vec<Check>> {
    const TOL: f64 = 1e-6;
    let p = FlowParams::default();
    let opts = ProbeOptions::default();
    let mut checks = Vec::new();
    for cone in ConeId::ALL {
        let report = invariance_probe_with(exec, cone, samples, seed, &p, &opts)?;
        checks.push(Check::at_least(
            &format!("{cone} stays invariant (min margin / (1+|R|))"),
            report.min_relative_margin,
            -TOL,
        ));
    }
    let closed = |t_max: f64, dt: f64| -> Result<f64> {
        let traj = integrate(&CurvatureOperator::identity(), &FlowParams { t_max, dt, ..FlowParams::default() })?;
        Ok((traj.last().op.matrix()[(0, 0)] - 1.0 / (1.0 - 3.0 * t_max)).abs())
    };
    checks.push(Check::at_most("Id flow matches 1/(1-3t) at t=0.1", closed(0.1, p.dt)?, 1e-8));
    checks.push(Check::within("error ratio when halving dt", closed(0.2, 0.01)? / closed(0.2, 0.005)?, 12.0, 20.0));
    Ok(checks)
}

/// Aggregate Monte-Carlo error of the left average against the exact
/// projection over `ops`, with `n` samples each.
pub fn averaging_error(exec: Execution, ops: &[CurvatureOperator], n: usize, seed: u64) -> Result<Vec<f64>> {
    ops.iter()
        .enumerate()
        .map(|(i, r)| {
            let avg = average_with(exec, r, Factor::Left, n, seed.wrapping_add(i as u64))?;
            Ok(dist(&avg, &exact_average(r, Factor::Left)?) / r.norm())
        })
        .collect()
}

fn averaging(exec: Execution, samples: usize, seed: u64) -> Result<Vec<Check>> {
    const N: usize = 100_000;
    let mut rng = substream(seed, 0);
    let ops: Vec<_> = (0..samples).map(|_| random_unit_bianchi(&mut rng)).collect();
    let full = averaging_error(exec, &ops, N, seed)?;
    let quarter = averaging_error(exec, &ops, N / 4, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let ratio = quarter.iter().sum::<f64>() / full.iter().sum::<f64>();

    let fixed = ops
        .iter()
        .map(|r| -> Result<f64> {
            let e = half_projection(r, Sign::Plus)?;
            Ok(dist(&average_with(exec, &e, Factor::Left, 64, seed)?, &e))
        })
        .collect::<Result<Vec<_>>>()?;

    let lift = max_of((0..samples).map(|_| {
        let rho = random_rotation3(&mut rng);
        match lift_selfdual_rotation(&rho) {
            Ok(g) => {
                let m = induced_map(&g);
                (restrict(&m, Sign::Plus) - rho).norm()
                    + (restrict(&m, Sign::Minus) - nalgebra::Matrix3::identity()).norm()
            }
            Err(_) => f64::INFINITY,
        }
    }));

    let mut witness_worst = 0.0f64;
    let mut accepted = 0;
    while accepted < samples {
        let r = act(&haar_rotation(&mut rng), &random_bianchi(&mut rng));
        if scalar(&r) <= 0.0 || two_positive_margin(&r.block(Sign::Plus)) >= 0.0 {
            continue;
        }
        accepted += 1;
        let w = maximality_witness(&r)?;
        let s = scalar(&w.witness);
        let plus = crate::eigen::eigenvalues(&w.witness.block(Sign::Plus));
        let minus = w.witness.block(Sign::Minus) - nalgebra::Matrix3::identity() * (s / 12.0);
        let residual = plus[0].abs().max(plus[1].abs()).max((plus[2] - s / 4.0).abs()).max(minus.abs().max());
        witness_worst = witness_worst.max(if s > 0.0 { residual } else { f64::INFINITY });
    }

    Ok(vec![
        Check::at_most("left average within 1e-2 of R_Id + R_W+ (n=1e5)", max_of(full), 1e-2),
        Check::within("error ratio n/4 vs n", ratio, 1.6, 2.6),
        Check::at_most("average fixes R_Id + R_W+", max_of(fixed), 1e-12),
        Check::at_most("lift round trip", lift, 1e-9),
        Check::at_most("witness spectra (s/4,0,0) and s/12 Id", witness_worst, 1e-7),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_suites_pass() {
        for suite in [Suite::Identities, Suite::Bianchi] {
            let r = run_suite(suite, 50, 3).unwrap();
            assert!(r.passed(), "{r}");
        }
        let r = run_suite(Suite::Identities, 1, 0).unwrap();
        assert!(r.to_string().contains("PASS  Q(Id) = 3 Id"));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let a = run_suite(Suite::PicEquivalence, 5, 11).unwrap();
        let b = run_suite_with(Execution::Sequential, Suite::PicEquivalence, 5, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{a}");
    }
}
