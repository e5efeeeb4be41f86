//! Acceptance criteria 1 to 6, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the terminal.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::Matrix3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use rpr_cusps::cusp::{find_cusps, find_cusps_with, verify_triple_coincidence, CuspMode, CuspOptions, CuspPoint};
use rpr_cusps::differential::{adjoint_k_factors, hessians_theta, jacobian_theta};
use rpr_cusps::geometry::{
    angle_distance, config_from_slice, constraint_residuals, inverse_kinematics, Configuration, ManipulatorGeometry,
    PlatformPose,
};
use rpr_cusps::kinematics::{contains_pose, direct_kinematics, RodLengths};
use rpr_cusps::singular_slice::{label_regions, legs_concurrent, trace_slice_curves, GridSpec, TOL_SING};

const REFERENCE_RHO1: f64 = 14.98;
/// `(α°, θ₁°, ρ₂, ρ₃)`.
const REFERENCE_CUSPS: [(f64, f64, f64, f64); 6] = [
    (50.67, -69.12, 0.84, 3.77),
    (-2.59, 177.32, 13.85, 6.26),
    (-122.89, 114.05, 31.27, 16.17),
    (57.48, 133.77, 30.44, 26.61),
    (-0.59, 15.46, 16.02, 29.56),
    (170.37, -10.65, 17.98, 26.44),
];
const ANGLE_TOL_DEG: f64 = 0.1;
const LENGTH_TOL: f64 = 0.02;
const RUNTIME_SECS: f64 = 600.0;

const PROFILE: [(f64, usize); 10] = [
    (0.05, 0),
    (2.0, 2),
    (2.8, 4),
    (6.0, 6),
    (8.0, 6),
    (17.0, 6),
    (20.0, 6),
    (29.0, 6),
    (31.0, 4),
    (40.0, 4),
];
const DENSE_SCAN: (f64, f64, usize) = (26.5, 27.5, 21);

const RESULTANT_DEGREE: usize = 96;
const Q_DEGREE: usize = 24;

const DK_DRAWS: usize = 10_000;
const MAX_ASSEMBLY_MODES: usize = 6;
const REGION_GRID: usize = 200;

const ORACLE_TOL: f64 = 1e-4;

const PROPERTY_CASES: usize = 100;
const JACOBIAN_REL_TOL: f64 = 1e-6;
const HESSIAN_REL_TOL: f64 = 1e-5;
const ADJUGATE_REL_TOL: f64 = 1e-9;
const ROUND_TRIP_POSES: usize = 1000;
const ROUND_TRIP_TOL: f64 = 1e-8;
const CONCURRENCY_TOL: f64 = 1e-7;
const TRACE_RESOLUTION: usize = 256;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("reference cusps", reference_cusps),
        ("cusp-count profile", profile),
        ("degree structure", degree_structure),
        ("solution-count bounds", solution_bounds),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({}; {:.1?})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn reference_cusps() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let json = dir.path().join("cusps.json");
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_rpr-cusps"))
        .arg("-g")
        .arg(data("reference.json"))
        .args(["cusps", "--rho1", &REFERENCE_RHO1.to_string(), "--out"])
        .arg(&json)
        .output()
        .expect("run rpr-cusps");
    let secs = t.elapsed().as_secs_f64();
    if !status.status.success() {
        return Outcome {
            pass: false,
            detail: format!(
                "exit {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ),
        };
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let cusps = v["cusps"].as_array().cloned().unwrap_or_default();
    let verified = cusps.iter().filter(|c| c["verified"].as_bool() == Some(true)).count();
    let row = |c: &serde_json::Value| {
        [
            c["alpha_deg"].as_f64().unwrap(),
            c["theta1_deg"].as_f64().unwrap(),
            c["rho2"].as_f64().unwrap(),
            c["rho3"].as_f64().unwrap(),
        ]
    };
    let mut matched = 0;
    let mut worst = [0.0f64; 2];
    for &(a, t1, r2, r3) in &REFERENCE_CUSPS {
        let best = cusps
            .iter()
            .map(row)
            .map(|c| {
                let da = angle_distance(c[0].to_radians(), a.to_radians()).to_degrees();
                let dt = angle_distance(c[1].to_radians(), t1.to_radians()).to_degrees();
                (da.max(dt), (c[2] - r2).abs().max((c[3] - r3).abs()))
            })
            .min_by(|x, y| {
                (x.0 / ANGLE_TOL_DEG + x.1 / LENGTH_TOL).total_cmp(&(y.0 / ANGLE_TOL_DEG + y.1 / LENGTH_TOL))
            });
        if let Some((da, dl)) = best {
            worst = [worst[0].max(da), worst[1].max(dl)];
            if da <= ANGLE_TOL_DEG && dl <= LENGTH_TOL {
                matched += 1;
            }
        }
    }
    Outcome {
        pass: cusps.len() == 6 && verified == 6 && matched == 6 && secs <= RUNTIME_SECS,
        detail: format!(
            "{} cusps, {verified} verified, {matched}/6 rows matched, worst {:.3} deg / {:.4}, {secs:.1} s",
            cusps.len(),
            worst[0],
            worst[1]
        ),
    }
}

fn cusp_count(geom: &ManipulatorGeometry, rho1: f64) -> Option<usize> {
    find_cusps(geom, rho1, CuspMode::Algebraic).ok().map(|r| r.cusps.len())
}

fn profile() -> Outcome {
    let g = ManipulatorGeometry::reference();
    let counts: Vec<Option<usize>> = PROFILE.par_iter().map(|&(r, _)| cusp_count(&g, r)).collect();
    let profile_ok = counts.iter().zip(&PROFILE).all(|(c, &(_, want))| *c == Some(want));
    let (lo, hi, n) = DENSE_SCAN;
    let dense: Vec<(f64, Option<usize>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let r = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            (r, cusp_count(&g, r))
        })
        .collect();
    let eights: Vec<f64> = dense.iter().filter(|(_, c)| *c == Some(8)).map(|(r, _)| *r).collect();
    let shown: Vec<String> = counts
        .iter()
        .map(|c| c.map_or("err".into(), |c| c.to_string()))
        .collect();
    Outcome {
        pass: profile_ok && !eights.is_empty(),
        detail: format!(
            "counts [{}], {} of {n} dense samples with 8 cusps",
            shown.join(" "),
            eights.len()
        ),
    }
}

fn degree_structure() -> Outcome {
    let g = ManipulatorGeometry::reference();
    let report = match find_cusps(&g, REFERENCE_RHO1, CuspMode::Algebraic) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let Some(t) = report.trace else {
        return Outcome {
            pass: false,
            detail: "no elimination trace".into(),
        };
    };
    Outcome {
        pass: t.resultant_degree == RESULTANT_DEGREE
            && t.q_degree == Q_DEGREE
            && t.q_squarefree
            && t.q_audit_violations == 0
            && !t.fallback,
        detail: format!(
            "resultant degree {}, Q degree {} square-free {}, audit violations {}",
            t.resultant_degree, t.q_degree, t.q_squarefree, t.q_audit_violations
        ),
    }
}

fn solution_bounds() -> Outcome {
    let mut worst = 0;
    for (seed, geom) in [
        (1u64, ManipulatorGeometry::reference()),
        (2, ManipulatorGeometry::second_example()),
    ] {
        let reach = 1.5 * (geom.base_scale() + geom.sides().iter().cloned().fold(0.0, f64::max));
        let mut rng = StdRng::seed_from_u64(seed);
        let rods: Vec<RodLengths> = (0..DK_DRAWS)
            .map(|_| {
                [
                    rng.gen_range(0.0..reach),
                    rng.gen_range(0.0..reach),
                    rng.gen_range(0.0..reach),
                ]
            })
            .collect();
        let most = rods
            .par_iter()
            .map(|r| direct_kinematics(&geom, r).count())
            .max()
            .unwrap_or(0);
        worst = worst.max(most);
    }
    let g = ManipulatorGeometry::reference();
    let region_counts = |rho1: f64| -> Option<(Vec<u8>, bool)> {
        let curves = trace_slice_curves(&g, rho1, rpr_cusps::singular_slice::DEFAULT_RESOLUTION).ok()?;
        let grid = GridSpec::around(&curves, REGION_GRID);
        let map = label_regions(&g, rho1, &grid, Some(&curves)).ok()?;
        Some((map.interior_counts(), map.contains_count(6)))
    };
    let r17 = region_counts(17.0);
    let r31 = region_counts(31.0);
    let ok17 = r17
        .as_ref()
        .is_some_and(|(c, _)| [2, 4, 6].iter().all(|k| c.contains(k)));
    let ok31 = r31.as_ref().is_some_and(|(_, six)| !six);
    Outcome {
        pass: worst <= MAX_ASSEMBLY_MODES && ok17 && ok31,
        detail: format!(
            "max {worst} solutions over {} draws, rho1=17 cells {:?}, rho1=31 cells {:?}",
            2 * DK_DRAWS,
            r17.map(|r| r.0),
            r31.map(|r| r.0)
        ),
    }
}

fn cusp_gap(a: &CuspPoint, b: &CuspPoint) -> f64 {
    angle_distance(a.alpha, b.alpha)
        .max(angle_distance(a.theta1, b.theta1))
        .max((a.rho2 - b.rho2).abs())
        .max((a.rho3 - b.rho3).abs())
}

fn oracle_equivalence() -> Outcome {
    let cases = [
        (ManipulatorGeometry::reference(), 14.98),
        (ManipulatorGeometry::reference(), 17.0),
        (ManipulatorGeometry::second_example(), 5.0),
        (ManipulatorGeometry::second_example(), 20.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, rho1) in &cases {
        let alg = find_cusps(g, *rho1, CuspMode::Algebraic).map(|r| r.cusps);
        let num = find_cusps(g, *rho1, CuspMode::Numeric).map(|r| r.cusps);
        let (Ok(alg), Ok(num)) = (alg, num) else {
            pass = false;
            parts.push(format!("{rho1}: error"));
            continue;
        };
        let worst = alg
            .iter()
            .map(|a| num.iter().map(|n| cusp_gap(a, n)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let ok = alg.len() == num.len() && worst <= ORACLE_TOL;
        pass &= ok;
        parts.push(format!("{rho1}: {}/{} gap {worst:.1e}", alg.len(), num.len()));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn random_configs(geom: &ManipulatorGeometry, rng: &mut StdRng, n: usize) -> Vec<(PlatformPose, Configuration)> {
    let span = 1.2 * (geom.base_scale() + geom.mean_side());
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let pose = PlatformPose::new(
            rng.gen_range(-span..span),
            rng.gen_range(-span..span),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        if let Ok(c) = inverse_kinematics(geom, &pose) {
            out.push((pose, c));
        }
    }
    out
}

fn theta_shifted(geom: &ManipulatorGeometry, c: &Configuration, d: [f64; 3]) -> [f64; 3] {
    let theta = [c.theta[0] + d[0], c.theta[1] + d[1], c.theta[2] + d[2]];
    constraint_residuals(geom, &Configuration { rho: c.rho, theta })
}

fn derivative_errors(geom: &ManipulatorGeometry, c: &Configuration) -> (f64, f64, f64) {
    let jt = jacobian_theta(geom, c);
    let step = 1e-6;
    let mut jerr = 0.0f64;
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = step;
        let p = theta_shifted(geom, c, e);
        let m = theta_shifted(geom, c, e.map(|x| -x));
        for i in 0..3 {
            jerr = jerr.max(((p[i] - m[i]) / (2.0 * step) - jt[(i, k)]).abs() / jt.amax());
        }
    }
    let hs = hessians_theta(geom, c);
    let step = 1e-4;
    let mut herr = 0.0f64;
    for p in 0..3 {
        for q in 0..3 {
            let at = |dp: f64, dq: f64| {
                let mut e = [0.0; 3];
                e[p] += dp;
                e[q] += dq;
                theta_shifted(geom, c, e)
            };
            let (pp, pm, mp, mm) = (at(step, step), at(step, -step), at(-step, step), at(-step, -step));
            for i in 0..3 {
                let fd = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * step * step);
                herr = herr.max((fd - hs.h[i][(p, q)]).abs() / hs.max_abs());
            }
        }
    }
    let (_, adj) = adjoint_k_factors(geom, c);
    let det = jt.determinant();
    let scale = jt.amax().powi(3);
    let aerr =
        ((adj * jt - Matrix3::identity() * det).amax()).max((jt * adj - Matrix3::identity() * det).amax()) / scale;
    (jerr, herr, aerr)
}

fn properties() -> Outcome {
    let geoms = [ManipulatorGeometry::reference(), ManipulatorGeometry::second_example()];
    let mut rng = StdRng::seed_from_u64(6);
    let mut failures = Vec::new();

    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for (_, c) in random_configs(&geoms[0], &mut rng, PROPERTY_CASES) {
        let (j, h, a) = derivative_errors(&geoms[0], &c);
        worst = (worst.0.max(j), worst.1.max(h), worst.2.max(a));
    }
    if worst.0 > JACOBIAN_REL_TOL {
        failures.push(format!("jacobian {:.1e}", worst.0));
    }
    if worst.1 > HESSIAN_REL_TOL {
        failures.push(format!("hessian {:.1e}", worst.1));
    }
    if worst.2 > ADJUGATE_REL_TOL {
        failures.push(format!("adjugate {:.1e}", worst.2));
    }

    let mut round_trip_misses = 0;
    for g in &geoms {
        let cases = random_configs(g, &mut rng, ROUND_TRIP_POSES);
        round_trip_misses += cases
            .par_iter()
            .filter(|(pose, c)| {
                let set = direct_kinematics(g, &c.rho);
                !contains_pose(&set, pose, g.d1, ROUND_TRIP_TOL * g.mean_side().max(1.0))
            })
            .count();
    }
    if round_trip_misses > 0 {
        failures.push(format!("{round_trip_misses} IK->DK misses"));
    }

    let mut vertices = 0;
    let mut vertex_failures = 0;
    for (g, rho1) in [(&geoms[0], 17.0), (&geoms[1], 5.0)] {
        let Ok(curves) = trace_slice_curves(g, rho1, TRACE_RESOLUTION) else {
            failures.push(format!("trace failed at {rho1}"));
            continue;
        };
        let vs: Vec<_> = curves.vertices().copied().collect();
        vertices += vs.len();
        vertex_failures += vs
            .par_iter()
            .filter(|v| {
                let Ok(c) = config_from_slice(g, &v.slice(rho1)) else {
                    return true;
                };
                let three_way = v.residual.abs() <= TOL_SING
                    && v.det_residual.abs() <= TOL_SING
                    && legs_concurrent(g, &c, CONCURRENCY_TOL);
                three_way && direct_kinematics(g, &c.rho).max_multiplicity() >= 2
            })
            .count()
            .abs_diff(vs.len());
    }
    if vertex_failures > 0 {
        failures.push(format!("{vertex_failures} of {vertices} traced vertices"));
    }

    let mut cusps = 0;
    let mut weak_cusps = 0;
    for (g, rho1) in [(&geoms[0], 14.98), (&geoms[0], 17.0), (&geoms[1], 5.0)] {
        let opts = CuspOptions::default();
        match find_cusps_with(g, rho1, &opts) {
            Ok(r) => {
                for c in &r.cusps {
                    cusps += 1;
                    let m = verify_triple_coincidence(g, rho1, c.alpha, c.theta1).map_or(0, |v| v.multiplicity);
                    if m < 3 {
                        weak_cusps += 1;
                    }
                }
            }
            Err(e) => failures.push(format!("cusps at {rho1}: {e}")),
        }
    }
    if weak_cusps > 0 {
        failures.push(format!("{weak_cusps} of {cusps} cusps below multiplicity 3"));
    }

    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "derivative errors {:.1e}/{:.1e}/{:.1e}, {} round trips, {vertices} vertices, {cusps} cusps",
                worst.0,
                worst.1,
                worst.2,
                2 * ROUND_TRIP_POSES
            )
        } else {
            failures.join(", ")
        },
    }
}
