use std::path::{Path, PathBuf};
use std::process::Command;

use sbm::cli::{read_results, run, ResultRow, RunConfig, RESULTS_HEADER};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn metric<'a>(rows: &'a [ResultRow], name: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
    rows.iter().filter(move |r| r.metric == name)
}

#[test]
fn results_header_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config("rms_gap_levels.toml")).unwrap();
    cfg.levels = vec![4];
    run(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER);
    assert_eq!(RESULTS_HEADER, "experiment,geometry,level,h,lambda,metric,value,wall_time_s");
}

#[test]
fn rms_gap_argmin_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config("rms_gap_levels.toml")).unwrap();
    cfg.levels = vec![6];
    let rows = run(&cfg, dir.path()).unwrap();
    assert_eq!(metric(&rows, "rms_gap").count(), 11);
    let best = metric(&rows, "rms_gap").min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
    assert_eq!(best.lambda, Some(0.5));
    let argmin: Vec<_> = metric(&rows, "argmin_lambda").collect();
    assert_eq!(argmin.len(), 1);
    assert_eq!(argmin[0].value, 0.5);
}

#[test]
fn convergence_reports_rows_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config("disk_convergence.toml")).unwrap();
    cfg.lambdas = vec![0.5];
    let rows = run(&cfg, dir.path()).unwrap();
    let l2n: Vec<_> = metric(&rows, "l2n").collect();
    assert_eq!(l2n.len(), 4);
    assert!(l2n.windows(2).all(|w| w[1].value < w[0].value));
    let slope: Vec<_> = metric(&rows, "slope").collect();
    assert_eq!(slope.len(), 1);
    assert!((1.8..=2.2).contains(&slope[0].value), "{}", slope[0].value);
    assert_eq!(read_results(&dir.path().join("results.csv")).unwrap(), rows);
    for stage in ["grid", "surrogate", "assembly", "solve"] {
        assert_eq!(metric(&rows, &format!("time_{stage}")).count(), 4);
    }
}

fn strip_times(rows: Vec<ResultRow>) -> Vec<ResultRow> {
    rows.into_iter()
        .filter(|r| !r.metric.starts_with("time_"))
        .map(|r| ResultRow { wall_time_s: 0.0, ..r })
        .collect()
}

#[test]
fn effective_config_reproduces_rows() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::load(&config("star_convergence.toml")).unwrap();
        cfg.levels = vec![4, 5, 6];
        cfg.lambdas = vec![0.5, 1.0];
        let first = run(&cfg, a.path()).unwrap();
        let again = RunConfig::load(&a.path().join("config.effective.toml")).unwrap();
        assert_eq!(again, cfg);
        let second = run(&again, b.path()).unwrap();
        assert_eq!(strip_times(first), strip_times(second));
    });
}

/// Header-declared counts and marker histogram of a legacy VTK file.
fn vtk_counts(text: &str) -> (usize, usize, Vec<usize>) {
    let mut lines = text.lines();
    let mut points = 0;
    let mut cells = 0;
    let mut markers = Vec::new();
    while let Some(l) = lines.next() {
        let w: Vec<&str> = l.split_whitespace().collect();
        match w.first().copied() {
            Some("POINTS") => points = w[1].parse().unwrap(),
            Some("CELLS") => cells = w[1].parse().unwrap(),
            Some("SCALARS") if w[1] == "marker" => {
                lines.next();
                markers = (0..cells).map(|_| lines.next().unwrap().trim().parse().unwrap()).collect();
            }
            _ => {}
        }
    }
    (points, cells, markers)
}

#[test]
fn aligned_square_solve_writes_consistent_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&config("aligned_square.toml")).unwrap();
    let rows = run(&cfg, dir.path()).unwrap();
    let gap = metric(&rows, "rms_gap").next().unwrap();
    assert!(gap.value < 1e-15);
    assert!(metric(&rows, "l2n").next().unwrap().value < 1e-3);

    let vtk = std::fs::read_to_string(dir.path().join("field_polygon_L5_lam0.5.vtk")).unwrap();
    let (points, cells, markers) = vtk_counts(&vtk);
    assert!(cells < 32 * 32, "carving should drop exterior cells");
    let body: Vec<&str> = vtk.lines().collect();
    let start = body.iter().position(|l| l.starts_with("POINTS")).unwrap();
    assert!(body[start + 1 + points].starts_with("CELLS"));
    let types = body.iter().position(|l| l.starts_with("CELL_TYPES")).unwrap();
    assert_eq!(types, start + 2 + points + cells);

    // histogram from the VTK equals the one from markers.csv
    let mut reader = csv::Reader::from_path(dir.path().join("markers_polygon_L5_lam0.5.csv")).unwrap();
    let names: Vec<String> = reader.records().map(|r| r.unwrap()[7].to_string()).collect();
    assert_eq!(names.len(), cells);
    let all = sbm::surrogate::Marker::ALL;
    for (code, m) in all.iter().enumerate() {
        let from_vtk = markers.iter().filter(|&&c| c == code).count();
        let from_csv = names.iter().filter(|n| n.as_str() == m.name()).count();
        assert_eq!(from_vtk, from_csv, "{}", m.name());
    }
    assert!(dir.path().join("boundary_polygon_L5_lam0.5.vtk").is_file());
}

#[test]
fn elasticity_vtk_has_two_component_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config("star_convergence.toml")).unwrap();
    cfg.experiment = sbm::cli::Experiment::Solve;
    cfg.levels = vec![4];
    cfg.lambdas = vec![0.5];
    cfg.write_vtk = true;
    run(&cfg, dir.path()).unwrap();
    let vtk = std::fs::read_to_string(dir.path().join("field_star_L4_lam0.5.vtk")).unwrap();
    assert!(vtk.lines().any(|l| l.starts_with("displacement 2 ")));
}

fn sbm(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sbm")).args(args).env("RUST_LOG", "off").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let out = dir.path().join("out").to_string_lossy().into_owned();

    let bad = write("bad.toml", "experiment = \"solve\"\nnonsense = 3\n");
    let (code, err) = sbm(&["run", &bad, "--out", &out]);
    assert_eq!(code, 2, "{err}");

    let lam = write(
        "lam.toml",
        "experiment = \"solve\"\ngeometry = \"circle\"\ncenter = [0.5, 0.5]\nradius = 0.4\nlevels = [4]\nlambdas = [2.0]\nsolution = \"disk\"\n",
    );
    assert_eq!(sbm(&["run", &lam, "--out", &out]).0, 2);

    let solver = write(
        "solver.toml",
        "experiment = \"solve\"\ngeometry = \"circle\"\ncenter = [0.5, 0.5]\nradius = 0.4\nlevels = [5]\nsolution = \"disk\"\nmax_iterations = 1\n",
    );
    assert_eq!(sbm(&["run", &solver, "--out", &out]).0, 3);

    write("broken.stl", "solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0\n");
    let geo = write(
        "geo.toml",
        "experiment = \"solve\"\ngeometry = \"stl\"\npath = \"broken.stl\"\nlevels = [3]\nsolution = \"bunny\"\n",
    );
    assert_eq!(sbm(&["run", &geo, "--out", &out]).0, 4);

    let ok = write(
        "ok.toml",
        "experiment = \"solve\"\ngeometry = \"circle\"\ncenter = [0.5, 0.5]\nradius = 0.4\nlevels = [4]\nsolution = \"disk\"\n",
    );
    let (code, err) = sbm(&["run", &ok, "--out", &out, "--threads", "2", "--seed", "7"]);
    assert_eq!(code, 0, "{err}");
    let eff = std::fs::read_to_string(Path::new(&out).join("config.effective.toml")).unwrap();
    assert!(eff.contains("seed = 7"));
}
