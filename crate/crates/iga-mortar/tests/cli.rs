use std::path::Path;
use std::process::{Command, Output};

fn iga(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_iga-mortar"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("IGA_MORTAR_THREADS", t),
        None => cmd.env_remove("IGA_MORTAR_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn solve_reports_small_errors() {
    let out = iga(
        &["solve", "--geometry", "square2", "--degree", "3", "--levels", "3"],
        None,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "h,dofs,brokenH2,H1,L2,Linf");
    let errors: Vec<f64> = rows[1].split(',').skip(2).map(|v| v.parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    assert!(errors.iter().all(|&e| e > 0.0 && e < 1e-2), "{errors:?}");
}

#[test]
fn solve_header_records_modes_and_writes_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = iga(
        &[
            "solve",
            "--geometry",
            "quartercircle3",
            "--vertex-mode",
            "c0",
            "--multiplier",
            "merged",
            "--samples",
            "3",
            "--out",
            out_dir,
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# iga-mortar "));
    assert!(text.contains("vertex-mode=c0") && text.contains("multiplier=merged"));

    let field = read(&dir.path().join("field.csv"));
    assert!(field.starts_with("# iga-mortar "));
    assert_eq!(body(&field)[0], "patch,x,y,uh,uex,diff");
    for p in 0..3 {
        let vtk = read(&dir.path().join(format!("field_patch{p}.vtk")));
        assert!(vtk.contains("DATASET STRUCTURED_GRID"));
        for name in ["uh", "uex", "diff"] {
            assert!(vtk.contains(&format!("SCALARS {name} double 1")));
        }
    }
    assert_eq!(read(&dir.path().join("solution.csv")), text);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| iga(args, None).status.code().unwrap();
    assert_eq!(code(&["solve", "--degree", "1"]), 2);
    assert_eq!(code(&["solve", "--vertex-mode", "c1"]), 2);
    assert_eq!(code(&["converge", "--levels", "1..2"]), 2);
    assert_eq!(code(&["solve", "--geometry", "/nonexistent/domain.json"]), 5);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"patches\": [] ").unwrap();
    assert_eq!(code(&["solve", "--geometry", bad.to_str().unwrap()]), 3);

    let out = iga(
        &[
            "infsup",
            "--degrees",
            "3",
            "--indexing",
            "space",
            "--out",
            "/proc/forbidden",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn geometry_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("square2.json");
    let patches = iga_mortar_core::builtin::square2();
    std::fs::write(
        &file,
        iga_mortar::geometry_file::GeometryFile::from_patches(&patches).to_json(),
    )
    .unwrap();
    let from_file = iga(&["solve", "--geometry", file.to_str().unwrap()], None);
    let builtin = iga(&["solve", "--geometry", "square2"], None);
    let rows = |o: &Output| {
        body(&String::from_utf8_lossy(&o.stdout))
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
    };
    assert!(from_file.status.success());
    assert_eq!(rows(&from_file), rows(&builtin));
}

#[test]
fn converge_writes_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = iga(
        &[
            "converge",
            "--degree",
            "2",
            "--levels",
            "2..4",
            "--reference-slopes",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    assert_eq!(body(&read(&dir.path().join("convergence.csv"))).len(), 4);
    let rates = read(&dir.path().join("rates.csv"));
    let rows = body(&rates);
    assert_eq!(rows[0], "norm,pairwise,slope,reference,flag");
    assert_eq!(rows.len(), 5);
    let l2: Vec<&str> = rows[3].split(',').collect();
    assert_eq!(l2[0], "L2");
    assert_eq!(l2[3], "3");
    assert_eq!(l2[4], "suboptimal-expected");
}

#[test]
fn sweep_has_eight_rows() {
    let out = iga(&["infsup", "--degrees", "2..9"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "degree,mu_min");
    assert_eq!(rows.len(), 9);
    assert!(!text.contains("beyond"));
    let extended = String::from_utf8(iga(&["infsup", "--degrees", "10..12"], None).stdout).unwrap();
    assert_eq!(body(&extended).len(), 4);
    assert_eq!(extended.matches("beyond the published range").count(), 3);
}

#[test]
fn random_study_files_are_reproducible() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = iga(
            &[
                "infsup",
                "--random",
                "--trials",
                "1000",
                "--seed",
                "7",
                "--out",
                dir.path().to_str().unwrap(),
            ],
            Some(threads),
        );
        assert!(out.status.success());
        (
            read(&dir.path().join("histogram.csv")),
            read(&dir.path().join("trials.csv")),
        )
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
    let counts: usize = body(&first.0)[1..]
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counts, 1000);
    assert_eq!(body(&first.1).len(), 1001);
}
