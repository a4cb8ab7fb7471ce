use std::process::{Command, Output};

fn cutmesh(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutmesh"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .unwrap()
}

#[test]
fn decompose_succeeds_and_writes_regions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("regions.csv");
    let o = cutmesh(
        &["decompose", "--order", "2", "--n", "8", "--out", out.to_str().unwrap()],
        &[("CUTMESH_THREADS", "1")],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("signs,measure,pieces"));
    let total: f64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 4.0).abs() < 1e-10, "{total}");
}

#[test]
fn bad_variant_exits_2() {
    let o = cutmesh(&["reconstruct", "--variant", "99"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("variant"));
}

#[test]
fn bad_thread_count_exits_2() {
    let o = cutmesh(&["reconstruct"], &[("CUTMESH_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_refinement_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.vtk");
    let o = cutmesh(
        &["reconstruct", "--levelset", "flower", "--n", "10", "--depth-limit", "0", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("i.vtk");
    let o = cutmesh(&["reconstruct", "--n", "6", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(4));
}
