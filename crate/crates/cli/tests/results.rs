use std::collections::BTreeMap;

use cutmesh::convergence_harness::{ErrorRecord, Norm};
use cutmesh_cli::{execute, format_convergence_csv, write_convergence_csv, Command, RunConfig};

fn record(n: usize, refined: usize) -> ErrorRecord {
    let h = 2.0 / n as f64;
    let errors: BTreeMap<Norm, f64> = [Norm::One, Norm::Phi, Norm::F, Norm::F1h, Norm::F2h]
        .into_iter()
        .map(|k| (k, h.powi(3) / 3.0))
        .collect();
    ErrorRecord {
        n,
        h,
        n_elements: 2 * n * n,
        errors,
        measure: 4.47,
        refined_elements: refined,
        max_node_residual: 0.0,
        wall_time: 0.25 * n as f64,
    }
}

#[test]
fn three_records_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    write_convergence_csv(&[record(10, 0), record(20, 0), record(40, 0)], 2, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "h,n_elements,eps_1,eps_phi,eps_f,eps_f1h,eps_f2h,refined,flagged");
}

#[test]
fn rows_sorted_by_resolution_with_full_precision() {
    let text = format_convergence_csv(&[record(40, 0), record(10, 3)], 2);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][1], "200");
    assert_eq!(rows[0][8], "1", "flagged record");
    assert_eq!(rows[0][7], "3");
    assert_eq!(rows[1][8], "0");
    let h: f64 = rows[1][0].parse().unwrap();
    assert_eq!(h, 2.0 / 40.0);
    let eps: f64 = rows[1][2].parse().unwrap();
    assert_eq!(eps, (2.0f64 / 40.0).powi(3) / 3.0);
    let mantissa = rows[1][2].split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn three_dimensional_layout() {
    let mut r = record(6, 0);
    r.errors.remove(&Norm::F1h);
    r.errors.insert(Norm::F3h, 1e-3);
    let text = format_convergence_csv(&[r], 3);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h,n_elements,eps_1,eps_phi,eps_f,eps_f1h,eps_f2h,eps_f3h,refined,flagged"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[5], "");
    assert_eq!(row[7].parse::<f64>().unwrap(), 1e-3);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let cfg = RunConfig {
            command: Command::Convergence,
            order: 2,
            resolutions: Some(vec![4, 6, 8]),
            out: Some(dir.path().join(name)),
            ..Default::default()
        };
        execute(&cfg).unwrap();
        std::fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}
