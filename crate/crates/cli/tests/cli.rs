use std::process::{Command, Output};

use phasebound::clock::linspace;
use phasebound::ClockModel;
use phasebound::SpinLength;

const SWEEP_HEADER: &str =
    "j,N,tau,tau_scaled,theta,F,E,FplusE,Fq,chiSqz,F_resc,E_resc,FplusE_resc,Fq_resc,chiSqz_resc";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasebound")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn table(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let rows = reader.records().collect::<Result<Vec<_>, _>>().unwrap();
    (header, rows)
}

fn field(header: &csv::StringRecord, row: &csv::StringRecord, name: &str) -> f64 {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[k].parse().unwrap()
}

#[test]
fn sweep_writes_header_and_default_grid() {
    let text = stdout(&run(&["sweep", "--j", "25"]));
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER);
    let (header, rows) = table(&text);
    assert_eq!(rows.len(), 300);

    let model = ClockModel::new(SpinLength::new(25.0).unwrap());
    let taus: Vec<f64> = linspace(0.0, 3.0, 300).iter().map(|&s| model.scaled_to_tau(s)).collect();
    let expected = model.sweep(&taus, 0.0).unwrap();
    for (row, rec) in rows.iter().zip(&expected) {
        assert_eq!(field(&header, row, "tau").to_bits(), rec.tau.to_bits());
        assert_eq!(field(&header, row, "FplusE").to_bits(), rec.fplus_e.to_bits());
        assert_eq!(field(&header, row, "chiSqz_resc").to_bits(), rec.chi_sqz_resc.to_bits());
    }
}

#[test]
fn verify_reports_are_byte_identical() {
    let first = run(&["verify", "--seed", "42"]);
    let second = run(&["verify", "--seed", "42"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).contains("9 of 9 checks passed"));
}

#[test]
fn verify_as_csv_lists_every_check() {
    let (header, rows) = table(&stdout(&run(&["verify", "--seed", "7", "--quick", "--format", "csv"])));
    assert_eq!(rows.len(), 9);
    let ok = header.iter().position(|h| h == "ok").unwrap();
    assert!(rows.iter().all(|r| &r[ok] == "true"));
}

#[test]
fn bound_at_the_peak_shows_the_gain() {
    let (header, rows) = table(&stdout(&run(&["bound", "--j", "25", "--tau-scaled", "0.94"])));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert!(field(&header, row, "FplusE_resc") > field(&header, row, "F_resc"));
    assert!(field(&header, row, "witness_FE") >= field(&header, row, "witness_F"));
}

#[test]
fn scaling_and_coefficients() {
    let (header, rows) = table(&stdout(&run(&["scaling", "--j-list", "5,10"])));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| field(&header, r, "gain_ratio") > 1.0));

    let (header, rows) = table(&stdout(&run(&["coeffs", "--j", "10", "--tau-scaled", "0.94"])));
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| field(&header, r, "cH_opt0") == 0.0));
    let norm: f64 = field(&header, &rows[0], "cH_opt").powi(2)
        + rows.iter().map(|r| field(&header, r, "c_opt").powi(2)).sum::<f64>();
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn output_file_matches_stdout_and_json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = ["sweep", "--j", "5", "--tau-points", "20"];
    let direct = stdout(&run(&args));
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    assert!(run(&with_file).stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);

    let json: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["sweep", "--j", "5", "--tau-points", "20", "--format", "json"]))).unwrap();
    assert_eq!(json["metadata"]["command"], "sweep");
    assert_eq!(json["metadata"]["config"]["tau_points"], 20);
    let records = json["records"].as_array().unwrap();
    let (header, rows) = table(&direct);
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(&rows) {
        for name in header.iter() {
            assert_eq!(rec[name].as_f64().unwrap(), field(&header, row, name), "{name}");
        }
    }
}

#[test]
fn invalid_arguments_exit_with_two() {
    for args in [
        &["sweep", "--j", "0.3"][..],
        &["sweep", "--j", "5", "--tau-min", "-1"],
        &["sweep", "--j", "5", "--tau-points", "0"],
        &["bound", "--j", "5", "--tau-scaled", "-0.5"],
        &["sweep", "--j", "5", "--format", "text"],
        &["scaling", "--j-list", "5,abc"],
        &["sweep"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
