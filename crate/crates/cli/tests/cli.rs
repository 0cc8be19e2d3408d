use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn ism(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ism"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ism-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bound_prints_both_enclosures() {
    let o = ism(&[
        "bound", "--expr", "exp(x1)", "--domain", "x1=[0,1]", "-N", "4",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let nums: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == '[' || c == ']' || c == ',')
        .filter_map(|t| t.parse().ok())
        .collect();
    assert_eq!(nums.len(), 4, "{text}");
    assert!((nums[0] - 1.0).abs() < 1e-12 && (nums[1] - std::f64::consts::E).abs() < 1e-12);
    assert!(nums[2] <= 1.0 && nums[3] >= std::f64::consts::E);
}

#[test]
fn errors_exit_with_code_two() {
    let cases: [&[&str]; 4] = [
        &["bound", "--expr", "sin(x1", "--domain", "x1=[0,1]"],
        &["bound", "--expr", "x2", "--domain", "x1=[0,1]"],
        &["bound", "--expr", "x1", "--domain", "x1=[1,0]"],
        &["bound", "--expr", "log(x1)", "--domain", "x1=[-1,1]"],
    ];
    for args in cases {
        let o = ism(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn compare_writes_metadata_and_one_row() {
    let o = ism(&[
        "compare",
        "--expr",
        "sin(x1)+sin(x2)",
        "--domain",
        "x1=[0,2*pi];x2=[0,2*pi]",
        "-N",
        "64",
        "--grid",
        "200",
        "--seed",
        "9",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# version="));
    assert!(
        lines.contains(&"# seed=9") && lines.contains(&"# N=64") && lines.contains(&"# grid=200")
    );
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        lines[header],
        "expr,N,seed,isa_lo,isa_hi,ia_lo,ia_hi,oracle_lo,oracle_hi,dH_isa,dH_ia,wall_ms"
    );
    assert_eq!(lines.len(), header + 2);
    let cells: Vec<&str> = lines[header + 1].split(',').collect();
    assert_eq!(&cells[..3], &["sin(x1)+sin(x2)", "64", "9"]);
    // Both methods are exact up to rounding here; what remains is the grid's own error.
    let dh_isa: f64 = cells[9].parse().unwrap();
    let dh_ia: f64 = cells[10].parse().unwrap();
    assert!(dh_isa < 1e-3 && dh_ia < 1e-3 && (dh_isa - dh_ia).abs() < 1e-12);
}

#[test]
fn compare_beats_interval_arithmetic_on_repeated_variables() {
    let o = ism(&[
        "compare",
        "--expr",
        "sin(x1)*cos(x1)+sin(x2)",
        "--domain",
        "x1=[0,2*pi];x2=[0,2*pi]",
        "-N",
        "64",
        "--grid",
        "300",
    ]);
    let row = stdout(&o).lines().last().unwrap().to_string();
    let cells: Vec<f64> = row.split(',').skip(3).map(|c| c.parse().unwrap()).collect();
    let (dh_isa, dh_ia) = (cells[6], cells[7]);
    assert!((cells[2] + 2.0).abs() < 1e-12 && (cells[3] - 2.0).abs() < 1e-12);
    assert!(dh_isa < 0.1 && dh_ia > 0.45, "{row}");
}

#[test]
fn compare_of_a_constant_is_exact() {
    let o = ism(&[
        "compare", "--expr", "0.5", "--domain", "x1=[0,1]", "--grid", "10",
    ]);
    let text = stdout(&o);
    let row = text.lines().last().unwrap();
    assert!(
        row.starts_with("0.5,10,0,0.5,0.5,0.5,0.5,0.5,0.5,0,0,"),
        "{row}"
    );
}

#[test]
fn recursion_csv_is_reproducible() {
    let dir = scratch("recursion");
    let run = |name: &str| {
        let path = dir.join(name);
        let o = ism(&[
            "experiment",
            "recursion",
            "--depth",
            "2",
            "--grid",
            "15",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "k,dH_isa,dH_ia,hull1_lo,hull1_hi,hull2_lo,hull2_hi,hull3_lo,hull3_hi"
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1,") && rows[2].starts_with("2,"));
    assert!(rows.iter().skip(1).all(|r| r.split(',').count() == 9));
    assert!(a.contains("# N=20\n") && a.contains("# seed=0\n"));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fig1_writes_one_file_per_subplot() {
    let dir = scratch("fig1");
    let o = ism(&[
        "experiment",
        "fig1",
        "--points",
        "3",
        "--grid",
        "40",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for x1max in ["0.1", "1", "10"] {
        let text = fs::read_to_string(dir.join(format!("fig1_x1max_{x1max}.csv"))).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "x2max,dH_isa_N1,dH_isa_N10,dH_isa_N100,dH_ia");
        assert_eq!(rows.len(), 4);
        assert!(rows[1].starts_with("0.1,") && rows[3].starts_with("20,"));
    }
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn rejects_zero_depth() {
    assert_eq!(
        ism(&["experiment", "recursion", "--depth", "0"])
            .status
            .code(),
        Some(2)
    );
}
