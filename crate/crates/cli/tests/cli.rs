use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_influence"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Relative path -> contents for every file under `root`.
fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn copy_fixture_inputs(to: &Path) {
    let src = fixtures().join("synthetic");
    let dst = to.join("synthetic");
    std::fs::create_dir_all(&dst).unwrap();
    for f in ["microdata.dat", "schema.toml", "influence.toml"] {
        std::fs::copy(src.join(f), dst.join(f)).unwrap();
    }
}

fn assert_trees_equal(got: &Path, want: &Path) {
    let (got, want) = (tree(got), tree(want));
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (name, bytes) in &want {
        assert!(got[name] == *bytes, "{name} differs from the golden copy");
    }
}

#[test]
fn help_for_every_subcommand() {
    for sub in ["cluster", "influence", "synth"] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--out-dir"));
    }
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("bogus").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["synth", "--seed", "x"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn nonpositive_radius_is_rejected_before_reading_input() {
    let dir = tempfile::tempdir().unwrap();
    for r in ["0", "-0.5"] {
        let out = run_in(dir.path(), &["cluster", "--input", "does-not-exist.csv", "--radius", r]);
        assert_eq!(out.status.code(), Some(1), "radius {r}");
        assert!(!dir.path().join("cluster_out").exists());
    }
}

#[test]
fn cluster_two_blobs_and_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("a,b\n");
    for i in 0..20 {
        let j = f64::from(i) * 0.01;
        csv += &format!("{},{}\n", 1.0 + j, 2.0 - j);
        csv += &format!("{},{}\n", 9.0 - j, 8.0 + j);
    }
    std::fs::write(dir.path().join("blobs.csv"), csv).unwrap();
    let out = run_in(dir.path(), &["cluster", "--input", "blobs.csv", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("clusters: 2"), "{stdout}");
    assert!(stdout.contains("sizes: 20 20"), "{stdout}");
    let centers = std::fs::read_to_string(dir.path().join("o/centers.csv")).unwrap();
    assert_eq!(centers.lines().count(), 3);
    let assignments = std::fs::read_to_string(dir.path().join("o/assignments.csv")).unwrap();
    assert_eq!(assignments.lines().count(), 41);
    assert!(dir.path().join("o/manifest.json").exists());

    std::fs::write(dir.path().join("one.csv"), "x,y,z\n1.5,-2,3e3\n").unwrap();
    let out = run_in(dir.path(), &["cluster", "--input", "one.csv", "--out-dir", "p"]);
    assert_eq!(out.status.code(), Some(0));
    let centers = std::fs::read_to_string(dir.path().join("p/centers.csv")).unwrap();
    assert_eq!(centers, "cluster,row,size,x,y,z\n1,0,1,1.5,-2,3000\n");
}

#[test]
fn bad_tables_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.csv"), "a,b\n1,2\n3,four\n").unwrap();
    let out = run_in(dir.path(), &["cluster", "--input", "t.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("four"), "{err}");

    let out = run_in(dir.path(), &["cluster", "--input", "missing.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn missing_microdata_names_path_and_step() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture_inputs(dir.path());
    std::fs::remove_file(dir.path().join("synthetic/microdata.dat")).unwrap();
    let out = run_in(dir.path(), &["influence", "--config", "synthetic/influence.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("load") && err.contains("synthetic/microdata.dat"), "{err}");
    assert!(!dir.path().join("synthetic/report").exists());
}

#[test]
fn missing_config_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["influence", "--config", "nope.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn synth_matches_committed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["synth", "--seed", "2000", "--households", "2000", "--out-dir", "synthetic"],
    );
    assert_eq!(out.status.code(), Some(0));
    let got = tree(&dir.path().join("synthetic"));
    let want = tree(&fixtures().join("synthetic"));
    for (name, bytes) in &got {
        assert!(want[name] == *bytes, "{name} differs from the committed fixture");
    }
}

#[test]
fn synth_size_zero_writes_empty_valid_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["synth", "--size", "0", "--out-dir", "z"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("z/microdata.dat")).unwrap(), b"");
    // the empty file parses; the pipeline then stops at the window step
    let out = run_in(dir.path(), &["influence", "--config", "z/influence.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: separate_groups"));
}

#[test]
fn influence_reproduces_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture_inputs(dir.path());
    let out = run_in(dir.path(), &["influence", "--config", "synthetic/influence.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("clusters: 3"));
    assert_trees_equal(&dir.path().join("synthetic/report"), &fixtures().join("synthetic/report"));
}

#[test]
fn reruns_and_thread_counts_give_identical_trees() {
    let runs: Vec<_> = ["1", "4", "4"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            copy_fixture_inputs(dir.path());
            let out = run_in(
                dir.path(),
                &["influence", "--config", "synthetic/influence.toml", "--threads", threads],
            );
            assert_eq!(out.status.code(), Some(0));
            dir
        })
        .collect();
    let first = tree(&runs[0].path().join("synthetic/report"));
    for run in &runs[1..] {
        assert!(tree(&run.path().join("synthetic/report")) == first);
    }
}

#[test]
fn record_timings_adds_durations() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixture_inputs(dir.path());
    let out = run_in(
        dir.path(),
        &["influence", "--config", "synthetic/influence.toml", "--out-dir", "t", "--record-timings"],
    );
    assert_eq!(out.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("t/manifest.json")).unwrap();
    assert!(manifest.contains("\"seconds\""));
}
