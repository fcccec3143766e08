use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use mtx_core::io::{load_dataset, load_labels, load_mesh_obj, load_tree_json, store_dataset};
use mtx_core::{GridDescriptor, MultiFieldDataset, ScalarField};

fn mtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtx"))
        .args(args)
        .env_remove("MTX_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = mtx(args);
    assert!(
        out.status.success(),
        "mtx {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    mtx(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// The 1x1x5 line [5, 1, 4, 0, 3].
fn worked_example(dir: &Path) -> PathBuf {
    let grid = GridDescriptor::unit([5, 1, 1]).unwrap();
    let f = ScalarField::new("h", grid, vec![5.0, 1.0, 4.0, 0.0, 3.0]).unwrap();
    let p = dir.join("line.mvf");
    store_dataset(&MultiFieldDataset::new(grid, vec![f]).unwrap(), &p).unwrap();
    p
}

fn wells(dir: &Path) -> PathBuf {
    let p = dir.join("wells.mvf");
    ok(&["synth", "--kind", "gaussian_wells", "--dims", "24,12,12", "--seed", "5", "-o", s(&p)]);
    p
}

const WELLS_TRAIT: &str = r#"{"axes": [{"source": "wells", "normalize": "none"}],
    "trait": {"kind": "points", "points": [[-1.0]]}}"#;

#[test]
fn info_prints_fields_and_rejects_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = wells(dir.path());
    let out = ok(&["info", s(&p)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("24 x 12 x 12"));
    assert!(text.contains("wells") && text.contains("aux"));

    let out = mtx(&["info", s(&dir.path().join("missing.mvf"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));
}

#[test]
fn info_lists_derived_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.mvf");
    ok(&["synth", "--kind", "tensor_two_point_analog", "--dims", "8", "-o", s(&p)]);
    let spec = write(
        dir.path(),
        "derived.json",
        r#"{"kind": "westin_anisotropy",
            "input_fields": ["s_xx", "s_yy", "s_zz", "s_xy", "s_xz", "s_yz"],
            "output_names": ["c_l", "c_p", "c_s"]}"#,
    );
    let text = String::from_utf8(ok(&["info", s(&p), "--derived", s(&spec)]).stdout).unwrap();
    for name in ["c_l", "c_p", "c_s"] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.ends_with("yes"), "{line}");
    }
}

#[test]
fn synth_is_deterministic_for_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        "gaussian_wells",
        "tensor_two_point_analog",
        "bivariate_donor_acceptor",
        "vector_vortex_analog",
    ] {
        let a = dir.path().join(format!("{kind}_a.mvf"));
        let b = dir.path().join(format!("{kind}_b.mvf"));
        ok(&["synth", "--kind", kind, "--dims", "10,8,6", "--seed", "9", "-o", s(&a)]);
        ok(&["synth", "--kind", kind, "--dims", "10,8,6", "--seed", "9", "-o", s(&b)]);
        let da = load_dataset(&a).unwrap();
        let db = load_dataset(&b).unwrap();
        assert_eq!(da.grid().dims, [10, 8, 6]);
        assert_eq!(da, db, "{kind}");
        for f in da.fields() {
            let fa = std::fs::read(dir.path().join(format!("{kind}_a_{}.raw", f.name))).unwrap();
            let fb = std::fs::read(dir.path().join(format!("{kind}_b_{}.raw", f.name))).unwrap();
            assert_eq!(fa, fb);
        }
    }
    assert_eq!(code(&["synth", "--kind", "plasma", "-o", "x.mvf"]), 2);
    assert_eq!(code(&["synth", "--kind", "gaussian_wells", "--dims", "2", "-o", "x.mvf"]), 2);
}

#[test]
fn distance_full_box_is_zero_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let p = wells(dir.path());
    let t = write(
        dir.path(),
        "box.json",
        r#"{"axes": [{"source": "wells"}, {"source": "aux"}],
            "trait": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]}}"#,
    );
    let out = dir.path().join("d.mvf");
    ok(&["distance", s(&p), "--trait", s(&t), "-o", s(&out)]);
    let ds = load_dataset(&out).unwrap();
    assert_eq!(ds.fields().len(), 1);
    assert!(ds.fields()[0].values().iter().all(|&v| v == 0.0));
    assert!(ds.metadata.contains_key("trait"));
    ok(&["info", s(&out)]);

    let bad = write(dir.path(), "bad.json", r#"{"axes": []}"#);
    assert_eq!(code(&["distance", s(&p), "--trait", s(&bad), "-o", s(&out)]), 1);
    let missing = dir.path().join("none.json");
    assert_eq!(code(&["distance", s(&p), "--trait", s(&missing), "-o", s(&out)]), 2);
}

#[test]
fn tree_of_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let p = worked_example(dir.path());
    let out = dir.path().join("tree.json");
    ok(&["tree", s(&p), "--metric", "persistence", "--threshold", "0", "-o", s(&out)]);
    assert_eq!(load_tree_json(&out).unwrap().branches.len(), 2);
    ok(&["tree", s(&p), "--threshold", "3.5", "-o", s(&out)]);
    assert_eq!(load_tree_json(&out).unwrap().branches.len(), 1);
    ok(&["tree", s(&p), "--metric", "hypervolume", "--threshold", "0", "-o", s(&out)]);
    assert_eq!(load_tree_json(&out).unwrap().branches.len(), 2);

    assert_eq!(code(&["tree", s(&p), "--metric", "volume", "-o", s(&out)]), 2);
    assert_eq!(code(&["tree", s(&p), "--threshold", "-1", "-o", s(&out)]), 2);
}

#[test]
fn segment_methods() {
    let dir = tempfile::tempdir().unwrap();
    let p = wells(dir.path());
    let t = write(dir.path(), "t.json", WELLS_TRAIT);
    let d = dir.path().join("d.mvf");
    ok(&["distance", s(&p), "--trait", s(&t), "-o", s(&d)]);
    let labels = dir.path().join("labels.bin");

    ok(&["segment", s(&d), "--method", "bd", "--threshold", "1e9", "-o", s(&labels)]);
    let (l, legend) = load_labels(&labels).unwrap();
    assert_eq!(legend.len(), 1);
    assert_eq!(l.len(), 24 * 12 * 12);

    ok(&["segment", s(&d), "--method", "leaves", "--threshold", "0.3", "-o", s(&labels)]);
    let (l, legend) = load_labels(&labels).unwrap();
    assert_eq!(legend.len(), 2);
    // voxels above the merge saddle stay background
    assert!(l.iter().all(|&x| x <= 2));
    assert!(l.contains(&1) && l.contains(&2) && l.contains(&0));

    ok(&["segment", s(&d), "--method", "subtrees", "--cut", "0.5", "-o", s(&labels)]);
    let (l, legend) = load_labels(&labels).unwrap();
    assert_eq!(legend.len(), 2);
    assert!(l.contains(&0));

    assert_eq!(code(&["segment", s(&d), "--method", "subtrees", "-o", s(&labels)]), 2);
    assert_eq!(code(&["segment", s(&d), "--method", "bd", "--cut", "1", "-o", s(&labels)]), 2);
    assert_eq!(code(&["segment", s(&d), "--method", "flood", "-o", s(&labels)]), 2);
    assert_eq!(code(&["segment", s(&p), "-o", s(&labels)]), 2);
    ok(&["segment", s(&p), "--name", "wells", "-o", s(&labels)]);
}

#[test]
fn mesh_levels() {
    let dir = tempfile::tempdir().unwrap();
    let p = wells(dir.path());
    let t = write(dir.path(), "t.json", WELLS_TRAIT);
    let d = dir.path().join("d.mvf");
    ok(&["distance", s(&p), "--trait", s(&t), "-o", s(&d)]);
    let obj = dir.path().join("m.obj");

    ok(&["mesh", s(&d), "--level", "0.5", "-o", s(&obj)]);
    let m = load_mesh_obj(&obj).unwrap();
    assert!(!m.is_empty());
    assert!(m.is_closed());

    ok(&["mesh", s(&d), "--level", "100", "-o", s(&obj)]);
    assert!(load_mesh_obj(&obj).unwrap().is_empty());

    assert_eq!(code(&["mesh", s(&d), "--level", "-1", "-o", s(&obj)]), 2);
    assert_eq!(code(&["mesh", s(&d), "--level", "abc", "-o", s(&obj)]), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.mvf");
    ok(&["synth", "--kind", "vector_vortex_analog", "--dims", "20", "-o", s(&p)]);
    let t = write(
        dir.path(),
        "t.json",
        r#"{"axes": [{"source": "vx"}, {"source": "vy"}, {"source": "p"}],
            "trait": {"kind": "segment", "a": [0.5, 0.5, 0.0], "b": [0.5, 0.5, 0.3]}}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let d = dir.path().join(format!("d{threads}.mvf"));
        let labels = dir.path().join(format!("l{threads}.bin"));
        ok(&["--threads", threads, "distance", s(&p), "--trait", s(&t), "-o", s(&d)]);
        ok(&["segment", s(&d), "--threads", threads, "--method", "leaves", "-o", s(&labels)]);
        let raw = std::fs::read(dir.path().join(format!("d{threads}_distance.raw"))).unwrap();
        outputs.push((raw, std::fs::read(&labels).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let d = dir.path().join("env.mvf");
    let out = Command::new(env!("CARGO_BIN_EXE_mtx"))
        .args(["distance", s(&p), "--trait", s(&t), "-o", s(&d)])
        .env("MTX_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(dir.path().join("env_distance.raw")).unwrap(), outputs[0].0);
    assert_eq!(code(&["--threads", "many", "info", s(&p)]), 2);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut text = String::new();
    stream.read_to_string(&mut text).ok()?;
    Some(text)
}

#[test]
fn serve_answers_dataset_request() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.mvf");
    ok(&["synth", "--kind", "tensor_two_point_analog", "--dims", "8", "-o", s(&p)]);
    let spec = write(
        dir.path(),
        "derived.json",
        r#"[{"kind": "westin_anisotropy",
             "inputs": ["s_xx", "s_yy", "s_zz", "s_xy", "s_xz", "s_yz"],
             "outputs": ["c_l", "c_p", "c_s"]}]"#,
    );
    let port = free_port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_mtx"))
        .args(["serve", s(&p), "--derived", s(&spec), "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let response = loop {
        if let Some(r) = http_get(port, "/api/dataset") {
            break r;
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    let body = &response[response.find("\r\n\r\n").unwrap() + 4..];
    let json: serde_json::Value = serde_json::from_str(body).unwrap();
    let derived: Vec<&str> = json["derived"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(derived, ["c_l", "c_p", "c_s"]);
}

#[test]
fn serve_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = wells(dir.path());
    assert_eq!(code(&["serve", s(&p), "--port", "99999"]), 2);
    assert_eq!(code(&["serve", s(&p), "--port", "0"]), 2);
    assert_eq!(code(&["serve", s(&dir.path().join("none.mvf"))]), 2);
    assert_eq!(code(&["serve", s(&p), "--ui", s(&dir.path().join("nowhere"))]), 2);
}
