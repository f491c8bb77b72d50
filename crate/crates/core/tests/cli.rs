use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fosd-screen"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn list_names_all_builtins() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().count(), 9);
    assert!(names.lines().any(|l| l == "tax_mixture"));
}

#[test]
fn show_prints_parsable_config() {
    let out = bin().args(["show", "cor1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("signal = transformed"));
    assert_eq!(bin().args(["show", "nope"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "[scenario]\nname = bad\n[prior]\nfamily = uniform\nparams = 1\n").unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_expectation_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("wrong.cfg");
    let text = "[scenario]\nname = wrong\n[prior]\nfamily = uniform\nparams = 0 1\n[kernel]\ntype = triangle_rectangle\n\
                [conditioning]\npoints = 1 2\n[checks]\nrun = fosd\n[expect]\nfosd_points = dominated\n";
    fs::write(&cfg, text).unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn no_timestamp_output_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = tmp.path().join(sub);
        let status = bin()
            .args(["run", "cor1", "lemma_ruleout", "--mc-n", "20000", "--no-timestamp", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap()
            .status;
        assert_eq!(status.code(), Some(0));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    for name in ["cor1", "lemma_ruleout"] {
        let fa = read_dir_sorted(&a.join(name));
        let fb = read_dir_sorted(&b.join(name));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{name} differs between runs");
    }
}

#[test]
fn timestamp_line_present_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "lemma_ruleout", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let v = fs::read_to_string(tmp.path().join("lemma_ruleout").join("verdicts.txt")).unwrap();
    assert!(v.starts_with("# generated_unix="));
}
