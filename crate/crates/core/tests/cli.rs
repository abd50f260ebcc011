use schemelab::cli::{parse_complex, parse_map_file, run};
use num_complex::Complex64 as C64;
use std::path::PathBuf;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["schemelab"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("schemelab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn census_table_last_row() {
    let (code, out, _) = run_cli(&["census", "--max-weight", "6", "--table"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("6 "));
    assert!(last.ends_with(" 238 494"));
    let (_, again, _) = run_cli(&["census", "--max-weight", "6", "--table"]);
    assert_eq!(out, again);
}

#[test]
fn census_list_counts() {
    let (code, out, _) = run_cli(&["census", "--max-weight", "3", "--list"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("# w=")).count(), 1 + 4 + 12);
}

#[test]
fn complex_literals() {
    assert_eq!(parse_complex("1.5-0.2i").unwrap(), C64::new(1.5, -0.2));
    assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
    assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
    assert_eq!(parse_complex("-3").unwrap(), C64::new(-3.0, 0.0));
    assert_eq!(parse_complex("1e-3+2e-2i").unwrap(), C64::new(1e-3, 2e-2));
    assert!(parse_complex("1+").is_err());
    assert!(parse_complex("").is_err());
    let m = parse_map_file("# cubic\n1 :\n0 : -1.5 0\n").unwrap();
    assert_eq!(m, vec![vec![C64::new(-1.5, 0.0), C64::new(0.0, 0.0)], vec![]]);
    assert!(parse_map_file("0 : 1\n2 : 1\n").is_err());
}

#[test]
fn scheme_and_tree_commands() {
    let d = temp_dir("scheme");
    let a = d.join("a.txt");
    let b = d.join("b.txt");
    std::fs::write(&a, "0 1 1\n1 1 0\n").unwrap();
    std::fs::write(&b, "1 1 0\n0 1 1\n").unwrap();
    let p = |x: &PathBuf| x.to_str().unwrap().to_owned();
    assert_eq!(run_cli(&["scheme", "iso", &p(&a), &p(&b)]).1.trim(), "isomorphic");
    assert!(run_cli(&["scheme", "validate", &p(&a)]).1.contains("reduced"));
    assert!(run_cli(&["scheme", "dot", &p(&a)]).1.starts_with("digraph"));
    let (code, out, _) = run_cli(&["symmetry", &p(&a)]);
    assert_eq!(code, 0);
    assert!(out.contains("|Gamma| = 3"));
    let (code, out, _) = run_cli(&["model", "center", &p(&a)]);
    assert_eq!(code, 0);
    assert!(out.contains("markings = 3"));
    let (code, out, _) = run_cli(&["hubbard", "build", &p(&a)]);
    assert_eq!(code, 0);
    assert!(!out.contains("FAIL"));
    assert!(run_cli(&["hubbard", "build", &p(&a), "--dot"]).1.contains("shape=box"));
    let bad = d.join("bad.txt");
    std::fs::write(&bad, "0 0 0\n").unwrap();
    assert_eq!(run_cli(&["scheme", "validate", &p(&bad)]).0, 1);
    assert_eq!(run_cli(&["scheme", "validate", &p(&d.join("missing"))]).0, 1);
    std::fs::remove_dir_all(&d).unwrap();
}

#[test]
fn moduli_commands() {
    let (code, out, _) = run_cli(&["moduli", "check", "--alpha", "1", "--beta", "1", "--gamma", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("m2fm residual = 0.000000000000+0.000000000000i"));
    let (code, out, _) = run_cli(&["moduli", "x2l", "0.5", "-0.5", "0"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1.000000000000+0.000000000000i 1.000000000000+0.000000000000i 0.750000000000"));
    let (code, out, _) = run_cli(&["moduli", "l2x", "1", "1", "0.75"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    assert_eq!(run_cli(&["moduli", "x2l", "1", "1", "1"]).0, 2);
}

#[test]
fn extract_and_render_commands() {
    let d = temp_dir("render");
    let map = d.join("basilica.map");
    std::fs::write(&map, "0 : -1\n").unwrap();
    let (code, out, _) = run_cli(&["extract-scheme", "--map", map.to_str().unwrap(), "--res", "256"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out, "# full\n0 1 1\n1 0 0\n# reduced\n0 1 0\n");

    let img = d.join("t.ppm");
    let args = ["render", "tricorn", "--res", "32x24", "--max-iter", "100", "-o", img.to_str().unwrap()];
    assert_eq!(run_cli(&args).0, 0);
    let first = std::fs::read(&img).unwrap();
    assert!(first.starts_with(b"P6\n32 24\n255\n"));
    assert_eq!(first.len(), 13 + 32 * 24 * 3);
    assert_eq!(run_cli(&args).0, 0);
    assert_eq!(std::fs::read(&img).unwrap(), first);

    let j = d.join("j.ppm");
    let args = ["julia", "--map", map.to_str().unwrap(), "--res", "16", "--window=-2,2,-2,2", "-o", j.to_str().unwrap()];
    assert_eq!(run_cli(&args).0, 0);
    assert!(std::fs::read(&j).unwrap().starts_with(b"P6\n16 16\n255\n"));

    assert_eq!(run_cli(&["render", "nope", "-o", "x.ppm"]).0, 1);
    assert_eq!(run_cli(&["render", "top", "--res", "0x3", "-o", "x.ppm"]).0, 1);
    assert_eq!(run_cli(&["render", "top", "--window=1,0,0,1", "-o", "x.ppm"]).0, 1);
    assert_eq!(run_cli(&[]).0, 1);
    std::fs::remove_dir_all(&d).unwrap();
}
