use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mocpde(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mocpde")).args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn every_subcommand_has_help() {
    let t = TempDir::new().unwrap();
    for sub in ["moc-verify", "moc-search", "simulate", "mollify-study", "besov", "gen-field", "replay"] {
        let o = mocpde(&[sub, "--help"], t.path());
        assert_eq!(code(&o), 0, "{sub}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"));
    }
    assert_eq!(code(&mocpde(&["--help"], t.path())), 0);
    assert_eq!(code(&mocpde(&["no-such-command"], t.path())), 2);
}

#[test]
fn verify_exit_codes() {
    let t = TempDir::new().unwrap();
    let o = mocpde(
        &["moc-verify", "--alpha", "0.5", "--gamma", "0.01", "--delta", "0.1", "--c1", "0", "--c2", "1"],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["negativity.json", "negativity.csv", "validation.json", "manifest.json"] {
        assert!(t.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(t.path().join("negativity.csv")).unwrap();
    assert!(csv.lines().count() > 160);

    let o = mocpde(&["moc-verify", "--c1", "1", "--c2", "1"], t.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--alpha"));

    let o = mocpde(
        &["moc-verify", "--alpha", "0.5", "--r", "1.7", "--gamma", "0.01", "--delta", "0.1", "--c1", "1", "--c2", "1"],
        t.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("r must lie in (1, 1 + alpha)"), "{}", stderr(&o));

    // Heavy convection against a large γ is a genuine failure.
    let o = mocpde(
        &["moc-verify", "--alpha", "0.5", "--gamma", "0.05", "--delta", "0.1", "--c1", "100", "--c2", "1"],
        t.path(),
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn search_then_verify() {
    let t = TempDir::new().unwrap();
    let s = t.path().join("s");
    let o = mocpde(&["moc-search", "--alpha", "0.5", "--c1", "1", "--c2", "1"], &s);
    assert_eq!(code(&o), 0);
    let params = s.join("params.json");
    let p = json(&params);
    assert!(p["gamma"].as_f64().unwrap() < p["delta"].as_f64().unwrap());
    let o = mocpde(
        &["moc-verify", "--alpha", "0.5", "--c1", "1", "--c2", "1", "--params", params.to_str().unwrap()],
        &t.path().join("v"),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let f = t.path().join("f");
    let o = mocpde(&["moc-search", "--alpha", "0.5", "--c1", "1e6", "--c2", "1", "--budget", "4"], &f);
    assert_eq!(code(&o), 3);
    assert!(!f.join("params.json").exists());
    assert_eq!(json(&f.join("search.json"))["trail"].as_array().unwrap().len(), 4);

    let o = mocpde(&["moc-search", "--alpha", "1.5", "--c1", "1", "--c2", "1"], &t.path().join("x"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("alpha"));
}

#[test]
fn simulate_outputs_and_determinism() {
    let t = TempDir::new().unwrap();
    let args = ["simulate", "--n", "32", "--seed", "7", "--t-final", "0.3", "--dt", "0.05", "--stride", "2"];
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert_eq!(code(&mocpde(&args, &a)), 0);
    assert_eq!(code(&mocpde(&args, &b)), 0);
    for f in ["series.csv", "report.json", "snapshots/index.json", "snapshots/snap_0000.mocf"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("series.csv")).unwrap();
    assert!(csv.starts_with("t,l2,linf,"));
    // Samples at steps 0, 2, 4 and the final step 6.
    assert_eq!(csv.lines().count(), 5);

    let m = json(&a.join("manifest.json"));
    assert_eq!(m["subcommand"], "simulate");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["exit_code"], 0);
    assert!(m["job"]["config"]["alpha"].is_number());

    let other = mocpde(
        &["simulate", "--n", "32", "--seed", "8", "--t-final", "0.3", "--dt", "0.05", "--stride", "2"],
        &t.path().join("c"),
    );
    assert_eq!(code(&other), 0);
    assert_ne!(std::fs::read(a.join("series.csv")).unwrap(), std::fs::read(t.path().join("c/series.csv")).unwrap());
}

#[test]
fn zero_field_and_abort() {
    let t = TempDir::new().unwrap();
    let z = t.path().join("z");
    assert_eq!(code(&mocpde(&["simulate", "--n", "32", "--zero"], &z)), 0);
    assert_eq!(json(&z.join("report.json"))["blowup_integral"], 0.0);

    let s = t.path().join("s");
    let o = mocpde(
        &[
            "simulate",
            "--model",
            "mpm3d",
            "--nu",
            "0",
            "--n",
            "16",
            "--linf",
            "200",
            "--k-max",
            "6",
            "--dt",
            "0.05",
            "--t-final",
            "2",
        ],
        &s,
    );
    assert_eq!(code(&o), 4);
    let r = json(&s.join("report.json"));
    assert_eq!(r["complete"], false);
    assert!(r["aborted_at"].as_f64().unwrap() < 2.0);
    assert!(std::fs::read_to_string(s.join("series.csv")).unwrap().lines().count() >= 2);
    assert_eq!(json(&s.join("manifest.json"))["exit_code"], 4);
}

#[test]
fn config_file_and_bad_keys() {
    let t = TempDir::new().unwrap();
    let cfg = t.path().join("run.cfg");
    std::fs::write(&cfg, "# desk run\n[run]\nmodel = qg2d\nn = 32\nt_final = 0.2\n\n[initial]\nseed = 5\nk_max = 4\n")
        .unwrap();
    let out = t.path().join("o");
    let o = mocpde(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "16"], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["job"]["config"]["n"], 16);
    assert_eq!(m["seed"], 5);

    std::fs::write(&cfg, "[run]\nmodel = qg2d\nstep_size = 0.1\n").unwrap();
    let o = mocpde(&["simulate", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("run.step_size"), "{}", stderr(&o));

    std::fs::write(&cfg, "[run]\nalpha = half\n").unwrap();
    let o = mocpde(&["simulate", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("run.alpha"), "{}", stderr(&o));
}

#[test]
fn mollify_study_edges() {
    let t = TempDir::new().unwrap();
    let o = mocpde(&["mollify-study", "--eps-list", "0.4,0.2,0.1"], t.path());
    assert_eq!(code(&o), 2);
    let o = mocpde(&["mollify-study", "--eps-list", "0.4,0.2,0.2,0.1"], t.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("duplicate"));
    let o = mocpde(&["mollify-study", "--eps-list", "0.4,0.2,0.1,0.05", "--zero"], t.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate"));

    let ok = t.path().join("ok");
    let o = mocpde(&["mollify-study", "--eps-list", "0.4,0.2,0.1,0.05", "--t-final", "0.3"], &ok);
    assert_eq!(code(&o), 0);
    let side = json(&ok.join("runs/eps_3.json"));
    assert_eq!(side["eps"], 0.05);
    assert!(side["norms"]["Hm"].as_f64().unwrap() > 0.0);
    assert!(ok.join("runs/eps_3.mocf").exists());
    // An unreachable threshold is a failed check, not an input error.
    let o = mocpde(&["mollify-study", "--eps-list", "0.4,0.2,0.1,0.05", "--t-final", "0.3", "--threshold", "5"], &ok);
    assert_eq!(code(&o), 3);
}

#[test]
fn besov_profiles() {
    let t = TempDir::new().unwrap();
    let g = t.path().join("g");
    assert_eq!(code(&mocpde(&["gen-field", "--kind", "cosine", "--mode", "8,0", "--n", "64"], &g)), 0);
    assert_eq!(code(&mocpde(&["gen-field", "--kind", "zero", "--n", "32", "--name", "zero.mocf"], &g)), 0);
    let cos = g.join("field.mocf");

    let b = t.path().join("b");
    assert_eq!(code(&mocpde(&["besov", "--field", cos.to_str().unwrap(), "--s", "1"], &b)), 0);
    let csv = std::fs::read_to_string(b.join("profile.csv")).unwrap();
    let big: Vec<i32> = csv
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .filter(|(_, v)| v.parse::<f64>().unwrap() > 1e-10)
        .map(|(j, _)| j.parse().unwrap())
        .collect();
    assert_eq!(big, vec![2, 3]);

    let z = t.path().join("z");
    let o = mocpde(&["besov", "--field", g.join("zero.mocf").to_str().unwrap(), "--bernstein"], &z);
    assert_eq!(code(&o), 0);
    let s = json(&z.join("summary.json"));
    assert_eq!(s["norm"], 0.0);
    assert!(s["bernstein"].as_array().unwrap().iter().all(|r| r["skipped"] == true));

    let o = mocpde(&["besov", "--field", t.path().join("missing.mocf").to_str().unwrap()], &z);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.mocf"));
    let o = mocpde(&["besov", "--field", cos.to_str().unwrap(), "--p", "0.5"], &z);
    assert_eq!(code(&o), 2);
}

#[test]
fn gen_field_validation() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&mocpde(&["gen-field", "--kind", "cosine", "--n", "16"], t.path())), 2);
    assert_eq!(code(&mocpde(&["gen-field", "--kind", "cosine", "--mode", "8,0", "--n", "16"], t.path())), 2);
    assert_eq!(code(&mocpde(&["gen-field", "--dim", "4"], t.path())), 2);
    let o = mocpde(&["gen-field", "--dim", "3", "--n", "16", "--linf", "0.5"], t.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("interpolant sup 0.500000"));
}

#[test]
fn replay_and_thread_cap() {
    let t = TempDir::new().unwrap();
    let a = t.path().join("a");
    assert_eq!(code(&mocpde(&["gen-field", "--seed", "3", "--n", "32"], &a)), 0);
    let b = t.path().join("b");
    let o = mocpde(&["replay", a.join("manifest.json").to_str().unwrap()], &b);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(a.join("field.mocf")).unwrap(), std::fs::read(b.join("field.mocf")).unwrap());
    assert_eq!(json(&a.join("manifest.json"))["job"], json(&b.join("manifest.json"))["job"]);

    let o = mocpde(&["replay", t.path().join("nope.json").to_str().unwrap()], &b);
    assert_eq!(code(&o), 2);

    let run = |threads: &str, out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_mocpde"))
            .env("MOCPDE_THREADS", threads)
            .args(["moc-search", "--alpha", "0.3", "--c1", "1", "--c2", "1", "--out"])
            .arg(out)
            .output()
            .unwrap()
    };
    let o = run("0", &t.path().join("x"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("MOCPDE_THREADS"));
    let (one, four) = (t.path().join("one"), t.path().join("four"));
    assert_eq!(code(&run("1", &one)), 0);
    assert_eq!(code(&run("4", &four)), 0);
    assert_eq!(json(&one.join("manifest.json"))["threads"], 1);
    assert_eq!(std::fs::read(one.join("search.json")).unwrap(), std::fs::read(four.join("search.json")).unwrap());
}
