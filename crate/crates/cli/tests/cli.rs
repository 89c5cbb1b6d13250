use std::path::Path;
use std::process::{Command, Output};

fn wfrestore(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfrestore"))
        .args(args)
        .current_dir(dir)
        .env_remove("WFRESTORE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn degrade_then_restore_improves_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = wfrestore(
        &[
            "degrade",
            "--fixture",
            "checkerboard",
            "--size",
            "48",
            "--blur",
            "III",
            "--sigma",
            "2",
            "--seed",
            "3",
            "-o",
            "obs.pgm",
            "--truth-out",
            "truth.pgm",
            "--kernel-out",
            "k.txt",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("psnr"));
    assert!(d.join("obs.pgm").is_file() && d.join("k.txt").is_file());

    let out = wfrestore(
        &[
            "restore",
            "-i",
            "obs.pgm",
            "--blur",
            "k.txt",
            "--solver",
            "mdal",
            "--lambda",
            "1",
            "--sigma",
            "2",
            "--truth",
            "truth.pgm",
            "-o",
            "rest.pgm",
            "--trace",
            "trace.csv",
        ],
        d,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("stage 1:"), "{text}");
    let restored: f64 = text
        .split("psnr ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let degraded = wfrestore(
        &[
            "degrade",
            "--fixture",
            "checkerboard",
            "--size",
            "48",
            "--sigma",
            "2",
            "--seed",
            "3",
            "-o",
            "again.pgm",
        ],
        d,
    );
    let before: f64 = stdout(&degraded)
        .split("psnr ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(restored > before + 3.0, "{restored} vs {before}");
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("stage,iteration,relative_change,residual\n1,1,"));
}

#[test]
fn oracle_restore_needs_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = wfrestore(&["restore", "-i", "x.pgm", "--oracle", "-o", "y.pgm"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn bench_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("b.conf"),
        "images = ramp\nsize = 32\ncases = III:1\nsolvers = none, mdal, isd\nlambda = 0.3, 1\nnu = 0.01\nstages = 2\nmax_inner = 20\n",
    )
    .unwrap();
    for run in ["a", "b"] {
        let out = wfrestore(&["bench", "b.conf", "-o", run], d);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("best PSNR"));
    }
    for f in [
        "runs.csv",
        "summary.csv",
        "summary_ssim.csv",
        "stages.csv",
        "summary.txt",
    ] {
        let a = std::fs::read(d.join("a").join(f)).unwrap();
        let b = std::fs::read(d.join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let summary = std::fs::read_to_string(d.join("a/summary.csv")).unwrap();
    assert!(summary.starts_with("image,blur_type,sigma,solver,lambda,nu,stages,psnr,ssim,seconds,iterations\n"));
    assert_eq!(summary.lines().count(), 4);
    assert!(d.join("a/ramp_III_s1_degraded.pgm").is_file());
    assert!(d.join("a/ramp_III_s1_truncated_isd.pgm").is_file());
}

#[test]
fn bench_config_errors_fail_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.conf"), "sigma = loud\n").unwrap();
    let out = wfrestore(&["bench", "bad.conf"], d);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("sigma"), "{}", stderr(&out));
    let out = wfrestore(&["bench", "missing.conf"], d);
    assert!(!out.status.success());
}

#[test]
fn decay_writes_sorted_profile() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = wfrestore(&["decay", "--fixture", "stripes", "--size", "32", "-o", "decay.csv"], d);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("top 1%"));
    let text = std::fs::read_to_string(d.join("decay.csv")).unwrap();
    let mags: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mags.len(), 8 * 32 * 32);
    assert!(mags.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn kernel_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = wfrestore(&["kernel", "--blur", "I"], dir.path());
    assert!(out.status.success());
    let k: wfrestore::Kernel = stdout(&out).parse().unwrap();
    assert_eq!(k, wfrestore::degrade::BlurType::I.kernel());
}

#[test]
fn thread_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_wfrestore"))
            .args(["kernel", "--blur", "III"])
            .current_dir(dir.path())
            .env("WFRESTORE_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("2").status.success());
    let bad = run("many");
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("WFRESTORE_THREADS"));
    assert!(!run("0").status.success());
}
