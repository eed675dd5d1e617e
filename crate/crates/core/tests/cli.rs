use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frugal-rl"))
}

#[test]
fn oracle_prints_reference_values() {
    let out = bin()
        .args(["oracle", "--env", "chain:5", "--agent", "dmsoa", "--c", "-0.85", "--gamma", "1", "--K", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,c,gamma,K,optimal_return,ratio"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "chain:5");
    assert!((row[4].parse::<f64>().unwrap() + 3.7).abs() < 1e-12);

    let out = bin()
        .args(["oracle", "--env", "chain:5", "--agent", "osmboa", "--c", "-0.85,-0.5,0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((first[4].parse::<f64>().unwrap() + 3.55).abs() < 1e-12);
}

#[test]
fn train_then_summarize_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "env = chain:5\nagent = dmsoa\nacnomdp.c = -0.85\nacnomdp.gamma = 1.0\nneural.hidden = 8\n\
         schedule.total_decisions = 100000\nschedule.warmup = 10\nschedule.batch_size = 4\neval.period = 5\neval.episodes = 2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["train", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seeds", "1,2", "--set", "schedule.episodes=6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let episodes = std::fs::read_to_string(out_dir.join("episodes.csv")).unwrap();
    assert_eq!(episodes.lines().count(), 13);

    let out = bin().arg("summarize").arg(&out_dir).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed 1:") && text.contains("pooled:"));

    let out = bin().arg("curves").arg(&out_dir).args(["--buckets", "3"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(out_dir.join("curves.csv")).unwrap().lines().count(), 4);
}

#[test]
fn unknown_keys_fail_with_the_key_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "acnomdp.colour = red\n").unwrap();
    let out = bin().args(["train", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("acnomdp.colour"));
}
