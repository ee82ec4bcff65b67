//! Monte-Carlo campaigns: schema, resumption and worker-count invariance.

use std::fs;

use cvqkd_recon::campaign::{run_campaign, ExperimentConfig, RunOptions};

const SWEEP: &str = r#"
kind = "sweep_afr"
seed = 5
beta_l = [1.0]
afr_grid = [0.1, 0.5, 1.0]

[code]
kind = "ira"
k = 32
m = 96
info_degree = 3.0
seed = 1

[monte_carlo]
frames = 300
checkpoint_every = 100
max_iterations = 10
"#;

fn run(dir: &std::path::Path, workers: usize) -> Vec<u8> {
    let cfg = ExperimentConfig::from_toml(SWEEP).unwrap();
    let out = run_campaign(
        &cfg,
        &RunOptions {
            output_dir: Some(dir.to_path_buf()),
            workers: Some(workers),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.manifest.workers, workers);
    fs::read(dir.join("sweep_afr.csv")).unwrap()
}

#[test]
fn sweep_schema_and_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let one = run(&dir.path().join("one"), 1);
    let three = run(&dir.path().join("three"), 3);
    assert_eq!(one, three);

    let text = String::from_utf8(one).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k,rate,beta_l,afr,accepted,q_c,ber_af,ber_lo,ber_hi,capacity_bsc,beta_t,low_confidence"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[5]).collect::<Vec<_>>(), ["30", "150", "300"]);
    assert!(dir.path().join("one/trend.csv").exists());
}

#[test]
fn resumed_campaign_matches_fresh() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = run(&dir.path().join("fresh"), 1);

    // truncate the checkpoint of a finished run to simulate an interruption
    let resumed_dir = dir.path().join("resumed");
    run(&resumed_dir, 1);
    let ck = fs::read_dir(resumed_dir.join("checkpoints"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .unwrap();
    let text = fs::read_to_string(&ck).unwrap();
    let kept: Vec<&str> = text.lines().take(120).collect();
    fs::write(&ck, kept.join("\n") + "\n").unwrap();
    fs::remove_file(resumed_dir.join("sweep_afr.csv")).unwrap();

    assert_eq!(run(&resumed_dir, 2), fresh);
}

#[test]
fn shipped_configs_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let report = ExperimentConfig::load(&path).unwrap().validate();
        assert!(report.is_ok(), "{}: {:?}", path.display(), report.errors);
        n += 1;
    }
    assert!(n >= 6);
}
