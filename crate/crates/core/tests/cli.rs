mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_audiocons"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let text = format!(
        r#"corpus_dir = "corpus"
noise_wav_path = "babble.wav"
categories = ["PN", "EN"]
n_boot = 100
{extra}
[grids]
PN = [30, 0]
EN = [30]

[measures]
audio = ["dtw"]
latent = ["cosine"]

[[encoders]]
id = "mfcc"
kind = "mfcc_stats"
"#
    );
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn grids_lists_noise_endpoints() {
    let out = cli(&["grids"], Path::new("."));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let pn = text.lines().find(|l| l.starts_with("PN")).unwrap();
    let values: Vec<&str> = pn.split_whitespace().collect();
    assert!(values.contains(&"30") && values.contains(&"-15"));
}

#[test]
fn report_before_run_fails() {
    let (dir, _) = fixture(2);
    let config = write_config(dir.path(), "");
    let out = cli(&["report", "--config", &config], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no completed run"));
}

#[test]
fn run_names_missing_noise_file() {
    let (dir, _) = fixture(2);
    std::fs::remove_file(dir.path().join("babble.wav")).unwrap();
    let config = write_config(dir.path(), "");
    let out = cli(&["run", "--config", &config], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("babble.wav"));
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!cli(&["bogus"], Path::new(".")).status.success());
    assert!(!cli(&["run"], Path::new(".")).status.success());
}

#[test]
fn stages_then_report() {
    let (dir, _) = fixture(3);
    let config = write_config(dir.path(), "");
    let d = dir.path();
    for stage in ["transform", "encode", "distances", "consistency", "report"] {
        let out = cli(&[stage, "--config", &config, "--jobs", "1"], d);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(d.join("run/excerpts/syn000__PN__30.wav").is_file());
    assert!(d.join("run/distances/PN__0/audio_dtw.csv").is_file());
    assert!(d.join("run/summary.json").is_file());
    assert!(d.join("run/plots/within_audio.csv").is_file());
    let log = std::fs::read_to_string(d.join("run/run.log")).unwrap();
    assert!(log.contains("0 misses"), "{log}");
}

#[test]
fn flags_override_config() {
    let (dir, _) = fixture(3);
    let config = write_config(dir.path(), "");
    let d = dir.path();
    let cache = d.join("elsewhere");
    let args = ["run", "--config", &config, "--seed", "9", "--cache-dir", cache.to_str().unwrap(), "--skip-codec"];
    assert!(cli(&args, d).status.success());
    assert!(cache.is_dir());
    let snapshot = std::fs::read_to_string(d.join("run/config.toml")).unwrap();
    assert!(snapshot.contains("root = 9"));
    assert!(snapshot.contains("skip_codec = true"));
}
