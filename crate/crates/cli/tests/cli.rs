use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TOY: &str = "epochs = 1
batch_size = 16
backbone.conv_channels = [8, 8, 8]
projector.hidden_dim = 16
projector.output_dim = 8
probe.epochs = 5
synthetic.length = 32
synthetic.channels = 3
synthetic.windows_per_class = 12
synthetic.segment_length = 25
synthetic.segments_per_recording = 20
";

fn har_cl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_har-cl")).args(args).env_remove("HAR_CL_THREADS").output().unwrap()
}

fn toy_config(dir: &Path) -> String {
    let p = dir.join("toy.cfg");
    fs::write(&p, TOY).unwrap();
    p.to_str().unwrap().to_string()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn error_line(o: &Output) -> String {
    assert!(!o.status.success());
    let s = String::from_utf8_lossy(&o.stderr).trim().to_string();
    assert_eq!(s.lines().count(), 1, "{s}");
    s
}

#[test]
fn evaluate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_config(dir.path());
    let out = dir.path().join("run");
    ok(&har_cl(&["evaluate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3"]));
    for f in ["report.json", "metrics.csv", "train_log.jsonl", "checkpoints/main_seed3.ckpt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seeds"], serde_json::json!([3]));
    assert_eq!(report["protocol"], "random_split");
    let csv = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("cell,seed,encoder,split,metric,value\n"));
    assert!(csv.contains("main,3,pretrained,test,accuracy,"));
}

#[test]
fn pretrain_then_evaluate_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_config(dir.path());
    let pre = dir.path().join("pre");
    ok(&har_cl(&["pretrain", "--config", &cfg, "--out", pre.to_str().unwrap()]));
    let ckpt = pre.join("checkpoints/main_seed0.ckpt");
    assert!(ckpt.exists());
    assert!(!fs::read_to_string(pre.join("metrics.csv")).unwrap().contains("accuracy"));
    let eval = dir.path().join("eval");
    let set = format!("checkpoint={}", ckpt.display());
    ok(&har_cl(&["evaluate", "--config", &cfg, "--set", &set, "--out", eval.to_str().unwrap()]));
    let log = fs::read_to_string(eval.join("train_log.jsonl")).unwrap();
    assert!(log.is_empty(), "loaded checkpoint should skip pretraining");
    assert!(fs::read_to_string(eval.join("metrics.csv")).unwrap().contains("pretrained,test,accuracy"));
}

#[test]
fn synth_output_feeds_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_config(dir.path());
    let data = dir.path().join("data");
    ok(&har_cl(&["synth", "--config", &cfg, "--out", data.to_str().unwrap()]));
    assert!(data.join("windows.jsonl").exists());
    assert!(fs::read_dir(data.join("recordings")).unwrap().count() > 0);
    let out = dir.path().join("run");
    let windows = data.join("windows.jsonl");
    ok(&har_cl(&["evaluate", "--config", &cfg, "--data", windows.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert!(out.join("metrics.csv").exists());
}

#[test]
fn protocol_commands_write_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two.cfg");
    fs::write(&cfg, format!("{TOY}synthetic.num_domains = 2\n")).unwrap();
    let cfg = cfg.to_str().unwrap().to_string();
    for (cmd, grid) in [("cross-person", "cross_person"), ("wearing", "wearing"), ("sweep-window", "window_sweep")] {
        let out = dir.path().join(cmd);
        let mut args = vec![cmd, "--config", &cfg, "--out", out.to_str().unwrap()];
        match cmd {
            "wearing" => args.extend(["--set", "synthetic.positions=[\"phone\",\"watch\"]"]),
            "sweep-window" => args.extend(["--set", "window_sweep.lengths=[16,32]"]),
            _ => {}
        }
        ok(&har_cl(&args));
        assert!(out.join(format!("{grid}.csv")).exists(), "{cmd}");
    }
    let out = dir.path().join("grid");
    let args = ["sweep-grid", "--config", &cfg, "--set", "grid.augmentations=[\"noise\",\"scale\"]", "--out", out.to_str().unwrap()];
    ok(&har_cl(&args));
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3, "{grid}");
}

#[test]
fn augview_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("view");
    ok(&har_cl(&["augview", "--config", "synthetic.length=32;synthetic.channels=3;synthetic.windows_per_class=4", "--out", out.to_str().unwrap()]));
    let csv = fs::read_to_string(out.join("augview.csv")).unwrap();
    assert!(csv.starts_with("t,channel,original,view_a,view_b\n"));
    assert_eq!(csv.lines().count(), 1 + 32 * 3);
}

#[test]
fn threads_cap_keeps_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_config(dir.path());
    let run = |threads: Option<&str>, name: &str| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_har-cl"));
        cmd.args(["sweep-grid", "--config", &cfg, "--set", "grid.key=projector.depth", "--set", "grid.values=[1,2]"]);
        cmd.args(["--set", "workers=2", "--out", out.to_str().unwrap()]);
        match threads {
            Some(t) => cmd.env("HAR_CL_THREADS", t),
            None => cmd.env_remove("HAR_CL_THREADS"),
        };
        ok(&cmd.output().unwrap());
        fs::read(out.join("metrics.csv")).unwrap()
    };
    assert_eq!(run(Some("1"), "one"), run(None, "two"));
}

#[test]
fn set_framework_takes_its_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = ["pretrain", "--config", "dataset=ucihar;data=x.jsonl", "--set", "framework=byol", "--data", "/nonexistent/w.jsonl"];
    assert!(error_line(&har_cl(&args)).starts_with("error kind=io"));
    let cfg = toy_config(dir.path());
    ok(&har_cl(&["synth", "--config", &cfg, "--set", "framework=byol", "--out", out.to_str().unwrap()]));
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["framework"], "byol");
    assert_eq!(written["lr"], 5e-4);
    assert_eq!(written["epochs"], 1);
}

#[test]
fn bad_field_is_one_line() {
    let line = error_line(&har_cl(&["evaluate", "--config", "batch_size=0"]));
    assert!(line.starts_with("error kind=invalid_config field=\"batch_size\" message="), "{line}");
    let line = error_line(&har_cl(&["evaluate", "--config", "projector.widht=3"]));
    assert!(line.starts_with("error kind=invalid_config field=\"projector.widht\""), "{line}");
}

#[test]
fn missing_inputs_are_one_line() {
    let line = error_line(&har_cl(&["evaluate", "--config", "dataset=ucihar"]));
    assert!(line.starts_with("error kind=invalid_config field=\"data\""), "{line}");
    let line = error_line(&har_cl(&["evaluate", "--config", "/nonexistent/cfg.txt"]));
    assert!(line.starts_with("error kind=io"), "{line}");
    let line = error_line(&har_cl(&["evaluate", "--data", "/nonexistent/windows.jsonl"]));
    assert!(line.starts_with("error kind=io"), "{line}");
}

#[test]
fn usage_errors_are_one_line() {
    let o = har_cl(&["train"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("error kind=usage"));
    assert!(error_line(&har_cl(&["evaluate", "--set", "novalue"])).starts_with("error kind=usage"));
    assert!(har_cl(&["--help"]).status.success());
}
