use fhn_pair::cli::{run_with, EXIT_CONFIG, EXIT_OK, EXIT_PARAMETER, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fhn-pair").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn error_kind(stderr: &str) -> String {
    let line = stderr.lines().last().unwrap();
    let v: Value = serde_json::from_str(line).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn simulate_writes_alternating_spikes() {
    let (code, out, _) = run(&["simulate", "--alpha-deg", "210", "--delta-deg", "50", "--ic", "anti", "--dt", "0.01"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,x1,y1,x2,y2"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let mut owners = Vec::new();
    for w in rows.windows(2) {
        for (col, who) in [(1, 1), (3, 2)] {
            if w[0][col] < 1.0 && w[1][col] >= 1.0 {
                owners.push(who);
            }
        }
    }
    assert!(owners.len() > 20);
    assert!(owners.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn equilibria_json() {
    let (code, out, _) = run(&["equilibria", "--alpha-deg", "100", "--delta-deg", "20"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["metadata"]["alpha_deg"].as_f64().unwrap().round(), 100.0);
    let rows = v["equilibria"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["equilibrium"]["kind"] == "symmetric"));
    assert!(rows.iter().all(|r| r["residual"].as_f64().unwrap() < 1e-10));
}

#[test]
fn hopf_curve_csv() {
    let (code, out, _) = run(&["hopf-curve", "--branch", "anti-phase", "--delta-start-deg", "40", "--delta-end-deg", "60", "--delta-points", "3"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("delta_deg,alpha_deg,y0,branch"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",anti-phase")));
}

#[test]
fn help_and_usage_errors() {
    let (code, out, _) = run(&["sweep", "--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Usage"));
    assert!(out.contains("Exit codes"));

    let (code, _, err) = run(&["simulate", "--no-such-flag"]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(error_kind(&err), "usage");

    let (code, _, err) = run(&["equilibria", "--delta-deg", "400"]);
    assert_eq!(code, EXIT_PARAMETER);
    assert_eq!(error_kind(&err), "parameter");
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let csv = dir.path().join("sweep.csv");
    std::fs::write(
        &config,
        format!(
            "[parameters]\ndelta_deg = 20.0\n\n[integrator]\nt_transient = 50.0\nt_observe = 100.0\n\n\
             [grid]\nalpha_start_deg = 80.0\nalpha_end_deg = 100.0\nalpha_points = 2\n\
             delta_start_deg = 10.0\ndelta_end_deg = 20.0\ndelta_points = 2\n\n[output]\npath = {:?}\n",
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let (code, out, _) = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let first = std::fs::read_to_string(&csv).unwrap();
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("alpha_deg,delta_deg,labels,multistable"));
    assert_eq!(lines.count(), 4);

    let (code, _, _) = run(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);

    std::fs::write(&config, "[parameters]\nbogus = 1\n").unwrap();
    let (code, _, err) = run(&["equilibria", "--config", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert_eq!(error_kind(&err), "config");
}
