use fhn_pair::output::write_sweep;
use fhn_pair::sweep::{sweep_plane, RunConfig};

// One coarse row of the parameter plane at delta = 50°. The same TOML is
// accepted by `fhn-pair sweep --config`. Pass a path to keep the CSV.
const CONFIG: &str = r#"
[grid]
alpha_start_deg = 150.0
alpha_end_deg = 220.0
alpha_points = 14
delta_start_deg = 0.0
delta_end_deg = 100.0
delta_points = 2
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::from_toml_str(CONFIG)?;
    let cells = sweep_plane(&cfg)?;
    for c in cells.iter().filter(|c| c.delta_deg == 50.0) {
        let labels: Vec<String> = c.inventory.iter().map(ToString::to_string).collect();
        println!("{:6.1}°  {:5}  {}", c.alpha_deg, c.multistable, labels.join(" "));
    }
    if let Some(path) = std::env::args().nth(1) {
        write_sweep(&mut std::io::BufWriter::new(std::fs::File::create(&path)?), &cells)?;
        println!("wrote {path}");
    }
    Ok(())
}
