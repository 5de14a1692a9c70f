use std::fs::File;
use std::io::BufWriter;

use fhn_pair::integrator::{integrate, IntegratorSettings};
use fhn_pair::model::Parameters;
use fhn_pair::output::write_time_series;
use fhn_pair::sweep::named_ic;

// Anti-phase spiking at alpha = 210°, delta = 50°, sampled every 0.01
// time units after the transient. Pass a path to write the CSV there.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Parameters::with_angles_deg(210.0, 50.0)?;
    let cfg = IntegratorSettings::default().with_horizons(300.0, 30.0);
    let s0 = named_ic("anti", &p, 0)?;
    let traj = integrate(s0, &p, &cfg)?;

    let samples = traj.resample(0.01);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| (lo.min(s.x1), hi.max(s.x1)));
    println!("{} steps over [{}, {}]", traj.len(), traj.t_start(), traj.t_end());
    println!("x1 range [{lo:.4}, {hi:.4}], final state {}", traj.last());

    if let Some(path) = std::env::args().nth(1) {
        let mut w = BufWriter::new(File::create(&path)?);
        write_time_series(&mut w, samples)?;
        println!("wrote {path}");
    }
    Ok(())
}
