use fhn_pair::equilibria::{hopf_curve, HopfBranch};
use fhn_pair::model::Parameters;

// Andronov-Hopf points of the symmetric equilibrium for a coarse delta grid.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Parameters::default();
    let deltas: Vec<f64> = [10.0, 30.0, 50.0, 70.0, 90.0].iter().map(|d: &f64| d.to_radians()).collect();
    for branch in [HopfBranch::InPhase, HopfBranch::AntiPhase] {
        println!("{} branch", branch.name());
        for pt in hopf_curve(branch, &deltas, &p)? {
            let q = p.with_sector(pt.alpha, pt.delta)?;
            let pair = branch.pair(pt.y0, &q)?;
            println!(
                "  delta {:5.1}°  alpha {:8.3}°  y0 {:.6}  lambda {:.1e}{:+.4}i",
                pt.delta.to_degrees(),
                pt.alpha.to_degrees(),
                pt.y0,
                pair[0].re,
                pair[0].im
            );
        }
    }
    Ok(())
}
