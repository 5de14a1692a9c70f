use fhn_pair::integrator::IntegratorSettings;
use fhn_pair::model::Parameters;
use fhn_pair::sweep::{classify_ic, standard_ic_set};

// Labels reached from each member of the standard initial-condition set.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorSettings::default();
    for (alpha, delta) in [(210.0, 50.0), (157.0, 50.0), (158.0, 50.0), (164.5915, 50.0), (213.648, 15.0)] {
        let p = Parameters::with_angles_deg(alpha, delta)?;
        println!("{alpha}°/{delta}°");
        for ic in standard_ic_set(&p, 0)? {
            println!("  {:8} {}", ic.name, classify_ic(ic.state, &p, &cfg));
        }
    }
    Ok(())
}
