use fhn_pair::attractors::{largest_lyapunov, CHAOS_THRESHOLD};
use fhn_pair::integrator::IntegratorSettings;
use fhn_pair::model::Parameters;
use fhn_pair::sweep::named_ic;

// Largest Lyapunov exponent on an equilibrium, a cycle and the chaotic
// attractor at the end of the period-doubling cascade.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorSettings::default();
    for (alpha, delta, ic) in [(157.0, 50.0, "sym"), (210.0, 50.0, "anti"), (213.648, 15.0, "anti")] {
        let p = Parameters::with_angles_deg(alpha, delta)?;
        let lambda = largest_lyapunov(named_ic(ic, &p, 0)?, &p, &cfg)?;
        let tag = if lambda > CHAOS_THRESHOLD { "chaotic" } else { "regular" };
        println!("{alpha}°/{delta}° from {ic}: {lambda:+.5} ({tag})");
    }
    Ok(())
}
