use fhn_pair::attractors::find_limit_cycle;
use fhn_pair::integrator::IntegratorSettings;
use fhn_pair::model::Parameters;
use fhn_pair::sweep::named_ic;

// Periodic attractors with their Floquet multipliers. At 210°/50° the
// in-phase and anti-phase cycles coexist; at 157°/50° the sequential
// cycles come as a swap-conjugate pair.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorSettings::default().with_horizons(300.0, 3000.0);
    for (alpha, ic) in [(210.0, "anti"), (210.0, "sym"), (157.0, "kick1")] {
        let p = Parameters::with_angles_deg(alpha, 50.0)?;
        let c = find_limit_cycle(named_ic(ic, &p, 0)?, &p, &cfg)?;
        let moduli: Vec<String> = c.multipliers.iter().map(|m| format!("{:.3e}", m.norm())).collect();
        println!("alpha {alpha}° from {ic}: T = {:.6}, {} return(s) per period, {:?}", c.period, c.section_period, c.symmetry);
        println!("  trivial multiplier {:.6}", c.trivial_multiplier.norm());
        println!("  other |mu| {}", moduli.join(", "));
        println!("  closure {:.1e}, Liouville mismatch {:.1e}", c.closure_error, c.liouville_error());
    }
    Ok(())
}
