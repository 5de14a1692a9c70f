use fhn_pair::equilibria::find_equilibria;
use fhn_pair::model::{symmetric_spectrum, Parameters};

// Equilibria and their spectra along a few sector positions at delta = 50°.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [100.0, 157.0, 180.0, 210.0] {
        let p = Parameters::with_angles_deg(alpha, 50.0)?;
        println!("alpha = {alpha}°");
        for e in find_equilibria(&p)? {
            let ev: Vec<String> = e
                .spectrum
                .values()
                .iter()
                .map(|l| format!("{:.4}{:+.4}i", l.re, l.im))
                .collect();
            println!("  {:?} y = ({:.6}, {:.6}) {:?}", e.kind, e.y.0, e.y.1, e.stability);
            println!("    eigenvalues {}", ev.join(", "));
            println!("    residual {:.1e}", e.residual(&p)?);
        }
    }

    // closed form at the uncoupled rest point: a double focus
    let p = Parameters::default().with_coupling(0.0)?;
    println!("uncoupled spectrum {:?}", symmetric_spectrum(p.rest_y(), &p)?.values());
    Ok(())
}
