use std::fs::File;
use std::io::BufWriter;

use fhn_pair::attractors::{period_doubling_scan, PdScanSettings, CLUSTER_TOL};
use fhn_pair::model::Parameters;
use fhn_pair::output::write_pd_scan;
use fhn_pair::sweep::named_ic;

// Section x1 values at delta = 15° across the narrow window that holds
// the cascade: symmetry breaking, doublings, the chaotic band, the merge
// of the two conjugate attractors and the capture by the in-phase cycle.
// Pass a path to keep the CSV.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = 15.0;
    let range = (213.636, 213.650);
    let p = Parameters::with_angles_deg(range.0, delta)?;
    let seed = named_ic("kick1", &p, 0)?;
    let scan = period_doubling_scan(delta, range, 29, seed, &p, &PdScanSettings::default())?;

    for pt in &scan.points {
        let counts: Vec<String> = pt
            .branches
            .iter()
            .map(|b| b.as_deref().map_or("-".into(), |v| fhn_pair::attractors::cluster_count(v, CLUSTER_TOL).to_string()))
            .collect();
        println!("alpha {:.4}°  clusters {}", pt.alpha_deg, counts.join(" / "));
    }
    let s = scan.summary(CLUSTER_TOL);
    println!("first 2 at {:?}, first 4 at {:?}, band at {:?}", s.first_two, s.first_four, s.band_onset);
    println!("monotone {}, merge at {:?}", s.monotone_cascade, s.merge_alpha);

    if let Some(path) = std::env::args().nth(1) {
        write_pd_scan(&mut BufWriter::new(File::create(&path)?), &scan)?;
        println!("wrote {path}");
    }
    Ok(())
}
