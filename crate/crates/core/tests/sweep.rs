use fhn_pair::attractors::RegimeLabel;
use fhn_pair::integrator::IntegratorSettings;
use fhn_pair::model::{swap, Parameters};
use fhn_pair::sweep::{standard_ic_set, sweep_cell};

fn cell(alpha: f64, delta: f64) -> Vec<String> {
    let c = sweep_cell(alpha, delta, &Parameters::default(), &IntegratorSettings::default(), 0);
    assert_eq!(c.multistable, c.inventory.len() >= 2);
    for label in &c.inventory {
        assert!(c.outcomes.iter().any(|o| &o.label == label));
    }
    c.inventory.iter().map(ToString::to_string).collect()
}

#[test]
fn bistable_in_phase_and_anti_phase() {
    let inv = cell(210.0, 50.0);
    assert!(inv.contains(&"in-phase".to_string()) && inv.contains(&"anti-phase".to_string()), "{inv:?}");
}

#[test]
fn sequential_pair_coexists() {
    let inv = cell(157.0, 50.0);
    assert!(inv.contains(&"seq:12".to_string()) && inv.contains(&"seq:21".to_string()), "{inv:?}");
}

#[test]
fn far_sector_is_quiescent_only() {
    assert_eq!(cell(90.0, 20.0), vec![RegimeLabel::Quiescent.to_string()]);
}

#[test]
fn alpha_is_cylindrical() {
    let base = Parameters::default();
    let cfg = IntegratorSettings::default().with_horizons(100.0, 200.0);
    let a = sweep_cell(157.0, 50.0, &base, &cfg, 3);
    let b = sweep_cell(517.0, 50.0, &base, &cfg, 3);
    assert_eq!(a.outcomes, b.outcomes);
}

#[test]
fn standard_set_construction() {
    let p = Parameters::with_angles_deg(157.0, 50.0).unwrap();
    let set = standard_ic_set(&p, 0).unwrap();
    let get = |n: &str| set.iter().find(|ic| ic.name == n).unwrap().state;
    assert_eq!(get("kick2"), swap(get("kick1")));
    let sym = get("sym");
    assert!(sym.x1 == sym.x2 && sym.y1 == sym.y2);
    assert_eq!(set.len(), 8);
    assert_eq!(standard_ic_set(&p, 0).unwrap(), set);
}
