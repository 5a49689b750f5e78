use unishear::diagnostics::{lattice_coefficients_of_spectrum, tube_member};
use unishear::harness::SweepConfig;
use unishear::model::{filtered_model, WeightSpec, WeightTable};
use unishear::system::Orientation;
use unishear::transform::build_digital_system;

fn main() {
    let eps = 0.1f64;
    let config = SweepConfig::default_parabolic();
    let seq = config.preset.sequence(config.scales);
    let sys = build_digital_system(&seq, config.n, config.scales).unwrap();
    let table = WeightTable::build(WeightSpec::default(), config.n);
    let j = 2usize;
    let f = filtered_model(j, config.n, &table).unwrap().image;
    let spectrum = sys.spectrum(&f).unwrap();
    let mut rows: Vec<(f64, f64, String)> = Vec::new();
    for (b, band) in sys.bands.iter().enumerate() {
        let d = &band.desc;
        let in_range = match d.iota {
            Orientation::Coarse | Orientation::Completion => false,
            _ => (j - 1..=j + 1).contains(&d.j),
        };
        if !in_range {
            continue;
        }
        let cs = lattice_coefficients_of_spectrum(&spectrum, b, &sys);
        let mut inside = 0.0;
        let mut outside = 0.0;
        for c in &cs {
            if tube_member(&c.index, eps) {
                inside += c.value.norm();
            } else {
                outside += c.value.norm();
            }
        }
        rows.push((
            outside,
            inside,
            format!("j={} l={} {:?}", d.j, d.l, d.iota),
        ));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tot_out: f64 = rows.iter().map(|r| r.0).sum();
    println!("total outside {tot_out:.4e}");
    for (o, i, tag) in rows.iter().take(12) {
        println!("{tag}: out={o:.4e} in={i:.4e}");
    }
}
