use unishear::harness::{gap_mask, SweepConfig};
use unishear::model::{filtered_model, project_known, WeightSpec, WeightTable};
use unishear::recover::{inpaint_threshold_onestep, relative_error, ThresholdBands};
use unishear::transform::build_digital_system;

fn main() {
    let cfg = SweepConfig::default_parabolic();
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales).unwrap();
    let table = WeightTable::build(WeightSpec { rho: cfg.rho }, cfg.n);
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    for &brel in &args {
        for j in 1..=4usize {
            let f = filtered_model(j, cfg.n, &table).unwrap().image;
            let mask = gap_mask(cfg.gap(j), cfg.n).unwrap();
            let corrupted = project_known(&f, &mask);
            let bmax = unishear::recover::beta_quantile(&corrupted, &mask, &sys, 1.0).unwrap();
            let beta = brel * bmax;
            let rep =
                inpaint_threshold_onestep(&corrupted, &mask, &sys, beta, ThresholdBands::All)
                    .unwrap();
            let err = relative_error(&rep.image, &f, &sys).unwrap();
            println!(
                "brel={brel:.1e} beta={beta:.3e} j={j} strip={} err={err:.4e}",
                mask.strip.len()
            );
        }
    }
}
