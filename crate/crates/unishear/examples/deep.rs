use std::time::Instant;
use unishear::harness::{gap_mask, SweepConfig};
use unishear::model::{filtered_model, project_known, WeightSpec, WeightTable};
use unishear::recover::{inpaint_l1, relative_error, SolverConfig};
use unishear::transform::{build_digital_system, l1_analysis_norm};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let j: usize = args[1].parse().unwrap();
    let mu: f64 = args[2].parse().unwrap();
    let iters: usize = args[3].parse().unwrap();
    let config = SweepConfig::default_parabolic();
    let seq = config.preset.sequence(config.scales);
    let sys = build_digital_system(&seq, config.n, config.scales).unwrap();
    let table = WeightTable::build(WeightSpec::default(), config.n);
    let f = filtered_model(j, config.n, &table).unwrap().image;
    let fnorm = l1_analysis_norm(&f, &sys).unwrap();
    let h = config.gap(j);
    let mask = gap_mask(h, config.n).unwrap();
    let corrupted = project_known(&f, &mask);
    let mut cfg = SolverConfig::shrinkage();
    cfg.max_iters = iters;
    cfg.tol = 1e-10;
    cfg.mu = mu;
    let t0 = Instant::now();
    let rep = inpaint_l1(&corrupted, &mask, &sys, &cfg).unwrap();
    let e1 = relative_error(&rep.image, &f, &sys).unwrap();
    println!(
        "j={j} mu={mu} iters={} strip={} err={e1:.4e} objgap={:+.4e} t={:.0?}",
        rep.iterations,
        mask.width_pixels(),
        (rep.objective - fnorm) / fnorm,
        t0.elapsed()
    );
}
