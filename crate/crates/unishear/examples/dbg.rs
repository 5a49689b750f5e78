use std::time::Instant;
use unishear::harness::{gap_mask, SweepConfig};
use unishear::model::{filtered_model, WeightSpec, WeightTable};
use unishear::recover::{inpaint_l1, relative_error, SolverConfig};
use unishear::transform::{build_digital_system, l1_analysis_norm};

fn main() {
    let config = SweepConfig::default_parabolic();
    let seq = config.preset.sequence(config.scales);
    let sys = build_digital_system(&seq, config.n, config.scales).unwrap();
    let table = WeightTable::build(WeightSpec::default(), config.n);
    let j = 3usize;
    let f = filtered_model(j, config.n, &table).unwrap().image;
    let fnorm = l1_analysis_norm(&f, &sys).unwrap();
    let h = config.c * (-(1.0 + config.eps_prime) * j as f64).exp2();
    let mask = gap_mask(h, config.n).unwrap();
    println!("j={j} strip={} l1a(f)={fnorm:.7e}", mask.width_pixels());
    for mu in [1.0f64, 10.0, 100.0, 1000.0] {
        let mut cfg = SolverConfig::shrinkage();
        cfg.max_iters = 150;
        cfg.tol = 1e-9;
        cfg.mu = mu;
        let t0 = Instant::now();
        let rep = inpaint_l1(&f, &mask, &sys, &cfg).unwrap();
        let e1 = relative_error(&rep.image, &f, &sys).unwrap();
        print!("mu={mu} iters={} err={e1:.4e} t={:.0?} trace:", rep.iterations, t0.elapsed());
        for (i, o) in rep.objective_trace.iter().enumerate() {
            if i % 15 == 0 || i + 1 == rep.objective_trace.len() {
                print!(" {}:{:+.3e}", i, (o - fnorm) / fnorm);
            }
        }
        println!();
    }
}
