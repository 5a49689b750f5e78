use unishear::diagnostics::{build_cluster_extended, delta_sparsity};
use unishear::harness::SweepConfig;
use unishear::model::{filtered_model, WeightSpec, WeightTable};
use unishear::transform::{build_digital_system, l1_analysis_norm};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let rho: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.125);
    let config = SweepConfig::default_parabolic();
    let seq = config.preset.sequence(config.scales);
    let sys = build_digital_system(&seq, config.n, config.scales).unwrap();
    let table = WeightTable::build(WeightSpec { rho }, config.n);
    for j in 1..=4usize {
        let f = filtered_model(j, config.n, &table).unwrap().image;
        let norm = l1_analysis_norm(&f, &sys).unwrap();
        let cluster = build_cluster_extended(j, eps, &sys);
        let r = delta_sparsity(&f, &cluster, &sys).unwrap();
        println!(
            "j={j} eps={eps} members={} delta={:.4e} in_cluster={:.4e} rel_delta={:.4e} off_scale={:.2e} compl={} norm={:.4e}",
            cluster.members.len(),
            r.delta,
            r.in_cluster_mass,
            r.delta / norm,
            r.off_scale_mass,
            r.includes_completion,
            norm
        );
    }
}
