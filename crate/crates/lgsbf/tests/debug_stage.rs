use lgsbf::algo::*;
use lgsbf::netgen::{Scenario, ScenarioConfig};

#[test]
fn tiny_gap() {
    for seed in [77u64, 101, 202, 303, 404] {
        let cfg = ScenarioConfig {
            n_bs: 3, n_users: 3, n_files: 2, cache_size: 1,
            sinr_target_db: 5.0,
            ..Default::default()
        };
        let scenario = Scenario::generate(&cfg, seed).unwrap();
        let rep = oracle(&scenario, &OracleCaps::default(), &AlgoOptions::default()).unwrap();
        let r = run_algorithm(&scenario, Algorithm::Lgsbf).unwrap();
        let rc = run_algorithm(&scenario, Algorithm::Cb).unwrap();
        eprintln!("seed {seed}: oracle={:?} lgsbf={:?} cb={:?}",
            rep.best.as_ref().map(|(p_w,_)| format!("{p_w:.3}")),
            r.breakdown.map(|b| format!("{:.3}", b.p_w)),
            rc.breakdown.map(|b| format!("{:.3}", b.p_w)));
    }
}
