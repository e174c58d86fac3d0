use std::f64::consts::LN_2;

use gremlab::rng::{disorder_gaussian, replica_seed, DisorderAddress};
use gremlab::simulator::{
    configuration_energies, enumerate, exact_observables, rescaled_energy_points, restricted_partition,
    run_replicas, Window,
};
use gremlab::{OrderParameter, SimulationSpec};

fn lse(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[test]
fn two_spin_rem_hand_enumeration() {
    let h = 0.3;
    let spec = SimulationSpec::new(2, OrderParameter::rem(), h, vec![0.4, 1.9], 77, 1);
    let seed = replica_seed(77, 0);
    // σ = (σ_1, σ_2) with bit 1 meaning a down spin; spin 1 is the high bit
    let configs = [(0u64, 2.0), (1, 0.0), (2, 0.0), (3, -2.0)];
    let energies: Vec<f64> = configs
        .iter()
        .map(|&(bits, sum)| {
            let g = disorder_gaussian(seed, DisorderAddress::new(1, bits, 2));
            2f64.sqrt() * g + h * sum
        })
        .collect();
    let r = exact_observables(&spec, 0).unwrap();
    for (b, beta) in [0.4, 1.9].iter().enumerate() {
        let hand = lse(&energies.iter().map(|e| beta * e).collect::<Vec<_>>());
        assert!((r.log_z[b] - hand).abs() < 1e-12);
    }
    let best = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((r.m_n - best / 2.0).abs() < 1e-15);
}

#[test]
fn zero_disorder_identity_small_sizes() {
    for n in [8usize, 12, 16] {
        for h in [0.0, 0.7] {
            let mut spec = SimulationSpec::new(n, OrderParameter::rem(), h, vec![0.5, 2.0], 3, 1);
            spec.zero_disorder = true;
            let r = exact_observables(&spec, 0).unwrap();
            for (b, &beta) in spec.betas.iter().enumerate() {
                let exact = n as f64 * (2.0 * (beta * h).cosh()).ln();
                assert!(((r.log_z[b] - exact) / exact).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn tree_walk_agrees_with_direct_evaluation() {
    let op = OrderParameter::new(vec![0.25, 0.75, 1.0], vec![0.5, 0.6, 1.0]).unwrap();
    for n in [4usize, 12, 16] {
        let spec = SimulationSpec::new(n, op.clone(), 0.6, vec![0.2, 1.0, 4.0], 21, 2);
        for replica in 0..2 {
            let direct = configuration_energies(&spec, replica).unwrap();
            let e = enumerate(&spec, replica, 8).unwrap();
            for (b, &beta) in spec.betas.iter().enumerate() {
                let naive = lse(&direct.iter().map(|x| beta * x).collect::<Vec<_>>());
                assert!((e.record.log_z[b] - naive).abs() < 1e-9);
            }
            let mut sorted = direct.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in e.top_energies.iter().zip(&sorted) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn max_term_bounds_and_partition_identity() {
    let op = OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).unwrap();
    let spec = SimulationSpec::new(14, op, 0.5, vec![0.0, 0.3, 1.0, 2.5], 8, 6);
    let nf = 14.0;
    for e in run_replicas(&spec, 0).unwrap() {
        let r = e.record;
        assert!((r.p_n[0] - LN_2).abs() < 1e-15);
        for (b, &beta) in spec.betas.iter().enumerate() {
            let ground = beta * nf * r.m_n;
            assert!(r.log_z[b] >= ground - 1e-9);
            assert!(r.log_z[b] <= ground + nf * LN_2 + 1e-9);
            let classes: Vec<f64> = r.restricted_log_z.iter().map(|c| c[b]).collect();
            assert!((lse(&classes) - r.log_z[b]).abs() < 1e-9);
        }
        assert!(r.p_n.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn disjoint_windows_reassemble_log_z() {
    let spec = SimulationSpec::new(12, OrderParameter::rem(), 0.4, vec![1.3], 2, 1);
    let full = exact_observables(&spec, 0).unwrap().log_z[0];
    let parts: Vec<f64> = [(-0.75, 0.25), (0.0, 0.34), (0.75, 0.25)]
        .iter()
        .map(|&(q, eps)| match restricted_partition(&spec, 0, q, eps).unwrap() {
            Window::LogZ(v) => v[0],
            Window::Empty => f64::NEG_INFINITY,
        })
        .collect();
    assert!((lse(&parts) - full).abs() < 1e-9);
    assert!(restricted_partition(&spec, 0, 0.0, 0.0).is_err());
}

#[test]
fn covariance_follows_order_parameter() {
    let op = OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).unwrap();
    let n = 8usize;
    let replicas = 20_000;
    let spec = SimulationSpec::new(n, op.clone(), 0.0, vec![], 99, replicas);
    // 20 pairs spanning all three overlap classes
    let pairs: Vec<(usize, usize)> = (0..20).map(|i| ((i * 37) % 256, (i * 91 + i * i) % 256)).collect();
    let mut sums = vec![(0.0, 0.0); pairs.len()];
    for r in 0..replicas {
        let e = configuration_energies(&spec, r).unwrap();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            // √N X → X
            let p = e[a] * e[b] / n as f64;
            sums[i].0 += p;
            sums[i].1 += p * p;
        }
    }
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let prefix = (0..n).take_while(|&s| (a >> (n - 1 - s)) & 1 == (b >> (n - 1 - s)) & 1).count();
        let expected = op.rho_at(prefix as f64 / n as f64);
        let mean = sums[i].0 / replicas as f64;
        let se = ((sums[i].1 / replicas as f64 - mean * mean) / replicas as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * se.max(1e-12), "pair {a},{b}: {mean} vs {expected} (se {se})");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let op = OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).unwrap();
    let spec = SimulationSpec::new(18, op, 0.5, vec![0.5, 2.0], 4, 3);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_replicas(&spec, 16).unwrap())
    };
    let one = run(1);
    let four = run(4);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.record, b.record);
        assert_eq!(a.top_energies, b.top_energies);
    }
}

#[test]
fn rescaled_points_are_descending_and_start_at_the_maximum() {
    let spec = SimulationSpec::new(12, OrderParameter::rem(), 0.5, vec![], 5, 1);
    let pts = rescaled_energy_points(&spec, 0, 20).unwrap();
    assert_eq!(pts.len(), 20);
    assert!(pts.points().windows(2).all(|w| w[0] > w[1]));
    let r = exact_observables(&spec, 0).unwrap();
    let s = gremlab::scalar::rem_scaling(12, 0.5).unwrap();
    let top = s.inverse(12f64.sqrt() * r.m_n);
    assert!((pts.top().unwrap() - top).abs() < 1e-9);
    assert!(rescaled_energy_points(&spec, 0, 5000).is_err());
}

#[test]
fn normalized_partition_function_at_high_temperature() {
    use gremlab::limit::partition_log_normalizer;
    use gremlab::model::coarse_grain;

    let (beta, h) = (0.3, 0.4);
    for op in [OrderParameter::rem(), OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).unwrap()] {
        let cg = coarse_grain(&op, h).unwrap();
        assert_eq!(cg.temperature_threshold(beta), 0);
        // no disorder: Z = (2 cosh βh)^N, so only the variance term survives
        let mut spec = SimulationSpec::new(12, op.clone(), h, vec![beta], 1, 1);
        spec.zero_disorder = true;
        let lz = exact_observables(&spec, 0).unwrap().log_z[0];
        let norm = partition_log_normalizer(&cg, beta, 12).unwrap();
        assert!((lz + norm + 12.0 * beta * beta / 2.0).abs() < 1e-12);

        // E Z equals the annealed value exactly, so the normalized mean is 1
        let spec = SimulationSpec::new(14, op, h, vec![beta], 3, 2000);
        let norm = partition_log_normalizer(&cg, beta, 14).unwrap();
        let z: Vec<f64> = run_replicas(&spec, 0)
            .unwrap()
            .iter()
            .map(|e| (e.record.log_z[0] + norm).exp())
            .collect();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 1.0).abs() <= 4.0 * sd / n.sqrt(), "mean {mean}, sd {sd}");
    }
}
