use chd_core::channel::{CsiErrorParams, NetworkDims};
use chd_core::engine::{cell_seed, Engine};
use chd_core::selection::{Mode, RecomputePolicy, Rule};
use chd_core::{run_experiment, Modulation, SimConfig};
use proptest::prelude::*;

fn small(seed: u64) -> SimConfig {
    SimConfig {
        dims: NetworkDims {
            clusters: 3,
            relays: 3,
            ms: 1,
            u: 2,
            v: 2,
        },
        buffer_capacity: 3,
        packet_groups: 40,
        symbols_per_packet: 10,
        snr_db: vec![4.0],
        calibration_draws: 20,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn zero_threshold_alternates_ma_then_bc() {
    let cfg = SimConfig {
        l_threshold: 0,
        ..small(5)
    };
    let mut e = Engine::new(&cfg, 4.0, cell_seed(cfg.seed, 0)).unwrap();
    let first = e.run_slot().unwrap();
    assert_eq!(first.decision.mode(), Mode::Ma);
    for _ in 0..20 {
        let before = e.buffers().total();
        let out = e.run_slot().unwrap();
        if before > 0 {
            assert_eq!(out.decision.mode(), Mode::Bc);
            assert_eq!(out.decision.rule, Rule::ForcedBc);
        } else {
            assert_eq!(out.decision.mode(), Mode::Ma);
        }
    }
}

#[test]
fn static_channel_is_computed_once() {
    let mut cfg = SimConfig {
        policy: RecomputePolicy::Drift { p: 1.0 },
        ..small(8)
    };
    cfg.channel.rho = 1.0;
    let stats = run_experiment(&cfg).unwrap().remove(0);
    assert_eq!(stats.recompute_ul, 1);
    assert_eq!(stats.recompute_dl, 1);
    assert_eq!(stats.mmd_rate_ul(), 1.0 / stats.slots_total as f64);
}

#[test]
fn noiseless_delays_are_at_least_one_slot() {
    let cfg = SimConfig {
        noise_enabled: false,
        l_threshold: 4,
        ..small(2)
    };
    let stats = run_experiment(&cfg).unwrap().remove(0);
    assert_eq!(stats.total_bit_errors(), 0);
    assert!(stats.min_delay().unwrap() >= 1);
}

#[test]
fn common_random_numbers_across_snr() {
    // Perfect CSI: selection does not depend on the energy scale.
    let cfg = SimConfig {
        snr_db: vec![0.0, 10.0],
        ..small(4)
    };
    let stats = run_experiment(&cfg).unwrap();
    assert_eq!(stats[0].slots_total, stats[1].slots_total);
    assert_eq!(stats[0].delay_histogram, stats[1].delay_histogram);
    assert!(stats[0].ber() >= stats[1].ber());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_invariants(
        seed in any::<u64>(),
        l in 0usize..6,
        p in 0.0..=1.0f64,
        rho in 0.0..=1.0f64,
        ms in 1usize..3,
        snr in -5.0..15.0f64,
        imperfect in any::<bool>(),
        qpsk in any::<bool>(),
    ) {
        let mut cfg = small(seed);
        cfg.dims.ms = ms;
        cfg.buffer_capacity = 2 * ms;
        cfg.l_threshold = l;
        cfg.policy = RecomputePolicy::Drift { p };
        cfg.channel.rho = rho;
        cfg.snr_db = vec![snr];
        cfg.packet_groups = 15;
        if imperfect {
            cfg.csi = CsiErrorParams::new(0.5, 1.0).unwrap();
        }
        if qpsk && ms == 1 {
            cfg.modulation = Modulation::Qpsk;
        }
        let a = run_experiment(&cfg).unwrap().remove(0);
        let b = run_experiment(&cfg).unwrap().remove(0);
        prop_assert_eq!(&a, &b);

        prop_assert_eq!(a.slots_ma + a.slots_bc, a.slots_total);
        prop_assert_eq!(a.slots_ma * ms as u64, a.packets_delivered + a.residual_packets);
        prop_assert_eq!(a.delay_count(), a.packets_delivered);
        prop_assert!(a.groups_delivered >= cfg.packet_groups);
        prop_assert!((0.0..=1.0).contains(&a.ber()));
        prop_assert!((0.0..=1.0).contains(&a.mmd_rate_ul()) && (0.0..=1.0).contains(&a.mmd_rate_dl()));
        prop_assert!(a.pep_samples().iter().all(|v| (0.0..=0.75).contains(v)));
        prop_assert!(a.min_delay().unwrap() >= 1);
    }
}
