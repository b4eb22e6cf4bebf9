use chd_sim::{read_csv, read_rows, write_csv, write_rows, ResultRow};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

const HEADER: &str = "protocol,K,N,Ms,U,V,J,L,p,rho,csi_enabled,csi_beta,csi_alpha,snr_db,ber,ber_stderr,\
avg_delay_slots,mmd_rate_ul,mmd_rate_dl,pep_theory_mean,pep_theory_stderr,pep_theory_ma,pep_theory_bc,\
slots_total,slots_ma,slots_bc,packets_delivered,residual_packets,seed,replication";

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), 0.0..1.0f64]
}

prop_compose! {
    fn row()(
        protocol in prop_oneof![Just("chd-best-link"), Just("mwc-best-user-link")],
        dims in proptest::array::uniform7(0usize..1000),
        p in proptest::option::of(finite()),
        floats in proptest::collection::vec(finite(), 9),
        opts in proptest::collection::vec(proptest::option::of(finite()), 5),
        counts in proptest::collection::vec(any::<u64>(), 7),
        csi in any::<bool>(),
    ) -> ResultRow {
        ResultRow {
            protocol: protocol.to_string(),
            k: dims[0], n: dims[1], ms: dims[2], u: dims[3], v: dims[4], j: dims[5], l: dims[6],
            p,
            rho: floats[0],
            csi_enabled: csi,
            csi_beta: floats[1],
            csi_alpha: floats[2],
            snr_db: floats[3],
            ber: floats[4],
            ber_stderr: floats[5],
            avg_delay_slots: opts[0],
            mmd_rate_ul: floats[6],
            mmd_rate_dl: floats[7],
            pep_theory_mean: opts[1],
            pep_theory_stderr: opts[2],
            pep_theory_ma: opts[3],
            pep_theory_bc: opts[4],
            slots_total: counts[0],
            slots_ma: counts[1],
            slots_bc: counts[2],
            packets_delivered: counts[3],
            residual_packets: counts[4],
            seed: counts[5],
            replication: counts[6] ^ floats[8].to_bits(),
        }
    }
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(rows in proptest::collection::vec(row(), 1..20)) {
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with(HEADER));
        prop_assert!(!text.contains('\r'));
        prop_assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }
}

#[test]
fn written_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let rows: Vec<ResultRow> = (0..5).map(|_| row().new_tree(&mut runner).unwrap().current()).collect();
    write_csv(&path, &rows).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
