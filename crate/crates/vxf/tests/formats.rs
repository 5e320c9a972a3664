#[path = "../../core/tests/support/mod.rs"]
mod support;

use proptest::prelude::*;
use rand::Rng;
use support::*;
use vxf::io::iot::{load_iot, write_iot_long, write_iot_wide, LoadOptions};
use vxf::io::records::{read_vax, vax_records};
use vxf::io::{records_to_bytes, OutputFormat};
use vxf::report::{p_value, stars};
use vxf_core::vax::{compute_vax, LeontiefSystem};
use vxf_core::IoTable;

fn reload(text: &str) -> IoTable {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    std::fs::write(&p, text).unwrap();
    let mut all = load_iot(&p, &LoadOptions::default()).unwrap();
    assert_eq!(all.len(), 1);
    all.pop_first().unwrap().1
}

fn assert_same(a: &IoTable, b: &IoTable) {
    assert_eq!(a.countries(), b.countries());
    assert_eq!(a.sectors(), b.sectors());
    let close = |x: &f64, y: &f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
    assert!(a.intermediate().iter().zip(b.intermediate().iter()).all(|(x, y)| close(x, y)));
    assert!(a.final_demand().iter().zip(b.final_demand().iter()).all(|(x, y)| close(x, y)));
    assert!(a.value_added().iter().zip(b.value_added().iter()).all(|(x, y)| close(x, y)));
    assert!(a.gross_output().iter().zip(b.gross_output().iter()).all(|(x, y)| close(x, y)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn long_and_wide_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (nc, ns) = (r.random_range(2..=4), r.random_range(1..=3));
        let t = random_iot(&mut r, nc, ns, 0.7);
        assert_same(&t, &reload(&write_iot_long([&t])));
        assert_same(&t, &reload(&write_iot_wide([&t])));
    }

    #[test]
    fn vax_file_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_iot(&mut r, 3, 2, 0.6);
        let vax = compute_vax(&LeontiefSystem::build(&t).unwrap(), &t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vax.csv");
        std::fs::write(&p, records_to_bytes(&vax_records(&vax), OutputFormat::Csv)).unwrap();
        let back = read_vax(&p, None).unwrap().pop_first().unwrap().1;
        prop_assert_eq!(&back.values, &vax.values);
        let pj = dir.path().join("vax.json");
        std::fs::write(&pj, records_to_bytes(&vax_records(&vax), OutputFormat::Json)).unwrap();
        prop_assert_eq!(&read_vax(&pj, None).unwrap()[&2014].values, &vax.values);
    }
}

#[test]
fn two_sided_p_values() {
    // t = 2.228 is the 97.5% quantile at 10 df.
    assert!((p_value(2.228, 10) - 0.05).abs() < 1e-3);
    assert!((p_value(-2.228, 10) - 0.05).abs() < 1e-3);
    assert_eq!(p_value(0.0, 10), 1.0);
    assert_eq!(stars(0.005), "***");
    assert_eq!(stars(0.03), "**");
    assert_eq!(stars(0.07), "*");
    assert_eq!(stars(0.2), "");
}

#[test]
fn wide_header_errors_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    std::fs::write(&p, "year,row,AUT-C10\n2014,AUT|C10,1\n").unwrap();
    let e = load_iot(&p, &LoadOptions::default()).unwrap_err();
    assert_eq!(e.exit, 2, "{e}");
}
