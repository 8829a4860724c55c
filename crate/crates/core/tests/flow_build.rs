use morsehb::complex::assemble_boundary;
use morsehb::flow::shoot::build_morse_data_with_report;
use morsehb::flow::{parse_flow_problem, ShootingConfig};
use morsehb::homology::homology;
use morsehb::morse_data::parse_morse_data;

fn load(name: &str) -> (String, String) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/");
    (
        std::fs::read_to_string(format!("{dir}{name}.flow.json")).unwrap(),
        std::fs::read_to_string(format!("{dir}{name}.json")).unwrap(),
    )
}

#[test]
fn flow_reproduces_stored_tables() {
    for name in ["disk-neg", "annulus-split", "annulus-cross", "sphere-closed"] {
        let (flow, stored) = load(name);
        let fp = parse_flow_problem(&flow).unwrap();
        let (data, report) = build_morse_data_with_report(&fp, &ShootingConfig::default()).unwrap();
        let stored = parse_morse_data(&stored).unwrap();
        let h = homology(&assemble_boundary(&data).unwrap(), false).unwrap();
        let h_ref = homology(&assemble_boundary(&stored).unwrap(), false).unwrap();
        assert_eq!(h, h_ref, "{name}");
        assert_eq!(data.counts(), stored.counts(), "{name}");
        assert_eq!(report.same_component_returns(), 0, "{name}");
    }
}
