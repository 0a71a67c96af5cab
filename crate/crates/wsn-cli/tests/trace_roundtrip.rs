//! Export completeness: a simulation trace carries the source position
//! and the full routing vector per step, so every drain-rate column can
//! be recomputed from the static topology plus the row itself. This test
//! replays the shipped six-node benchmark from its trace file alone and
//! checks the recomputation against the recorded values.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use wsn_cli::{cmd_simulate, parse_scenario, Overrides};
use wsn_lifetime::{flow_solve, source_distances, workloads, Position, RoutingVector};

#[test]
fn trace_rows_recompute_their_workloads() {
    let scenario = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/fig1.toml");
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_simulate(
        &scenario,
        &Overrides {
            out_dir: Some(dir.path().to_path_buf()),
            ..Overrides::default()
        },
    )
    .unwrap();

    let doc = parse_scenario(&fs::read_to_string(&scenario).unwrap()).unwrap();
    let topo = doc.topology().unwrap();
    let params = doc.energy_params();
    let battery = topo.battery_count();

    let text = fs::read_to_string(&report.trace_path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header row").split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|&h| h == name)
            .unwrap_or_else(|| panic!("column {name} present"))
    };

    // Arc columns, grouped by sender, in header order.
    let mut arc_cols: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (idx, name) in header.iter().enumerate() {
        if let Some(rest) = name.strip_prefix("w_") {
            let (i, j) = rest.split_once('_').expect("arc column named w_i_j");
            arc_cols
                .entry(i.parse().unwrap())
                .or_default()
                .push((j.parse().unwrap(), idx));
        }
    }
    assert_eq!(arc_cols.len(), battery, "one column group per sender");

    let mut rows = 0usize;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), header.len(), "constant column count");
        let parse = |idx: usize| -> f64 { fields[idx].parse().expect("numeric field") };

        let src = Position::new(parse(col("x0")), parse(col("y0")));
        let mut w = RoutingVector::new();
        for (&sender, cols) in &arc_cols {
            let row: Vec<(usize, f64)> = cols
                .iter()
                .map(|&(j, idx)| (j, parse(idx)))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            // A sender with no row that step exports all-zero weights.
            if !row.is_empty() {
                w.set_row(sender, row);
            }
        }

        let flow = flow_solve(&w, topo.node_count()).unwrap();
        let d0 = source_distances(&topo, src);
        let recomputed = workloads(&w, &flow, &topo, &d0, &params);
        assert_eq!(recomputed.len(), battery, "one drain entry per battery node");
        for (i, drain) in recomputed.iter().enumerate() {
            let recorded = parse(col(&format!("I_{i}")));
            assert!(
                (drain - recorded).abs() <= 1e-9,
                "step {rows}: node {i} drain {recorded} recomputes to {drain}"
            );
        }
        rows += 1;
    }
    assert_eq!(rows, report.steps, "one trace row per simulated step");
}
