//! Cross-cutting invariants of the mode solver over the full design tables.

use jja_core::modes::forward_fundamental;
use jja_core::tables::{ETCHED, JUNCTION_COUNTS, ON_SUBSTRATE};

/// The fundamental is strictly decreasing in the ground capacitance over
/// [1 aF, 1 pF] for every array in both chip variants, sampled at 20
/// log-spaced points. This is what makes bisection in the c0 fit safe.
#[test]
fn fundamental_strictly_decreasing_in_c0() {
    let points: Vec<f64> = (0..20)
        .map(|i| 1e-18 * 10f64.powf(6.0 * i as f64 / 19.0))
        .collect();
    std::thread::scope(|scope| {
        for (variant, table) in [("etched", ETCHED), ("on-substrate", ON_SUBSTRATE)] {
            for &n in &JUNCTION_COUNTS {
                let points = &points;
                scope.spawn(move || {
                    let mut prev = f64::INFINITY;
                    for &c0 in points {
                        let spec = table.spec_for(n, c0).unwrap();
                        let f = forward_fundamental(&spec).unwrap();
                        assert!(
                            f < prev,
                            "{variant} N={n}: f({c0:e}) = {f} not below previous {prev}"
                        );
                        prev = f;
                    }
                });
            }
        }
    });
}
