use mfda_wasm::{beampattern, bsum_trace, preset, rates};

#[test]
fn rates_are_ordered() {
    let cfg = preset("high", 6).unwrap();
    let r = rates(&cfg).unwrap();
    assert_eq!(r.len(), 4);
    assert!(r[0] <= r[1] + 1e-9 && r[1] <= r[2] + 1e-9 && r[2] <= r[3] + 1e-9, "{r:?}");
}

#[test]
fn trace_descends() {
    let cfg = preset("low", 6).unwrap();
    let t = bsum_trace(&cfg, "positions", 3, 300).unwrap();
    assert!(t.len() > 1 && t.len() <= 301);
    assert!(t.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn pattern_has_grid_and_bounds() {
    let cfg = preset("high", 6).unwrap();
    let out = beampattern(&cfg, "MFDA", 11, 13).unwrap();
    assert_eq!(out.len(), 11 * 13 + 4);
    assert!(out[..143].iter().all(|p| p.is_finite() && *p >= 0.0));
    assert_eq!(&out[143..], &[800.0, 1200.0, 0.0, 60.0]);
}
