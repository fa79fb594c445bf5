use nyfr_web::{flop_table, fold_tone, reconstruct_scene};

#[test]
fn scene_reconstruction_finds_all_three() {
    let v = reconstruct_scene(10.0, 2.0, 20e6, 1, 2000).unwrap();
    assert!(v.eligible());
    assert_eq!(v.truth_ghz(), vec![1.3, 7.8, 14.5]);
    assert_eq!(v.freqs_ghz().len(), v.power_db().len());
    assert!(v.power_db().len() <= 2000);
    let top = &v.detections_ghz()[..3];
    for t in v.truth_ghz() {
        assert!(top.iter().any(|d| (d - t).abs() < 1e-3), "{t} not in {top:?}");
    }
}

#[test]
fn fold_depth_follows_the_zone() {
    let spread = |a: f64| {
        let v = fold_tone(15.9e9, a, 20e6, 32, 4).unwrap();
        assert_eq!(v.nz(), 4);
        assert_eq!(v.power_db().len(), v.times_us().len() * v.freqs_mhz().len());
        let r = v.ridge_mhz();
        r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min)
    };
    assert_eq!(spread(0.0), 0.0);
    // peak deviation 4 · 2 · 20 MHz each side, seen through 125 MHz bins
    let s = spread(2.0);
    assert!((250.0..=375.0).contains(&s), "{s}");
}

#[test]
fn flop_rows() {
    let t = flop_table(32000, 4000, 100, 10).unwrap();
    let rows: Vec<&str> = t.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("proposed,32000,4000,1,10,8.39"));
    assert!(flop_table(0, 1, 1, 1).is_err());
}
