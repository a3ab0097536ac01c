//! Frozen oracle values from `tests/fixtures/manifest.txt`.

use std::path::PathBuf;

use tvpolar::experiment::draw_disk_field;
use tvpolar::grid::{div_preimage, mean_zero_split};
use tvpolar::io::read_image;
use tvpolar::oracle::oracle_tv_min;
use tvpolar::{tv_projected_subgradient, GridSearchSpec, SubgradientConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TV_MIN_2X2: f64 = 4.4458087743294215e0;
const TV_MIN_2X2_TOL: f64 = 3.5355339059327e-2;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn manifest_lists_every_fixture() {
    let manifest = std::fs::read_to_string(fixture("manifest.txt")).unwrap();
    assert!(manifest.contains("tv_min_2x2.txt"));
    assert!(manifest.contains("4.4458087743294215e0"));
}

#[test]
fn oracle_reproduces_frozen_tv_min() {
    let f0 = read_image(fixture("tv_min_2x2.txt")).unwrap();
    let min = oracle_tv_min(&f0, &GridSearchSpec::for_tv_min(2)).unwrap();
    assert!((min.value - TV_MIN_2X2).abs() <= 1e-12, "{}", min.value);
    assert!(
        (min.tolerance - TV_MIN_2X2_TOL).abs() <= 1e-12,
        "{}",
        min.tolerance
    );
}

#[test]
fn subgradient_reaches_frozen_tv_min() {
    let f = read_image(fixture("tv_min_2x2.txt")).unwrap();
    let (_, f0) = mean_zero_split(&f);
    let g0 = div_preimage(&f0.scale(-1.0)).unwrap();
    let cfg = SubgradientConfig {
        max_iters: 200_000,
        step: 4.0,
        exponent: 1.0,
        ..Default::default()
    };
    for seed in 0..3 {
        let h0 = draw_disk_field(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let run = tv_projected_subgradient(&g0, &cfg, &h0).unwrap();
        // the grid value is an upper bound up to its own tolerance
        assert!(
            run.value <= TV_MIN_2X2 + TV_MIN_2X2_TOL,
            "seed {seed}: {}",
            run.value
        );
        assert!(
            run.value >= TV_MIN_2X2 - TV_MIN_2X2_TOL,
            "seed {seed}: {}",
            run.value
        );
    }
}
