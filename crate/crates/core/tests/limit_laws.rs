use rayon::prelude::*;
use scclab_core::limit::{extract_excursions, sample_drift_path};
use scclab_core::stats::ks_statistic;
use scclab_core::{sample_limit_components, sample_tilted_excursion, Seed};

/// Excursions of the reflected drift path with lengths near 1 look like
/// area-tilted excursions of the same length.
#[test]
fn harvested_excursions_carry_the_tilt() {
    let harvested: Vec<(f64, f64)> = (0..3000u64)
        .into_par_iter()
        .flat_map_iter(|r| {
            let path = sample_drift_path(0.0, 10.0, 1e-3, Seed(41).derive(r)).unwrap();
            extract_excursions(&path)
                .into_iter()
                .filter(|e| (0.8..1.25).contains(&e.sigma()))
                .map(|e| (e.sigma(), e.max() / e.sigma().sqrt()))
                .collect::<Vec<_>>()
        })
        .collect();
    assert!(harvested.len() > 300, "{}", harvested.len());
    let tilted: Vec<f64> = harvested
        .par_iter()
        .enumerate()
        .map(|(i, &(sigma, _))| {
            let m = (sigma / 1e-3).round() as usize;
            let t = sample_tilted_excursion(sigma, m, 200, Seed(42).derive(i as u64)).unwrap();
            t.path.max() / sigma.sqrt()
        })
        .collect();
    let heights: Vec<f64> = harvested.iter().map(|h| h.1).collect();
    let ks = ks_statistic(&heights, &tilted).unwrap();
    assert!(ks.p_approx > 1e-3, "{ks:?} over {} excursions", heights.len());
}

#[test]
fn components_are_padded_and_ranked() {
    for r in 0..20 {
        let comps = sample_limit_components(0.0, 6.0, 1e-3, 5, Seed(43).derive(r)).unwrap();
        assert_eq!(comps.len(), 5);
        assert!(comps.windows(2).all(|w| w[0].total_length() >= w[1].total_length()));
    }
}
