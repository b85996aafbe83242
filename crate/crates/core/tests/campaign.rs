use meanzero_core::sampling::{campaign, sample_indexed, CampaignOptions, SamplerConfig, Scheme};
use meanzero_core::{Bounds, MonotoneWeight};

fn weights(b: &Bounds) -> Vec<MonotoneWeight> {
    vec![
        MonotoneWeight::power(1.0, b.peak()).unwrap(),
        MonotoneWeight::power(2.0, b.peak()).unwrap(),
        MonotoneWeight::shifted_log(0.01, b.peak()).unwrap(),
    ]
}

#[test]
fn serial_and_parallel_aggregates_agree() {
    let b = Bounds::new(-1.0, 2.0).unwrap();
    for scheme in [Scheme::UniformProject, Scheme::VertexJitter] {
        let cfg = SamplerConfig::new(64, 2024, scheme).unwrap();
        let serial = campaign(
            &b,
            &weights(&b),
            3_000,
            &cfg,
            CampaignOptions {
                include_extremals: true,
                parallel: false,
            },
        )
        .unwrap();
        let parallel = campaign(
            &b,
            &weights(&b),
            3_000,
            &cfg,
            CampaignOptions {
                include_extremals: true,
                parallel: true,
            },
        )
        .unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial.violations, 0);
    }
}

#[test]
fn random_samples_stay_strictly_below_bound() {
    let b = Bounds::new(-1.0, 1.0).unwrap();
    let cfg = SamplerConfig::new(64, 1, Scheme::VertexJitter).unwrap();
    let w = MonotoneWeight::power(2.0, b.peak()).unwrap();
    let r = campaign(
        &b,
        &[w],
        20_000,
        &cfg,
        CampaignOptions {
            include_extremals: false,
            parallel: true,
        },
    )
    .unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.min_slack > 0.0);
    assert!(r.argmin_index < 20_000);
    assert_eq!(r.argmin_function, sample_indexed(&b, &cfg, r.argmin_index));
}

#[test]
fn extremals_join_the_campaign() {
    let b = Bounds::new(-1.0, 2.0).unwrap();
    let cfg = SamplerConfig::new(64, 77, Scheme::UniformProject).unwrap();
    let w = MonotoneWeight::power(1.0, b.peak()).unwrap();
    let r = campaign(
        &b,
        &[w],
        2_000,
        &cfg,
        CampaignOptions {
            include_extremals: true,
            parallel: true,
        },
    )
    .unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.min_slack <= 1e-10);
    assert!(r.argmin_index >= 2_000);
}

#[test]
fn jittered_sampler_reaches_half_the_peak() {
    for (m, big) in [(-1.0, 1.0), (-1.0, 2.0), (-2.0, 3.0), (-0.1, 5.0)] {
        let b = Bounds::new(m, big).unwrap();
        let cfg = SamplerConfig::new(64, 42, Scheme::VertexJitter).unwrap();
        let reach = (0..10_000)
            .map(|i| sample_indexed(&b, &cfg, i).primitive().max_abs())
            .fold(0.0, f64::max);
        assert!(reach > 0.5 * b.peak(), "({m},{big}): {}", reach / b.peak());
    }
}

#[test]
fn every_sample_is_admissible() {
    let b = Bounds::new(-0.1, 5.0).unwrap();
    for scheme in [Scheme::UniformProject, Scheme::VertexJitter] {
        let cfg = SamplerConfig::new(64, 8, scheme).unwrap();
        for i in 0..2_000 {
            let f = sample_indexed(&b, &cfg, i);
            assert!(f.values().iter().all(|v| b.contains(*v)));
            assert!(f.mean().abs() <= 1e-14);
        }
    }
}
