use spudgrade_core::backend::{AnalysisParams, BackendRegistry};
use spudgrade_core::frame_ref::analyze_frame;
use spudgrade_core::synthgen::{corpus_specs, generate_specs};
use spudgrade_core::Thresholds;

#[test]
fn backends_agree_on_generated_corpus() {
    let registry = BackendRegistry::with_defaults();
    let params = AnalysisParams::default();
    for dims in [(8, 8), (33, 17), (160, 120)] {
        let samples = generate_specs(corpus_specs(12, dims, 11).unwrap()).unwrap();
        for s in &samples {
            let results: Vec<_> = registry
                .iter()
                .map(|b| b.analyze(&s.frame, &params).unwrap())
                .collect();
            let (first, rest) = results.split_first().unwrap();
            for other in rest {
                assert!(
                    first.report.same_result(&other.report),
                    "{} at {dims:?}",
                    s.name
                );
                assert_eq!(first.overlay, other.overlay);
            }
            assert_eq!(first.report.roi_pixels, s.truth.roi_pixels);
            assert_eq!(first.report.green_pixels, s.truth.green_pixels);
        }
    }
}

#[test]
fn generated_green_coordinates_match_mask() {
    let samples = generate_specs(corpus_specs(9, (96, 72), 5).unwrap()).unwrap();
    for s in samples {
        let a = analyze_frame(&s.frame, &Thresholds::default()).unwrap();
        assert_eq!(a.green.coordinates(), s.truth.green_coordinates);
        assert!(s
            .truth
            .green_coordinates
            .iter()
            .all(|&(x, y)| a.roi.get(x, y)));
    }
}
