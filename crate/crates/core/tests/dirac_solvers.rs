//! Cross-validation of the two eigensolver paths on genuine Dirac operators,
//! and the endpoint conjugation study.

use diracflow::clifford::SpinStructure;
use diracflow::dirac::{
    conjugation_residual, untwisted_spectrum_with_rank, DiracOperator, SolverMode,
};
use diracflow::eigh::SpectralWindow;
use diracflow::fields::{gauge_field, maurer_cartan};
use diracflow::profile::CollapseProfile;

fn delta() -> SpinStructure {
    SpinStructure::non_trivial()
}

fn assembled(k: i64, n_g: usize, t: f64) -> DiracOperator<f64> {
    let profile = CollapseProfile::default_profile();
    let field = gauge_field::<f64>(k, n_g, 2, &profile).unwrap();
    let alpha = maurer_cartan(&field).unwrap();
    DiracOperator::assemble(&alpha, t, delta(), f64::INFINITY).unwrap()
}

#[test]
fn dense_and_iterative_agree_on_windowed_multisets() {
    let window = SpectralWindow::with_default_guard(3.0).unwrap();
    for t in [0.5, 0.85] {
        let op = assembled(1, 6, t);
        let dense = op.window_eigs(&window, SolverMode::Dense, 11).unwrap();
        let iter = op.window_eigs(&window, SolverMode::Iterative, 11).unwrap();
        assert_eq!(
            dense.values.len(),
            iter.values.len(),
            "window population at t={t}: dense {:?} vs iterative {:?}",
            dense.values,
            iter.values
        );
        for (a, b) in dense.values.iter().zip(iter.values.iter()) {
            assert!(
                (a - b).abs() < 1e-7,
                "t={t}: dense {a} vs iterative {b}"
            );
        }
    }
}

#[test]
fn iterative_certifies_the_untwisted_gap() {
    let op = DiracOperator::<f64>::untwisted(6, delta(), 2);
    let op = op.unwrap();
    let window = SpectralWindow::with_default_guard(3.0).unwrap();
    let eigs = op.window_eigs(&window, SolverMode::Iterative, 3).unwrap();
    assert!(eigs.values.is_empty(), "gap window must be empty: {:?}", eigs.values);
}

#[test]
fn iterative_resolves_the_first_shell_with_multiplicity() {
    // window past the first shell: +-pi*sqrt(3) with multiplicity 16 each
    let op = DiracOperator::<f64>::untwisted(6, delta(), 2).unwrap();
    let spectrum = op.spectrum_up_to(7.0, SolverMode::Iterative, 5).unwrap();
    let want: Vec<f64> = untwisted_spectrum_with_rank::<f64>(6, delta(), 2)
        .unwrap()
        .into_iter()
        .filter(|v| v.abs() <= 7.0)
        .collect();
    assert_eq!(want.len(), 32);
    let got: Vec<f64> = spectrum.in_window(7.0).collect();
    assert_eq!(got.len(), want.len(), "first-shell multiplicity");
    for (a, b) in got.iter().zip(want.iter()) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn window_spectrum_at_endpoint_matches_untwisted_within_residual() {
    // unitary equivalence of the endpoints, quantified by the conjugation
    // residual: the windowed spectra of D_1 and D_0 differ by at most the
    // band-probe residual plus solver tolerance at this resolution
    let n_g = 6;
    let profile = CollapseProfile::default_profile();
    let resid: f64 = conjugation_residual(1, n_g, 2, delta(), &profile, 9, 48).unwrap();
    let op = assembled(1, n_g, 1.0);
    let w = 7.0;
    let endpoint = op.spectrum_up_to(w, SolverMode::Dense, 0).unwrap();
    let got: Vec<f64> = endpoint.in_window(w).collect();
    let want: Vec<f64> = untwisted_spectrum_with_rank::<f64>(n_g, delta(), 2)
        .unwrap()
        .into_iter()
        .filter(|v| v.abs() <= w)
        .collect();
    // Hausdorff distance between the two multisets
    let hausdorff = hausdorff(&got, &want);
    assert!(
        hausdorff <= resid + 1.0,
        "windowed endpoint spectrum too far from untwisted: d_H={hausdorff:.3} residual={resid:.3}"
    );
}

fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_sided = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&v| {
                y.iter()
                    .map(|&w| (v - w).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[test]
fn conjugation_residual_decays_with_grid() {
    let profile = CollapseProfile::default_profile();
    let r8: f64 = conjugation_residual(1, 8, 2, delta(), &profile, 4, 48).unwrap();
    let r12 = conjugation_residual(1, 12, 2, delta(), &profile, 4, 48).unwrap();
    assert!(
        r12 < r8,
        "band-probe residual must shrink: r8={r8:.3e} r12={r12:.3e}"
    );
    // k = 2 stays finite and also decays
    let r8b: f64 = conjugation_residual(2, 8, 2, delta(), &profile, 4, 48).unwrap();
    let r12b = conjugation_residual(2, 12, 2, delta(), &profile, 4, 48).unwrap();
    assert!(r8b.is_finite() && r12b < r8b, "k=2: r8={r8b:.3e} r12={r12b:.3e}");
}
