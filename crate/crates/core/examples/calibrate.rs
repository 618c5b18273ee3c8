//! Scratch calibration scan for profile parameters and orientation signs.

use diracflow::clifford::SpinStructure;
use diracflow::dirac::{DiracFlowPath, DiracOperator, SolverMode, RECOMMENDED_COMPAT_TOL};
use diracflow::eigh::SpectralWindow;
use diracflow::fields::{degree_map, gauge_field, maurer_cartan};
use diracflow::profile::CollapseProfile;
use diracflow::sfl::{spectral_flow, SflControls};
use diracflow::topology::{degree, winding_number};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("profile");

    match mode {
        "profile" => profile_scan(),
        "flow" => flow_sign(args.get(2).and_then(|s| s.parse().ok()).unwrap_or(6)),
        "xnorm" => xnorm_scan(),
        "winding" => winding_scan(),
        "conj" => conj_scan(),
        _ => eprintln!("unknown mode"),
    }
}

fn winding_scan() {
    for &(b, p) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 1.0)] {
        let profile = CollapseProfile::<f64>::with_power(0.45, b, p).unwrap();
        print!("b={b} p={p}: ");
        for k in [-2i64, -1, 1, 2, 3] {
            let f = gauge_field::<f64>(k, 32, 2, &profile).unwrap();
            let w = winding_number(&f).unwrap();
            print!("w({k})-k={:+.2e} ", w - k as f64);
        }
        println!();
    }
}

fn conj_scan() {
    use diracflow::dirac::conjugation_residual;
    for &(b, p) in &[(0.5, 1.0), (1.0, 1.0)] {
        let profile = CollapseProfile::<f64>::with_power(0.45, b, p).unwrap();
        for k in [1i64, 2] {
            let mut line = format!("b={b} k={k}: ");
            for n_g in [8usize, 12, 16] {
                let r = conjugation_residual(k, n_g, 2, SpinStructure::non_trivial(), &profile, 4, 48)
                    .unwrap();
                line.push_str(&format!("r({n_g})={r:.3e} "));
            }
            println!("{line}");
        }
    }
}

fn profile_scan() {
    println!("radius  b      p     defect@8   defect@16  defect@32  deg1@32-1   deg3@32-3   maxsum|a|");
    for &(radius, b, p) in &[
        (0.45, 1.0, 1.0),
        (0.45, 2.0, 1.0),
        (0.45, 4.0, 1.0),
        (0.45, 0.5, 1.0),
        (0.45, 1.0, 2.0),
        (0.45, 2.0, 2.0),
        (0.45, 0.5, 2.0),
        (0.45, 1.0, 1.5),
        (0.45, 0.7, 1.5),
        (0.45, 1.5, 1.5),
        (0.48, 1.0, 1.5),
        (0.48, 1.0, 2.0),
    ] {
        let profile = CollapseProfile::<f64>::with_power(radius, b, p).unwrap();
        let mut defects = Vec::new();
        for n_g in [8usize, 16, 32] {
            let f = gauge_field::<f64>(1, n_g, 2, &profile).unwrap();
            let alpha = maurer_cartan(&f).unwrap();
            defects.push(alpha.anti_herm_defect);
        }
        let d1 = degree(&degree_map::<f64>(1, 32, &profile).unwrap()).unwrap();
        let d3 = degree(&degree_map::<f64>(3, 32, &profile).unwrap()).unwrap();
        // twist norm driver at n_g = 8
        let f8 = gauge_field::<f64>(1, 8, 2, &profile).unwrap();
        let a8 = maurer_cartan(&f8).unwrap();
        let op = DiracOperator::assemble(&a8, 1.0, SpinStructure::non_trivial(), 1e9).unwrap();
        println!(
            "{radius:.2}   {b:>4.1}  {p:>4.1}  {:
>9.2e}  {:>9.2e}  {:>9.2e}  {:>10.2e}  {:>10.2e}  {:>8.2}",
            defects[0],
            defects[1],
            defects[2],
            d1.abs() - 1.0,
            d3.abs() - 3.0,
            op.x_norm_bound(),
        );
    }
}

fn xnorm_scan() {
    let profile = CollapseProfile::<f64>::default_profile();
    for k in [-2i64, -1, 1, 2] {
        for n_g in [6usize, 8] {
            let f = gauge_field::<f64>(k, n_g, 2, &profile).unwrap();
            let a = maurer_cartan(&f).unwrap();
            println!(
                "k={k} n_g={n_g}: defect={:.3e}",
                a.anti_herm_defect
            );
            let op = DiracOperator::assemble(&a, 1.0, SpinStructure::non_trivial(), 1e9).unwrap();
            println!(
                "  x_norm_bound={:.2} axis_sum={:.2} estimate={:.2}",
                op.x_norm_bound(),
                op.x_axis_sum_bound(),
                op.x_norm_estimate(11, 60)
            );
        }
    }
}

fn flow_sign(n_g: usize) {
    let profile = CollapseProfile::<f64>::default_profile();
    let t0 = Instant::now();
    let f = gauge_field::<f64>(1, n_g, 2, &profile).unwrap();
    let w = winding_number(&f).unwrap();
    let d = degree(&degree_map::<f64>(1, n_g, &profile).unwrap()).unwrap();
    println!("n_g={n_g}: degree(f1)={d:.6} winding(F1)={w:.6}");
    let alpha = maurer_cartan(&f).unwrap();
    println!("defect={:.3e}", alpha.anti_herm_defect);
    let op = DiracOperator::assemble(
        &alpha,
        0.0,
        SpinStructure::non_trivial(),
        RECOMMENDED_COMPAT_TOL.max(alpha.anti_herm_defect * 2.0),
    )
    .unwrap();
    println!("dim={} xbound={:.2}", op.dim(), op.x_norm_bound());
    let path = DiracFlowPath::new(op, SolverMode::Dense, 7).unwrap();
    let window = SpectralWindow::with_default_guard(3.0).unwrap();
    let r = spectral_flow(&path, &window, &SflControls::default()).unwrap();
    println!(
        "flow(k=1, n_g={n_g}) = {}  solves={} refinements={} hazards={}  [{:.1}s]",
        r.flow,
        r.diagnostics.solves,
        r.diagnostics.refinements,
        r.diagnostics.hazards,
        t0.elapsed().as_secs_f64()
    );
}
