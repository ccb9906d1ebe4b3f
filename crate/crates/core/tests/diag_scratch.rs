// temporary instrumentation (deleted before release)
use fslab_core::dynamics::{standing_wave, Stepper, StepperParams};
use fslab_core::geometry::{div_phi_flux, CutoffProfile};
use fslab_core::grid::StripGrid;
use std::sync::Arc;

#[test]
#[ignore]
fn divergence_profile_after_steps() {
    let grid = Arc::new(StripGrid::new(32, 1, 24, 2.0 * std::f64::consts::PI, 1.0, 2.0).unwrap());
    let chi = CutoffProfile::default_profile();
    for eps in [0.0, 1e-2] {
        let (state, a) = standing_wave(grid.clone(), &chi, 2, 1e-3, eps, 0.5).unwrap();
        let stepper =
            Stepper::new(grid.clone(), chi.clone(), a, 9.81, eps, StepperParams::default())
                .unwrap();
        let mut s = state;
        for _ in 0..3 {
            s = stepper.step(&s, 2e-3).unwrap();
        }
        let div = div_phi_flux(&s.v, &s.frame).unwrap();
        println!("eps = {eps}");
        for iz in 0..grid.nz {
            let mut row: f64 = 0.0;
            for i1 in 0..grid.n1 {
                row = row.max(div[[i1, 0, iz]].abs());
            }
            println!("  iz {iz:2} z {:+.4} max|div| {row:.3e}", grid.z[iz]);
        }
    }
}
