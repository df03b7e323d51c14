// Scratch diagnostics binary (not part of the deliverable).
use aqi_core::phasespace::HarmonicMixture;
use aqi_core::tomography::{inverse_radon, AQTTrace};
use aqi_core::C64;

fn main() {
    // Infinite-shot emulation: represent each projection by a dense set of
    // weighted pseudo-outcomes (quantile midpoints of N(0, 0.5)).
    let n_phases = 20;
    let phi_values: Vec<f64> = (0..n_phases)
        .map(|j| std::f64::consts::TAU * j as f64 / n_phases as f64)
        .collect();
    let quantiles: Vec<f64> = (0..2000)
        .map(|i| {
            let u = (i as f64 + 0.5) / 2000.0;
            // inverse CDF of N(0, 0.5) via Newton on erf
            let mut x = 0.0f64;
            for _ in 0..60 {
                let cdf = 0.5 * (1.0 + erf(x));
                let pdf = (-x * x).exp() / std::f64::consts::PI.sqrt();
                x -= (cdf - u) / pdf;
            }
            x
        })
        .collect();
    let trace = AQTTrace {
        theta: 0.0,
        phi_values: phi_values.clone(),
        outcomes: vec![quantiles.clone(); n_phases],
        seed: 0,
    };
    for half in [3.0, 4.5, 6.0] {
        let axis: Vec<f64> = (0..121)
            .map(|k| -half + 2.0 * half * k as f64 / 120.0)
            .collect();
        let rec = inverse_radon(&trace, &axis, &axis, 3.0).unwrap();
        let integral = rec.grid.integral();
        let (mx, mp, vx, vp) = rec.grid.moments();
        println!(
            "L = {half}: integral = {integral:.4}  mean = ({mx:+.3e},{mp:+.3e})  var = ({vx:.4}, {vp:.4})"
        );
    }
    let _ = HarmonicMixture::single(12.0, C64::new(0.0, 0.0));
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}
