//! Phase-space representations of harmonic mixtures: the analytic Wigner
//! function (an exact Gaussian sum for coherent-state mixtures, nonnegative
//! by construction) and the truncated Fock-basis density matrix used by the
//! tomography stage.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phasespace::HarmonicMixture;

/// Fock truncation from the numerical sampling procedure; sufficient for the
/// few-photon mixtures produced here and checked at build time.
pub const DEFAULT_N_CUTOFF: usize = 200;

/// Real distribution sampled on a rectangular phase-space grid.
/// `values[(i, j)]` is the value at `(x_axis[i], p_axis[j])`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Array2<f64>,
}

impl PhaseSpaceGrid {
    /// Trapezoidal integral over the stored window.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.x_axis);
        let wp = trapezoid_weights(&self.p_axis);
        let mut total = 0.0;
        for (i, &wxi) in wx.iter().enumerate() {
            for (j, &wpj) in wp.iter().enumerate() {
                total += wxi * wpj * self.values[(i, j)];
            }
        }
        total
    }

    /// Normalized first and second moments `(⟨x⟩, ⟨p⟩, Var x, Var p)`.
    pub fn moments(&self) -> (f64, f64, f64, f64) {
        let wx = trapezoid_weights(&self.x_axis);
        let wp = trapezoid_weights(&self.p_axis);
        let mut norm = 0.0;
        let (mut mx, mut mp, mut mxx, mut mpp) = (0.0, 0.0, 0.0, 0.0);
        for (i, &x) in self.x_axis.iter().enumerate() {
            for (j, &p) in self.p_axis.iter().enumerate() {
                let w = wx[i] * wp[j] * self.values[(i, j)];
                norm += w;
                mx += w * x;
                mp += w * p;
                mxx += w * x * x;
                mpp += w * p * p;
            }
        }
        let mx = mx / norm;
        let mp = mp / norm;
        (mx, mp, mxx / norm - mx * mx, mpp / norm - mp * mp)
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n < 2 {
        return vec![1.0; n];
    }
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (axis[k + 1] - axis[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < 2 || axis.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument(format!(
            "{name} axis must be strictly increasing with ≥ 2 points"
        )));
    }
    Ok(())
}

/// Default square axes: 201 points per side spanning five vacuum widths
/// beyond the farthest component.
pub fn default_axes(mixture: &HarmonicMixture) -> (Vec<f64>, Vec<f64>) {
    let reach = mixture
        .components
        .iter()
        .map(|c| std::f64::consts::SQRT_2 * c.beta.norm())
        .fold(0.0, f64::max)
        + 5.0;
    let n = 201;
    let axis: Vec<f64> = (0..n)
        .map(|k| -reach + 2.0 * reach * k as f64 / (n - 1) as f64)
        .collect();
    (axis.clone(), axis)
}

/// Exact Wigner function of the mixture on the given grid:
/// `W(x,p) = Σ_k w_k (1/π)·exp(−(x − √2 Re β_k)² − (p − √2 Im β_k)²)`.
pub fn wigner_grid(
    mixture: &HarmonicMixture,
    x_axis: &[f64],
    p_axis: &[f64],
) -> Result<PhaseSpaceGrid> {
    check_axis(x_axis, "x")?;
    check_axis(p_axis, "p")?;
    let inv_pi = 1.0 / std::f64::consts::PI;
    let centers: Vec<(f64, f64, f64)> = mixture
        .components
        .iter()
        .map(|c| {
            (
                c.weight,
                std::f64::consts::SQRT_2 * c.beta.re,
                std::f64::consts::SQRT_2 * c.beta.im,
            )
        })
        .collect();
    let rows: Vec<Vec<f64>> = x_axis
        .par_iter()
        .map(|&x| {
            p_axis
                .iter()
                .map(|&p| {
                    centers
                        .iter()
                        .map(|&(w, cx, cp)| {
                            let dx = x - cx;
                            let dp = p - cp;
                            w * inv_pi * (-(dx * dx + dp * dp)).exp()
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut values = Array2::zeros((x_axis.len(), p_axis.len()));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    Ok(PhaseSpaceGrid {
        x_axis: x_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        values,
    })
}

/// Truncated Fock-basis density matrix.
#[derive(Debug, Clone)]
pub struct FockDensity {
    pub n_cutoff: usize,
    pub matrix: Array2<C64>,
    /// `1 − Tr ρ` lost to truncation.
    pub trace_deficit: f64,
}

/// Fock amplitudes `⟨n|β⟩ = e^{−|β|²/2} βⁿ/√(n!)` via the multiplicative
/// recurrence `c_{n+1} = c_n·β/√(n+1)` — no factorials are formed, so large
/// cutoffs stay finite.
pub fn coherent_amplitudes(beta: C64, n_cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(n_cutoff);
    let mut c = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..n_cutoff {
        amps.push(c);
        c *= beta / ((n + 1) as f64).sqrt();
    }
    amps
}

/// `ρ = Σ_k w_k |β_k⟩⟨β_k|` in the truncated Fock basis. Hermitian by
/// construction; errors if truncation keeps less than 0.999 of the trace.
pub fn fock_density(mixture: &HarmonicMixture, n_cutoff: usize) -> Result<FockDensity> {
    if n_cutoff < 16 {
        return Err(Error::InvalidArgument(
            "fock_density needs n_cutoff ≥ 16".into(),
        ));
    }
    let beta_max = mixture
        .components
        .iter()
        .map(|c| c.beta.norm())
        .fold(0.0, f64::max);
    if beta_max * beta_max + 6.0 * beta_max > n_cutoff as f64 {
        log::warn!(
            "fock_density: max |β| = {beta_max:.2} risks truncation at n_cutoff = {n_cutoff}"
        );
    }
    let mut matrix = Array2::from_elem((n_cutoff, n_cutoff), C64::new(0.0, 0.0));
    for c in &mixture.components {
        let amps = coherent_amplitudes(c.beta, n_cutoff);
        for m in 0..n_cutoff {
            let left = c.weight * amps[m];
            for n in 0..n_cutoff {
                matrix[(m, n)] += left * amps[n].conj();
            }
        }
    }
    let trace: f64 = (0..n_cutoff).map(|n| matrix[(n, n)].re).sum();
    if trace < 0.999 {
        return Err(Error::TruncationDeficit {
            trace,
            n_cutoff,
        });
    }
    Ok(FockDensity {
        n_cutoff,
        matrix,
        trace_deficit: 1.0 - trace,
    })
}

impl FockDensity {
    pub fn mean_photon(&self) -> f64 {
        (0..self.n_cutoff)
            .map(|n| n as f64 * self.matrix[(n, n)].re)
            .sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Phase-space angle `atan2(p*, x*)` of the grid's maximum cell; exact ties
/// resolve to the smallest angle. Errors on an all-zero grid.
pub fn wigner_maximum_angle(grid: &PhaseSpaceGrid) -> Result<f64> {
    let mut best = f64::MIN;
    for &v in grid.values.iter() {
        best = best.max(v);
    }
    if best <= 0.0 {
        return Err(Error::Domain(
            "wigner_maximum_angle needs a nonzero grid".into(),
        ));
    }
    let mut angle: Option<f64> = None;
    for (i, &x) in grid.x_axis.iter().enumerate() {
        for (j, &p) in grid.p_axis.iter().enumerate() {
            if grid.values[(i, j)] == best {
                let a = p.atan2(x);
                angle = Some(match angle {
                    Some(current) => current.min(a),
                    None => a,
                });
            }
        }
    }
    Ok(angle.expect("maximum exists"))
}
