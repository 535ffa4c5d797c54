//! Signal spectral power density of spontaneous parametric downconversion
//! and the pump-sweep / signal-sweep experiments.
//!
//! The planar model is per unit width in the invariant transverse
//! direction: pump power enters as mW/um of width, mode profiles are
//! one-dimensional with unit L2 norm, and densities come back as W/nm at
//! the stated pump normalization. Everything is evaluated in SI
//! internally.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::materials::CONSTANTS;
use crate::modes::{solve_family_near, FieldProfile, ModeSolution, SolverOptions};
use crate::numeric::{interp_or_zero, sinc};
use crate::phasematch::{idler_wavelength, InteractionModes};
use crate::stack::LayerStack;

/// Configuration of one SPDC evaluation or sweep.
#[derive(Debug, Clone)]
pub struct SpdcConfig {
    pub stack: LayerStack,
    pub modes: InteractionModes,
    /// Grating period of the poled core, um.
    pub qpm_period_um: f64,
    /// Interaction length, mm.
    pub length_mm: f64,
    /// Pump power per unit width, mW/um.
    pub pump_power_mw_per_um: f64,
    pub options: SolverOptions,
}

impl SpdcConfig {
    pub fn new(stack: LayerStack, modes: InteractionModes, qpm_period_um: f64) -> Self {
        SpdcConfig {
            stack,
            modes,
            qpm_period_um,
            length_mm: 15.0,
            pump_power_mw_per_um: 1.0,
            options: SolverOptions::default(),
        }
    }
}

/// Triple-product overlap of three normalized transverse profiles,
/// resampled to a common grid by linear interpolation. Result in
/// nm^(-1/2).
pub fn overlap_integral(
    pump: &FieldProfile,
    signal: &FieldProfile,
    idler: &FieldProfile,
) -> Result<f64> {
    const NORM_TOL: f64 = 1e-6;
    for (label, p) in [("pump", pump), ("signal", signal), ("idler", idler)] {
        let norm = p.norm_sq();
        if (norm - 1.0).abs() > NORM_TOL {
            let _ = label;
            return Err(Error::NotNormalized { norm });
        }
    }
    let lo = pump.x_nm[0]
        .min(signal.x_nm[0])
        .min(idler.x_nm[0]);
    let hi = pump.x_nm[pump.x_nm.len() - 1]
        .max(signal.x_nm[signal.x_nm.len() - 1])
        .max(idler.x_nm[idler.x_nm.len() - 1]);
    let dx = pump.dx_nm.min(signal.dx_nm).min(idler.dx_nm);
    let n = ((hi - lo) / dx).round() as usize + 1;
    let mut acc = 0.0;
    let mut prev = 0.0;
    for k in 0..n {
        let x = lo + k as f64 * dx;
        let val = interp_or_zero(&pump.x_nm, &pump.samples, x)
            * interp_or_zero(&signal.x_nm, &signal.samples, x)
            * interp_or_zero(&idler.x_nm, &idler.samples, x);
        if k > 0 {
            acc += 0.5 * (prev + val) * dx;
        }
        prev = val;
    }
    Ok(acc)
}

/// Eq.-of-motion constants for one evaluated point, kept public for
/// diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint {
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub delta_beta_rad_per_um: f64,
    pub overlap_per_sqrt_nm: f64,
    /// dP_s/dlambda_s, W/nm at the configured pump normalization.
    pub density_w_per_nm: f64,
}

/// Spectral power density from three already-solved modes.
pub fn spectral_density_from_modes(
    config: &SpdcConfig,
    pump: &ModeSolution,
    signal: &ModeSolution,
    idler: &ModeSolution,
) -> Result<SpectralPoint> {
    let overlap = overlap_integral(&pump.profile, &signal.profile, &idler.profile)?;
    let delta_beta = pump.beta_rad_per_um
        - signal.beta_rad_per_um
        - idler.beta_rad_per_um
        - 2.0 * PI / config.qpm_period_um;

    let d_eff = config.stack.core.material.d_eff_pm_per_v() * 1e-12; // m/V
    let l = config.length_mm * 1e-3; // m
    let lambda_s = signal.lambda_nm * 1e-9; // m
    let lambda_i = idler.lambda_nm * 1e-9; // m
    let overlap_sq_si = overlap * overlap * 1e9; // 1/m
    let delta_beta_si = delta_beta * 1e6; // rad/m
    let phase = sinc(0.5 * delta_beta_si * l);

    // prefactor of the spectral density; pump power multiplied last so
    // the output is transparently linear in it
    let numerator = 16.0 * PI.powi(3) * CONSTANTS.hbar * CONSTANTS.c * d_eff * d_eff * (l * l);
    let denominator = CONSTANTS.epsilon0
        * signal.n_eff
        * pump.n_eff
        * idler.n_eff
        * lambda_s.powi(4)
        * lambda_i;
    let pump_power_w_per_m = config.pump_power_mw_per_um * 1e3;
    let density_si = (numerator / denominator) * overlap_sq_si * phase * phase
        * pump_power_w_per_m;
    Ok(SpectralPoint {
        lambda_p_nm: pump.lambda_nm,
        lambda_s_nm: signal.lambda_nm,
        lambda_i_nm: idler.lambda_nm,
        delta_beta_rad_per_um: delta_beta,
        overlap_per_sqrt_nm: overlap,
        density_w_per_nm: density_si * 1e-9,
    })
}

/// Solve the three modes and evaluate the spectral density at one
/// (pump, signal) wavelength pair.
pub fn spectral_density(
    config: &SpdcConfig,
    lambda_p_nm: f64,
    lambda_s_nm: f64,
) -> Result<SpectralPoint> {
    let lambda_i_nm = idler_wavelength(lambda_p_nm, lambda_s_nm)?;
    let opts = &config.options;
    let pump = solve_family_near(&config.stack, &config.modes.pump, lambda_p_nm, None, opts)?;
    let signal = solve_family_near(&config.stack, &config.modes.signal, lambda_s_nm, None, opts)?;
    let idler = solve_family_near(&config.stack, &config.modes.idler, lambda_i_nm, None, opts)?;
    spectral_density_from_modes(config, &pump, &signal, &idler)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptVariable {
    Pump,
    Signal,
}

impl SweptVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweptVariable::Pump => "lambda_p",
            SweptVariable::Signal => "lambda_s",
        }
    }
}

/// Sampled spectral power density over a wavelength sweep.
#[derive(Debug, Clone)]
pub struct SpdcSpectrum {
    pub swept: SweptVariable,
    /// Pivot wavelength of the non-swept partner wave, nm.
    pub pivot_nm: f64,
    pub grid_nm: Vec<f64>,
    /// W/nm at the configured pump normalization; NaN at gaps.
    pub density_w_per_nm: Vec<f64>,
    /// Grid points where a solver failed.
    pub gaps: Vec<f64>,
    pub peak_density_w_per_nm: f64,
    pub peak_lambda_nm: f64,
    pub fwhm_nm: Option<f64>,
    /// True when the half-maximum level never brackets inside the grid.
    pub unbounded_in_window: bool,
}

impl SpdcSpectrum {
    /// Linearly interpolated density inside the grid.
    pub fn density_at(&self, lambda_nm: f64) -> f64 {
        interp_or_zero(&self.grid_nm, &self.density_w_per_nm, lambda_nm)
    }
}

/// Spectral density vs pump wavelength at a fixed signal wavelength; the
/// idler tracks energy conservation.
pub fn pump_sweep(
    config: &SpdcConfig,
    lambda_s_nm: f64,
    grid_nm: &[f64],
) -> Result<SpdcSpectrum> {
    sweep(config, SweptVariable::Pump, lambda_s_nm, grid_nm)
}

/// Spectral density vs signal wavelength at a fixed pump wavelength.
pub fn signal_sweep(
    config: &SpdcConfig,
    lambda_p_nm: f64,
    grid_nm: &[f64],
) -> Result<SpdcSpectrum> {
    sweep(config, SweptVariable::Signal, lambda_p_nm, grid_nm)
}

fn sweep(
    config: &SpdcConfig,
    swept: SweptVariable,
    pivot_nm: f64,
    grid_nm: &[f64],
) -> Result<SpdcSpectrum> {
    if grid_nm.len() < 2 {
        return Err(Error::Domain("sweep grid needs at least two points".into()));
    }
    for w in grid_nm.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain(
                "sweep grid must be strictly increasing".into(),
            ));
        }
    }
    let opts = &config.options;
    // the pivot mode is fixed across the sweep; solve it once
    let pivot_family = match swept {
        SweptVariable::Pump => &config.modes.signal,
        SweptVariable::Signal => &config.modes.pump,
    };
    let pivot_mode = solve_family_near(&config.stack, pivot_family, pivot_nm, None, opts)?;

    let mut density = Vec::with_capacity(grid_nm.len());
    let mut gaps = Vec::new();
    let mut swept_prev: Option<f64> = None;
    let mut idler_prev: Option<f64> = None;
    for &lam in grid_nm {
        let evaluated: Result<SpectralPoint> = (|| {
            let (lambda_p, lambda_s) = match swept {
                SweptVariable::Pump => (lam, pivot_nm),
                SweptVariable::Signal => (pivot_nm, lam),
            };
            let lambda_i = idler_wavelength(lambda_p, lambda_s)?;
            let swept_family = match swept {
                SweptVariable::Pump => &config.modes.pump,
                SweptVariable::Signal => &config.modes.signal,
            };
            let swept_mode =
                solve_family_near(&config.stack, swept_family, lam, swept_prev, opts)?;
            let idler_mode =
                solve_family_near(&config.stack, &config.modes.idler, lambda_i, idler_prev, opts)?;
            swept_prev = Some(swept_mode.n_eff);
            idler_prev = Some(idler_mode.n_eff);
            match swept {
                SweptVariable::Pump => {
                    spectral_density_from_modes(config, &swept_mode, &pivot_mode, &idler_mode)
                }
                SweptVariable::Signal => {
                    spectral_density_from_modes(config, &pivot_mode, &swept_mode, &idler_mode)
                }
            }
        })();
        match evaluated {
            Ok(point) => density.push(point.density_w_per_nm),
            Err(_) => {
                gaps.push(lam);
                density.push(f64::NAN);
            }
        }
    }

    let (peak_idx, peak) = density
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, d)| (i, *d))
        .ok_or_else(|| Error::Domain("sweep produced no finite samples".into()))?;
    let (fwhm, unbounded) = extract_fwhm(grid_nm, &density, peak_idx, &gaps);
    Ok(SpdcSpectrum {
        swept,
        pivot_nm,
        grid_nm: grid_nm.to_vec(),
        density_w_per_nm: density,
        gaps,
        peak_density_w_per_nm: peak,
        peak_lambda_nm: grid_nm[peak_idx],
        fwhm_nm: fwhm,
        unbounded_in_window: unbounded,
    })
}

/// Half-maximum width by linear interpolation between the bracketing
/// samples on each side of the peak. Refused when a solver gap lands
/// inside the crossing region.
fn extract_fwhm(
    grid: &[f64],
    density: &[f64],
    peak_idx: usize,
    gaps: &[f64],
) -> (Option<f64>, bool) {
    let half = density[peak_idx] / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>, next: i64| -> Option<Option<f64>> {
        for i in range {
            let j = (i as i64 + next) as usize;
            let (a, b) = (density[i], density[j]);
            if !a.is_finite() || !b.is_finite() {
                return Some(None); // gap touches the half-max region
            }
            if (a - half) == 0.0 {
                return Some(Some(grid[i]));
            }
            if (a > half) != (b > half) {
                let t = (half - a) / (b - a);
                return Some(Some(grid[i] + t * (grid[j] - grid[i])));
            }
        }
        None // never crossed inside the window
    };
    let left = crossing(&mut (1..=peak_idx).rev(), -1);
    let right = crossing(&mut (peak_idx..grid.len() - 1), 1);
    match (left, right) {
        (Some(Some(l)), Some(Some(r))) => {
            let gap_inside = gaps.iter().any(|&g| g >= l && g <= r);
            if gap_inside {
                (None, false)
            } else {
                (Some(r - l), false)
            }
        }
        (None, _) | (_, None) => (None, true),
        _ => (None, false),
    }
}

/// Photon-pair rate inside a detection window: the integrated spectral
/// power divided by the photon energy at the window center. Pairs per
/// second at the configured pump normalization.
pub fn pair_flux(spectrum: &SpdcSpectrum, center_nm: f64, window_nm: f64) -> Result<f64> {
    if !(window_nm > 0.0) {
        return Err(Error::Domain(format!(
            "detection window must have positive width, got {window_nm} nm"
        )));
    }
    let lo = center_nm - 0.5 * window_nm;
    let hi = center_nm + 0.5 * window_nm;
    let grid_lo = spectrum.grid_nm[0];
    let grid_hi = spectrum.grid_nm[spectrum.grid_nm.len() - 1];
    if lo < grid_lo || hi > grid_hi {
        return Err(Error::WindowOutOfRange {
            lo_nm: lo,
            hi_nm: hi,
            grid_lo_nm: grid_lo,
            grid_hi_nm: grid_hi,
        });
    }
    if spectrum.gaps.iter().any(|&g| g >= lo && g <= hi) {
        return Err(Error::Domain(
            "a solver gap lies inside the detection window".into(),
        ));
    }
    // trapezoid over the window on the piecewise-linear density
    let mut xs: Vec<f64> = vec![lo];
    xs.extend(
        spectrum
            .grid_nm
            .iter()
            .copied()
            .filter(|&x| x > lo && x < hi),
    );
    xs.push(hi);
    let mut power_w = 0.0;
    for w in xs.windows(2) {
        let a = spectrum.density_at(w[0]);
        let b = spectrum.density_at(w[1]);
        power_w += 0.5 * (a + b) * (w[1] - w[0]);
    }
    let photon_energy_j = CONSTANTS.h * CONSTANTS.c / (center_nm * 1e-9);
    Ok(power_w / photon_energy_j)
}
