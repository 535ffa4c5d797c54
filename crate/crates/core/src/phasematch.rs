//! Dispersion curves, quasi-phase-matching and the two design searches
//! (quarter-wave cladding thicknesses, core thickness).
//!
//! Wavelengths are nm, propagation constants rad/um, grating periods um.
//! The QPM condition reads beta_p = beta_s + beta_i + 2 pi / period, and
//! energy conservation ties the three wavelengths together as
//! 1/lambda_p = 1/lambda_s + 1/lambda_i.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modes::{solve_family_near, ModeFamily, ModeSolution, SolverOptions};
use crate::numeric::{gradient, zero_crossing};
use crate::stack::{LayerStack, Polarization};

/// Mode-family assignment for the three-wave interaction. The idler rides
/// the Bragg mode on a stratified cladding and the fundamental TIR mode on
/// a uniform one; pump and signal are always TIR-guided.
#[derive(Debug, Clone, Copy)]
pub struct InteractionModes {
    pub pump: ModeFamily,
    pub signal: ModeFamily,
    pub idler: ModeFamily,
}

impl InteractionModes {
    pub fn for_stack(stack: &LayerStack, pol: Polarization) -> Self {
        let idler = if stack.uniform_cladding() {
            ModeFamily::tir(pol)
        } else {
            ModeFamily::brw(pol)
        };
        InteractionModes {
            pump: ModeFamily::tir(pol),
            signal: ModeFamily::tir(pol),
            idler,
        }
    }
}

/// Idler wavelength fixed by energy conservation of the three-wave
/// interaction.
pub fn idler_wavelength(lambda_p_nm: f64, lambda_s_nm: f64) -> Result<f64> {
    if !(lambda_p_nm > 0.0 && lambda_s_nm.is_finite()) {
        return Err(Error::Domain(format!(
            "pump wavelength must be positive, got {lambda_p_nm}"
        )));
    }
    if lambda_s_nm <= lambda_p_nm {
        return Err(Error::Domain(format!(
            "signal wavelength {lambda_s_nm} nm must exceed the pump wavelength {lambda_p_nm} nm"
        )));
    }
    Ok(1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_nm))
}

/// Sampled beta(lambda) for one mode family.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    pub family: ModeFamily,
    pub lambda_nm: Vec<f64>,
    pub n_eff: Vec<f64>,
    pub beta_rad_per_um: Vec<f64>,
}

/// Solve one family across a wavelength grid, tracking n_eff from the
/// previous point so the curve never hops families.
pub fn build_dispersion(
    stack: &LayerStack,
    family: ModeFamily,
    lambda_grid_nm: &[f64],
    opts: &SolverOptions,
) -> Result<DispersionCurve> {
    let mut n_eff = Vec::with_capacity(lambda_grid_nm.len());
    let mut beta = Vec::with_capacity(lambda_grid_nm.len());
    let mut prev: Option<f64> = None;
    let mut last_good = f64::NAN;
    for &lam in lambda_grid_nm {
        let sol =
            solve_family_near(stack, &family, lam, prev, opts).map_err(|e| {
                Error::LostModeFamily {
                    last_good_lambda_nm: last_good,
                    failed_lambda_nm: lam,
                    detail: e.to_string(),
                }
            })?;
        prev = Some(sol.n_eff);
        last_good = lam;
        n_eff.push(sol.n_eff);
        beta.push(sol.beta_rad_per_um);
    }
    Ok(DispersionCurve {
        family,
        lambda_nm: lambda_grid_nm.to_vec(),
        n_eff,
        beta_rad_per_um: beta,
    })
}

/// A phase-matched wavelength triple with its grating period.
#[derive(Debug, Clone, Copy)]
pub struct QpmSolution {
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub period_um: f64,
    /// Residual of the QPM condition at the reported point, rad/um.
    pub delta_beta_rad_per_um: f64,
}

/// First-order grating period that phase-matches the triple at the given
/// pump/signal wavelengths.
pub fn qpm_period(
    stack: &LayerStack,
    modes: &InteractionModes,
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    opts: &SolverOptions,
) -> Result<QpmSolution> {
    let lambda_i_nm = idler_wavelength(lambda_p_nm, lambda_s_nm)?;
    let pump = solve_family_near(stack, &modes.pump, lambda_p_nm, None, opts)?;
    let signal = solve_family_near(stack, &modes.signal, lambda_s_nm, None, opts)?;
    let idler = solve_family_near(stack, &modes.idler, lambda_i_nm, None, opts)?;
    let delta = pump.beta_rad_per_um - signal.beta_rad_per_um - idler.beta_rad_per_um;
    if delta <= 0.0 {
        return Err(Error::NoFirstOrderQpm { delta_beta: delta });
    }
    let period_um = 2.0 * PI / delta;
    Ok(QpmSolution {
        lambda_p_nm,
        lambda_s_nm,
        lambda_i_nm,
        period_um,
        delta_beta_rad_per_um: delta - 2.0 * PI / period_um,
    })
}

/// Sampled pump/idler propagation-constant difference with the idler
/// wavelength slaved to the pump through energy conservation.
#[derive(Debug, Clone)]
pub struct MismatchCurve {
    pub lambda_s_nm: f64,
    pub lambda_p_nm: Vec<f64>,
    /// beta_p(lambda_p) - beta_i(lambda_i(lambda_p)), rad/um.
    pub beta_diff_rad_per_um: Vec<f64>,
    /// Central-difference derivative of the row above, rad/um per nm
    /// (one-sided at the grid ends).
    pub derivative: Vec<f64>,
    /// Linearly interpolated zero of the derivative, when it changes sign.
    pub derivative_zero_nm: Option<f64>,
}

pub fn pump_idler_mismatch_curve(
    stack: &LayerStack,
    modes: &InteractionModes,
    lambda_p_grid_nm: &[f64],
    lambda_s_nm: f64,
    opts: &SolverOptions,
) -> Result<MismatchCurve> {
    if lambda_p_grid_nm.len() < 2 {
        return Err(Error::Domain(
            "mismatch curve needs at least two pump grid points".to_string(),
        ));
    }
    let mut beta_diff = Vec::with_capacity(lambda_p_grid_nm.len());
    let mut pump_prev: Option<f64> = None;
    let mut idler_prev: Option<f64> = None;
    for &lp in lambda_p_grid_nm {
        let li = idler_wavelength(lp, lambda_s_nm)?;
        let pump = solve_family_near(stack, &modes.pump, lp, pump_prev, opts)
            .map_err(|e| annotate(e, lp))?;
        let idler = solve_family_near(stack, &modes.idler, li, idler_prev, opts)
            .map_err(|e| annotate(e, lp))?;
        pump_prev = Some(pump.n_eff);
        idler_prev = Some(idler.n_eff);
        beta_diff.push(pump.beta_rad_per_um - idler.beta_rad_per_um);
    }
    let step = lambda_p_grid_nm[1] - lambda_p_grid_nm[0];
    let derivative = gradient(&beta_diff, step);
    let derivative_zero_nm = zero_crossing(lambda_p_grid_nm, &derivative);
    Ok(MismatchCurve {
        lambda_s_nm,
        lambda_p_nm: lambda_p_grid_nm.to_vec(),
        beta_diff_rad_per_um: beta_diff,
        derivative,
        derivative_zero_nm,
    })
}

fn annotate(e: Error, lambda_p_nm: f64) -> Error {
    Error::SolveAt {
        lambda_nm: lambda_p_nm,
        detail: e.to_string(),
    }
}

/// One row of a tuning curve: the phase-matched triple and its
/// propagation constants.
#[derive(Debug, Clone, Copy)]
pub struct TuningPoint {
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub beta_p: f64,
    pub beta_s: f64,
    pub beta_i: f64,
}

#[derive(Debug, Clone)]
pub struct TuningCurve {
    pub period_um: f64,
    pub points: Vec<TuningPoint>,
    /// Pump wavelengths where no phase-matched root was found.
    pub gaps: Vec<f64>,
}

/// Signal-wavelength bracket used by the tuning-curve root search; widened
/// in 50 nm steps up to the hard limits before giving up.
const SIGNAL_BRACKET_NM: (f64, f64) = (1400.0, 1700.0);
const SIGNAL_BRACKET_LIMIT_NM: (f64, f64) = (1300.0, 1900.0);
const DELTA_BETA_TOL: f64 = 1e-8;

/// Phase-matched (lambda_s, lambda_i) for each pump wavelength at a fixed
/// grating period, by bisection on the signal wavelength.
pub fn tuning_curve(
    stack: &LayerStack,
    modes: &InteractionModes,
    period_um: f64,
    lambda_p_grid_nm: &[f64],
    opts: &SolverOptions,
) -> Result<TuningCurve> {
    if period_um <= 0.0 {
        return Err(Error::Domain(format!(
            "grating period must be positive, got {period_um} um"
        )));
    }
    let grating = 2.0 * PI / period_um;
    let mut points = Vec::new();
    let mut gaps = Vec::new();
    let mut signal_guess: Option<f64> = None;
    let mut state = TrackState::default();
    for &lp in lambda_p_grid_nm {
        match phase_matched_signal(stack, modes, lp, grating, signal_guess, &mut state, opts) {
            Ok(point) => {
                signal_guess = Some(point.lambda_s_nm);
                points.push(point);
            }
            Err(Error::NoPhaseMatchRoot { .. }) => gaps.push(lp),
            Err(e) => return Err(e),
        }
    }
    Ok(TuningCurve {
        period_um,
        points,
        gaps,
    })
}

#[derive(Default)]
struct TrackState {
    pump: Option<f64>,
    signal: Option<f64>,
    idler: Option<f64>,
}

fn phase_matched_signal(
    stack: &LayerStack,
    modes: &InteractionModes,
    lambda_p_nm: f64,
    grating: f64,
    signal_guess: Option<f64>,
    state: &mut TrackState,
    opts: &SolverOptions,
) -> Result<TuningPoint> {
    let pump = solve_family_near(stack, &modes.pump, lambda_p_nm, state.pump, opts)?;
    state.pump = Some(pump.n_eff);
    let mut eval = |ls: f64, state: &mut TrackState| -> Result<(f64, ModeSolution, ModeSolution)> {
        let li = idler_wavelength(lambda_p_nm, ls)?;
        let signal = solve_family_near(stack, &modes.signal, ls, state.signal, opts)?;
        let idler = solve_family_near(stack, &modes.idler, li, state.idler, opts)?;
        state.signal = Some(signal.n_eff);
        state.idler = Some(idler.n_eff);
        let mismatch =
            pump.beta_rad_per_um - signal.beta_rad_per_um - idler.beta_rad_per_um - grating;
        Ok((mismatch, signal, idler))
    };

    // start from the default bracket (or a tight one around the previous
    // root) and widen in 50 nm steps until the mismatch changes sign
    let (mut lo, mut hi) = match signal_guess {
        Some(g) => (
            (g - 25.0).max(SIGNAL_BRACKET_LIMIT_NM.0),
            (g + 25.0).min(SIGNAL_BRACKET_LIMIT_NM.1),
        ),
        None => SIGNAL_BRACKET_NM,
    };
    let mut f_lo = eval(lo, state)?.0;
    let mut f_hi = eval(hi, state)?.0;
    while (f_lo > 0.0) == (f_hi > 0.0) {
        let widened_lo = (lo - 50.0).max(SIGNAL_BRACKET_LIMIT_NM.0);
        let widened_hi = (hi + 50.0).min(SIGNAL_BRACKET_LIMIT_NM.1);
        if widened_lo == lo && widened_hi == hi {
            return Err(Error::NoPhaseMatchRoot {
                lambda_p_nm,
                lo_nm: lo,
                hi_nm: hi,
            });
        }
        lo = widened_lo;
        hi = widened_hi;
        f_lo = eval(lo, state)?.0;
        f_hi = eval(hi, state)?.0;
    }
    let mut best: Option<(f64, f64, ModeSolution, ModeSolution)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (f_mid, signal, idler) = eval(mid, state)?;
        if best.as_ref().map(|b| f_mid.abs() < b.1.abs()).unwrap_or(true) {
            best = Some((mid, f_mid, signal, idler));
        }
        if f_mid.abs() < DELTA_BETA_TOL || (hi - lo) < 1e-9 {
            break;
        }
        if (f_lo > 0.0) == (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let (ls, f_final, signal, idler) = best.ok_or(Error::NoPhaseMatchRoot {
        lambda_p_nm,
        lo_nm: lo,
        hi_nm: hi,
    })?;
    if f_final.abs() >= DELTA_BETA_TOL {
        return Err(Error::NoPhaseMatchRoot {
            lambda_p_nm,
            lo_nm: lo,
            hi_nm: hi,
        });
    }
    Ok(TuningPoint {
        lambda_p_nm,
        lambda_s_nm: ls,
        lambda_i_nm: idler.lambda_nm,
        beta_p: pump.beta_rad_per_um,
        beta_s: signal.beta_rad_per_um,
        beta_i: idler.beta_rad_per_um,
    })
}

/// Quarter-wave cladding thicknesses at the design wavelength and target
/// effective index: kappa_j d_j = pi/2.
pub fn quarter_wave_design(
    lambda_i_nm: f64,
    n_eff_target: f64,
    materials: (
        &crate::materials::MaterialModel,
        &crate::materials::MaterialModel,
    ),
) -> Result<(f64, f64)> {
    let thickness = |mat: &crate::materials::MaterialModel| -> Result<f64> {
        let n = mat.refractive_index(lambda_i_nm)?;
        if n_eff_target >= n {
            return Err(Error::Domain(format!(
                "target effective index {n_eff_target} is not below the index {n} of '{}' at {lambda_i_nm} nm",
                mat.name
            )));
        }
        let kappa_hat = (n * n - n_eff_target * n_eff_target).sqrt();
        Ok(lambda_i_nm / (4.0 * kappa_hat))
    };
    Ok((thickness(materials.0)?, thickness(materials.1)?))
}

/// One iteration record of the quarter-wave fixed-point loop.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointStep {
    pub iteration: usize,
    pub n_eff: f64,
    pub d1_nm: f64,
    pub d2_nm: f64,
}

/// Iterate (solve Bragg mode -> recompute quarter-wave thicknesses ->
/// re-solve) to a fixed point. The returned stack carries the converged
/// thicknesses.
pub fn quarter_wave_fixed_point(
    template: &LayerStack,
    lambda_i_nm: f64,
    opts: &SolverOptions,
) -> Result<(LayerStack, Vec<FixedPointStep>)> {
    const MAX_ITER: usize = 20;
    const TOL: f64 = 1e-8;
    let pol = Polarization::Tm;
    let mut stack = template.clone();
    let mut trace: Vec<FixedPointStep> = Vec::new();
    // one evaluation of the map: design the cladding for the target index,
    // then solve the redesigned stack
    let mut apply = |stack: &mut LayerStack,
                     target: f64,
                     trace: &mut Vec<FixedPointStep>|
     -> Result<f64> {
        let (d1, d2) = quarter_wave_design(
            lambda_i_nm,
            target,
            (&stack.bilayer.0.material, &stack.bilayer.1.material),
        )?;
        stack.bilayer.0.thickness_nm = d1;
        stack.bilayer.1.thickness_nm = d2;
        let mode = solve_family_near(stack, &ModeFamily::brw(pol), lambda_i_nm, Some(target), opts)?;
        trace.push(FixedPointStep {
            iteration: trace.len(),
            n_eff: mode.n_eff,
            d1_nm: d1,
            d2_nm: d2,
        });
        Ok(mode.n_eff)
    };

    let seed =
        solve_family_near(&stack, &ModeFamily::brw(pol), lambda_i_nm, None, opts)?.n_eff;
    let mut t = seed;
    // the bare map contracts too slowly for the iteration budget, so each
    // cycle takes two map evaluations and an Aitken extrapolation
    while trace.len() < MAX_ITER {
        let t1 = apply(&mut stack, t, &mut trace)?;
        if (t1 - t).abs() < TOL {
            return Ok((stack, trace));
        }
        if trace.len() >= MAX_ITER {
            break;
        }
        let t2 = apply(&mut stack, t1, &mut trace)?;
        let denom = t2 - 2.0 * t1 + t;
        t = if denom.abs() > 1e-300 {
            t2 - (t2 - t1) * (t2 - t1) / denom
        } else {
            t2
        };
    }
    let last = trace.last().expect("at least one iteration ran");
    Err(Error::RootRefinement {
        lo: last.n_eff,
        hi: t,
    })
}

/// Derivative of (beta_p - beta_i) with respect to the pump wavelength at
/// a single pump wavelength, central differences with the given step.
pub fn mismatch_derivative_at(
    stack: &LayerStack,
    modes: &InteractionModes,
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    step_nm: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let grid = [lambda_p_nm - step_nm, lambda_p_nm, lambda_p_nm + step_nm];
    let curve = pump_idler_mismatch_curve(stack, modes, &grid, lambda_s_nm, opts)?;
    Ok(curve.derivative[1])
}

/// Find the core thickness whose pump/idler mismatch is stationary at the
/// target pump wavelength. Each trial rebuilds the quarter-wave cladding
/// for that core by the fixed-point loop, so the search walks along
/// self-consistent designs.
pub fn core_thickness_search(
    template: &LayerStack,
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    dc_range_nm: (f64, f64),
    opts: &SolverOptions,
) -> Result<f64> {
    let (lo, hi) = dc_range_nm;
    if !(hi > lo && lo > 0.0) {
        return Err(Error::Domain(format!(
            "core thickness range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let lambda_i_nm = idler_wavelength(lambda_p_nm, lambda_s_nm)?;
    let modes = InteractionModes::for_stack(template, Polarization::Tm);
    let eval = |dc: f64| -> Result<f64> {
        let mut stack = template.clone();
        stack.core.thickness_nm = dc;
        let (designed, _) = quarter_wave_fixed_point(&stack, lambda_i_nm, opts)?;
        mismatch_derivative_at(&designed, &modes, lambda_p_nm, lambda_s_nm, 0.1, opts)
    };
    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::SearchBracket {
            lo_nm: lo,
            hi_nm: hi,
            sign_lo: f_lo.signum(),
            sign_hi: f_hi.signum(),
        });
    }
    let (mut a, mut b, mut f_a) = (lo, hi, f_lo);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if (b - a) < 0.02 {
            break;
        }
        let f_mid = eval(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_a > 0.0) == (f_mid > 0.0) {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
