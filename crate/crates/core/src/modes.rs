//! Mode solving for symmetric layered stacks: TIR-like core-guided modes of
//! the finite structure and Bragg (stop-band) modes matched to the decaying
//! Bloch wave of the semi-infinite periodic cladding.
//!
//! All solves work on the scalar (F, G) state of `stack`: fields are built
//! from the core center outward with the parity of the mode fixing the
//! starting vector, so every solution of a symmetric stack has definite
//! parity by construction. Scans walk n_eff on a dense grid and refine each
//! bracketed sign change by bisection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{bisect, interp_or_zero, trapezoid};
use crate::stack::{
    bloch_analyze, propagation_entries, LayerStack, Polarization, StackIndices,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// Core-guided mode decaying in the exterior; includes quasi-TIR modes
    /// of a bilayer cladding whose effective indices fall between the two
    /// cladding indices but inside a cladding stop band.
    Tir,
    /// Bragg-guided mode below every layer index, confined by the cladding
    /// stop band.
    Brw,
}

impl ModeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeKind::Tir => "tir",
            ModeKind::Brw => "brw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
    fn start_vector(&self) -> (f64, f64) {
        match self {
            Parity::Even => (1.0, 0.0),
            Parity::Odd => (0.0, 1.0),
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::Domain(format!("unknown parity '{other}'"))),
        }
    }
}

/// Numerical knobs for the solvers. Defaults follow the shipped designs.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Initial n_eff scan step; fine enough that adjacent planar-mode roots
    /// (spacing >~ 1e-3 for the shipped stacks) are never merged.
    pub scan_step: f64,
    /// Bisection stops when the bracket is narrower than this.
    pub refine_tol: f64,
    /// Profile sample spacing, nm.
    pub profile_dx_nm: f64,
    /// Hard cap on the exterior tail, nm.
    pub max_tail_nm: f64,
    /// Tail extends until the boundary-relative amplitude falls below this.
    pub tail_floor: f64,
    /// Lower edge of the Bragg-mode scan window.
    pub brw_scan_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            scan_step: 1e-4,
            refine_tol: 1e-12,
            profile_dx_nm: 1.0,
            max_tail_nm: 2000.0,
            tail_floor: 1e-6,
            brw_scan_floor: 1.0,
        }
    }
}

/// Normalized transverse field on a uniform grid spanning the structure
/// and its exterior tails. For TE modes the samples are E_y; for TM modes
/// they are E_x (the field entering the nonlinear overlap).
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub x_nm: Vec<f64>,
    pub samples: Vec<f64>,
    pub dx_nm: f64,
}

impl FieldProfile {
    /// Integral of |E|^2 over the stored grid.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|e| e * e).collect();
        trapezoid(&sq, self.dx_nm)
    }

    /// Linear interpolation; zero outside the stored span.
    pub fn sample_at(&self, x_nm: f64) -> f64 {
        interp_or_zero(&self.x_nm, &self.samples, x_nm)
    }
}

/// Scale a profile to unit L2 norm with a deterministic sign: even modes
/// have a non-negative center sample, odd modes a positive center slope.
pub fn normalize_profile(profile: &FieldProfile) -> Result<FieldProfile> {
    let norm_sq = profile.norm_sq();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(Error::DegenerateInput(
            "cannot normalize an identically zero field".to_string(),
        ));
    }
    let mut scale = 1.0 / norm_sq.sqrt();
    let n = profile.samples.len();
    let mid = n / 2;
    // split the field into even/odd energy about the grid center to decide
    // which sign rule applies
    let mut even_energy = 0.0;
    let mut odd_energy = 0.0;
    for i in 0..n {
        let j = n - 1 - i;
        let e = 0.5 * (profile.samples[i] + profile.samples[j]);
        let o = 0.5 * (profile.samples[i] - profile.samples[j]);
        even_energy += e * e;
        odd_energy += o * o;
    }
    let reference = if even_energy >= odd_energy {
        profile.samples[mid]
    } else if mid + 1 < n {
        profile.samples[mid + 1] - profile.samples[mid.saturating_sub(1)]
    } else {
        profile.samples[mid]
    };
    if reference < 0.0 {
        scale = -scale;
    }
    Ok(FieldProfile {
        x_nm: profile.x_nm.clone(),
        samples: profile.samples.iter().map(|e| e * scale).collect(),
        dx_nm: profile.dx_nm,
    })
}

/// One guided or Bragg mode of a stack.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub lambda_nm: f64,
    pub polarization: Polarization,
    pub kind: ModeKind,
    pub parity: Parity,
    pub n_eff: f64,
    pub beta_rad_per_um: f64,
    /// Normalized boundary-condition mismatch left after refinement.
    pub leakage_residual: f64,
    pub profile: FieldProfile,
    spans: Vec<Span>,
}

impl ModeSolution {
    /// Largest jump of the matched (F, G) pair across any internal
    /// interface, evaluated one-sided from the adjacent layers and scaled
    /// by the profile-wide magnitude of each component.
    pub fn interface_continuity_residual(&self) -> f64 {
        let mut f_scale: f64 = 0.0;
        let mut g_scale: f64 = 0.0;
        for s in &self.spans {
            f_scale = f_scale.max(s.f0.abs());
            g_scale = g_scale.max(s.g0.abs());
        }
        f_scale = f_scale.max(1e-300);
        g_scale = g_scale.max(1e-300);
        let mut worst: f64 = 0.0;
        for w in self.spans.windows(2) {
            let left = w[0].state_at_end();
            let right = (w[1].f0, w[1].g0);
            worst = worst
                .max((left.0 - right.0).abs() / f_scale)
                .max((left.1 - right.1).abs() / g_scale);
        }
        worst
    }

    /// Field value of the matched state (not the stored E samples) at a
    /// position on the positive-x half, from the analytic per-layer form.
    pub fn state_field_at(&self, x_nm: f64) -> f64 {
        debug_assert!(x_nm >= 0.0);
        for s in &self.spans {
            if x_nm <= s.x_end_nm || s.x_end_nm == self.spans.last().unwrap().x_end_nm {
                if x_nm >= s.x_start_nm {
                    return s.field_at(x_nm).0;
                }
            }
        }
        0.0
    }
}

/// Homogeneous piece of the solved structure on the positive-x half, with
/// the matched (F, G) state at its left edge.
#[derive(Debug, Clone)]
struct Span {
    x_start_nm: f64,
    x_end_nm: f64,
    kappa_sq: f64, // (rad/um)^2
    q: f64,
    n_sq: f64,
    f0: f64,
    g0: f64,
}

impl Span {
    fn field_at(&self, x_nm: f64) -> (f64, f64) {
        let xi_um = (x_nm - self.x_start_nm) * 1e-3;
        let (c, s_over_k, k_s) = propagation_entries(self.kappa_sq, xi_um);
        (
            self.f0 * c + self.g0 * self.q * s_over_k,
            -self.f0 * k_s / self.q + self.g0 * c,
        )
    }
    fn state_at_end(&self) -> (f64, f64) {
        self.field_at(self.x_end_nm)
    }
}

/// Per-wavelength view of a stack: indices and q-factors resolved once so
/// the n_eff scan is pure arithmetic.
struct StackAt<'a> {
    stack: &'a LayerStack,
    pol: Polarization,
    lambda_nm: f64,
    k0: f64, // rad/um
    idx: StackIndices,
    q_core: f64,
    q1: f64,
    q2: f64,
    q_ext: f64,
}

impl<'a> StackAt<'a> {
    fn new(stack: &'a LayerStack, lambda_nm: f64, pol: Polarization) -> Result<Self> {
        let idx = stack.indices(lambda_nm)?;
        let q = |n: f64| match pol {
            Polarization::Te => 1.0,
            Polarization::Tm => n * n,
        };
        Ok(StackAt {
            stack,
            pol,
            lambda_nm,
            k0: 2.0 * PI / (lambda_nm * 1e-3),
            idx,
            q_core: q(idx.n_core),
            q1: q(idx.n_clad1),
            q2: q(idx.n_clad2),
            q_ext: q(idx.n_exterior),
        })
    }

    fn kappa_sq(&self, n: f64, n_eff: f64) -> f64 {
        self.k0 * self.k0 * (n * n - n_eff * n_eff)
    }

    fn advance(&self, v: (f64, f64), n: f64, q: f64, d_nm: f64, n_eff: f64) -> (f64, f64) {
        let (c, s_over_k, k_s) = propagation_entries(self.kappa_sq(n, n_eff), d_nm * 1e-3);
        (v.0 * c + v.1 * q * s_over_k, -v.0 * k_s / q + v.1 * c)
    }

    /// State at the core/cladding boundary for the given parity.
    fn core_edge_state(&self, parity: Parity, n_eff: f64) -> (f64, f64) {
        self.advance(
            parity.start_vector(),
            self.idx.n_core,
            self.q_core,
            0.5 * self.stack.core.thickness_nm,
            n_eff,
        )
    }

    /// Decaying-exterior mismatch after crossing the finite cladding;
    /// normalized to [-1, 1]. Only defined for n_eff above the exterior
    /// index.
    fn tir_mismatch(&self, parity: Parity, n_eff: f64) -> f64 {
        let mut v = self.core_edge_state(parity, n_eff);
        for _ in 0..self.stack.n_bilayers {
            v = self.advance(
                v,
                self.idx.n_clad1,
                self.q1,
                self.stack.bilayer.0.thickness_nm,
                n_eff,
            );
            v = self.advance(
                v,
                self.idx.n_clad2,
                self.q2,
                self.stack.bilayer.1.thickness_nm,
                n_eff,
            );
            let scale = v.0.abs().max(v.1.abs());
            if scale > 0.0 {
                v = (v.0 / scale, v.1 / scale);
            }
        }
        let gamma = self.k0 * (n_eff * n_eff - self.idx.n_exterior * self.idx.n_exterior).sqrt();
        let decay = gamma / self.q_ext;
        let denom = v.1.abs() + decay * v.0.abs();
        if denom == 0.0 {
            0.0
        } else {
            (v.1 + decay * v.0) / denom
        }
    }

    /// Bloch-matching mismatch for Bragg modes: the cross product between
    /// the core-edge state and its image under one bilayer translation,
    /// which vanishes on either Bloch eigenvector. Eigenvalue-side
    /// selection happens after refinement.
    fn brw_mismatch(&self, parity: Parity, n_eff: f64) -> f64 {
        let v = self.core_edge_state(parity, n_eff);
        let tv = self.translate_bilayer(v, n_eff);
        let cross = v.0 * tv.1 - v.1 * tv.0;
        let scale = (v.0 * v.0 + v.1 * v.1).sqrt() * (tv.0 * tv.0 + tv.1 * tv.1).sqrt();
        if scale == 0.0 {
            0.0
        } else {
            cross / scale
        }
    }

    fn translate_bilayer(&self, v: (f64, f64), n_eff: f64) -> (f64, f64) {
        let v = self.advance(
            v,
            self.idx.n_clad1,
            self.q1,
            self.stack.bilayer.0.thickness_nm,
            n_eff,
        );
        self.advance(
            v,
            self.idx.n_clad2,
            self.q2,
            self.stack.bilayer.1.thickness_nm,
            n_eff,
        )
    }

    /// Rayleigh quotient |T v|/|v| signed by alignment; equals the Bloch
    /// eigenvalue when v is an eigenvector.
    fn bilayer_eigenvalue_at(&self, parity: Parity, n_eff: f64) -> f64 {
        let v = self.core_edge_state(parity, n_eff);
        let tv = self.translate_bilayer(v, n_eff);
        let vv = v.0 * v.0 + v.1 * v.1;
        if vv == 0.0 {
            f64::INFINITY
        } else {
            (tv.0 * v.0 + tv.1 * v.1) / vv
        }
    }
}

fn scan_and_refine<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
) -> Vec<(f64, f64)> {
    let mut roots = Vec::new();
    if hi <= lo {
        return roots;
    }
    let n_steps = ((hi - lo) / step).ceil() as usize;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for k in 1..=n_steps {
        let x = (lo + k as f64 * step).min(hi);
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push((x_prev, 0.0));
        } else if f_prev.is_finite() && fx.is_finite() && (f_prev > 0.0) != (fx > 0.0) {
            if let Some(r) = bisect(|t| f(t), x_prev, x, f_prev, tol, 200) {
                roots.push((r, f(r).abs()));
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

/// All core-guided modes of the finite stack at one wavelength: solutions
/// decaying in the exterior with the core between the admissible bounds,
/// both parities, sorted by descending n_eff (fundamental first).
pub fn find_tir_modes(
    stack: &LayerStack,
    lambda_nm: f64,
    pol: Polarization,
) -> Result<Vec<ModeSolution>> {
    find_tir_modes_opts(stack, lambda_nm, pol, &SolverOptions::default())
}

pub fn find_tir_modes_opts(
    stack: &LayerStack,
    lambda_nm: f64,
    pol: Polarization,
    opts: &SolverOptions,
) -> Result<Vec<ModeSolution>> {
    let at = StackAt::new(stack, lambda_nm, pol)?;
    let margin = 1e-9;
    let lo = (at.idx.n_exterior.max(at.idx.min_cladding()) + margin).max(1.0 + margin);
    let hi = at.idx.n_core - margin;
    let mut out = Vec::new();
    if hi <= lo {
        return Ok(out);
    }
    for parity in [Parity::Even, Parity::Odd] {
        let f = |n_eff: f64| at.tir_mismatch(parity, n_eff);
        for (root, _) in scan_and_refine(&f, lo, hi, opts.scan_step, opts.refine_tol) {
            // keep only solutions in a cladding stop band: genuine TIR
            // roots (n_eff above every cladding index) always satisfy this,
            // quasi-TIR roots must, and cladding-resonance states are
            // rejected by it
            let bloch = bloch_analyze(&stack.bilayer, lambda_nm, root, pol)?;
            if !bloch.in_stop_band {
                continue;
            }
            out.push(build_solution(&at, ModeKind::Tir, parity, root, opts)?);
        }
    }
    out.sort_by(|a, b| b.n_eff.partial_cmp(&a.n_eff).unwrap());
    Ok(out)
}

/// The Bragg-guided mode of the given parity: n_eff below every layer
/// index, core field matched to the decaying Bloch wave of the
/// semi-infinite periodic cladding. When several stop-band roots exist the
/// one with the largest n_eff is returned.
pub fn find_brw_mode(
    stack: &LayerStack,
    lambda_nm: f64,
    pol: Polarization,
    parity: Parity,
) -> Result<ModeSolution> {
    find_brw_mode_opts(stack, lambda_nm, pol, parity, &SolverOptions::default())
}

pub fn find_brw_mode_opts(
    stack: &LayerStack,
    lambda_nm: f64,
    pol: Polarization,
    parity: Parity,
    opts: &SolverOptions,
) -> Result<ModeSolution> {
    let at = StackAt::new(stack, lambda_nm, pol)?;
    let lo = opts.brw_scan_floor + 1e-9;
    let hi = at.idx.n_core.min(at.idx.min_cladding()) - 1e-9;
    let sol = brw_root_in_window(&at, parity, lo, hi, opts)?;
    sol.ok_or_else(|| Error::NoBrwMode {
        lambda_nm,
        polarization: pol.as_str().to_string(),
        parity: parity.as_str().to_string(),
        window_lo: lo,
        window_hi: hi,
    })
}

fn brw_root_in_window(
    at: &StackAt<'_>,
    parity: Parity,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<Option<ModeSolution>> {
    if hi <= lo {
        return Ok(None);
    }
    let f = |n_eff: f64| at.brw_mismatch(parity, n_eff);
    let mut roots = scan_and_refine(&f, lo, hi, opts.scan_step, opts.refine_tol);
    roots.retain(|(r, _)| {
        // the cross product vanishes on both Bloch eigenvectors; keep the
        // decaying one, inside a stop band
        let mu = at.bilayer_eigenvalue_at(parity, *r);
        if mu.abs() >= 1.0 {
            return false;
        }
        bloch_analyze(&at.stack.bilayer, at.lambda_nm, *r, at.pol)
            .map(|b| b.in_stop_band)
            .unwrap_or(false)
    });
    let Some((root, _)) = roots
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    else {
        return Ok(None);
    };
    Ok(Some(build_solution(at, ModeKind::Brw, parity, root, opts)?))
}

/// Re-solve a known mode near a previous n_eff (family tracking during
/// wavelength sweeps). Falls back to a cold solve when the warm window
/// comes up empty.
pub fn solve_family_near(
    stack: &LayerStack,
    family: &ModeFamily,
    lambda_nm: f64,
    near: Option<f64>,
    opts: &SolverOptions,
) -> Result<ModeSolution> {
    match family.kind {
        ModeKind::Brw => {
            if let Some(guess) = near {
                let at = StackAt::new(stack, lambda_nm, family.polarization)?;
                let hi_cap = at.idx.n_core.min(at.idx.min_cladding()) - 1e-9;
                let lo = (guess - 0.02).max(opts.brw_scan_floor + 1e-9);
                let hi = (guess + 0.02).min(hi_cap);
                if let Some(sol) = brw_root_in_window(&at, family.parity, lo, hi, opts)? {
                    return Ok(sol);
                }
            }
            find_brw_mode_opts(stack, lambda_nm, family.polarization, family.parity, opts)
        }
        ModeKind::Tir => {
            let modes = find_tir_modes_opts(stack, lambda_nm, family.polarization, opts)?;
            let candidates: Vec<ModeSolution> = modes
                .into_iter()
                .filter(|m| m.parity == family.parity)
                .collect();
            let chosen = match near {
                Some(guess) => candidates.into_iter().min_by(|a, b| {
                    (a.n_eff - guess)
                        .abs()
                        .partial_cmp(&(b.n_eff - guess).abs())
                        .unwrap()
                }),
                // fundamental: largest n_eff of the requested parity
                None => candidates.into_iter().next(),
            };
            chosen.ok_or_else(|| Error::SolveAt {
                lambda_nm,
                detail: format!(
                    "no {} TIR mode of {} parity",
                    family.polarization.as_str(),
                    family.parity.as_str()
                ),
            })
        }
    }
}

/// Descriptor of one mode family used by dispersion curves and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeFamily {
    pub kind: ModeKind,
    pub polarization: Polarization,
    pub parity: Parity,
}

impl ModeFamily {
    pub fn tir(pol: Polarization) -> Self {
        ModeFamily {
            kind: ModeKind::Tir,
            polarization: pol,
            parity: Parity::Even,
        }
    }
    pub fn brw(pol: Polarization) -> Self {
        ModeFamily {
            kind: ModeKind::Brw,
            polarization: pol,
            parity: Parity::Even,
        }
    }
    pub fn describe(&self) -> String {
        format!(
            "{}-{}-{}",
            self.kind.as_str(),
            self.polarization.as_str(),
            self.parity.as_str()
        )
    }
}

fn build_solution(
    at: &StackAt<'_>,
    kind: ModeKind,
    parity: Parity,
    n_eff: f64,
    opts: &SolverOptions,
) -> Result<ModeSolution> {
    let (spans, residual) = build_spans(at, kind, parity, n_eff, opts);
    let profile = sample_profile(at, &spans, parity, opts)?;
    let profile = normalize_profile(&profile)?;
    Ok(ModeSolution {
        lambda_nm: at.lambda_nm,
        polarization: at.pol,
        kind,
        parity,
        n_eff,
        beta_rad_per_um: 2.0 * PI * n_eff / (at.lambda_nm * 1e-3),
        leakage_residual: residual,
        profile,
        spans,
    })
}

struct LayerGeom {
    n: f64,
    q: f64,
    d_nm: f64,
}

fn build_spans(
    at: &StackAt<'_>,
    kind: ModeKind,
    parity: Parity,
    n_eff: f64,
    opts: &SolverOptions,
) -> (Vec<Span>, f64) {
    let mut spans: Vec<Span> = Vec::new();
    let mut v = parity.start_vector();
    let mut x = 0.0;
    let push = |spans: &mut Vec<Span>, v: &mut (f64, f64), x: &mut f64, g: &LayerGeom| {
        let span = Span {
            x_start_nm: *x,
            x_end_nm: *x + g.d_nm,
            kappa_sq: at.kappa_sq(g.n, n_eff),
            q: g.q,
            n_sq: g.n * g.n,
            f0: v.0,
            g0: v.1,
        };
        *v = span.state_at_end();
        *x += g.d_nm;
        spans.push(span);
    };
    let core = LayerGeom {
        n: at.idx.n_core,
        q: at.q_core,
        d_nm: 0.5 * at.stack.core.thickness_nm,
    };
    let clad1 = LayerGeom {
        n: at.idx.n_clad1,
        q: at.q1,
        d_nm: at.stack.bilayer.0.thickness_nm,
    };
    let clad2 = LayerGeom {
        n: at.idx.n_clad2,
        q: at.q2,
        d_nm: at.stack.bilayer.1.thickness_nm,
    };
    push(&mut spans, &mut v, &mut x, &core);
    let v_core_edge = v;
    let x_core_edge = x;

    match kind {
        ModeKind::Tir => {
            // Forward propagation through a deeply evanescent cladding
            // amplifies the growing solution, so the outer field would be
            // bracket-resolution noise. Build the cladding inward from the
            // exact exterior decay condition instead (the wanted solution
            // is the growing one in that direction) and glue to the core
            // field at the core edge, where both sides are well scaled.
            let gamma =
                at.k0 * (n_eff * n_eff - at.idx.n_exterior * at.idx.n_exterior).sqrt();
            let layers: Vec<&LayerGeom> = (0..at.stack.n_bilayers)
                .flat_map(|_| [&clad1, &clad2])
                .collect();
            // backward sweep: state at each layer's inner edge
            let mut states = vec![(0.0, 0.0); layers.len() + 1];
            states[layers.len()] = (1.0, -gamma / at.q_ext);
            for (i, layer) in layers.iter().enumerate().rev() {
                let outer = states[i + 1];
                let kappa_sq = at.kappa_sq(layer.n, n_eff);
                let (c, s_over_k, k_s) = propagation_entries(kappa_sq, layer.d_nm * 1e-3);
                // inverse of the unimodular layer matrix
                states[i] = (
                    c * outer.0 - layer.q * s_over_k * outer.1,
                    k_s / layer.q * outer.0 + c * outer.1,
                );
            }
            let w_core_edge = states[0];
            let cross = v_core_edge.0 * w_core_edge.1 - v_core_edge.1 * w_core_edge.0;
            let norms = (v_core_edge.0.powi(2) + v_core_edge.1.powi(2)).sqrt()
                * (w_core_edge.0.powi(2) + w_core_edge.1.powi(2)).sqrt();
            let residual = if norms > 0.0 { (cross / norms).abs() } else { 0.0 };
            let scale = if w_core_edge.0.abs() >= w_core_edge.1.abs() {
                v_core_edge.0 / w_core_edge.0
            } else {
                v_core_edge.1 / w_core_edge.1
            };
            let mut xl = x_core_edge;
            for (i, layer) in layers.iter().enumerate() {
                spans.push(Span {
                    x_start_nm: xl,
                    x_end_nm: xl + layer.d_nm,
                    kappa_sq: at.kappa_sq(layer.n, n_eff),
                    q: layer.q,
                    n_sq: layer.n * layer.n,
                    f0: scale * states[i].0,
                    g0: scale * states[i].1,
                });
                xl += layer.d_nm;
            }
            let tail = if gamma > 0.0 {
                (-opts.tail_floor.ln() / gamma * 1e3).min(opts.max_tail_nm)
            } else {
                opts.max_tail_nm
            };
            spans.push(Span {
                x_start_nm: xl,
                x_end_nm: xl + tail,
                kappa_sq: -gamma * gamma,
                q: at.q_ext,
                n_sq: at.idx.n_exterior * at.idx.n_exterior,
                f0: scale,
                g0: scale * (-gamma / at.q_ext),
            });
            (spans, residual)
        }
        ModeKind::Brw => {
            // Bloch decay keeps the forward propagation tame here; continue
            // the periodic cladding out to the tail cap, where the matched
            // state keeps shrinking by the Bloch factor per period.
            for _ in 0..at.stack.n_bilayers {
                push(&mut spans, &mut v, &mut x, &clad1);
                push(&mut spans, &mut v, &mut x, &clad2);
            }
            let mut tail = 0.0;
            while tail < opts.max_tail_nm {
                push(&mut spans, &mut v, &mut x, &clad1);
                push(&mut spans, &mut v, &mut x, &clad2);
                tail += clad1.d_nm + clad2.d_nm;
            }
            let residual = at.brw_mismatch(parity, n_eff).abs();
            (spans, residual)
        }
    }
}

fn sample_profile(
    at: &StackAt<'_>,
    spans: &[Span],
    parity: Parity,
    opts: &SolverOptions,
) -> Result<FieldProfile> {
    let half_span = spans.last().map(|s| s.x_end_nm).unwrap_or(0.0);
    let dx = opts.profile_dx_nm;
    let n_half = (half_span / dx).floor() as usize;
    let n_total = 2 * n_half + 1;
    let mut x_nm = Vec::with_capacity(n_total);
    let mut samples = Vec::with_capacity(n_total);
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let mut span_idx = 0usize;
    let positive: Vec<f64> = (0..=n_half)
        .map(|k| {
            let x = k as f64 * dx;
            while span_idx + 1 < spans.len() && x > spans[span_idx].x_end_nm {
                span_idx += 1;
            }
            let s = &spans[span_idx];
            let (f, _g) = s.field_at(x);
            let value = match at.pol {
                Polarization::Te => f,
                Polarization::Tm => f / s.n_sq,
            };
            // for TM the stored field E_x jumps with 1/n^2 at interfaces;
            // a sample landing exactly on one takes the mean of the two
            // one-sided limits so trapezoid errors of adjacent cells cancel
            if at.pol == Polarization::Tm
                && span_idx + 1 < spans.len()
                && (x - s.x_end_nm).abs() < 1e-9
            {
                let right = &spans[span_idx + 1];
                return 0.5 * (value + f / right.n_sq);
            }
            value
        })
        .collect();
    for k in (1..=n_half).rev() {
        x_nm.push(-(k as f64) * dx);
        samples.push(sign * positive[k]);
    }
    for (k, val) in positive.iter().enumerate() {
        x_nm.push(k as f64 * dx);
        samples.push(*val);
    }
    Ok(FieldProfile {
        x_nm,
        samples,
        dx_nm: dx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{MaterialDb, MaterialModel};
    use crate::stack::Layer;
    use std::sync::Arc;

    fn db() -> MaterialDb {
        MaterialDb::builtin()
    }

    fn brw_stack() -> LayerStack {
        LayerStack::preset("brw-paper", &db()).unwrap()
    }

    fn conventional() -> LayerStack {
        LayerStack::preset("conventional-paper", &db()).unwrap()
    }

    /// Uniform-cladding three-layer stack with constant stub indices.
    fn synthetic_slab(n_core: f64, n_clad: f64, d_core_nm: f64) -> LayerStack {
        let core = Arc::new(MaterialModel::constant("core", n_core));
        let clad = Arc::new(MaterialModel::constant("clad", n_clad));
        LayerStack {
            name: "slab".to_string(),
            core: Layer::new(core, d_core_nm),
            bilayer: (
                Layer::new(clad.clone(), 1000.0),
                Layer::new(clad.clone(), 1000.0),
            ),
            n_bilayers: 1,
            exterior: clad,
            qpm_period_um: None,
            symmetric: true,
        }
    }

    /// Textbook even-mode dispersion relation for the symmetric slab,
    /// solved by bisection independently of the transfer-matrix path.
    fn slab_even_n_eff_oracle(n_core: f64, n_clad: f64, d_nm: f64, lambda_nm: f64) -> f64 {
        let k0 = 2.0 * PI / (lambda_nm * 1e-3);
        let d = d_nm * 1e-3;
        let f = |n_eff: f64| {
            let kappa = k0 * (n_core * n_core - n_eff * n_eff).sqrt();
            let gamma = k0 * (n_eff * n_eff - n_clad * n_clad).sqrt();
            (kappa * d / 2.0).tan() - gamma / kappa
        };
        let mut lo = n_clad + 1e-9;
        let mut hi = n_core - 1e-9;
        // fundamental root: walk down from the core index to bracket the
        // first sign change of tan(kd/2) - gamma/kappa
        let steps = 20000;
        let mut prev = f(hi);
        let mut found = (lo, hi);
        for i in 1..=steps {
            let x = hi - (hi - lo) * i as f64 / steps as f64;
            let fx = f(x);
            if prev.is_finite() && fx.is_finite() && (prev > 0.0) != (fx > 0.0) {
                found = (x, hi - (hi - lo) * (i - 1) as f64 / steps as f64);
                break;
            }
            prev = fx;
        }
        let (mut a, mut b) = found;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (b - a).abs() < 1e-15 {
                break;
            }
            if (f(a) > 0.0) == (f(mid) > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        lo = a;
        hi = b;
        0.5 * (lo + hi)
    }

    #[test]
    fn slab_mode_matches_textbook_dispersion_relation() {
        let stack = synthetic_slab(2.30, 2.00, 700.0);
        let modes = find_tir_modes(&stack, 800.0, Polarization::Te).unwrap();
        assert!(!modes.is_empty());
        let fundamental = &modes[0];
        assert_eq!(fundamental.parity, Parity::Even);
        let oracle = slab_even_n_eff_oracle(2.30, 2.00, 700.0, 800.0);
        assert!(
            (fundamental.n_eff - oracle).abs() < 1e-9,
            "solver {} vs oracle {}",
            fundamental.n_eff,
            oracle
        );
    }

    #[test]
    fn no_contrast_means_no_modes() {
        let stack = synthetic_slab(2.0, 2.0, 700.0);
        let modes = find_tir_modes(&stack, 800.0, Polarization::Te).unwrap();
        assert!(modes.is_empty());
    }

    #[test]
    fn conventional_preset_has_fundamental_in_window() {
        let stack = conventional();
        let modes = find_tir_modes(&stack, 800.0, Polarization::Tm).unwrap();
        assert!(!modes.is_empty());
        let idx = stack.indices(800.0).unwrap();
        let fundamental = &modes[0];
        assert_eq!(fundamental.parity, Parity::Even);
        assert!(fundamental.n_eff > idx.max_cladding());
        assert!(fundamental.n_eff < idx.n_core);
        // beta consistency is exact by construction
        let beta = 2.0 * PI * fundamental.n_eff / (800.0 * 1e-3);
        assert_eq!(beta, fundamental.beta_rad_per_um);
    }

    #[test]
    fn profiles_are_normalized_symmetric_and_continuous() {
        let stack = conventional();
        for mode in find_tir_modes(&stack, 1550.0, Polarization::Tm).unwrap() {
            assert!((mode.profile.norm_sq() - 1.0).abs() < 1e-8);
            assert!(mode.interface_continuity_residual() < 1e-6);
            let p = &mode.profile;
            let n = p.samples.len();
            for i in 0..n {
                let mirrored = p.samples[n - 1 - i];
                let expect = match mode.parity {
                    Parity::Even => mirrored,
                    Parity::Odd => -mirrored,
                };
                assert!(
                    (p.samples[i] - expect).abs() < 1e-6,
                    "parity violated at sample {i}"
                );
            }
        }
    }

    #[test]
    fn brw_mode_exists_at_design_wavelength() {
        let stack = brw_stack();
        let lam = 1653.333333333333;
        let mode = find_brw_mode(&stack, lam, Polarization::Tm, Parity::Even).unwrap();
        let idx = stack.indices(lam).unwrap();
        assert!(mode.n_eff < idx.n_core.min(idx.min_cladding()));
        let bloch = bloch_analyze(&stack.bilayer, lam, mode.n_eff, Polarization::Tm).unwrap();
        assert!(bloch.in_stop_band);
        // quarter-wave self-consistency: both cladding layers within 2% of
        // quarter-wave phase thickness at the solved point
        let k0 = 2.0 * PI / (lam * 1e-3);
        let kappa1 = k0 * (idx.n_clad1.powi(2) - mode.n_eff.powi(2)).sqrt();
        let kappa2 = k0 * (idx.n_clad2.powi(2) - mode.n_eff.powi(2)).sqrt();
        let phase1 = kappa1 * stack.bilayer.0.thickness_nm * 1e-3;
        let phase2 = kappa2 * stack.bilayer.1.thickness_nm * 1e-3;
        assert!(
            (phase1 / (PI / 2.0) - 1.0).abs() < 0.02,
            "kappa1 d1 = {phase1}"
        );
        assert!(
            (phase2 / (PI / 2.0) - 1.0).abs() < 0.02,
            "kappa2 d2 = {phase2}"
        );
    }

    #[test]
    fn brw_envelope_decays_by_bloch_factor() {
        let stack = brw_stack();
        let lam = 1653.333333333333;
        let mode = find_brw_mode(&stack, lam, Polarization::Tm, Parity::Even).unwrap();
        let bloch = bloch_analyze(&stack.bilayer, lam, mode.n_eff, Polarization::Tm).unwrap();
        let mu = bloch.bloch_factor.re;
        assert!(mu.abs() < 1.0);
        // field at successive mid-bilayer interfaces scales by mu
        let x0 = 0.5 * stack.core.thickness_nm + stack.bilayer.0.thickness_nm;
        let period = stack.bilayer.0.thickness_nm + stack.bilayer.1.thickness_nm;
        for j in 0..6 {
            let a = mode.state_field_at(x0 + j as f64 * period);
            let b = mode.state_field_at(x0 + (j + 1) as f64 * period);
            assert!(
                (b / a - mu).abs() < 0.01 * mu.abs(),
                "bilayer {j}: ratio {} vs mu {mu}",
                b / a
            );
        }
    }

    #[test]
    fn brw_mode_absent_far_from_stop_band() {
        let stack = brw_stack();
        // push the quarter-wave design far off its band: a much shorter
        // wavelength moves the first gap away from the admissible window
        let result = find_brw_mode(&stack, 700.0, Polarization::Tm, Parity::Even);
        match result {
            Err(Error::NoBrwMode { .. }) => {}
            Err(other) => panic!("unexpected error {other}"),
            Ok(mode) => {
                // if a mode exists it must satisfy its defining predicate
                let idx = stack.indices(700.0).unwrap();
                assert!(mode.n_eff < idx.min_cladding().min(idx.n_core));
                let b =
                    bloch_analyze(&stack.bilayer, 700.0, mode.n_eff, Polarization::Tm).unwrap();
                assert!(b.in_stop_band);
            }
        }
    }

    #[test]
    fn normalize_uniform_field_closed_form() {
        let w = 250.0_f64;
        let n = 251;
        let profile = FieldProfile {
            x_nm: (0..n).map(|i| i as f64).collect(),
            samples: vec![3.7; n],
            dx_nm: 1.0,
        };
        let normalized = normalize_profile(&profile).unwrap();
        let expect = 1.0 / w.sqrt();
        for s in &normalized.samples {
            assert!((s - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_is_idempotent_and_scale_invariant() {
        let profile = FieldProfile {
            x_nm: (-100..=100).map(|i| i as f64).collect(),
            samples: (-100..=100)
                .map(|i| (-((i * i) as f64) / 2000.0).exp())
                .collect(),
            dx_nm: 1.0,
        };
        let once = normalize_profile(&profile).unwrap();
        let twice = normalize_profile(&once).unwrap();
        for (a, b) in once.samples.iter().zip(&twice.samples) {
            assert!((a - b).abs() < 1e-12);
        }
        let doubled = FieldProfile {
            x_nm: profile.x_nm.clone(),
            samples: profile.samples.iter().map(|s| 2.0 * s).collect(),
            dx_nm: 1.0,
        };
        let from_doubled = normalize_profile(&doubled).unwrap();
        for (a, b) in once.samples.iter().zip(&from_doubled.samples) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_zero_field_is_degenerate() {
        let profile = FieldProfile {
            x_nm: (0..10).map(|i| i as f64).collect(),
            samples: vec![0.0; 10],
            dx_nm: 1.0,
        };
        assert!(matches!(
            normalize_profile(&profile),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn bilayer_count_insensitivity_of_fundamental() {
        // leakage through 12 bilayers is negligible for the well-confined
        // fundamental, so adding bilayers must not move it
        let stack = brw_stack();
        let mut stack14 = stack.clone();
        stack14.n_bilayers = 14;
        for lam in [800.0, 1550.0] {
            let a = find_tir_modes(&stack, lam, Polarization::Tm).unwrap();
            let b = find_tir_modes(&stack14, lam, Polarization::Tm).unwrap();
            assert!(
                (a[0].n_eff - b[0].n_eff).abs() < 1e-8,
                "{lam} nm: {} vs {}",
                a[0].n_eff,
                b[0].n_eff
            );
        }
    }

    #[test]
    fn tail_window_is_immaterial_to_n_eff() {
        let stack = brw_stack();
        let base = SolverOptions::default();
        let mut wide = SolverOptions::default();
        wide.max_tail_nm *= 2.0;
        let a = find_tir_modes_opts(&stack, 800.0, Polarization::Tm, &base).unwrap();
        let b = find_tir_modes_opts(&stack, 800.0, Polarization::Tm, &wide).unwrap();
        for (ma, mb) in a.iter().zip(&b) {
            assert!((ma.n_eff - mb.n_eff).abs() < 1e-9);
        }
    }

    #[test]
    fn warm_solve_agrees_with_cold_solve() {
        let stack = brw_stack();
        let lam = 1653.333333333333;
        let family = ModeFamily::brw(Polarization::Tm);
        let cold = find_brw_mode(&stack, lam, Polarization::Tm, Parity::Even).unwrap();
        let warm = solve_family_near(
            &stack,
            &family,
            lam,
            Some(cold.n_eff + 1e-4),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((cold.n_eff - warm.n_eff).abs() < 1e-10);
    }
}
