//! Layered waveguide geometry, per-layer transfer matrices and Bloch
//! analysis of the periodic cladding.
//!
//! Matrix convention (used everywhere in this crate): the state vector is
//! (F, G) where
//!
//! * TE: F = E_y,  G = dE_y/dx
//! * TM: F = H_y,  G = (1/n^2) dH_y/dx
//!
//! Both components of (F, G) are continuous across dielectric interfaces,
//! so crossing a stack is a plain product of layer matrices. With the
//! transverse wavenumber kappa^2 = k0^2 (n^2 - n_eff^2) the layer matrix is
//!
//! ```text
//! | cos(kappa d)              q sin(kappa d)/kappa |      q = 1   (TE)
//! | -(kappa/q) sin(kappa d)   cos(kappa d)         |      q = n^2 (TM)
//! ```
//!
//! evaluated by analytic continuation for kappa^2 <= 0, so evanescent
//! layers and the kappa -> 0 limit need no special casing at call sites.
//! Lengths are nm at the API; wavenumbers are rad/um internally.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::materials::{MaterialDb, MaterialModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarization::Te => "te",
            Polarization::Tm => "tm",
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "te" => Ok(Polarization::Te),
            "tm" => Ok(Polarization::Tm),
            other => Err(Error::Domain(format!("unknown polarization '{other}'"))),
        }
    }
}

/// One homogeneous layer.
#[derive(Debug, Clone)]
pub struct Layer {
    pub material: Arc<MaterialModel>,
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(material: Arc<MaterialModel>, thickness_nm: f64) -> Self {
        assert!(
            thickness_nm.is_finite() && thickness_nm >= 0.0,
            "layer thickness must be finite and non-negative"
        );
        Layer {
            material,
            thickness_nm,
        }
    }
}

/// Symmetric layered waveguide: core, periodic cladding of `n_bilayers`
/// bilayers per side, semi-infinite exterior beyond the last bilayer.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub name: String,
    pub core: Layer,
    /// (layer adjacent to the core, outer layer of the bilayer).
    pub bilayer: (Layer, Layer),
    pub n_bilayers: usize,
    pub exterior: Arc<MaterialModel>,
    /// Poling period of the nonlinear grating, um; None for unpoled stacks.
    pub qpm_period_um: Option<f64>,
    pub symmetric: bool,
}

impl LayerStack {
    /// True when the two bilayer slots hold the same material: the cladding
    /// is effectively homogeneous and supports no photonic stop band.
    pub fn uniform_cladding(&self) -> bool {
        self.bilayer.0.material.name == self.bilayer.1.material.name
    }

    /// Core, first-cladding and second-cladding indices at `lambda_nm`.
    pub fn indices(&self, lambda_nm: f64) -> Result<StackIndices> {
        Ok(StackIndices {
            n_core: self.core.material.refractive_index(lambda_nm)?,
            n_clad1: self.bilayer.0.material.refractive_index(lambda_nm)?,
            n_clad2: self.bilayer.1.material.refractive_index(lambda_nm)?,
            n_exterior: self.exterior.refractive_index(lambda_nm)?,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StackIndices {
    pub n_core: f64,
    pub n_clad1: f64,
    pub n_clad2: f64,
    pub n_exterior: f64,
}

impl StackIndices {
    pub fn max_cladding(&self) -> f64 {
        self.n_clad1.max(self.n_clad2)
    }
    pub fn min_cladding(&self) -> f64 {
        self.n_clad1.min(self.n_clad2)
    }
}

/// 2x2 field-propagation matrix across one layer or layer sequence.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub polarization: Polarization,
    pub lambda_nm: f64,
    pub n_eff: f64,
}

impl TransferMatrix {
    pub fn identity(pol: Polarization, lambda_nm: f64, n_eff: f64) -> Self {
        TransferMatrix {
            m11: Complex64::new(1.0, 0.0),
            m12: Complex64::new(0.0, 0.0),
            m21: Complex64::new(0.0, 0.0),
            m22: Complex64::new(1.0, 0.0),
            polarization: pol,
            lambda_nm,
            n_eff,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// self * other (other acts first).
    pub fn compose(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * other.m11 + self.m12 * other.m21,
            m12: self.m11 * other.m12 + self.m12 * other.m22,
            m21: self.m21 * other.m11 + self.m22 * other.m21,
            m22: self.m21 * other.m12 + self.m22 * other.m22,
            polarization: self.polarization,
            lambda_nm: self.lambda_nm,
            n_eff: self.n_eff,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (
            self.m11.re * v.0 + self.m12.re * v.1,
            self.m21.re * v.0 + self.m22.re * v.1,
        )
    }
}

/// cos(kappa d), sin(kappa d)/kappa and kappa sin(kappa d) for
/// kappa^2 = `kappa_sq` (rad/um)^2 and d in um, continued analytically
/// through kappa^2 <= 0.
pub(crate) fn propagation_entries(kappa_sq: f64, d_um: f64) -> (f64, f64, f64) {
    let z = kappa_sq * d_um * d_um;
    if z.abs() < 1e-12 {
        // series around kappa -> 0; keeps the entries continuous and the
        // determinant exactly cos^2 + kappa^2 (sin/kappa)^2 kappa^2-free
        let c = 1.0 - 0.5 * z + z * z / 24.0;
        let s_over_k = d_um * (1.0 - z / 6.0 + z * z / 120.0);
        let k_s = kappa_sq * s_over_k;
        (c, s_over_k, k_s)
    } else if kappa_sq > 0.0 {
        let k = kappa_sq.sqrt();
        let (s, c) = (k * d_um).sin_cos();
        (c, s / k, k * s)
    } else {
        let g = (-kappa_sq).sqrt();
        let gd = g * d_um;
        let c = gd.cosh();
        let s = gd.sinh();
        (c, s / g, -g * s)
    }
}

fn q_factor(pol: Polarization, n: f64) -> f64 {
    match pol {
        Polarization::Te => 1.0,
        Polarization::Tm => n * n,
    }
}

/// Transfer matrix across one homogeneous layer at (lambda, n_eff, pol).
pub fn layer_matrix(
    layer: &Layer,
    lambda_nm: f64,
    n_eff: f64,
    pol: Polarization,
) -> Result<TransferMatrix> {
    let n = layer.material.refractive_index(lambda_nm)?;
    Ok(layer_matrix_with_index(
        n,
        layer.thickness_nm,
        lambda_nm,
        n_eff,
        pol,
    ))
}

pub(crate) fn layer_matrix_with_index(
    n: f64,
    thickness_nm: f64,
    lambda_nm: f64,
    n_eff: f64,
    pol: Polarization,
) -> TransferMatrix {
    let k0 = 2.0 * PI / (lambda_nm * 1e-3); // rad/um
    let kappa_sq = k0 * k0 * (n * n - n_eff * n_eff);
    let d_um = thickness_nm * 1e-3;
    let (c, s_over_k, k_s) = propagation_entries(kappa_sq, d_um);
    let q = q_factor(pol, n);
    TransferMatrix {
        m11: Complex64::new(c, 0.0),
        m12: Complex64::new(q * s_over_k, 0.0),
        m21: Complex64::new(-k_s / q, 0.0),
        m22: Complex64::new(c, 0.0),
        polarization: pol,
        lambda_nm,
        n_eff,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Cladding of one side: n_bilayers bilayers, core boundary outward.
    Half,
    /// Full symmetric structure: cladding, core, cladding.
    Full,
}

/// Ordered product of layer matrices across the stack.
pub fn stack_matrix(
    stack: &LayerStack,
    lambda_nm: f64,
    n_eff: f64,
    pol: Polarization,
    side: Side,
) -> Result<TransferMatrix> {
    let m1 = layer_matrix(&stack.bilayer.0, lambda_nm, n_eff, pol)?;
    let m2 = layer_matrix(&stack.bilayer.1, lambda_nm, n_eff, pol)?;
    let mut half = TransferMatrix::identity(pol, lambda_nm, n_eff);
    for _ in 0..stack.n_bilayers {
        half = m1.compose(&half);
        half = m2.compose(&half);
    }
    match side {
        Side::Half => Ok(half),
        Side::Full => {
            let core = layer_matrix(&stack.core, lambda_nm, n_eff, pol)?;
            // mirror-side product: layers traversed in the reverse order
            let mut mirror = TransferMatrix::identity(pol, lambda_nm, n_eff);
            for _ in 0..stack.n_bilayers {
                mirror = m2.compose(&mirror);
                mirror = m1.compose(&mirror);
            }
            Ok(half.compose(&core.compose(&mirror)))
        }
    }
}

/// Bloch eigenvalue analysis of the bilayer translation matrix.
#[derive(Debug, Clone)]
pub struct BlochAnalysis {
    pub lambda_nm: f64,
    pub n_eff: f64,
    /// Eigenvalue with |mu| <= 1 of the bilayer translation matrix.
    pub bloch_factor: Complex64,
    pub in_stop_band: bool,
    /// Re(trace)/2 of the bilayer matrix; |.| = 1 marks band edges.
    pub band_center_detuning: f64,
    pub(crate) matrix: TransferMatrix,
}

impl BlochAnalysis {
    /// Eigenvector (F, G) of the decaying Bloch wave. Only meaningful in a
    /// stop band (|bloch_factor| < 1).
    pub fn decaying_eigenvector(&self) -> (f64, f64) {
        let m = &self.matrix;
        let mu = self.bloch_factor.re;
        // rows of (M - mu I) are parallel; pick the better-conditioned one
        let v_a = (m.m12.re, mu - m.m11.re);
        let v_b = (mu - m.m22.re, m.m21.re);
        let norm_a = v_a.0.abs() + v_a.1.abs();
        let norm_b = v_b.0.abs() + v_b.1.abs();
        let v = if norm_a >= norm_b { v_a } else { v_b };
        let s = (v.0 * v.0 + v.1 * v.1).sqrt();
        (v.0 / s, v.1 / s)
    }
}

/// Analyze the (first, second) bilayer pair at (lambda, n_eff, pol).
pub fn bloch_analyze(
    bilayer: &(Layer, Layer),
    lambda_nm: f64,
    n_eff: f64,
    pol: Polarization,
) -> Result<BlochAnalysis> {
    let m1 = layer_matrix(&bilayer.0, lambda_nm, n_eff, pol)?;
    let m2 = layer_matrix(&bilayer.1, lambda_nm, n_eff, pol)?;
    let t = m2.compose(&m1);
    let half_trace = t.trace().re / 2.0;
    let in_stop_band = half_trace.abs() > 1.0;
    let bloch_factor = if in_stop_band {
        let root = (half_trace * half_trace - 1.0).sqrt();
        Complex64::new(half_trace - half_trace.signum() * root, 0.0)
    } else {
        Complex64::new(half_trace, (1.0 - half_trace * half_trace).max(0.0).sqrt())
    };
    Ok(BlochAnalysis {
        lambda_nm,
        n_eff,
        bloch_factor,
        in_stop_band,
        band_center_detuning: half_trace,
        matrix: t,
    })
}

// ---------------------------------------------------------------------------
// Stack description files

#[derive(Debug, Deserialize)]
struct StackFile {
    name: String,
    n_bilayers: usize,
    exterior: String,
    qpm_period_um: Option<f64>,
    #[serde(default = "default_true")]
    symmetric: bool,
    core: LayerEntry,
    bilayer: Vec<LayerEntry>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
struct LayerEntry {
    material: String,
    thickness_nm: f64,
}

pub const BUILTIN_STACKS: &[(&str, &str)] = &[
    ("brw-paper", include_str!("../data/stacks/brw-paper.toml")),
    (
        "conventional-paper",
        include_str!("../data/stacks/conventional-paper.toml"),
    ),
];

impl LayerStack {
    pub fn from_toml_str(text: &str, origin: &str, db: &MaterialDb) -> Result<Self> {
        let parsed: StackFile = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        if parsed.bilayer.len() != 2 {
            return Err(Error::ConfigParse {
                path: origin.to_string(),
                detail: format!("expected exactly 2 bilayer entries, got {}", parsed.bilayer.len()),
            });
        }
        if parsed.n_bilayers < 1 {
            return Err(Error::ConfigParse {
                path: origin.to_string(),
                detail: "n_bilayers must be >= 1".to_string(),
            });
        }
        if let Some(p) = parsed.qpm_period_um {
            if p <= 0.0 {
                return Err(Error::ConfigParse {
                    path: origin.to_string(),
                    detail: "qpm_period_um must be positive".to_string(),
                });
            }
        }
        let layer = |e: &LayerEntry| -> Result<Layer> {
            if !(e.thickness_nm > 0.0 && e.thickness_nm.is_finite()) {
                return Err(Error::ConfigParse {
                    path: origin.to_string(),
                    detail: format!("layer thickness {} must be positive", e.thickness_nm),
                });
            }
            Ok(Layer::new(db.get(&e.material)?, e.thickness_nm))
        };
        Ok(LayerStack {
            name: parsed.name,
            core: layer(&parsed.core)?,
            bilayer: (layer(&parsed.bilayer[0])?, layer(&parsed.bilayer[1])?),
            n_bilayers: parsed.n_bilayers,
            exterior: db.get(&parsed.exterior)?,
            qpm_period_um: parsed.qpm_period_um,
            symmetric: parsed.symmetric,
        })
    }

    pub fn from_path(path: &std::path::Path, db: &MaterialDb) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text, &path.display().to_string(), db)
    }

    /// Load a shipped preset by name ("brw-paper", "conventional-paper").
    pub fn preset(name: &str, db: &MaterialDb) -> Result<Self> {
        let text = BUILTIN_STACKS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::ConfigParse {
                path: name.to_string(),
                detail: format!(
                    "unknown stack preset; shipped presets are: {}",
                    BUILTIN_STACKS
                        .iter()
                        .map(|(n, _)| *n)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            })?;
        Self::from_toml_str(text, name, db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialDb;

    const DET_TOL: f64 = 1e-12;

    fn db() -> MaterialDb {
        MaterialDb::builtin()
    }

    fn brw() -> LayerStack {
        LayerStack::preset("brw-paper", &db()).unwrap()
    }

    #[test]
    fn zero_thickness_layer_is_identity() {
        let m = layer_matrix(
            &Layer::new(db().get("GaN").unwrap(), 0.0),
            800.0,
            2.1,
            Polarization::Te,
        )
        .unwrap();
        assert!((m.m11.re - 1.0).abs() < 1e-15);
        assert!(m.m12.norm() < 1e-15);
        assert!(m.m21.norm() < 1e-15);
        assert!((m.m22.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn layer_matrix_unimodular_both_regimes() {
        let stack = brw();
        for pol in [Polarization::Te, Polarization::Tm] {
            for n_eff in [1.2, 1.9, 2.2, 2.34, 2.7] {
                for layer in [&stack.core, &stack.bilayer.0, &stack.bilayer.1] {
                    let m = layer_matrix(layer, 1550.0, n_eff, pol).unwrap();
                    assert!(
                        (m.det() - Complex64::new(1.0, 0.0)).norm() < DET_TOL,
                        "det = {:?} at n_eff = {n_eff}",
                        m.det()
                    );
                }
            }
        }
    }

    #[test]
    fn kappa_zero_limit_is_continuous() {
        // n_eff exactly equal to the layer index: diagonal 1, off-diagonal
        // proportional to thickness, no division by zero.
        let mat = db().get("GaN").unwrap();
        let n = mat.refractive_index(1550.0).unwrap();
        let layer = Layer::new(mat, 400.0);
        let m = layer_matrix(&layer, 1550.0, n, Polarization::Te).unwrap();
        assert!((m.m11.re - 1.0).abs() < 1e-10);
        assert!((m.m12.re - 0.4).abs() < 1e-10, "m12 = {}", m.m12.re);
        assert!(m.m21.norm() < 1e-10);
        // approaching from either side agrees with the limit
        let above = layer_matrix(&layer, 1550.0, n + 1e-9, Polarization::Te).unwrap();
        let below = layer_matrix(&layer, 1550.0, n - 1e-9, Polarization::Te).unwrap();
        assert!((above.m12.re - m.m12.re).abs() < 1e-9);
        assert!((below.m12.re - m.m12.re).abs() < 1e-9);
    }

    #[test]
    fn empty_stack_matrix_is_identity() {
        let mut stack = brw();
        stack.n_bilayers = 0;
        let m = stack_matrix(&stack, 1550.0, 2.0, Polarization::Tm, Side::Half).unwrap();
        assert!((m.m11.re - 1.0).abs() < 1e-15 && m.m12.norm() < 1e-15);
    }

    #[test]
    fn half_stack_matches_brute_force_product() {
        // independent re-multiplication of individually constructed layer
        // matrices, complex arithmetic done by hand
        let stack = brw();
        let (lam, n_eff, pol) = (1653.333333333333, 1.83, Polarization::Tm);
        let m = stack_matrix(&stack, lam, n_eff, pol, Side::Half).unwrap();

        let mut acc = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]];
        for _ in 0..stack.n_bilayers {
            for layer in [&stack.bilayer.0, &stack.bilayer.1] {
                let lm = layer_matrix(layer, lam, n_eff, pol).unwrap();
                let l = [[lm.m11, lm.m12], [lm.m21, lm.m22]];
                let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        out[r][c] = l[r][0] * acc[0][c] + l[r][1] * acc[1][c];
                    }
                }
                acc = out;
            }
        }
        assert!((m.m11 - acc[0][0]).norm() < 1e-9 * acc[0][0].norm().max(1.0));
        assert!((m.m12 - acc[0][1]).norm() < 1e-9 * acc[0][1].norm().max(1.0));
        assert!((m.m21 - acc[1][0]).norm() < 1e-9 * acc[1][0].norm().max(1.0));
        assert!((m.m22 - acc[1][1]).norm() < 1e-9 * acc[1][1].norm().max(1.0));
    }

    #[test]
    fn full_stack_determinant_survives_accumulation() {
        // checked where the entries stay moderate; with deeply evanescent
        // claddings the entries reach 1e17 and the determinant digits are
        // gone from f64 entirely
        let stack = brw();
        for n_eff in [1.2, 1.5, 1.8, 2.0] {
            let m = stack_matrix(&stack, 1550.0, n_eff, Polarization::Tm, Side::Full).unwrap();
            let det = m.det();
            let scale = m.m11.norm().max(m.m12.norm()).max(m.m21.norm()).max(m.m22.norm());
            assert!(
                (det - Complex64::new(1.0, 0.0)).norm() < 1e-10 * scale.max(1.0),
                "det = {det:?} at n_eff = {n_eff}"
            );
        }
    }

    #[test]
    fn quarter_wave_point_is_in_stop_band() {
        // at the design wavelength the cladding phase thicknesses are
        // quarter-wave and the bilayer sits at the stop-band center
        let stack = brw();
        let lam = 1653.333333333333;
        let n1 = stack.bilayer.0.material.refractive_index(lam).unwrap();
        let kappa1 = lam * 1e-3 / (4.0 * stack.bilayer.0.thickness_nm * 1e-3);
        let n_eff = (n1 * n1 - kappa1 * kappa1).sqrt();
        for pol in [Polarization::Te, Polarization::Tm] {
            let b = bloch_analyze(&stack.bilayer, lam, n_eff, pol).unwrap();
            assert!(b.in_stop_band, "{pol:?}: trace/2 = {}", b.band_center_detuning);
            assert!(b.bloch_factor.re.abs() < 1.0);
        }
    }

    #[test]
    fn evanescent_bilayer_has_positive_gap() {
        // n_eff above both layer indices: no propagating Bloch wave
        let stack = brw();
        let b = bloch_analyze(&stack.bilayer, 800.0, 2.40, Polarization::Te).unwrap();
        assert!(b.band_center_detuning > 1.0);
        assert!(b.in_stop_band);
    }

    #[test]
    fn pass_band_eigenvalue_is_unimodular() {
        let stack = brw();
        // hunt for a pass band below the low cladding index
        let mut found = false;
        for k in 0..2000 {
            let n_eff = 1.0 + k as f64 * 5e-4;
            let b = bloch_analyze(&stack.bilayer, 1653.0, n_eff, Polarization::Te).unwrap();
            if !b.in_stop_band {
                assert!((b.bloch_factor.norm() - 1.0).abs() < 1e-10);
                found = true;
            }
        }
        assert!(found, "no pass band sampled");
    }

    #[test]
    fn bloch_eigenvalues_are_reciprocal() {
        let stack = brw();
        for n_eff in [1.3, 1.6, 1.83, 2.1, 2.45] {
            let b = bloch_analyze(&stack.bilayer, 1653.0, n_eff, Polarization::Tm).unwrap();
            let mu = b.bloch_factor;
            let half_trace = Complex64::new(b.band_center_detuning, 0.0);
            let other = 2.0 * half_trace - mu; // trace = mu + mu'
            assert!(
                (mu * other - Complex64::new(1.0, 0.0)).norm() < 1e-10,
                "mu mu' = {:?}",
                mu * other
            );
        }
    }

    #[test]
    fn te_tm_coincide_without_contrast() {
        // identical bilayer materials: the translation matrix is similar to
        // a single uniform propagation step, so trace and Bloch factor are
        // polarization-independent
        let mat = db().get("AlGaN_x0.20").unwrap();
        let bilayer = (Layer::new(mat.clone(), 400.0), Layer::new(mat, 350.0));
        for n_eff in [1.8, 2.0, 2.21] {
            let te = bloch_analyze(&bilayer, 1550.0, n_eff, Polarization::Te).unwrap();
            let tm = bloch_analyze(&bilayer, 1550.0, n_eff, Polarization::Tm).unwrap();
            assert!((te.band_center_detuning - tm.band_center_detuning).abs() < 1e-10);
            assert!((te.bloch_factor - tm.bloch_factor).norm() < 1e-10);
            // entries relate by the q = n^2 similarity transform
            let q = mat_index_sq(&bilayer.0, 1550.0);
            let m_te = layer_matrix(&bilayer.0, 1550.0, n_eff, Polarization::Te).unwrap();
            let m_tm = layer_matrix(&bilayer.0, 1550.0, n_eff, Polarization::Tm).unwrap();
            assert!((m_te.m12.re - m_tm.m12.re / q).abs() < 1e-12);
            assert!((m_te.m21.re - m_tm.m21.re * q).abs() < 1e-12);
        }
    }

    fn mat_index_sq(layer: &Layer, lambda_nm: f64) -> f64 {
        let n = layer.material.refractive_index(lambda_nm).unwrap();
        n * n
    }

    #[test]
    fn preset_files_load() {
        let db = db();
        let brw = LayerStack::preset("brw-paper", &db).unwrap();
        assert_eq!(brw.core.thickness_nm, 582.0);
        assert_eq!(brw.bilayer.0.thickness_nm, 293.0);
        assert_eq!(brw.bilayer.1.thickness_nm, 517.0);
        assert_eq!(brw.n_bilayers, 12);
        assert_eq!(brw.qpm_period_um, Some(2.77));
        assert!(!brw.uniform_cladding());

        let conv = LayerStack::preset("conventional-paper", &db).unwrap();
        assert_eq!(conv.core.thickness_nm, 700.0);
        assert!(conv.uniform_cladding());
        assert!(conv.qpm_period_um.is_none());
    }
}
