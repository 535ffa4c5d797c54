//! Refractive-index dispersion and nonlinear-coefficient data.
//!
//! Material laws are data, not code: the shipped parameter file
//! (`data/materials.toml`, regenerated by `tools/generate_materials.py`)
//! declares a dispersion law per material and this module evaluates it.
//! All indices are real (lossless transparency window) and evaluated
//! directly from the law at each wavelength, so derivatives taken by
//! finite differences stay smooth.

use std::f64::consts::FRAC_2_PI;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Fixed physical constants (CODATA 2018), SI units.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
    /// Vacuum permittivity, F/m.
    pub epsilon0: f64,
    /// Planck constant, J s.
    pub h: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 299_792_458.0,
    epsilon0: 8.854_187_812_8e-12,
    h: 6.626_070_15e-34,
};

/// Dispersion law n(lambda) for one material.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionLaw {
    /// Single-oscillator Sellmeier form n^2 = 1 + a l^2 / (l^2 - b^2), l in um.
    Sellmeier1 { a: f64, b_um: f64 },
    /// Wavelength-independent index. Analysis stub for tests and synthetic
    /// stacks, not a physical alloy.
    Constant { n: f64 },
}

impl DispersionLaw {
    fn evaluate(&self, lambda_nm: f64) -> f64 {
        match *self {
            DispersionLaw::Sellmeier1 { a, b_um } => {
                let l = lambda_nm * 1e-3;
                let l2 = l * l;
                (1.0 + a * l2 / (l2 - b_um * b_um)).sqrt()
            }
            DispersionLaw::Constant { n } => n,
        }
    }
}

/// One material: identity, dispersion law, trusted range and d33.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub name: String,
    /// x in AlxGa1-xN; 0 for pure GaN.
    pub al_fraction: f64,
    pub dispersion: DispersionLaw,
    /// Wavelength range (nm) over which the law is trusted.
    pub valid_range_nm: (f64, f64),
    /// Nonlinear coefficient, pm/V. Nonzero only for the poled core material.
    pub d33_pm_per_v: f64,
}

impl MaterialModel {
    /// n(lambda). Errors outside the trusted range.
    pub fn refractive_index(&self, lambda_nm: f64) -> Result<f64> {
        let (lo, hi) = self.valid_range_nm;
        if !(lambda_nm >= lo && lambda_nm <= hi) {
            return Err(Error::WavelengthOutOfRange {
                material: self.name.clone(),
                lambda_nm,
                min_nm: lo,
                max_nm: hi,
            });
        }
        Ok(self.dispersion.evaluate(lambda_nm))
    }

    /// Effective nonlinear coefficient for first-order QPM, (2/pi) d33, pm/V.
    pub fn d_eff_pm_per_v(&self) -> f64 {
        FRAC_2_PI * self.d33_pm_per_v
    }

    /// Constant-index stub for synthetic test stacks.
    pub fn constant(name: &str, n: f64) -> Self {
        MaterialModel {
            name: name.to_string(),
            al_fraction: 0.0,
            dispersion: DispersionLaw::Constant { n },
            valid_range_nm: (1.0, 1e9),
            d33_pm_per_v: 0.0,
        }
    }

    /// Same stub with a nonlinear coefficient, for synthetic poled cores.
    pub fn constant_with_d33(name: &str, n: f64, d33_pm_per_v: f64) -> Self {
        MaterialModel {
            d33_pm_per_v,
            ..Self::constant(name, n)
        }
    }
}

#[derive(Debug, Deserialize)]
struct MaterialFile {
    material: Vec<MaterialEntry>,
}

#[derive(Debug, Deserialize)]
struct MaterialEntry {
    name: String,
    al_fraction: f64,
    valid_range_nm: [f64; 2],
    d33_pm_per_v: f64,
    dispersion: DispersionEntry,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
enum DispersionEntry {
    Sellmeier1 { a: f64, b_um: f64 },
    Constant { n: f64 },
}

/// Loaded material set, keyed by name.
#[derive(Debug, Clone)]
pub struct MaterialDb {
    materials: Vec<Arc<MaterialModel>>,
}

/// Parameter file shipped with the crate.
pub const BUILTIN_MATERIALS: &str = include_str!("../data/materials.toml");

impl MaterialDb {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let parsed: MaterialFile = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        let materials = parsed
            .material
            .into_iter()
            .map(|m| {
                Arc::new(MaterialModel {
                    name: m.name,
                    al_fraction: m.al_fraction,
                    dispersion: match m.dispersion {
                        DispersionEntry::Sellmeier1 { a, b_um } => {
                            DispersionLaw::Sellmeier1 { a, b_um }
                        }
                        DispersionEntry::Constant { n } => DispersionLaw::Constant { n },
                    },
                    valid_range_nm: (m.valid_range_nm[0], m.valid_range_nm[1]),
                    d33_pm_per_v: m.d33_pm_per_v,
                })
            })
            .collect();
        Ok(MaterialDb { materials })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// The parameter set shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_MATERIALS, "builtin materials.toml")
            .expect("builtin material file must parse")
    }

    pub fn get(&self, name: &str) -> Result<Arc<MaterialModel>> {
        self.materials
            .iter()
            .find(|m| m.name == name)
            .cloned()
            .ok_or_else(|| Error::MaterialNotFound(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<MaterialModel>> {
        self.materials.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gan() -> Arc<MaterialModel> {
        MaterialDb::builtin().get("GaN").unwrap()
    }

    #[test]
    fn gan_index_in_telecom_window() {
        let n = gan().refractive_index(1550.0).unwrap();
        assert!((n - 2.3).abs() < 0.05, "n(GaN, 1550) = {n}");
    }

    #[test]
    fn normal_dispersion_over_valid_range() {
        let db = MaterialDb::builtin();
        for m in db.iter() {
            let (lo, hi) = m.valid_range_nm;
            let mut prev = f64::INFINITY;
            for k in 0..=1000 {
                let lam = lo + (hi - lo) * k as f64 / 1000.0;
                let n = m.refractive_index(lam).unwrap();
                assert!(n > 1.0);
                assert!(n < prev, "{}: n not strictly decreasing at {lam}", m.name);
                prev = n;
            }
        }
    }

    #[test]
    fn higher_al_fraction_has_lower_index() {
        let db = MaterialDb::builtin();
        let mut mats: Vec<_> = db.iter().cloned().collect();
        mats.sort_by(|a, b| a.al_fraction.partial_cmp(&b.al_fraction).unwrap());
        for pair in mats.windows(2) {
            for k in 0..=500 {
                let lam = 450.0 + (2300.0 - 450.0) * k as f64 / 500.0;
                let n_lo = pair[0].refractive_index(lam).unwrap();
                let n_hi = pair[1].refractive_index(lam).unwrap();
                assert!(
                    n_hi < n_lo,
                    "{} vs {} at {lam} nm: {n_hi} !< {n_lo}",
                    pair[1].name,
                    pair[0].name
                );
            }
        }
    }

    #[test]
    fn cladding_contrast_matches_quarter_wave_inversion() {
        // sqrt(n1^2 - neff^2) = lambda/(4 d1) and likewise for d2 at the
        // design wavelength imply n1^2 - n2^2 ~ 1.35 for the shipped pair.
        let db = MaterialDb::builtin();
        let lam = 1653.0;
        let n1 = db.get("AlGaN_x0.02").unwrap().refractive_index(lam).unwrap();
        let n2 = db.get("AlGaN_x0.45").unwrap().refractive_index(lam).unwrap();
        assert!((n1 * n1 - n2 * n2 - 1.35).abs() < 0.10);
    }

    #[test]
    fn out_of_range_reports_model_and_range() {
        let err = gan().refractive_index(90.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("GaN") && msg.contains("450"));
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let m = gan();
        for k in 0..50 {
            let lam = 500.0 + 30.0 * k as f64;
            let a = m.refractive_index(lam).unwrap();
            let b = m.refractive_index(lam).unwrap();
            assert!(a.to_bits() == b.to_bits());
        }
    }

    #[test]
    fn d_eff_examples() {
        let m = gan();
        assert!((m.d33_pm_per_v - 16.5).abs() < 1e-12);
        assert!((m.d_eff_pm_per_v() - 2.0 / std::f64::consts::PI * 16.5).abs() < 1e-12);
        assert!((m.d_eff_pm_per_v() - 10.504).abs() < 5e-3);

        let zero = MaterialModel::constant("z", 2.0);
        assert_eq!(zero.d_eff_pm_per_v(), 0.0);

        let pi_mat = MaterialModel::constant_with_d33("p", 2.0, std::f64::consts::PI);
        assert!((pi_mat.d_eff_pm_per_v() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn planck_constants_consistent() {
        assert!((CONSTANTS.h / (2.0 * std::f64::consts::PI) - CONSTANTS.hbar).abs() < 1e-43);
    }

    #[test]
    fn unknown_material_is_an_error() {
        let db = MaterialDb::builtin();
        assert!(matches!(
            db.get("InGaN_x0.1"),
            Err(Error::MaterialNotFound(_))
        ));
    }
}
