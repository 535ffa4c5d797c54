use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda_nm} nm is outside the valid range [{min_nm}, {max_nm}] nm of material '{material}'")]
    WavelengthOutOfRange {
        material: String,
        lambda_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("material not found: '{0}'")]
    MaterialNotFound(String),

    #[error("failed to parse {path}: {detail}")]
    ConfigParse { path: String, detail: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("no Bragg-guided mode at {lambda_nm} nm ({polarization}, {parity}); scanned n_eff in [{window_lo:.6}, {window_hi:.6}]")]
    NoBrwMode {
        lambda_nm: f64,
        polarization: String,
        parity: String,
        window_lo: f64,
        window_hi: f64,
    },

    #[error("root refinement failed to converge in bracket [{lo:.12}, {hi:.12}]")]
    RootRefinement { lo: f64, hi: f64 },

    #[error("mode family lost during sweep; last good wavelength {last_good_lambda_nm} nm, failed at {failed_lambda_nm} nm: {detail}")]
    LostModeFamily {
        last_good_lambda_nm: f64,
        failed_lambda_nm: f64,
        detail: String,
    },

    #[error("no first-order QPM solution: beta_p - beta_s - beta_i = {delta_beta:.6e} rad/um is not positive")]
    NoFirstOrderQpm { delta_beta: f64 },

    #[error("no phase-matched root for lambda_p = {lambda_p_nm} nm in lambda_s bracket [{lo_nm}, {hi_nm}] nm")]
    NoPhaseMatchRoot {
        lambda_p_nm: f64,
        lo_nm: f64,
        hi_nm: f64,
    },

    #[error("design search bracket failure: derivative sign at d_c = {lo_nm} nm is {sign_lo}, at {hi_nm} nm is {sign_hi}")]
    SearchBracket {
        lo_nm: f64,
        hi_nm: f64,
        sign_lo: f64,
        sign_hi: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("profile is not normalized (integral |E|^2 dx = {norm:.9}); normalize before use")]
    NotNormalized { norm: f64 },

    #[error("detection window [{lo_nm}, {hi_nm}] nm is outside the spectrum grid [{grid_lo_nm}, {grid_hi_nm}] nm")]
    WindowOutOfRange {
        lo_nm: f64,
        hi_nm: f64,
        grid_lo_nm: f64,
        grid_hi_nm: f64,
    },

    #[error("numerical failure at {lambda_nm} nm: {detail}")]
    SolveAt { lambda_nm: f64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 config, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::DegenerateInput(_) => 2,
            Error::ConfigParse { .. } | Error::Io { .. } | Error::MaterialNotFound(_) => 3,
            _ => 4,
        }
    }
}
