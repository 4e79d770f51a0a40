//! Model constants, constitutive laws, reaction kinetics and initial data.
//!
//! Everything here is a pure function of its arguments. The eight tissue
//! fields are oxygen `w`, PDGF `p`, VEGF `e`, macrophages `m`, fibroblasts
//! `f`, capillary tips `n`, capillary sprouts `b` and matrix density `rho`.
//! All quantities are nondimensional, scaled so that the healthy state is
//! `w = f = b = rho = 1`, `p = e = m = n = 0`.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight transported quantities, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldId {
    W,
    P,
    E,
    M,
    F,
    N,
    B,
    Rho,
}

impl FieldId {
    pub const ALL: [FieldId; 8] = [
        FieldId::W,
        FieldId::P,
        FieldId::E,
        FieldId::M,
        FieldId::F,
        FieldId::N,
        FieldId::B,
        FieldId::Rho,
    ];

    /// Fields that carry a diffusion term, i.e. all but the matrix.
    pub const DIFFUSING: [FieldId; 7] = [
        FieldId::W,
        FieldId::P,
        FieldId::E,
        FieldId::M,
        FieldId::F,
        FieldId::N,
        FieldId::B,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Short identifier used in CSV headers.
    pub fn id(self) -> &'static str {
        match self {
            FieldId::W => "w",
            FieldId::P => "p",
            FieldId::E => "e",
            FieldId::M => "m",
            FieldId::F => "f",
            FieldId::N => "n",
            FieldId::B => "b",
            FieldId::Rho => "rho",
        }
    }

    pub fn diffuses(self) -> bool {
        self != FieldId::Rho
    }

    /// Far-field (healthy tissue) value `u*` entering the outer Robin condition.
    pub fn healthy_value(self) -> f64 {
        match self {
            FieldId::W | FieldId::F | FieldId::B | FieldId::Rho => 1.0,
            FieldId::P | FieldId::E | FieldId::M | FieldId::N => 0.0,
        }
    }
}

impl fmt::Display for FieldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One value per field, indexable by [`FieldId`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldValues(pub [f64; 8]);

impl FieldValues {
    pub fn from_fn(mut f: impl FnMut(FieldId) -> f64) -> Self {
        let mut out = [0.0; 8];
        for id in FieldId::ALL {
            out[id.index()] = f(id);
        }
        FieldValues(out)
    }

    /// The healthy homeostatic point.
    pub fn homeostatic() -> Self {
        Self::from_fn(FieldId::healthy_value)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl Index<FieldId> for FieldValues {
    type Output = f64;
    fn index(&self, id: FieldId) -> &f64 {
        &self.0[id.index()]
    }
}

impl IndexMut<FieldId> for FieldValues {
    fn index_mut(&mut self, id: FieldId) -> &mut f64 {
        &mut self.0[id.index()]
    }
}

/// Which initial data to lay down at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialProfile {
    /// Open wound: sprouts ramp up from the wound edge, PDGF bump at the edge.
    Wound,
    /// Uniform healthy tissue, `b = 1` and `p = 0` everywhere.
    Healthy,
}

/// Model constants and numerics knobs.
///
/// Serialized with the symbol names used throughout the model description
/// (`L`, `R0`, `D_w`, `K_wrho`, ...). Missing keys fall back to
/// [`Parameters::default`]; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub eps0: f64,
    pub gamma: f64,
    pub beta: f64,
    pub rho_m: f64,

    #[serde(rename = "D_w")]
    pub d_w: f64,
    #[serde(rename = "D_p")]
    pub d_p: f64,
    #[serde(rename = "D_e")]
    pub d_e: f64,
    #[serde(rename = "D_m")]
    pub d_m: f64,
    #[serde(rename = "D_f")]
    pub d_f: f64,
    #[serde(rename = "D_n")]
    pub d_n: f64,
    #[serde(rename = "D_b")]
    pub d_b: f64,

    pub chi_m: f64,
    pub chi_f: f64,
    pub chi_n: f64,
    pub m_m: f64,
    pub f_m: f64,
    pub n_m: f64,
    /// Sprout drag factor `A`.
    #[serde(rename = "A")]
    pub drag: f64,
    pub w_b: f64,

    pub k_w: f64,
    pub k_rho: f64,
    pub lambda_rho: f64,
    #[serde(rename = "K_wrho")]
    pub sat_wrho: f64,
    #[serde(rename = "K_wf")]
    pub sat_wf: f64,
    pub lambda_wf: f64,
    pub lambda_wm: f64,
    pub lambda_ww: f64,
    pub lambda_d: f64,
    pub k_f: f64,
    pub lambda_f: f64,
    pub k_nb: f64,
    pub k_n: f64,
    pub k_b: f64,
    pub lambda_nn: f64,
    pub lambda_nb: f64,
    pub k_pb: f64,
    pub k_sg: f64,

    pub k_p: f64,
    pub lambda_p: f64,
    pub k_e: f64,
    pub lambda_e: f64,
    pub k_m: f64,
    pub lambda_m: f64,

    /// Number of finite-volume cells on `xi in [0, 1]`.
    #[serde(rename = "N")]
    pub cells: usize,
    pub dt_max: f64,
    pub dt_min: f64,
    pub cfl_safety: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub max_retries: u32,
    /// Healed once `R <= closure_fraction * R0`.
    pub closure_fraction: f64,
    /// Stall speed threshold, relative to `R0` per unit time.
    pub stall_tol: f64,
    pub q_tol: f64,
    pub stall_window: f64,
    pub enforce_homeostasis: bool,
    pub initial_profile: InitialProfile,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            l: 5.0,
            r0: 8.0 / 3.0,
            eps0: 0.5,
            gamma: 0.0,
            beta: 10.0,
            rho_m: 2.0,

            d_w: 0.5,
            d_p: 1.0,
            d_e: 1.0,
            d_m: 5e-2,
            d_f: 5e-2,
            d_n: 1e-3,
            d_b: 7e-4,

            chi_m: 0.1,
            chi_f: 0.1,
            chi_n: 1.0,
            m_m: 10.0,
            f_m: 10.0,
            n_m: 10.0,
            drag: 0.1,
            w_b: 2.0,

            k_w: 4.39,
            k_rho: 5.0 / 16.0,
            lambda_rho: 0.1,
            sat_wrho: 0.25,
            sat_wf: 0.25,
            lambda_wf: 0.227,
            lambda_wm: 4.16,
            lambda_ww: 1.0,
            lambda_d: 2.0,
            k_f: 5.78e-3,
            lambda_f: 5.2e-3,
            k_nb: 2.16e-2,
            k_n: 2.16e-2,
            k_b: 2.16e-1,
            lambda_nn: 2.25,
            lambda_nb: 2.25e-2,
            k_pb: 1.0,
            k_sg: 6.25e-2,

            k_p: 1.0,
            lambda_p: 1.0,
            k_e: 1.0,
            lambda_e: 1.0,
            k_m: 1.0,
            lambda_m: 1.0,

            cells: 200,
            dt_max: 1e-3,
            dt_min: 1e-12,
            cfl_safety: 0.25,
            t_max: 50.0,
            max_retries: 40,
            closure_fraction: 0.02,
            stall_tol: 1e-6,
            q_tol: 1e-8,
            stall_window: 5.0,
            enforce_homeostasis: false,
            initial_profile: InitialProfile::Wound,
        }
    }
}

/// Symbols that are not part of the published parameter list and carry
/// placeholder values.
pub const RECONSTRUCTED_PARAMETERS: [&str; 9] = [
    "k_p", "lambda_p", "k_e", "lambda_e", "k_m", "lambda_m", "lambda_ww", "k_pb", "eps0",
];

impl Parameters {
    /// Parse a JSON configuration. Missing keys take defaults, unknown keys fail.
    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Load and validate a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let params = Self::from_json_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value, reason })
            }
        }
        check("gamma", self.gamma, (0.0..=1.0).contains(&self.gamma), "must lie in [0, 1]")?;
        check("rho_m", self.rho_m, self.rho_m > 1.0, "must exceed 1")?;
        check("L", self.l, self.l > 0.0, "must be positive")?;
        check("R0", self.r0, self.r0 > 0.0 && self.r0 < self.l, "must satisfy 0 < R0 < L")?;
        check(
            "eps0",
            self.eps0,
            self.eps0 > 0.0 && self.eps0 < self.l - self.r0,
            "must satisfy 0 < eps0 < L - R0",
        )?;
        check("beta", self.beta, self.beta >= 0.0, "must be nonnegative")?;
        for (name, d) in [
            ("D_w", self.d_w),
            ("D_p", self.d_p),
            ("D_e", self.d_e),
            ("D_m", self.d_m),
            ("D_f", self.d_f),
            ("D_n", self.d_n),
            ("D_b", self.d_b),
        ] {
            check(name, d, d > 0.0, "diffusivities must be positive")?;
        }
        for (name, cap) in [("m_m", self.m_m), ("f_m", self.f_m), ("n_m", self.n_m)] {
            check(name, cap, cap > 0.0, "caps must be positive")?;
        }
        check("f_m", self.f_m, self.f_m > 1.0, "must exceed 1")?;
        check("w_b", self.w_b, self.w_b > 1.0, "must exceed 1")?;
        for (name, k) in [
            ("chi_m", self.chi_m),
            ("chi_f", self.chi_f),
            ("chi_n", self.chi_n),
            ("A", self.drag),
            ("k_w", self.k_w),
            ("k_rho", self.k_rho),
            ("lambda_rho", self.lambda_rho),
            ("K_wrho", self.sat_wrho),
            ("K_wf", self.sat_wf),
            ("lambda_wf", self.lambda_wf),
            ("lambda_wm", self.lambda_wm),
            ("lambda_ww", self.lambda_ww),
            ("lambda_d", self.lambda_d),
            ("k_f", self.k_f),
            ("lambda_f", self.lambda_f),
            ("k_nb", self.k_nb),
            ("k_n", self.k_n),
            ("k_b", self.k_b),
            ("lambda_nn", self.lambda_nn),
            ("lambda_nb", self.lambda_nb),
            ("k_pb", self.k_pb),
            ("k_sg", self.k_sg),
            ("k_p", self.k_p),
            ("lambda_p", self.lambda_p),
            ("k_e", self.k_e),
            ("lambda_e", self.lambda_e),
            ("k_m", self.k_m),
            ("lambda_m", self.lambda_m),
        ] {
            check(name, k, k >= 0.0, "must be nonnegative")?;
        }
        check("K_wrho", self.sat_wrho, self.sat_wrho > 0.0, "must be positive")?;
        check("K_wf", self.sat_wf, self.sat_wf > 0.0, "must be positive")?;
        check("lambda_nn", self.lambda_nn, self.lambda_nn > 0.0, "must be positive")?;
        check("lambda_nb", self.lambda_nb, self.lambda_nb > 0.0, "must be positive")?;
        check("N", self.cells as f64, self.cells >= 8, "at least 8 cells required")?;
        check("dt_max", self.dt_max, self.dt_max > 0.0, "must be positive")?;
        check("dt_min", self.dt_min, self.dt_min > 0.0 && self.dt_min <= self.dt_max, "must satisfy 0 < dt_min <= dt_max")?;
        check("cfl_safety", self.cfl_safety, self.cfl_safety > 0.0 && self.cfl_safety <= 1.0, "must lie in (0, 1]")?;
        check("T_max", self.t_max, self.t_max >= 0.0, "must be nonnegative")?;
        check(
            "closure_fraction",
            self.closure_fraction,
            self.closure_fraction > 0.0 && self.closure_fraction <= 1.0,
            "must lie in (0, 1]",
        )?;
        check("stall_tol", self.stall_tol, self.stall_tol >= 0.0, "must be nonnegative")?;
        check("q_tol", self.q_tol, self.q_tol >= 0.0, "must be nonnegative")?;
        check("stall_window", self.stall_window, self.stall_window >= 0.0, "must be nonnegative")?;
        Ok(())
    }

    /// Parameters actually used for simulation: identical to `self` unless
    /// `enforce_homeostasis` is set, in which case `lambda_rho`, `k_w` and
    /// `k_f` are recomputed so the healthy state is an exact equilibrium.
    pub fn effective(&self) -> Parameters {
        let mut out = self.clone();
        if self.enforce_homeostasis {
            out.lambda_rho = self.homeostatic_lambda_rho();
            out.k_w = self.homeostatic_k_w();
            out.k_f = self.homeostatic_k_f();
        }
        out
    }

    pub fn homeostatic_lambda_rho(&self) -> f64 {
        self.k_rho / (1.0 + self.sat_wrho) * (1.0 - 1.0 / self.rho_m)
    }

    pub fn homeostatic_k_w(&self) -> f64 {
        (self.lambda_wf + self.lambda_wm) / (self.w_b - 1.0)
    }

    pub fn homeostatic_k_f(&self) -> f64 {
        self.lambda_f / (1.0 - 1.0 / self.f_m)
    }

    /// Upper bound on capillary tip density, `max{k_nb/l_nb, (k_n + beta(rho_m-1))/l_nn, n_m}`.
    pub fn tip_bound(&self) -> f64 {
        (self.k_nb / self.lambda_nb)
            .max((self.k_n + self.max_pressure()) / self.lambda_nn)
            .max(self.n_m)
    }

    /// `beta (rho_m - 1)`, the largest pressure compatible with `rho <= rho_m`.
    pub fn max_pressure(&self) -> f64 {
        self.beta * (self.rho_m - 1.0)
    }

    pub fn diffusivity(&self, field: FieldId) -> f64 {
        match field {
            FieldId::W => self.d_w,
            FieldId::P => self.d_p,
            FieldId::E => self.d_e,
            FieldId::M => self.d_m,
            FieldId::F => self.d_f,
            FieldId::N => self.d_n,
            FieldId::B => self.d_b,
            FieldId::Rho => 0.0,
        }
    }
}

/// Smoothed Heaviside `u^6 / (1e-6 + u^6)` for `u >= 0`, zero otherwise.
#[inline]
pub fn heaviside_smooth(u: f64) -> f64 {
    if u >= 0.0 {
        let u6 = (u * u * u).powi(2);
        u6 / (1e-6 + u6)
    } else {
        0.0
    }
}

/// Matrix pressure `beta (rho - 1)_+`.
#[inline]
pub fn pressure(rho: f64, beta: f64) -> f64 {
    if rho >= 1.0 {
        beta * (rho - 1.0)
    } else {
        0.0
    }
}

/// Oxygen-dependent production and death modifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OxygenResponse {
    pub g_p: f64,
    pub g_e: f64,
    pub g_f: f64,
    pub g_b: f64,
    pub d: f64,
}

pub fn pdgf_response(w: f64) -> f64 {
    if w < 0.5 {
        3.0 * w
    } else if w < 1.0 {
        2.0 - w
    } else if w < 4.0 {
        w / 3.0 + 2.0 / 3.0
    } else {
        2.0
    }
}

pub fn vegf_response(w: f64) -> f64 {
    if w < 0.5 {
        2.0 * w
    } else if w < 1.0 {
        2.0 - 2.0 * w
    } else if w < 4.0 {
        w / 3.0 - 1.0 / 3.0
    } else {
        1.0
    }
}

pub fn oxygen_response(w: f64, params: &Parameters) -> OxygenResponse {
    let kf = params.sat_wf;
    let kr = params.sat_wrho;
    OxygenResponse {
        g_p: pdgf_response(w),
        g_e: vegf_response(w),
        g_f: (kf + 1.0) * w / (kf + w),
        g_b: (kr + 1.0) * w / (kr + w),
        d: 1.0 - heaviside_smooth(5.0 * w - 1.0) * heaviside_smooth(1.0 - w / 3.0),
    }
}

/// Flux-limited chemotactic slope `s / sqrt(1 + k_sg s^2)`.
#[inline]
pub fn bounded_taxis(slope: f64, k_sg: f64) -> f64 {
    slope / (1.0 + k_sg * slope * slope).sqrt()
}

/// Whether a kinetic term is read directly off the model or filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Attested,
    ReconstructedDefault,
}

/// Reaction right-hand sides for the eight fields at a single point.
pub trait Kinetics: Send + Sync {
    fn rates(&self, state: &FieldValues, gamma: f64, params: &Parameters) -> Result<FieldValues>;

    fn provenance(&self, field: FieldId) -> Provenance;

    /// Diagonal of the reaction Jacobian, by one-sided differences.
    fn jacobian_diagonal(
        &self,
        state: &FieldValues,
        gamma: f64,
        params: &Parameters,
    ) -> Result<FieldValues> {
        let base = self.rates(state, gamma, params)?;
        let mut diag = FieldValues::default();
        for id in FieldId::ALL {
            let h = 1e-7 * state[id].abs().max(1.0);
            let mut bumped = *state;
            bumped[id] += h;
            let r = self.rates(&bumped, gamma, params)?;
            diag[id] = (r[id] - base[id]) / h;
        }
        Ok(diag)
    }
}

/// The kinetic model used by default.
///
/// Oxygen, matrix, fibroblast and tip kinetics are the attested forms; PDGF,
/// VEGF, macrophage and the logistic completion of the sprout equation are
/// reconstructed placeholders, marked as such by [`Kinetics::provenance`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultKinetics;

impl Kinetics for DefaultKinetics {
    fn rates(&self, s: &FieldValues, gamma: f64, k: &Parameters) -> Result<FieldValues> {
        if !s.is_finite() || !gamma.is_finite() {
            return Err(Error::NonFiniteInput { context: "kinetics" });
        }
        let [w, p, e, m, f, n, b, rho] = s.0;
        let ox = oxygen_response(w, k);

        let p_sat = p / (1.0 + p);
        let e_sat = e / (1.0 + e);

        let supply = k.k_w * b * ((1.0 - gamma) * k.w_b - w);
        let uptake =
            ((k.lambda_wf * f + k.lambda_wm * m) * (1.0 + k.lambda_ww * p_sat) + k.lambda_wm) * w;
        let r_w = supply - uptake;

        let r_p = k.k_p * ox.g_p * m - k.lambda_p * p;
        let r_e = k.k_e * ox.g_e * m - k.lambda_e * e;
        let r_m = k.k_m * b * p_sat - k.lambda_m * m;
        let r_f = k.k_f * ox.g_f * f * (1.0 - f / k.f_m) - k.lambda_f * f * (1.0 + k.lambda_d * ox.d);
        let r_n = b * (k.k_nb * e_sat - k.lambda_nb * n) + (k.k_n * e_sat - k.lambda_nn * n) * n;
        let r_b = k.k_b * ox.g_b * b * (1.0 - b);
        let r_rho = k.k_rho * w / (w + k.sat_wrho) * f * (1.0 - rho / k.rho_m) - k.lambda_rho * rho;

        Ok(FieldValues([r_w, r_p, r_e, r_m, r_f, r_n, r_b, r_rho]))
    }

    fn provenance(&self, field: FieldId) -> Provenance {
        match field {
            FieldId::P | FieldId::E | FieldId::M | FieldId::B => Provenance::ReconstructedDefault,
            FieldId::W | FieldId::F | FieldId::N | FieldId::Rho => Provenance::Attested,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Warn,
}

/// One homeostasis constraint evaluated against the listed parameters.
#[derive(Debug, Clone, Serialize)]
pub struct HomeostasisCheck {
    pub constraint: &'static str,
    pub listed: f64,
    pub implied: f64,
    /// `|listed - implied| / |implied|`.
    pub residual: f64,
    pub verdict: Verdict,
}

/// Compare `lambda_rho`, `k_w` and `k_f` with the values that make the
/// healthy state a kinetic equilibrium. Never modifies anything.
pub fn validate_homeostasis(params: &Parameters) -> Vec<HomeostasisCheck> {
    let entry = |constraint, listed: f64, implied: f64| {
        let residual = (listed - implied).abs() / implied.abs();
        HomeostasisCheck {
            constraint,
            listed,
            implied,
            residual,
            verdict: if residual <= 0.01 { Verdict::Pass } else { Verdict::Warn },
        }
    };
    vec![
        entry("lambda_rho = k_rho (1 - 1/rho_m) / (1 + K_wrho)", params.lambda_rho, params.homeostatic_lambda_rho()),
        entry("k_w = (lambda_wf + lambda_wm) / (w_b - 1)", params.k_w, params.homeostatic_k_w()),
        entry("k_f = lambda_f / (1 - 1/f_m)", params.k_f, params.homeostatic_k_f()),
    ]
}

/// Piecewise C^1 ramp from 0 (z <= 0) to 1 (z >= 1).
pub fn sprout_ramp(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z <= 0.25 {
        8.0 / 3.0 * z * z
    } else if z < 0.75 {
        4.0 / 3.0 * z - 1.0 / 6.0
    } else if z <= 1.0 {
        1.0 - 8.0 / 3.0 * (1.0 - z) * (1.0 - z)
    } else {
        1.0
    }
}

pub fn initial_b_profile(r: f64, params: &Parameters) -> f64 {
    sprout_ramp((r - params.r0) / params.eps0)
}

/// Quartic PDGF bump `(k_pb eps0 / (4 D_p)) (1 - z)^4` on `z in [0, 1]`.
///
/// Its slope at the wound edge is `-k_pb / D_p`, matching the platelet flux
/// condition at `t = 0`, and it joins zero with three vanishing derivatives.
pub fn initial_p_profile(r: f64, params: &Parameters) -> f64 {
    let z = (r - params.r0) / params.eps0;
    if z >= 1.0 {
        return 0.0;
    }
    let z = z.max(0.0);
    let one_minus = 1.0 - z;
    params.k_pb * params.eps0 / (4.0 * params.d_p) * one_minus.powi(4)
}
