//! Experiment configuration documents.

use delaygeo::io::CharFunDoc;
use delaygeo::{systems, CharFun, ComplexPoly, DelayKernel, KuramotoParams, MatrixFun, NetworkSpec, SimConfig, Window};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// A system given by name or by its matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemDef {
    /// `ż = z + L z(t − 1/2)`.
    Example1,
    /// `ż = 0.1(1+i) z + L (z(t−1) − z)`.
    Example2,
    /// `ż = (a + id) z + L z(t − τ)`.
    Example5 {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "half")]
        tau: f64,
        #[serde(default)]
        d: f64,
    },
    /// Example 5 with `aτ = 1.5 > 1`.
    Example5Unstable,
    /// `ż = a z + L ∫ z(t−τ) h^n_T(τ) dτ`.
    Gamma {
        a: f64,
        n: u32,
        #[serde(rename = "T")]
        t: f64,
    },
    /// Transverse car-following mode with a Gamma kernel.
    Carfollowing {
        n: u32,
        #[serde(rename = "T")]
        t: f64,
    },
    /// Delayed-PD agents with an exponential kernel of mean `T`.
    Mas {
        a: f64,
        b: f64,
        k1: f64,
        k2: f64,
        #[serde(rename = "T")]
        t: f64,
    },
    /// Linearized order-parameter equation.
    Kuramoto {
        #[serde(rename = "K")]
        k: f64,
        d: f64,
        kernel: DelayKernel,
    },
    /// `det[λI − Q(L) − B(L) ĥ(λ)]`; entries are polynomials in `L` given
    /// as `[re, im]` coefficients in ascending powers.
    Matrices {
        q: Vec<Vec<Vec<[f64; 2]>>>,
        b: Vec<Vec<Vec<[f64; 2]>>>,
        kernel: DelayKernel,
    },
    /// A serialized term table.
    Charfun(CharFunDoc<f64>),
}

fn matrix(rows: &[Vec<Vec<[f64; 2]>>]) -> Result<MatrixFun, CliError> {
    let q = rows.len();
    if q == 0 || rows.iter().any(|r| r.len() != q) {
        return Err(CliError::Config("matrix must be square and nonempty".into()));
    }
    let entries = rows
        .iter()
        .flatten()
        .map(|p| ComplexPoly::new(p.iter().map(|c| Complex64::new(c[0], c[1])).collect()))
        .collect();
    MatrixFun::new(q, entries).map_err(|e| CliError::Config(e.to_string()))
}

impl SystemDef {
    pub fn build(&self) -> Result<CharFun, CliError> {
        let cfg = |e: delaygeo::charfun::CharFunError| CliError::Config(e.to_string());
        Ok(match self {
            SystemDef::Example1 => systems::example1(),
            SystemDef::Example2 => systems::example2(),
            SystemDef::Example5 { a, tau, d } => systems::scalar_discrete(*a, *d, *tau).map_err(cfg)?,
            SystemDef::Example5Unstable => systems::scalar_discrete(3.0, 0.0, 0.5).map_err(cfg)?,
            SystemDef::Gamma { a, n, t } => systems::scalar_gamma(*a, *n, *t).map_err(cfg)?,
            SystemDef::Carfollowing { n, t } => systems::carfollowing(DelayKernel::gamma(*n, *t)).map_err(cfg)?,
            SystemDef::Mas { a, b, k1, k2, t } => systems::mas(*a, *b, *k1, *k2, *t).map_err(cfg)?,
            SystemDef::Kuramoto { k, d, kernel } => systems::kuramoto_linear(*k, *d, *kernel).map_err(cfg)?,
            SystemDef::Matrices { q, b, kernel } => CharFun::build(&matrix(q)?, &matrix(b)?, *kernel).map_err(cfg)?,
            SystemDef::Charfun(doc) => doc.to_charfun().map_err(cfg)?,
        })
    }

    /// Default `[re_lo, re_hi, im_lo, im_hi]` for region maps.
    pub fn default_window(&self) -> Option<[f64; 4]> {
        Some(match self {
            SystemDef::Example1 => [-4.0, 4.0, -4.0, 4.0],
            SystemDef::Example2 => [-6.0, 2.0, -2.0, 4.5],
            SystemDef::Example5 { .. } | SystemDef::Example5Unstable => [-4.0, 4.0, -4.0, 4.0],
            SystemDef::Gamma { .. } => [-6.0, 2.0, -4.0, 4.0],
            SystemDef::Carfollowing { .. } => [-3.0, 1.0, -2.0, 2.0],
            SystemDef::Mas { .. } => [-6.0, 1.0, -3.0, 3.0],
            SystemDef::Kuramoto { .. } => [-10.0, 4.0, -6.0, 6.0],
            SystemDef::Matrices { .. } | SystemDef::Charfun(_) => return None,
        })
    }
}

pub fn window(w: [f64; 4]) -> Result<Window, CliError> {
    let w = Window::new(w[0], w[1], w[2], w[3]);
    if !w.is_valid() {
        return Err(CliError::Config("window must satisfy re_lo < re_hi and im_lo < im_hi".into()));
    }
    Ok(w)
}

fn default_beta() -> [f64; 2] {
    [-20.0, 20.0]
}

fn default_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SccConfig {
    pub system: SystemDef,
    #[serde(default = "default_beta")]
    pub beta: [f64; 2],
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_resolution() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumapConfig {
    pub system: SystemDef,
    /// `[re_lo, re_hi, im_lo, im_hi]`; defaults per preset.
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    #[serde(default = "default_resolution")]
    pub nx: usize,
    #[serde(default = "default_resolution")]
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CriticalConfig {
    /// Ring consensus threshold `T_c`.
    Carfollowing {
        n: u32,
        #[serde(rename = "N")]
        agents: usize,
        alpha: f64,
    },
    /// Chain consensus threshold.
    Chain { n: u32, alpha: f64 },
    /// `T_c1` and `T_c2` of the delayed-PD agents.
    Mas { a: f64, b: f64, k1: f64, k2: f64 },
    /// Critical noise strength of the random network.
    AlphaC {
        a: f64,
        b: f64,
        k1: f64,
        k2: f64,
        #[serde(rename = "T")]
        t: f64,
        #[serde(rename = "R")]
        r: f64,
        #[serde(rename = "N")]
        agents: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimSystem {
    ScalarDiscrete {
        a: f64,
        #[serde(default)]
        d: f64,
        #[serde(rename = "L")]
        l: [f64; 2],
        tau: f64,
    },
    ScalarGamma {
        a: f64,
        #[serde(rename = "L")]
        l: [f64; 2],
        n: u32,
        #[serde(rename = "T")]
        t: f64,
    },
    Carfollowing {
        network: NetworkSpec,
        n: u32,
        #[serde(rename = "T")]
        t: f64,
    },
    Mas {
        a: f64,
        b: f64,
        k1: f64,
        k2: f64,
        #[serde(rename = "T")]
        t: f64,
        network: NetworkSpec,
    },
    Kuramoto(KuramotoParams),
    Oa {
        #[serde(rename = "K")]
        k: f64,
        d: f64,
        #[serde(rename = "L")]
        l: [f64; 2],
        kernel: DelayKernel,
        #[serde(default)]
        switch_on: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub system: SimSystem,
    pub sim: SimConfig,
}

/// Overrides for figure reproduction; unset fields take desk-scale defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
}
