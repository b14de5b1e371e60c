//! Parameter selection for the composed oracle and the named presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ComposeError;
use crate::preserver::gamma_43;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmulatorKind {
    Tz,
    Mn,
    Ap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreserverChoice {
    /// `1+ε'` preserver with `ε' = ε/12`.
    V1,
    /// `3+ε` preserver.
    ThreeEps,
}

impl PreserverChoice {
    /// Accuracy handed to the preserver builder.
    pub fn eps(self, eps: f64) -> f64 {
        match self {
            PreserverChoice::V1 => eps / 12.0,
            PreserverChoice::ThreeEps => eps,
        }
    }
}

impl EmulatorKind {
    fn name(self) -> &'static str {
        match self {
            EmulatorKind::Tz => "tz",
            EmulatorKind::Mn => "mn",
            EmulatorKind::Ap => "ap",
        }
    }
}

impl PreserverChoice {
    fn name(self) -> &'static str {
        match self {
            PreserverChoice::V1 => "v1",
            PreserverChoice::ThreeEps => "3eps",
        }
    }
}

/// Named constructions: an emulator paired with a preserver, or a partition
/// wrap around the MN emulator with the `3+ε` preserver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Composed(EmulatorKind, PreserverChoice),
    /// Partition wrap with `t = ⌈k log log n / log n⌉`.
    Partitioned,
    /// Ultra-sparse partition wrap with `t = ⌈log log n⌉`.
    Ultra,
}

impl Preset {
    pub const ALL: [Preset; 8] = {
        use EmulatorKind::*;
        use PreserverChoice::*;
        [
            Preset::Composed(Tz, V1),
            Preset::Composed(Ap, V1),
            Preset::Composed(Tz, ThreeEps),
            Preset::Composed(Ap, ThreeEps),
            Preset::Composed(Mn, V1),
            Preset::Composed(Mn, ThreeEps),
            Preset::Partitioned,
            Preset::Ultra,
        ]
    };

    /// Inner construction of the partition wraps.
    pub const INNER: Preset = Preset::Composed(EmulatorKind::Mn, PreserverChoice::ThreeEps);
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.to_string() == s).ok_or_else(|| {
            let names: Vec<String> = Preset::ALL.iter().map(|p| p.to_string()).collect();
            format!("unknown preset {s:?}; expected one of {}", names.join(", "))
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Composed(e, p) => write!(f, "{}-{}", e.name(), p.name()),
            Preset::Partitioned => write!(f, "partitioned"),
            Preset::Ultra => write!(f, "ultra"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: u32,
    pub eps: f64,
    /// Requested partial oracle depth.
    pub h_requested: usize,
    /// Depth after the partial oracle rounds odd values up.
    pub h: usize,
    /// Emulator parameter `⌈k(1+2ε)/h⌉`.
    pub k1: u32,
    pub sigma: f64,
    /// Sampling levels of the partial oracle and their probability.
    pub l: usize,
    pub probs: Vec<f64>,
}

/// Emulator exponent overhead: 1 for TZ, 0 for MN and `1 + log_k log_{1+ε} Λ` for AP.
pub fn delta(kind: EmulatorKind, k: u32, eps: f64, aspect: f64) -> f64 {
    match kind {
        EmulatorKind::Tz => 1.0,
        EmulatorKind::Mn => 0.0,
        EmulatorKind::Ap => {
            let scales = (aspect.max(1.0).ln() / eps.ln_1p()).max(1.0);
            1.0 + (scales.ln() / (k as f64).ln()).max(0.0)
        }
    }
}

/// Preserver exponent overhead: `log_k` of its hop bound.
pub fn tau(kind: PreserverChoice, k: u32, eps: f64) -> f64 {
    let e = kind.eps(eps);
    match kind {
        PreserverChoice::V1 => (gamma_43(e, k) as f64).ln() / (k as f64).ln(),
        PreserverChoice::ThreeEps => (12.0 + 40.0 / e).ln() / (4.0f64 / 3.0).ln(),
    }
}

pub fn sigma(em: EmulatorKind, pr: PreserverChoice, k: u32, eps: f64, aspect: f64) -> f64 {
    delta(em, k, eps, aspect) + tau(pr, k, eps)
}

fn check_domain(n: usize, k: u32, eps: f64) -> Result<(), ComposeError> {
    if k < 3 || (k as f64) > (n.max(1) as f64).log2() {
        return Err(ComposeError::InvalidParams(format!("need 3 <= k <= log2 n, got k={k} n={n}")));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(ComposeError::InvalidParams(format!("need 0 < eps <= 1/2, got {eps}")));
    }
    Ok(())
}

/// `h = ⌈σ k log log n / log n⌉·⌈1/ε⌉` clamped to `[1, k-1]` and
/// `k1 = ⌈k(1+2ε)/h⌉` for the effective `h`.
pub fn select_params(n: usize, k: u32, eps: f64, sigma: f64) -> Result<Params, ComposeError> {
    check_domain(n, k, eps)?;
    let ln = (n as f64).log2();
    let lln = ln.log2().max(0.0);
    let first = (sigma * k as f64 * lln / ln).ceil().max(1.0);
    let raw = first * (1.0 / eps).ceil();
    let h_requested = (raw.min((k - 1) as f64) as usize).max(1);
    with_depth(n, k, eps, sigma, h_requested)
}

/// Parameters for an explicitly chosen depth.
pub fn with_depth(n: usize, k: u32, eps: f64, sigma: f64, h_requested: usize) -> Result<Params, ComposeError> {
    check_domain(n, k, eps)?;
    if h_requested < 1 || h_requested >= k as usize {
        return Err(ComposeError::InvalidParams(format!("need 1 <= h < k, got h={h_requested}")));
    }
    let h = h_requested + h_requested % 2;
    let k1 = ((k as f64 * (1.0 + 2.0 * eps) / h as f64) - 1e-9).ceil().max(1.0) as u32;
    let q = (n as f64).powf(-1.0 / k as f64);
    Ok(Params { k, eps, h_requested, h, k1, sigma, l: h + 1, probs: vec![q; h + 1] })
}
