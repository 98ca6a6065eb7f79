//! Experiment configuration: one JSON file per run, no global state.
//!
//! The top level carries the command name, grid, schedule, seed and
//! tolerances; nested specs describe grid functions, sphere symbols and
//! sequences by kind. Complex values are written as `[re, im]` (a bare
//! number is accepted as a real).

use num_complex::Complex64;
use serde::Deserialize;

use hdist_core::fields;
use hdist_core::grid::GridFunction;
use hdist_core::multiplier::SphereSymbol;
use hdist_core::sequences::SequenceSpec;

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(untagged)]
pub enum Cx {
    Re(f64),
    Pair([f64; 2]),
}

impl Cx {
    pub fn value(&self) -> Complex64 {
        match self {
            Cx::Re(re) => Complex64::new(*re, 0.0),
            Cx::Pair([re, im]) => Complex64::new(*re, *im),
        }
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: Cx,
    },
    Bump {
        center: Vec<f64>,
        width: f64,
    },
    Plateau {
        center: Vec<f64>,
        width: f64,
        plateau_fraction: f64,
    },
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
    },
    Cosine {
        k: Vec<i64>,
        amplitude: f64,
    },
    Random {
        max_freq: i64,
        seed_offset: u64,
    },
}

impl FieldSpec {
    pub fn build(&self, dim: usize, n: usize, seed: Option<u64>) -> Result<GridFunction, String> {
        let f = match self {
            FieldSpec::Constant { value } => GridFunction::constant(dim, n, value.value()),
            FieldSpec::Bump { center, width } => {
                check_center(center, dim)?;
                fields::bump(dim, n, center, *width)
            }
            FieldSpec::Plateau {
                center,
                width,
                plateau_fraction,
            } => {
                check_center(center, dim)?;
                fields::plateau_bump(dim, n, center, *width, *plateau_fraction)
            }
            FieldSpec::Gaussian { center, sigma } => {
                check_center(center, dim)?;
                fields::gaussian(dim, n, center, *sigma)
            }
            FieldSpec::Cosine { k, amplitude } => {
                if k.len() != dim {
                    return Err(format!("field k has {} entries, expected {}", k.len(), dim));
                }
                fields::cosine(dim, n, k, *amplitude)
            }
            FieldSpec::Random {
                max_freq,
                seed_offset,
            } => {
                let seed = seed.ok_or_else(|| {
                    "missing field `seed`: random fields need the config seed".to_string()
                })?;
                fields::random_bandlimited_real(dim, n, *max_freq, seed.wrapping_add(*seed_offset))
            }
        };
        f.map_err(|e| e.to_string())
    }
}

fn check_center(center: &[f64], dim: usize) -> Result<(), String> {
    if center.len() != dim {
        return Err(format!(
            "center has {} entries, expected {}",
            center.len(),
            dim
        ));
    }
    Ok(())
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Constant {
        value: Cx,
    },
    /// d = 1: values at the poles.
    TwoPoint {
        plus: Cx,
        minus: Cx,
    },
    /// d = 2: trigonometric polynomial in the polar angle.
    TrigPoly {
        #[serde(default)]
        cos: Vec<Cx>,
        #[serde(default)]
        sin: Vec<Cx>,
    },
    Coordinate {
        axis: usize,
    },
    Riesz {
        axis: usize,
    },
    Hilbert,
    /// `(1 + e . d)/2`: equal to 1 in the direction `d`, vanishing at `-d`.
    RaisedCosine {
        direction: Vec<f64>,
    },
}

impl SymbolSpec {
    pub fn build(&self, dim: usize) -> Result<SphereSymbol, String> {
        match self {
            SymbolSpec::Constant { value } => Ok(SphereSymbol::constant(dim, value.value())),
            SymbolSpec::TwoPoint { plus, minus } => {
                if dim != 1 {
                    return Err("two_point symbols are one-dimensional".into());
                }
                Ok(SphereSymbol::two_point(plus.value(), minus.value()))
            }
            SymbolSpec::TrigPoly { cos, sin } => {
                if dim != 2 {
                    return Err("trig_poly symbols are two-dimensional".into());
                }
                Ok(SphereSymbol::trig_poly(
                    cos.iter().map(Cx::value).collect(),
                    sin.iter().map(Cx::value).collect(),
                ))
            }
            SymbolSpec::Coordinate { axis } => {
                if *axis >= dim {
                    return Err(format!("axis {} out of range for dim {}", axis, dim));
                }
                Ok(SphereSymbol::coordinate(dim, *axis))
            }
            SymbolSpec::Riesz { axis } => {
                if *axis >= dim {
                    return Err(format!("axis {} out of range for dim {}", axis, dim));
                }
                Ok(SphereSymbol::riesz(dim, *axis))
            }
            SymbolSpec::Hilbert => {
                if dim != 1 {
                    return Err("the Hilbert symbol is one-dimensional".into());
                }
                Ok(SphereSymbol::two_point(
                    Complex64::new(0.0, -1.0),
                    Complex64::new(0.0, 1.0),
                ))
            }
            SymbolSpec::RaisedCosine { direction } => {
                if direction.len() != dim {
                    return Err(format!(
                        "direction has {} entries, expected {}",
                        direction.len(),
                        dim
                    ));
                }
                let norm: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err("direction must be nonzero".into());
                }
                match dim {
                    1 => {
                        let sign = direction[0].signum();
                        let plus = Complex64::new((1.0 + sign) / 2.0, 0.0);
                        let minus = Complex64::new((1.0 - sign) / 2.0, 0.0);
                        Ok(SphereSymbol::two_point(plus, minus))
                    }
                    2 => {
                        let c0 = direction[0] / norm;
                        let s0 = direction[1] / norm;
                        Ok(SphereSymbol::trig_poly(
                            vec![
                                Complex64::new(0.5, 0.0),
                                Complex64::new(0.5 * c0, 0.0),
                            ],
                            vec![
                                Complex64::new(0.0, 0.0),
                                Complex64::new(0.5 * s0, 0.0),
                            ],
                        ))
                    }
                    _ => {
                        let d: Vec<f64> = direction.iter().map(|c| c / norm).collect();
                        Ok(SphereSymbol::from_direction(dim, dim / 2 + 1, move |e| {
                            let dot: f64 = e.iter().zip(&d).map(|(a, b)| a * b).sum();
                            Complex64::new((1.0 + dot) / 2.0, 0.0)
                        }))
                    }
                }
            }
        }
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpecConfig {
    Oscillation {
        amplitude: FieldSpec,
        k: Vec<i64>,
        #[serde(default = "default_true")]
        real_form: bool,
    },
    PairOscillation {
        amplitude: FieldSpec,
        k: Vec<i64>,
        k2: Vec<i64>,
        #[serde(default = "default_true")]
        real_form: bool,
    },
    Concentration {
        center: Vec<f64>,
        p: f64,
        width: f64,
    },
}

fn default_true() -> bool {
    true
}

impl SequenceSpecConfig {
    pub fn build(
        &self,
        dim: usize,
        n: usize,
        schedule: &[usize],
        seed: Option<u64>,
    ) -> Result<SequenceSpec, String> {
        match self {
            SequenceSpecConfig::Oscillation {
                amplitude,
                k,
                real_form,
            } => {
                let a = amplitude.build(dim, n, seed)?;
                SequenceSpec::oscillation(a, k.clone(), *real_form, schedule.to_vec())
                    .map_err(|e| e.to_string())
            }
            SequenceSpecConfig::PairOscillation {
                amplitude,
                k,
                k2,
                real_form,
            } => {
                let a = amplitude.build(dim, n, seed)?;
                SequenceSpec::pair_oscillation(
                    a,
                    k.clone(),
                    k2.clone(),
                    *real_form,
                    schedule.to_vec(),
                )
                .map_err(|e| e.to_string())
            }
            SequenceSpecConfig::Concentration { center, p, width } => {
                SequenceSpec::concentration(dim, center.clone(), *p, *width, schedule.to_vec())
                    .map_err(|e| e.to_string())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Per-command configuration bodies

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionCheckConfig {
    pub grid: GridSpec,
    pub j_min: i32,
    pub j_max: i32,
    #[serde(default = "default_partition_samples")]
    pub samples: usize,
    #[serde(default = "default_partition_tol")]
    pub tolerance: f64,
}

fn default_partition_samples() -> usize {
    10_000
}

fn default_partition_tol() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolCheckConfig {
    pub grid: GridSpec,
    pub symbol: SymbolSpec,
    pub mode: SymbolCheckMode,
    pub kappa: f64,
    #[serde(default)]
    pub r_exponents: Option<Vec<i32>>,
    #[serde(default)]
    pub j_min: Option<i32>,
    #[serde(default)]
    pub j_max: Option<i32>,
    #[serde(default)]
    pub y_exponents: Option<Vec<i32>>,
    #[serde(default)]
    pub box_n: Option<usize>,
    #[serde(default)]
    pub constant_cap: Option<f64>,
    /// Allowed relative spread of per-scale constant estimates.
    #[serde(default = "default_spread")]
    pub max_spread: f64,
}

fn default_spread() -> f64 {
    0.15
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SymbolCheckMode {
    Classical,
    Fractional,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSweepConfig {
    pub grid: GridSpec,
    pub symbol: SymbolSpec,
    pub p_values: Vec<f64>,
    pub trials: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_p2_tol")]
    pub p2_tolerance: f64,
    #[serde(default = "default_envelope")]
    pub envelope_factor: f64,
}

fn default_p2_tol() -> f64 {
    1e-6
}

fn default_envelope() -> f64 {
    1.2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HdistConfig {
    pub grid: GridSpec,
    pub schedule: Vec<usize>,
    pub sequence_u: SequenceSpecConfig,
    pub sequence_v: SequenceSpecConfig,
    pub phi1: FieldSpec,
    pub phi2: FieldSpec,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_oracle_tol")]
    pub oracle_rel_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_rel_tol: f64,
}

fn default_oracle_tol() -> f64 {
    0.01
}

fn default_residual_tol() -> f64 {
    0.005
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationConfig {
    pub grid: GridSpec,
    pub schedule: Vec<usize>,
    pub sequence_u: SequenceSpecConfig,
    pub sequence_v: SequenceSpecConfig,
    pub coefficients: Vec<FieldSpec>,
    pub phi: FieldSpec,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_residual_fraction: Option<f64>,
    #[serde(default)]
    pub expected_residual_fraction: Option<f64>,
    #[serde(default = "default_fraction_tol")]
    pub fraction_rel_tol: f64,
    #[serde(default)]
    pub require_constraint_decreasing: Option<bool>,
}

fn default_fraction_tol() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivcurlConfig {
    pub grid: GridSpec,
    pub schedule: Vec<usize>,
    pub u_pair: [SequenceSpecConfig; 2],
    pub v_pair: [SequenceSpecConfig; 2],
    pub phi: FieldSpec,
    pub symbols: Vec<SymbolSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_fraction_tol")]
    pub relation_fraction: f64,
    #[serde(default)]
    pub max_final_vague: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzConfig {
    pub grid: GridSpec,
    pub seed: Option<u64>,
    pub fields: usize,
    pub levels: Vec<f64>,
    #[serde(default = "default_cz_tol")]
    pub tolerance: f64,
}

fn default_cz_tol() -> f64 {
    1e-12
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorConfig {
    pub grid: GridSpec,
    pub schedule: Vec<usize>,
    pub sequence: SequenceSpecConfig,
    pub symbol: SymbolSpec,
    pub multiplier_field: FieldSpec,
    pub q: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_decay")]
    pub decay_ratio: f64,
}

fn default_decay() -> f64 {
    0.3
}

/// Parsed command word plus the raw body for the per-command structs.
pub struct RawConfig {
    pub command: String,
    pub body: serde_json::Value,
    pub hash: String,
}

/// FNV-1a over the raw config bytes; recorded in every report.
pub fn config_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("fnv1a:{:016x}", h)
}

pub fn parse_config(bytes: &[u8]) -> Result<RawConfig, String> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| format!("config is not valid JSON: {}", e))?;
    let command = value
        .get("command")
        .and_then(|c| c.as_str())
        .ok_or_else(|| "missing field `command`".to_string())?
        .to_string();
    let mut body = value.clone();
    if let Some(map) = body.as_object_mut() {
        map.remove("command");
    }
    Ok(RawConfig {
        command,
        body,
        hash: config_hash(bytes),
    })
}

/// Deserialize the body into the command struct, reporting serde's message
/// (which names the failing field) on error.
pub fn body_as<T: serde::de::DeserializeOwned>(raw: &RawConfig) -> Result<T, String> {
    serde_json::from_value(raw.body.clone()).map_err(|e| format!("invalid config: {}", e))
}
