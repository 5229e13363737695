//! Run configuration: a TOML file with `[system]`, `[reservoir]`, `[twin]`
//! and `[io]` sections. Every key is optional and unknown keys are rejected.
//! Defaults that depend on the system (sampling interval, leak rate,
//! training values, grids) are filled in by [`RunConfig::resolve`], whose
//! output is what gets echoed next to a run's results.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynsys::{FoodChainParams, IkedaParams, Model, ScanSettings, SystemSpec};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirConfig;
use crate::twin::TrainingPlan;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub reservoir: ReservoirSection,
    pub twin: TwinSection,
    pub io: IoSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    /// `ikeda` or `food-chain`.
    pub name: Option<String>,
    /// Bifurcation parameter for `simulate`.
    pub param: Option<f64>,
    pub sampling_interval: Option<f64>,
    pub step: Option<f64>,
    pub initial: Option<Vec<f64>>,
    /// Recorded span for `simulate`, in time units.
    pub duration: Option<f64>,
    /// Discarded span before recording, for `simulate`.
    pub transient: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub nu: Option<f64>,
    pub x_c: Option<f64>,
    pub y_c: Option<f64>,
    pub x_p: Option<f64>,
    pub y_p: Option<f64>,
    pub r0: Option<f64>,
    pub c0: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSection {
    pub size: Option<usize>,
    pub spectral_radius: Option<f64>,
    pub density: Option<f64>,
    pub input_scaling: Option<f64>,
    pub param_scaling: Option<f64>,
    pub bias_scaling: Option<f64>,
    pub leak_rate: Option<f64>,
    pub ridge: Option<f64>,
    pub warmup: Option<usize>,
    pub input_noise: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinSection {
    pub train_params: Option<Vec<f64>>,
    pub samples_per_param: Option<usize>,
    /// Time units discarded before each training trajectory is recorded.
    pub transient: Option<f64>,
    pub present_param: Option<f64>,
    pub declared_critical: Option<f64>,
    /// Closed-loop steps for `predict`.
    pub horizon: Option<usize>,
    /// Scan grid as `lo:hi:n`.
    pub grid: Option<String>,
    pub scan_transient: Option<f64>,
    pub scan_window: Option<f64>,
    /// Bisection steps used by `detect` on a twin scan.
    pub bisection: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSection {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

const IKEDA_KEYS: [&str; 3] = ["gamma", "kappa", "nu"];
const FOOD_CHAIN_KEYS: [&str; 6] = ["x_c", "y_c", "x_p", "y_p", "r0", "c0"];

impl RunConfig {
    /// Parses TOML text, then applies `section.key=value` overrides (values in
    /// TOML syntax; bare words are taken as strings).
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        doc.try_into().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is plain data")
    }

    pub fn system_name(&self) -> Result<&str> {
        self.system
            .name
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("missing system name ([system] name = \"ikeda\" | \"food-chain\")".into()))
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let s = &self.system;
        let present = |keys: &[&'static str]| -> Vec<&'static str> {
            let vals = [s.gamma, s.kappa, s.nu, s.x_c, s.y_c, s.x_p, s.y_p, s.r0, s.c0];
            let names = IKEDA_KEYS.iter().chain(FOOD_CHAIN_KEYS.iter());
            names.zip(vals).filter(|(n, v)| keys.contains(n) && v.is_some()).map(|(n, _)| *n).collect()
        };
        let mut spec = match self.system_name()? {
            "ikeda" => {
                if let Some(k) = present(&FOOD_CHAIN_KEYS).first() {
                    return Err(Error::InvalidConfig(format!("[system] {k} does not apply to ikeda")));
                }
                let d = IkedaParams::default();
                SystemSpec::ikeda(IkedaParams {
                    mu: s.param.unwrap_or(d.mu),
                    gamma: s.gamma.unwrap_or(d.gamma),
                    kappa: s.kappa.unwrap_or(d.kappa),
                    nu: s.nu.unwrap_or(d.nu),
                })
            }
            "food-chain" => {
                if let Some(k) = present(&IKEDA_KEYS).first() {
                    return Err(Error::InvalidConfig(format!("[system] {k} does not apply to food-chain")));
                }
                let d = FoodChainParams::default();
                let mut spec = SystemSpec::food_chain(FoodChainParams {
                    k: s.param.unwrap_or(d.k),
                    x_c: s.x_c.unwrap_or(d.x_c),
                    y_c: s.y_c.unwrap_or(d.y_c),
                    x_p: s.x_p.unwrap_or(d.x_p),
                    y_p: s.y_p.unwrap_or(d.y_p),
                    r0: s.r0.unwrap_or(d.r0),
                    c0: s.c0.unwrap_or(d.c0),
                });
                spec.sampling_interval = FOOD_CHAIN_SAMPLING_INTERVAL;
                spec
            }
            other => return Err(Error::InvalidConfig(format!("unknown system `{other}` (expected ikeda or food-chain)"))),
        };
        if let Some(v) = s.sampling_interval {
            spec.sampling_interval = v;
        }
        if let Some(v) = s.step {
            spec.step = v;
        }
        spec.validate()?;
        if let Some(init) = &s.initial {
            if init.len() != spec.dimension() {
                return Err(Error::InvalidConfig(format!(
                    "[system] initial has {} values, the system has {}",
                    init.len(),
                    spec.dimension()
                )));
            }
        }
        Ok(spec)
    }

    pub fn initial(&self, spec: &SystemSpec) -> Vec<f64> {
        self.system.initial.clone().unwrap_or_else(|| spec.model.default_initial())
    }

    pub fn seed(&self) -> Result<u64> {
        self.io.seed.ok_or_else(|| Error::InvalidConfig("a seed is required ([io] seed or --seed)".into()))
    }

    /// Reservoir hyperparameters with system-dependent defaults: leak rate
    /// 1.0 for maps and 0.3 for sampled flows.
    pub fn reservoir_config(&self, spec: &SystemSpec, seed: u64) -> Result<ReservoirConfig> {
        let r = &self.reservoir;
        let d = ReservoirConfig::default();
        let cfg = ReservoirConfig {
            size: r.size.unwrap_or(d.size),
            input_dim: spec.dimension(),
            output_dim: spec.dimension(),
            spectral_radius: r.spectral_radius.unwrap_or(d.spectral_radius),
            density: r.density.unwrap_or(d.density),
            input_scaling: r.input_scaling.unwrap_or(d.input_scaling),
            param_scaling: r.param_scaling.unwrap_or(d.param_scaling),
            bias_scaling: r.bias_scaling.unwrap_or(d.bias_scaling),
            leak_rate: r.leak_rate.unwrap_or(match spec.model {
                Model::Ikeda(_) => 1.0,
                Model::FoodChain(_) => 0.3,
            }),
            ridge: r.ridge.unwrap_or(d.ridge),
            warmup: r.warmup.unwrap_or(d.warmup),
            input_noise: r.input_noise.unwrap_or(d.input_noise),
            seed,
        };
        cfg.validate_for_twin()?;
        Ok(cfg)
    }

    pub fn training_plan(&self, spec: &SystemSpec) -> Result<TrainingPlan> {
        let t = &self.twin;
        let params = t.train_params.clone().unwrap_or_else(|| default_train_params(spec).to_vec());
        let mut plan = TrainingPlan::new(*spec, params);
        if let Some(v) = t.samples_per_param {
            plan.samples_per_param = v;
        }
        if let Some(v) = t.transient {
            plan.transient = v;
        }
        if let Some(v) = t.present_param {
            plan.present_param = v;
        }
        plan.declared_critical = t.declared_critical;
        plan.initial = self.system.initial.clone();
        plan.oracle = self.scan_settings();
        plan.validate()?;
        Ok(plan)
    }

    pub fn scan_settings(&self) -> ScanSettings {
        let d = ScanSettings::default();
        ScanSettings {
            transient: self.twin.scan_transient.unwrap_or(d.transient),
            window: self.twin.scan_window.unwrap_or(d.window),
            initial: self.system.initial.clone(),
            criterion: None,
        }
    }

    pub fn grid(&self, spec: &SystemSpec) -> Result<Vec<f64>> {
        match &self.twin.grid {
            Some(g) => parse_grid(g),
            None => parse_grid(default_grid(spec)),
        }
    }

    /// Every option filled in, as it will be used. Requires a system name.
    pub fn resolve(&self) -> Result<RunConfig> {
        let spec = self.system_spec()?;
        let seed = self.io.seed.unwrap_or(0);
        let res = self.reservoir_config(&spec, seed)?;
        let plan = self.training_plan(&spec)?;
        let scan = self.scan_settings();
        let (gamma, kappa, nu, x_c, y_c, x_p, y_p, r0, c0, param) = match spec.model {
            Model::Ikeda(p) => (Some(p.gamma), Some(p.kappa), Some(p.nu), None, None, None, None, None, None, p.mu),
            Model::FoodChain(p) => (None, None, None, Some(p.x_c), Some(p.y_c), Some(p.x_p), Some(p.y_p), Some(p.r0), Some(p.c0), p.k),
        };
        Ok(RunConfig {
            system: SystemSection {
                name: Some(self.system_name()?.to_string()),
                param: Some(param),
                sampling_interval: Some(spec.sampling_interval),
                step: Some(spec.step),
                initial: Some(self.initial(&spec)),
                duration: Some(self.system.duration.unwrap_or(DEFAULT_DURATION)),
                transient: Some(self.system.transient.unwrap_or(0.0)),
                gamma,
                kappa,
                nu,
                x_c,
                y_c,
                x_p,
                y_p,
                r0,
                c0,
            },
            reservoir: ReservoirSection {
                size: Some(res.size),
                spectral_radius: Some(res.spectral_radius),
                density: Some(res.density),
                input_scaling: Some(res.input_scaling),
                param_scaling: Some(res.param_scaling),
                bias_scaling: Some(res.bias_scaling),
                leak_rate: Some(res.leak_rate),
                ridge: Some(res.ridge),
                warmup: Some(res.warmup),
                input_noise: Some(res.input_noise),
            },
            twin: TwinSection {
                train_params: Some(plan.train_params),
                samples_per_param: Some(plan.samples_per_param),
                transient: Some(plan.transient),
                present_param: Some(plan.present_param),
                declared_critical: plan.declared_critical,
                horizon: Some(self.horizon()),
                grid: Some(self.twin.grid.clone().unwrap_or_else(|| default_grid(&spec).to_string())),
                scan_transient: Some(scan.transient),
                scan_window: Some(scan.window),
                bisection: Some(self.twin.bisection.unwrap_or(0)),
            },
            io: self.io.clone(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.twin.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    pub fn duration(&self) -> f64 {
        self.system.duration.unwrap_or(DEFAULT_DURATION)
    }
}

/// Samples of the food chain are taken every 5 time units by default; the
/// predator oscillates with a period of roughly 40 time units.
pub const FOOD_CHAIN_SAMPLING_INTERVAL: f64 = 5.0;
pub const DEFAULT_HORIZON: usize = 2000;
pub const DEFAULT_DURATION: f64 = 1000.0;

pub fn default_train_params(spec: &SystemSpec) -> &'static [f64] {
    match spec.model {
        Model::Ikeda(_) => &[0.88, 0.9, 0.92],
        Model::FoodChain(_) => &[0.97, 0.98, 0.99],
    }
}

pub fn default_grid(spec: &SystemSpec) -> &'static str {
    match spec.model {
        Model::Ikeda(_) => "0.6:1.05:46",
        Model::FoodChain(_) => "0.975:1.025:20",
    }
}

/// Parses `lo:hi:n` into `n` evenly spaced values from `lo` to `hi`
/// inclusive; `n = 1` gives the single point `lo`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("malformed grid `{s}` (expected lo:hi:n)"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && !(lo < hi)) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let bad = |m: &str| Error::InvalidConfig(format!("override `{assignment}`: {m}"));
    let (key, raw) = assignment.split_once('=').ok_or_else(|| bad("expected section.key=value"))?;
    let (section, key) = key.trim().split_once('.').ok_or_else(|| bad("expected section.key=value"))?;
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| bad("section is not a table"))?;
    table.insert(key.to_string(), value);
    Ok(())
}
