//! Browser bindings. Everything crosses the boundary as CSV text in the
//! same formats the CLI writes, so the page only needs a small parser.

use paratwin::config::parse_grid;
use paratwin::dynsys::{oracle_bifurcation_scan, Trajectory};
use paratwin::twin::{assemble_training_data, predict_at_parameter, scan_bifurcation, train_twin, Preset, TrainedTwin};
use wasm_bindgen::prelude::*;

fn js(e: paratwin::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn preset(system: &str) -> Result<Preset, JsError> {
    match system {
        "ikeda" => Ok(Preset::ikeda()),
        "food-chain" => Ok(Preset::food_chain()),
        other => Err(JsError::new(&format!("unknown system `{other}`"))),
    }
}

/// Direct-simulation bifurcation diagram over `lo:hi:n`, as diagram CSV.
#[wasm_bindgen]
pub fn oracle_diagram(system: &str, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
    let p = preset(system)?;
    let grid = parse_grid(&format!("{lo}:{hi}:{n}")).map_err(js)?;
    Ok(oracle_bifurcation_scan(&p.plan.system, &grid, &p.scan).map_err(js)?.to_csv())
}

#[wasm_bindgen]
pub struct Twin {
    twin: TrainedTwin,
    warm: Trajectory,
    preset: Preset,
}

#[wasm_bindgen]
impl Twin {
    /// Trains on the system's tuned preset. `size` and `samples` shrink it
    /// to something a browser tab finishes quickly.
    #[wasm_bindgen(constructor)]
    pub fn new(system: &str, seed: u32, size: usize, samples: usize) -> Result<Twin, JsError> {
        let mut preset = preset(system)?.with_seed(seed.into());
        preset.reservoir.size = size;
        preset.plan.samples_per_param = samples;
        let data = assemble_training_data(&preset.plan).map_err(js)?;
        let twin = train_twin(&data, &preset.reservoir).map_err(js)?;
        let warm = data.latest().expect("plan has training values");
        let warm = warm.skip(warm.len().saturating_sub(preset.reservoir.warmup));
        Ok(Twin { twin, warm, preset })
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.twin.residual
    }

    #[wasm_bindgen(getter)]
    pub fn present(&self) -> f64 {
        self.warm.param
    }

    /// Closed-loop rollout at `p`; trajectory CSV (`t,x1,...,p`).
    pub fn predict(&self, p: f64, horizon: usize) -> Result<Prediction, JsError> {
        let f = predict_at_parameter(&self.twin, p, &self.warm, horizon).map_err(js)?;
        Ok(Prediction { status: f.status.to_string(), csv: f.trajectory.to_csv() })
    }

    /// The twin's own bifurcation diagram over `lo:hi:n`.
    pub fn scan(&self, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
        let grid = parse_grid(&format!("{lo}:{hi}:{n}")).map_err(js)?;
        Ok(scan_bifurcation(&self.twin, &grid, &self.warm, &self.preset.scan).map_err(js)?.to_csv())
    }
}

#[wasm_bindgen]
pub struct Prediction {
    status: String,
    csv: String,
}

#[wasm_bindgen]
impl Prediction {
    #[wasm_bindgen(getter)]
    pub fn status(&self) -> String {
        self.status.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn csv(&self) -> String {
        self.csv.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ikeda_twin_predicts_and_scans() {
        let twin = Twin::new("ikeda", 1, 100, 600).unwrap();
        let p = twin.predict(twin.present(), 30).unwrap();
        assert_eq!(p.csv.lines().count(), 31);
        assert_eq!(twin.scan(0.9, 0.92, 2).unwrap().lines().count(), 1 + 2 * 2);
        assert!(oracle_diagram("ikeda", 0.8, 0.9, 3).unwrap().starts_with("source,"));
    }
}
