//! Browser bindings for the allocation engine. Each export is a thin
//! wrapper over a plain function so the logic can be tested natively.

use serde_json::json;
use synalloc::ensemble::score_centroid;
use synalloc::{
    allocate, summary_table, EngineConfig, EnsembleParams, InitialData, RunConfig, Scenario, Synopsis, SyntheticInit,
};
use wasm_bindgen::prelude::*;

/// Per-metric dissimilarities, weights and pooled similarity of `x` against `s`, as JSON.
pub fn score_pair(x: &[f64], s: &[f64], theta: f64, k: f64) -> Result<String, String> {
    let params = EnsembleParams::new(theta, k).map_err(|e| e.to_string())?;
    let score = score_centroid(x, s, &params).map_err(|e| e.to_string())?;
    let metrics: Vec<_> = score
        .per_metric
        .iter()
        .zip(score.weights.as_slice())
        .map(|(m, w)| json!({"metric": m.metric.name(), "dissimilarity": m.dissimilarity, "weight": w}))
        .collect();
    Ok(json!({
        "metrics": metrics,
        "pooled_dissimilarity": score.pooled_dissimilarity,
        "similarity": score.similarity,
    })
    .to_string())
}

/// Runs one synthetic scenario and returns `{"report": .., "summary": ..}`.
pub fn simulate(mu: f64, sigma: f64, partitions: usize, vectors: usize, seed: u64) -> Result<String, String> {
    let scenario = Scenario::PRESETS
        .into_iter()
        .find(|p| p.mu() == mu && p.sigma() == sigma)
        .unwrap_or(Scenario::Custom { mu, sigma });
    let config = RunConfig {
        engine: EngineConfig {
            partitions,
            ..EngineConfig::default()
        },
        scenario,
        vectors,
        initial: InitialData::Synthetic(SyntheticInit::default()),
        seed,
    };
    let report = synalloc::run_scenario(&config).map_err(|e| e.to_string())?;
    let summary = summary_table(std::slice::from_ref(&report));
    serde_json::to_string(&json!({"report": report, "summary": summary[0]})).map_err(|e| e.to_string())
}

/// Partition chosen for every cell of a `width` x `height` grid over
/// `[0, x_max] x [0, y_max]` (row 0 at the top), given 2-D partition means
/// packed as `[x0, y0, x1, y1, ..]`.
pub fn allocation_map(
    means: &[f64],
    width: usize,
    height: usize,
    x_max: f64,
    y_max: f64,
    theta: f64,
    k: f64,
) -> Result<Vec<u8>, String> {
    if means.is_empty() || !means.len().is_multiple_of(2) || means.len() / 2 > 255 {
        return Err("means must hold 1 to 255 (x, y) pairs".into());
    }
    let params = EnsembleParams::new(theta, k).map_err(|e| e.to_string())?;
    let synopses = means
        .chunks(2)
        .enumerate()
        .map(|(i, m)| Synopsis::from_mean(i, m))
        .collect::<synalloc::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mut grid = Vec::with_capacity(width * height);
    for row in 0..height {
        let y = y_max * (height - 1 - row) as f64 / (height.max(2) - 1) as f64;
        for col in 0..width {
            let x = x_max * col as f64 / (width.max(2) - 1) as f64;
            let (chosen, _) = allocate(&[x, y], &synopses, &params).map_err(|e| e.to_string())?;
            grid.push(chosen as u8);
        }
    }
    Ok(grid)
}

#[wasm_bindgen(js_name = scorePair)]
pub fn score_pair_js(x: &[f64], s: &[f64], theta: f64, k: f64) -> Result<String, JsError> {
    score_pair(x, s, theta, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(mu: f64, sigma: f64, partitions: usize, vectors: usize, seed: u32) -> Result<String, JsError> {
    simulate(mu, sigma, partitions, vectors, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = allocationMap)]
pub fn allocation_map_js(
    means: &[f64],
    width: usize,
    height: usize,
    x_max: f64,
    y_max: f64,
    theta: f64,
    k: f64,
) -> Result<Vec<u8>, JsError> {
    allocation_map(means, width, height, x_max, y_max, theta, k).map_err(|e| JsError::new(&e))
}
