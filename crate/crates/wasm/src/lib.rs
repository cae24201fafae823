//! WebAssembly entry points for the browser demo. Every call takes and
//! returns JSON text, so the page needs no generated type glue. The same
//! functions are available natively through [`api`].

use wasm_bindgen::prelude::*;

pub mod api;

fn js(result: Result<String, String>) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e))
}

/// True and estimated conditional ROC curves for a simulated scenario study.
#[wasm_bindgen]
pub fn scenario_curves(request: &str) -> Result<String, JsError> {
    js(api::scenario_curves(request))
}

/// Runs the projection test on a simulated study; both functionals.
#[wasm_bindgen]
pub fn run_test(request: &str) -> Result<String, JsError> {
    js(api::run_test(request))
}

/// Random projection directions as drawn by the test for a given seed.
#[wasm_bindgen]
pub fn sample_directions(request: &str) -> Result<String, JsError> {
    js(api::sample_directions(request))
}
