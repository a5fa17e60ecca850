//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain strings and returns a JSON string;
//! the logic lives in ordinary Rust functions so it is testable natively.

use atomicity_core::lincheck::is_linearizable;
use atomicity_core::{
    atomic_outcomes, count_linearizations, parse_outcome, shuffle, EnumOptions, EnumParams, Family,
    Harness, HarnessSpace, History, SequentialSpec,
};
use serde_json::{json, Value as Json};
use wasm_bindgen::prelude::*;

/// Upper bound on harnesses returned to the page.
pub const MAX_LISTED: usize = 500;

fn spec_for(family: &str) -> Result<SequentialSpec, String> {
    family
        .parse::<Family>()
        .map(SequentialSpec::new)
        .map_err(|e| e.to_string())
}

fn harness_for(text: &str, spec: &SequentialSpec) -> Result<Harness, String> {
    Harness::parse_for(text, spec).map_err(|e| e.to_string())
}

/// Atomic outcomes and linearization count of a harness.
pub fn outcomes_json(harness: &str, family: &str) -> Result<Json, String> {
    let spec = spec_for(family)?;
    let h = harness_for(harness, &spec)?;
    let set = atomic_outcomes(&h, &spec).map_err(|e| e.to_string())?;
    Ok(json!({
        "harness": h.to_string(),
        "invocations": h.invocations().map(ToString::to_string).collect::<Vec<_>>(),
        "linearizations": count_linearizations(&h).to_string(),
        "outcomes": set.outcomes().iter().map(ToString::to_string).collect::<Vec<_>>(),
    }))
}

/// One enumeration round, shuffled with `seed`, truncated to `limit`.
pub fn enumerate_json(
    family: &str,
    core: &str,
    method: &str,
    invocations: usize,
    values: usize,
    sequences: usize,
    seed: u64,
    limit: usize,
) -> Result<Json, String> {
    let spec = spec_for(family)?;
    let core: Vec<&str> = core
        .split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .collect();
    let core = if core.is_empty() {
        spec.core_methods()
    } else {
        core
    };
    let params = EnumParams::new(invocations, values, sequences);
    let space = HarnessSpace::new(&spec, &core, method.trim(), params, EnumOptions::default())
        .map_err(|e| e.to_string())?;
    let mut codes = space.codes();
    shuffle(&mut codes, seed);
    let listed: Vec<String> = codes
        .iter()
        .take(limit.min(MAX_LISTED))
        .map(|c| space.decode(c).to_string())
        .collect();
    Ok(json!({ "total": codes.len(), "harnesses": listed }))
}

/// Linearizability of a history given as harness text, outcome tuple and
/// extra happens-before pairs over invocation indices (`0<1, 2<3`).
pub fn lincheck_json(harness: &str, outcome: &str, hb: &str, family: &str) -> Result<Json, String> {
    let spec = spec_for(family)?;
    let h = harness_for(harness, &spec)?;
    let o = parse_outcome(outcome).map_err(|e| e.to_string())?;
    let mut pairs = h.invocation_order().pairs();
    for p in hb.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, b) = p
            .split_once('<')
            .ok_or_else(|| format!("expected `i < j`, got `{p}`"))?;
        let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
        let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
        pairs.push((a, b));
    }
    let set = atomic_outcomes(&h, &spec).map_err(|e| e.to_string())?;
    let atomic = set.contains(&o);
    let hist = History::new(h, o, &pairs).map_err(|e| e.to_string())?;
    let lin = is_linearizable(&hist, &spec).map_err(|e| e.to_string())?;
    Ok(json!({ "linearizable": lin, "atomic_outcome": atomic }))
}

fn to_js(r: Result<Json, String>) -> Result<String, JsError> {
    r.map(|j| j.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn outcomes(harness: &str, family: &str) -> Result<String, JsError> {
    to_js(outcomes_json(harness, family))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn enumerate(
    family: &str,
    core: &str,
    method: &str,
    invocations: usize,
    values: usize,
    sequences: usize,
    seed: u64,
    limit: usize,
) -> Result<String, JsError> {
    to_js(enumerate_json(
        family,
        core,
        method,
        invocations,
        values,
        sequences,
        seed,
        limit,
    ))
}

#[wasm_bindgen]
pub fn lincheck(harness: &str, outcome: &str, hb: &str, family: &str) -> Result<String, JsError> {
    to_js(lincheck_json(harness, outcome, hb, family))
}
