//! Browser bindings. Every export takes plain numbers and returns a JSON string.

use serde::Serialize;
use sparse_ldp::bounds::{critical_values, lower_bound_local, upper_bound_global, upper_bound_local, BoundInput, Regime};
use sparse_ldp::risk_engine::{bound_summary, estimate_risk_with, Execution};
use sparse_ldp::{
    compute_kd, ExperimentConfig, MechanismKind, NoiseModel, NoiseSpec, PolicySpec, Problem, SelectorKind,
    SignConvention, Variant,
};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct RiskPoint {
    pub a: f64,
    pub mean_loss: f64,
    pub std_error: f64,
    pub lb_local: Option<f64>,
    pub ub_matched: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RiskCurve {
    pub a_star_local: f64,
    pub a_star_global: f64,
    pub points: Vec<RiskPoint>,
}

fn mechanism(global: bool) -> MechanismKind {
    if global {
        MechanismKind::Global
    } else {
        MechanismKind::Local
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (l + (h - l) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Monte Carlo risk over a log-spaced grid of signal strengths, with the
/// threshold policy switching at `a = 2σ`.
#[allow(clippy::too_many_arguments)]
pub fn risk_curve(
    global: bool,
    d: usize,
    s: usize,
    n: usize,
    alpha: f64,
    a_min: f64,
    a_max: f64,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskCurve, String> {
    let cfg = |a: f64| ExperimentConfig {
        d,
        s,
        n,
        a,
        sigma: 1.0,
        alpha,
        noise: NoiseSpec::Gaussian,
        mechanism: mechanism(global),
        selector: SelectorKind::Plus,
        policy: if a >= 2.0 { PolicySpec::LargeA } else { PolicySpec::SmallA },
        trials,
        seed,
        variant: Variant::Plus,
        sign_pattern: None,
        sign_convention: SignConvention::Symmetric,
    };
    let cv = critical_values(&BoundInput::new(cfg(a_min).problem(), &NoiseModel::gaussian()))
        .map_err(|e| e.to_string())?;
    let points = log_grid(a_min, a_max, points)
        .into_iter()
        .map(|a| {
            let c = cfg(a);
            let est = estimate_risk_with(&c, Execution::Serial).map_err(|e| e.to_string())?;
            let b = bound_summary(&c).map_err(|e| e.to_string())?;
            Ok(RiskPoint {
                a,
                mean_loss: est.mean_normalized_loss,
                std_error: est.std_error,
                lb_local: b.lb_local,
                ub_matched: b.ub_matched,
            })
        })
        .collect::<Result<_, String>>()?;
    Ok(RiskCurve {
        a_star_local: cv.a_star_local,
        a_star_global: cv.a_star_global,
        points,
    })
}

#[derive(Debug, Serialize)]
pub struct BoundPoint {
    pub n: f64,
    pub lb_local: f64,
    pub ub_local: f64,
    pub ub_global: Option<f64>,
}

/// Bounds against a log-spaced sample size grid, in the large-signal regime.
pub fn bound_curves(d: usize, s: usize, alpha: f64, a: f64, n_min: f64, n_max: f64, points: usize) -> Result<Vec<BoundPoint>, String> {
    log_grid(n_min, n_max, points)
        .into_iter()
        .map(|n| {
            let problem = Problem {
                d,
                s,
                n: n.round().max(1.0) as usize,
                a,
                sigma: 1.0,
                alpha,
            };
            problem.validate().map_err(|e| e.to_string())?;
            let input = BoundInput::new(problem, &NoiseModel::gaussian());
            Ok(BoundPoint {
                n: problem.n as f64,
                lb_local: lower_bound_local(&input).map_err(|e| e.to_string())?,
                ub_local: upper_bound_local(&input, Regime::LargeA, Variant::Plus).value,
                ub_global: upper_bound_global(&input, Regime::LargeA, Variant::Plus).ok().map(|b| b.value),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Density {
    pub name: String,
    pub c_lower: f64,
    pub c_upper: Option<f64>,
    pub x: Vec<f64>,
    pub pdf: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub cap: Vec<f64>,
}

/// Tilted density next to the standard Gaussian and its own cap, on `[-4, 4]`.
pub fn noise_density(c_raw: f64, lambda: f64, points: usize) -> Result<Density, String> {
    let m = NoiseModel::tilted(c_raw, lambda).map_err(|e| e.to_string())?;
    let g = NoiseModel::gaussian();
    let points = points.max(2);
    let x: Vec<f64> = (0..points).map(|k| -4.0 + 8.0 * k as f64 / (points - 1) as f64).collect();
    Ok(Density {
        name: m.name().to_owned(),
        c_lower: m.c_lower(),
        c_upper: m.c_upper(),
        pdf: x.iter().map(|&t| m.pdf(t)).collect(),
        gaussian: x.iter().map(|&t| g.pdf(t)).collect(),
        cap: x.iter().map(|&t| m.density_cap(t)).collect(),
        x,
    })
}

#[derive(Debug, Serialize)]
pub struct KdPoint {
    pub d: usize,
    pub k_d: f64,
    pub reference: f64,
}

pub fn kd_curve(d_max: usize) -> Vec<KdPoint> {
    (1..=d_max)
        .filter_map(|d| {
            compute_kd(d).ok().map(|k| KdPoint {
                d,
                k_d: k,
                reference: (std::f64::consts::FRAC_PI_2 * d as f64).sqrt(),
            })
        })
        .collect()
}

fn json<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = riskCurve)]
#[allow(clippy::too_many_arguments)]
pub fn risk_curve_js(
    global: bool,
    d: usize,
    s: usize,
    n: usize,
    alpha: f64,
    a_min: f64,
    a_max: f64,
    points: usize,
    trials: usize,
    seed: u32,
) -> Result<String, JsValue> {
    json(risk_curve(global, d, s, n, alpha, a_min, a_max, points, trials, u64::from(seed)))
}

#[wasm_bindgen(js_name = boundCurves)]
pub fn bound_curves_js(d: usize, s: usize, alpha: f64, a: f64, n_min: f64, n_max: f64, points: usize) -> Result<String, JsValue> {
    json(bound_curves(d, s, alpha, a, n_min, n_max, points))
}

#[wasm_bindgen(js_name = noiseDensity)]
pub fn noise_density_js(c_raw: f64, lambda: f64, points: usize) -> Result<String, JsValue> {
    json(noise_density(c_raw, lambda, points))
}

#[wasm_bindgen(js_name = kdCurve)]
pub fn kd_curve_js(d_max: usize) -> Result<String, JsValue> {
    json(Ok(kd_curve(d_max)))
}
