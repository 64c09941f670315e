//! JSON reports for the `optimal` and `estimate` commands.

use serde_json::{json, Value};

use optstrat::data::Dataset;
use optstrat::estimate::{EstimatedModel, Reduction};
use optstrat::figures::{round_sig6, Precision};
use optstrat::max_er::{optimal_er_notional, strategy_stats_er, Knowledge};
use optstrat::max_ir::ir_solution;
use optstrat::{Error, QuadratureSpec, SecurityModel, StandardModel, StrategyStats};

use crate::Objective;

/// Rounds every floating-point number in place (integers are left alone).
pub fn round_numbers(v: &mut Value, precision: Precision) {
    if precision == Precision::Full {
        return;
    }
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig6(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_numbers(x, precision)),
        Value::Object(map) => map.values_mut().for_each(|x| round_numbers(x, precision)),
        _ => {}
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn buy_and_hold(model: &StandardModel) -> Value {
    let stats = StrategyStats::from_mean_variance(model.mu().abs(), model.sigma().powi(2));
    json!({ "notional": { "kind": "buy_hold", "side": if model.mu() < 0.0 { "short" } else { "long" } }, "stats": stats })
}

fn standardized(model: &SecurityModel) -> Value {
    let map = model.standardize();
    json!({
        "mu": map.model.mu(),
        "sigma": map.model.sigma(),
        "rho": map.model.rho(),
        "omega": map.model.omega(),
        "indicator_flipped": map.flipped,
    })
}

pub fn optimal(model: &SecurityModel, objective: Objective) -> Result<Value, Error> {
    let map = model.standardize();
    let std = map.model;
    let mut out = json!({
        "objective": match objective { Objective::Er => "max_expected_return", Objective::Ir => "max_information_ratio" },
        "model": model,
        "standardized": standardized(model),
        "buy_and_hold": buy_and_hold(&std),
    });
    let obj = out.as_object_mut().expect("object literal");
    match objective {
        Objective::Er => {
            let opt = optimal_er_notional(&std);
            let stats = strategy_stats_er(&std);
            obj.insert("knowledge".into(), to_value(&opt.knowledge));
            if let Ok(m) = std.m_ratio() {
                obj.insert("m_ratio".into(), json!(m.value()));
                obj.insert("threshold_raw_indicator".into(), json!(map.to_raw(m.threshold())));
            }
            obj.insert("notional".into(), to_value(&opt.notional));
            obj.insert("stats".into(), to_value(&stats));
            match opt.knowledge {
                Knowledge::Informative => {}
                Knowledge::None => {
                    obj.insert(
                        "note".into(),
                        json!("no knowledge: the indicator is uncorrelated with the return, so buy and hold in the direction of the drift"),
                    );
                }
                Knowledge::Degenerate => {
                    obj.insert(
                        "note".into(),
                        json!("no knowledge and no drift: every notional has zero expected return"),
                    );
                }
            }
        }
        Objective::Ir => {
            if std.rho() == 0.0 {
                let note = if std.mu() == 0.0 {
                    "no knowledge and no drift: no position has a positive information ratio"
                } else {
                    "no knowledge: buy and hold in the direction of the drift"
                };
                obj.insert(
                    "knowledge".into(),
                    json!(if std.mu() == 0.0 { "degenerate" } else { "none" }),
                );
                obj.insert(
                    "notional".into(),
                    to_value(&optstrat::max_ir::optimal_ir_notional(&std)?),
                );
                obj.insert("note".into(), json!(note));
            } else {
                let sol = ir_solution(&std, &QuadratureSpec::default())?;
                obj.insert("knowledge".into(), json!("informative"));
                obj.insert("m_ratio".into(), json!(std.m_ratio()?.value()));
                obj.insert("notional".into(), to_value(&sol.notional));
                obj.insert(
                    "extremes_raw_indicator".into(),
                    json!({ "h_minus": map.to_raw(sol.h_minus), "h_plus": map.to_raw(sol.h_plus) }),
                );
                obj.insert("solution".into(), to_value(&sol));
            }
        }
    }
    Ok(out)
}

pub fn estimate(
    kind: &str,
    data: &Dataset,
    est: &EstimatedModel,
    reduction: Option<&Reduction>,
    objective: Objective,
) -> Result<Value, Error> {
    let map = est.model.standardize();
    let mut out = json!({
        "input": kind,
        "n": data.len(),
        "estimate": est,
        "optimal_er": {
            "notional": { "kind": "sign_threshold", "threshold": est.threshold_hat },
            "threshold_raw_indicator": map.to_raw(est.threshold_hat),
        },
    });
    let obj = out.as_object_mut().expect("object literal");
    if let Some(red) = reduction {
        obj.insert("reduction".into(), to_value(red));
    }
    if objective == Objective::Ir {
        if est.near_degenerate {
            obj.insert(
                "optimal_ir".into(),
                json!({ "error": Error::DegenerateCorrelation.to_string() }),
            );
        } else if map.model.rho() == 0.0 {
            obj.insert("optimal_ir".into(), json!({ "error": Error::NoKnowledge.to_string() }));
        } else {
            let sol = ir_solution(&map.model, &QuadratureSpec::default())?;
            obj.insert(
                "optimal_ir".into(),
                json!({
                    "solution": sol,
                    "extremes_raw_indicator": { "h_minus": map.to_raw(sol.h_minus), "h_plus": map.to_raw(sol.h_plus) },
                }),
            );
        }
    }
    Ok(out)
}
