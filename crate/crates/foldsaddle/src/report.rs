//! JSON documents printed by the subcommands.

use foldsaddle_core::bifurcation::{
    boundaries, classify_case, regime, topological_class, Boundaries, FoldStatus, CLASSIFY_TOL,
};
use foldsaddle_core::sigma::{pseudo_equilibria, Region, Stability};
use foldsaddle_core::structures::{find_canard_cycles, find_sigma_graph, CycleKind, CycleStability};
use foldsaddle_core::{FilippovSystem, TauKind};
use serde_json::{json, Map, Value};

pub fn classify(tau: TauKind, lambda: f64, alpha: f64, beta: f64, tol: f64) -> foldsaddle_core::Result<Value> {
    let label = classify_case(tau, lambda, alpha, beta, tol)?;
    Ok(json!({
        "tau": tau.name(),
        "lambda": lambda,
        "alpha": alpha,
        "beta": beta,
        "regime": regime(tau, alpha, beta, tol).name(),
        "case": label.to_string(),
        "class": topological_class(label).representative.to_string(),
    }))
}

fn fold_json(b: &Boundaries) -> Value {
    let Some(fb) = b.fold else { return Value::Null };
    let mut m = Map::new();
    m.insert("name".into(), fb.fold_name.into());
    m.insert("bracket".into(), json!([fb.lo, fb.hi]));
    m.insert("bracket_names".into(), json!([fb.lo_name, fb.hi_name]));
    match b.fold_status {
        FoldStatus::Found(f) => {
            m.insert("status".into(), "found".into());
            m.insert("lambda".into(), f.lambda.into());
            m.insert("abscissa".into(), f.abscissa.into());
            m.insert("derivative".into(), f.derivative.into());
        }
        FoldStatus::Absent { .. } => {
            m.insert("status".into(), "absent".into());
            m.insert("note".into(), "no lambda in the bracket has two hyperbolic canard cycles".into());
        }
        _ => {
            m.insert("status".into(), "not computed".into());
        }
    }
    Value::Object(m)
}

pub fn boundaries_json(b: &Boundaries) -> Value {
    let mut values = Map::new();
    for v in &b.values {
        values.insert(v.name.into(), v.value.into());
    }
    let mut out = json!({
        "tau": b.tau.name(),
        "alpha": b.alpha,
        "beta": b.beta,
        "regime": b.regime.name(),
        "order": b.values.iter().map(|v| v.name).collect::<Vec<_>>(),
        "values": values,
    });
    if let Some(fb) = b.fold {
        out[fb.fold_name] = fold_json(b);
    }
    if let (Some(p), Some(solved)) = (b.l2_printed, b.get("L2")) {
        out["L2_printed"] = json!({
            "value": p,
            "solved": solved,
            "deviation": p - solved,
            "flagged": (p - solved).abs() > 1e-8,
        });
    }
    out
}

pub fn boundaries_report(tau: TauKind, alpha: f64, beta: f64) -> foldsaddle_core::Result<Value> {
    Ok(boundaries_json(&boundaries(tau, alpha, beta)?))
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::SigmaSaddle => "sigma-saddle",
        Stability::SigmaAttractor => "sigma-attractor",
        Stability::SigmaRepeller => "sigma-repeller",
    }
}

pub fn cycles_report(sys: &FilippovSystem) -> Value {
    let w = sys.window;
    let cycles: Vec<Value> = find_canard_cycles(sys, (w.xmin, w.xmax))
        .iter()
        .map(|c| {
            json!({
                "fixed_abscissa": c.fixed_abscissa,
                "upper_landing": c.upper_landing,
                "kind": match c.kind { CycleKind::I => "I", CycleKind::II => "II", CycleKind::III => "III" },
                "derivative": c.derivative,
                "stability": match c.stability {
                    CycleStability::Attractor => "attractor",
                    CycleStability::Repeller => "repeller",
                    CycleStability::Nonhyperbolic => "nonhyperbolic",
                },
            })
        })
        .collect();
    let pe: Vec<Value> = pseudo_equilibria(sys, (w.xmin, w.xmax))
        .iter()
        .map(|p| {
            json!({
                "abscissa": p.abscissa,
                "stability": stability_name(p.stability),
                "region": match p.region { Region::Escaping => "escaping", Region::Sliding => "sliding" },
            })
        })
        .collect();
    let graph = find_sigma_graph(sys, 1e-9).map(|g| {
        json!({
            "kind": match g.kind { CycleKind::I => "I", CycleKind::II => "II", CycleKind::III => "III" },
            "vertices": g.vertices.iter().map(|(n, p)| json!({ "name": n, "x": p.x, "y": p.y })).collect::<Vec<_>>(),
        })
    });
    let p = sys.params;
    json!({
        "tau": p.tau.name(),
        "lambda": p.lambda,
        "alpha": p.alpha,
        "beta": p.beta,
        "case": classify_case(p.tau, p.lambda, p.alpha, p.beta, CLASSIFY_TOL).ok().map(|l| l.to_string()),
        "cycles": cycles,
        "pseudo_equilibria": pe,
        "sigma_graph": graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_example() {
        let v = classify(TauKind::Inv, -0.2, -1.0, 0.5, CLASSIFY_TOL).unwrap();
        assert_eq!(v["case"], "11_2");
        assert_eq!(v["class"], "11_1");
    }

    #[test]
    fn boundaries_example() {
        let v = boundaries_report(TauKind::Inv, -1.0, 0.5).unwrap();
        assert!((v["values"]["M0"].as_f64().unwrap() + 0.271286).abs() < 1e-6);
        assert!((v["values"]["M1"].as_f64().unwrap() + 0.0917517).abs() < 1e-7);
        assert!((v["values"]["M2"].as_f64().unwrap() - 0.228714).abs() < 1e-6);
        assert_eq!(v["M3"]["bracket_names"], json!(["i1", "M2"]));
    }
}
