//! One function per subcommand; each returns the text written to stdout.

use ratdegen::barycenter::{conformal_barycenter, heavy_atom_check};
use ratdegen::measures::AtomicMeasure;
use ratdegen::mme::mme_sample;
use ratdegen::par::Exec;
use ratdegen::polylike::{polylike_driver, PolyLikeCertificate, PolylikeReport};
use ratdegen::rescaling::{
    depth_profile_limit, fully_ramified_times, iterate_limits, left_class_limits, pullback_limit, ScalingRule,
    PullbackLimitOptions,
};
use ratdegen::spheretree::{build_tree, build_tree_exact, hausdorff_residual, SphereTree};
use ratdegen::{Error, GaussRat, Result, SpherePoint, Tolerances};
use serde_json::{json, Value};

use crate::io::{self, point_json};

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

pub fn reduce(map: &str, tol: &Tolerances) -> Result<String> {
    let f = io::map_from_json(&io::load_json(map)?)?;
    let r = f.reduce(tol)?;
    Ok(pretty(&json!({
        "degree": f.degree(),
        "reduction": io::map_to_json(&r.reduction),
        "holes": io::holes_json(&r.holes),
        "residual": r.residual,
        "confidence": r.confidence,
    })))
}

pub fn compose(f: &str, g: &str, tol: &Tolerances) -> Result<String> {
    let f = io::map_from_json(&io::load_json(f)?)?;
    let g = io::map_from_json(&io::load_json(g)?)?;
    let h = f.compose(&g)?;
    let r = h.reduce(tol)?;
    Ok(pretty(&json!({
        "composition": io::map_to_json(&h),
        "reduction": io::map_to_json(&r.reduction),
        "holes": io::holes_json(&r.holes),
    })))
}

pub fn iterate(map: &str, n: usize, tol: &Tolerances) -> Result<String> {
    let f = io::map_from_json(&io::load_json(map)?)?;
    let h = f.iterate(n, tol)?;
    let r = h.reduce(tol)?;
    Ok(pretty(&json!({
        "iterate": io::map_to_json(&h),
        "holes": io::holes_json(&r.holes),
    })))
}

/// Samples the measure of maximal entropy; CSV to `out` or stdout.
pub fn mme(map: &str, samples: usize, depth: usize, seed: u64, out: Option<&str>, tol: &Tolerances) -> Result<String> {
    let f = io::map_from_json(&io::load_json(map)?)?;
    let mu = mme_sample(&f, samples, depth, seed, Exec::Parallel, tol)?;
    let csv = io::measure_to_csv(&mu)?;
    match out {
        Some(path) => {
            io::write(path, &csv)?;
            Ok(pretty(&json!({"atoms": mu.len(), "mass": mu.mass()})))
        }
        None => Ok(csv),
    }
}

pub fn barycenter(measure: &str, tol: &Tolerances) -> Result<String> {
    let mu = io::load_measure(measure, tol.tau_pt)?.normalized();
    if heavy_atom_check(&mu, tol).is_some() {
        return Ok(pretty(&json!({"class": "infinity"})));
    }
    let c = conformal_barycenter(&mu, tol)?;
    Ok(pretty(&json!({"center": c.0})))
}

fn describe(mu: &AtomicMeasure) -> String {
    match mu.atoms() {
        [] => "zero measure".into(),
        [(p, w)] if (w - 1.0).abs() < 1e-6 => match p.to_complex() {
            None => "delta at infinity".into(),
            Some(c) => format!("delta at {}{:+}i", c.re, c.im),
        },
        atoms => format!("atomic measure with {} atoms", atoms.len()),
    }
}

pub fn family_analyze(family: &str, levels: usize, samples: usize, seed: u64, point: SpherePoint, tol: &Tolerances) -> Result<String> {
    let fam = io::family_from_json(&io::load_json(family)?)?;
    let mu = AtomicMeasure::dirac(point);
    let opts = PullbackLimitOptions {
        sampler_n: samples,
        seed,
        exec: Exec::Parallel,
        ..PullbackLimitOptions::default()
    };
    let rep = pullback_limit(&fam, &mu, levels, &opts, tol)?;
    let scheme = left_class_limits(&fam, levels, &ScalingRule::TriPoint, tol, Exec::Parallel)?;
    let flags = fully_ramified_times(&scheme, tol)?;
    let profile = if levels >= 3 {
        let p = depth_profile_limit(&scheme, tol)?;
        Value::Array(
            p.atoms
                .iter()
                .map(|(q, ratios, lim, err)| json!({"point": point_json(q), "ratios": ratios, "limit": lim, "error": err}))
                .collect(),
        )
    } else {
        Value::Null
    };
    let iterates: Vec<Value> = iterate_limits(&fam, opts.iterate_levels.min(levels), tol, Exec::Parallel)?
        .iter()
        .map(|g| {
            json!({
                "n": g.n,
                "reduction_degree": g.reduced.reduction_degree(),
                "holes": io::holes_json(&g.reduced.holes),
                "cauchy_error": g.limit.error,
            })
        })
        .collect();
    let limit = rep.predicted.as_ref().unwrap_or(&rep.measure);
    Ok(pretty(&json!({
        "degree": fam.degree,
        "levels": levels,
        "case": rep.case.label(),
        "limit": {"description": describe(limit), "measure": io::measure_to_json(limit)},
        "degree_ratios": rep.degree_ratios,
        "fully_ramified": flags.iter().map(|(n, f)| json!({"n": n, "fully_ramified": f})).collect::<Vec<_>>(),
        "depth_profile": profile,
        "iterates": iterates,
        "cauchy_steps": rep.cauchy_steps,
        "prediction_distance": rep.predicted_distance,
        "sampler_distance": rep.sampler_distance,
    })))
}

fn tree_output(tree: &SphereTree, dot: Option<&str>, extra: Value) -> Result<String> {
    if let Some(path) = dot {
        io::write(path, &tree.to_dot())?;
    }
    let mut v = tree.to_json();
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    Ok(pretty(&v))
}

pub fn tree_build_scalings(scalings: &str, dot: Option<&str>, tol: &Tolerances) -> Result<String> {
    let s = io::scalings_from_json(&io::load_json(scalings)?)?;
    let tree = build_tree(&s.labels, &s.scalings, &s.eps, tol)?;
    let k = s.eps.len() - 1;
    let h = hausdorff_residual(&tree, &s.scalings, k, 200, Exec::Parallel)?;
    tree_output(&tree, dot, json!({"hausdorff_residual": h}))
}

pub fn tree_build_family(family: &str, levels: usize, dot: Option<&str>, tol: &Tolerances) -> Result<String> {
    let fam = io::family_from_json(&io::load_json(family)?)?;
    let scheme = left_class_limits(&fam, levels, &ScalingRule::TriPoint, tol, Exec::Parallel)?;
    let labels: Vec<usize> = (0..=levels).collect();
    let tree = build_tree_exact(&labels, &scheme.scalings, &scheme.eps, tol)?;
    tree_output(&tree, dot, json!({}))
}

fn certificate_json(c: &PolyLikeCertificate) -> Value {
    let pts = |v: &[SpherePoint]| v.iter().map(point_json).collect::<Vec<_>>();
    json!({
        "degree": c.degree,
        "winding": c.winding,
        "inner_boundary": pts(&c.inner_boundary),
        "outer_boundary": pts(&c.outer_boundary),
        "excluded": point_json(&c.excluded),
        "seed_radius": c.seed_radius,
        "separation": c.separation,
        "modulus_lower_bound": c.modulus_lower_bound,
        "witnesses": c.witnesses.iter().map(|w| json!({
            "point": point_json(&w.point), "period": w.period, "in_inner": w.in_inner
        })).collect::<Vec<_>>(),
        "sink": c.sink.as_ref().map(point_json),
    })
}

fn report_json(rep: &PolylikeReport, ts: &[GaussRat], only: Option<usize>) -> Value {
    let h = &rep.hypotheses;
    let certs: Vec<Value> = rep
        .certificates
        .iter()
        .enumerate()
        .filter(|(k, _)| only.is_none_or(|o| o == *k))
        .map(|(k, c)| {
            let t = json!({"re": ts[k].re_string(), "im": ts[k].im_string()});
            match c {
                Ok(c) => json!({"k": k, "t": t, "certificate": certificate_json(c)}),
                Err(e) => json!({"k": k, "t": t, "error": e}),
            }
        })
        .collect();
    json!({
        "window": rep.window,
        "experimental": rep.experimental,
        "fully_ramified": rep.flags.iter().map(|(n, f)| json!({"n": n, "fully_ramified": f})).collect::<Vec<_>>(),
        "pair": [rep.pair.0, rep.pair.1],
        "hypotheses": {
            "a": point_json(&h.a),
            "b": point_json(&h.b),
            "phi": io::map_to_json(&h.phi),
            "deg_a": h.deg_a,
            "phi_a": point_json(&h.phi_a),
            "pass": h.pass,
            "diagnostic": h.diagnostic,
        },
        "certificates": certs,
    })
}

/// Polynomial-like detection over a window of fully ramified times; `t` restricts the output to one schedule value.
pub fn polylike_detect(family: &str, window: usize, t: Option<&str>, tol: &Tolerances) -> Result<String> {
    let fam = io::family_from_json(&io::load_json(family)?)?;
    let ts = fam.schedule.values();
    let only = match t {
        None => None,
        Some(s) => {
            let v = io::parse_scalar(&Value::String(s.into()))?;
            Some(
                ts.iter()
                    .position(|x| *x == v)
                    .ok_or_else(|| Error::Schema(format!("t = {s} is not on the schedule")))?,
            )
        }
    };
    let rep = polylike_driver(&fam, window, tol, Exec::Parallel)?;
    if !rep.hypotheses.pass {
        return Err(Error::HypothesisUnmet(rep.hypotheses.diagnostic.clone()));
    }
    Ok(pretty(&report_json(&rep, &ts, only)))
}
