//! File schemas: maps, measures, families, scalings and trees.

use ratdegen::measures::AtomicMeasure;
use ratdegen::ratmap::Coeffs;
use ratdegen::rescaling::{FamilySpec, Schedule, TPoly};
use ratdegen::sphere::PointJson;
use ratdegen::{Error, GaussRat, Hole, MoebiusMap, ProjectiveRatMap, Result, SpherePoint, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

fn schema<E: std::fmt::Display>(e: E) -> Error {
    Error::Schema(e.to_string())
}

fn real(v: &Value) -> Result<num_rational::BigRational> {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            GaussRat::parse_real(&s).ok_or_else(|| schema(format!("bad number {s}")))
        }
        Value::String(s) => GaussRat::parse_real(s).ok_or_else(|| schema(format!("bad rational {s:?}"))),
        _ => Err(schema(format!("expected a number or \"p/q\" string, found {v}"))),
    }
}

/// Scalar: a number, a `"p/q"` string, or `{"re":…,"im":…}` with either.
pub fn parse_scalar(v: &Value) -> Result<GaussRat> {
    match v {
        Value::Object(m) => {
            let re = m.get("re").map(real).transpose()?.unwrap_or_default();
            let im = m.get("im").map(real).transpose()?.unwrap_or_default();
            Ok(GaussRat::new(re, im))
        }
        _ => Ok(GaussRat::new(real(v)?, Default::default())),
    }
}

pub fn parse_c64(v: &Value) -> Result<C64> {
    let c = match v {
        Value::Object(m) => {
            let f = |k: &str| -> Result<f64> {
                match m.get(k) {
                    None => Ok(0.0),
                    Some(Value::Number(n)) => n.as_f64().ok_or_else(|| schema("bad number")),
                    Some(Value::String(s)) => s.parse::<f64>().or_else(|_| {
                        GaussRat::parse_real(s)
                            .map(|r| ratdegen::scalar::Scalar::to_c64(&GaussRat::new(r, Default::default())).re)
                            .ok_or_else(|| schema(format!("bad number {s:?}")))
                    }),
                    Some(o) => Err(schema(format!("bad component {o}"))),
                }
            };
            C64::new(f("re")?, f("im")?)
        }
        Value::Number(n) => C64::new(n.as_f64().ok_or_else(|| schema("bad number"))?, 0.0),
        Value::String(_) => ratdegen::scalar::Scalar::to_c64(&parse_scalar(v)?),
        _ => return Err(schema(format!("expected a complex number, found {v}"))),
    };
    if !c.is_finite() {
        return Err(schema("non-finite coefficient"));
    }
    Ok(c)
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| schema(format!("missing array {key:?}")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| schema(format!("missing integer {key:?}")))
}

/// Map JSON: `{"degree":d, "numerator":[…], "denominator":[…], "backend":"float"|"exact"}`.
pub fn map_from_json(v: &Value) -> Result<ProjectiveRatMap> {
    let d = usize_field(v, "degree")?;
    let backend = v.get("backend").and_then(Value::as_str).unwrap_or("float");
    let num = array(v, "numerator")?;
    let den = array(v, "denominator")?;
    if num.len() != d + 1 || den.len() != d + 1 {
        return Err(schema(format!("degree {d} needs {} coefficients per form", d + 1)));
    }
    match backend {
        "float" => ProjectiveRatMap::float(
            d,
            num.iter().map(parse_c64).collect::<Result<_>>()?,
            den.iter().map(parse_c64).collect::<Result<_>>()?,
        ),
        "exact" => ProjectiveRatMap::exact(
            d,
            num.iter().map(parse_scalar).collect::<Result<_>>()?,
            den.iter().map(parse_scalar).collect::<Result<_>>()?,
        ),
        b => Err(schema(format!("unknown backend {b:?}"))),
    }
}

pub fn map_to_json(f: &ProjectiveRatMap) -> Value {
    match f.coeffs() {
        Coeffs::Float { num, den } => {
            let c = |v: &[C64]| v.iter().map(|c| json!({"re": c.re, "im": c.im})).collect::<Vec<_>>();
            json!({"degree": f.degree(), "numerator": c(num), "denominator": c(den), "backend": "float"})
        }
        Coeffs::Exact { num, den } => {
            let c = |v: &[GaussRat]| {
                v.iter()
                    .map(|c| json!({"re": c.re_string(), "im": c.im_string()}))
                    .collect::<Vec<_>>()
            };
            json!({"degree": f.degree(), "numerator": c(num), "denominator": c(den), "backend": "exact"})
        }
    }
}

pub fn point_json(p: &SpherePoint) -> Value {
    serde_json::to_value(PointJson::from(*p)).unwrap_or(Value::Null)
}

pub fn parse_point(v: &Value) -> Result<SpherePoint> {
    serde_json::from_value::<PointJson>(v.clone()).map_err(schema)?.to_point()
}

pub fn holes_json(holes: &[Hole]) -> Value {
    Value::Array(
        holes
            .iter()
            .map(|h| json!({"point": point_json(&h.point), "depth": h.depth}))
            .collect(),
    )
}

pub fn moebius_from_json(v: &Value) -> Result<MoebiusMap> {
    let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(|| schema("matrix must be 2×2"))?;
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_array().filter(|r| r.len() == 2).ok_or_else(|| schema("matrix must be 2×2"))?;
        for (j, c) in r.iter().enumerate() {
            m[i][j] = parse_c64(c)?;
        }
    }
    Ok(MoebiusMap::new(m[0][0], m[0][1], m[1][0], m[1][1]))
}

/// One row of the measure CSV: `re, im, infinity (0/1), weight`.
#[derive(Debug, Serialize, Deserialize)]
pub struct AtomRow {
    pub re: f64,
    pub im: f64,
    pub infinity: u8,
    pub weight: f64,
}

fn rows_of(mu: &AtomicMeasure) -> Vec<AtomRow> {
    mu.atoms()
        .iter()
        .map(|(p, w)| match p.to_complex() {
            Some(c) => AtomRow {
                re: c.re,
                im: c.im,
                infinity: 0,
                weight: *w,
            },
            None => AtomRow {
                re: 0.0,
                im: 0.0,
                infinity: 1,
                weight: *w,
            },
        })
        .collect()
}

fn measure_of(rows: Vec<AtomRow>, tol_pt: f64) -> Result<AtomicMeasure> {
    let atoms = rows
        .into_iter()
        .map(|r| {
            let p = match r.infinity {
                0 => SpherePoint::from_re_im(r.re, r.im),
                1 => SpherePoint::infinity(),
                x => return Err(schema(format!("infinity flag must be 0 or 1, found {x}"))),
            };
            if !(r.weight.is_finite() && r.weight >= 0.0 && r.re.is_finite() && r.im.is_finite()) {
                return Err(schema("atom with invalid coordinates or weight"));
            }
            Ok((p, r.weight))
        })
        .collect::<Result<_>>()?;
    AtomicMeasure::new(atoms, tol_pt)
}

pub fn measure_to_csv(mu: &AtomicMeasure) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows_of(mu) {
        w.serialize(r).map_err(schema)?;
    }
    let bytes = w.into_inner().map_err(schema)?;
    String::from_utf8(bytes).map_err(schema)
}

pub fn measure_from_csv(text: &str, tol_pt: f64) -> Result<AtomicMeasure> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<std::result::Result<Vec<AtomRow>, _>>().map_err(schema)?;
    measure_of(rows, tol_pt)
}

/// Measure JSON: `{"atoms":[{"re","im","infinity","weight"}…]}`.
pub fn measure_to_json(mu: &AtomicMeasure) -> Value {
    json!({ "atoms": rows_of(mu) })
}

pub fn measure_from_json(v: &Value, tol_pt: f64) -> Result<AtomicMeasure> {
    let rows = array(v, "atoms")?
        .iter()
        .map(|a| {
            let f = |k: &str| a.get(k).and_then(Value::as_f64).unwrap_or(0.0);
            Ok(AtomRow {
                re: f("re"),
                im: f("im"),
                infinity: a.get("infinity").map(|x| x.as_u64().unwrap_or(2) as u8).unwrap_or(0),
                weight: a.get("weight").and_then(Value::as_f64).ok_or_else(|| schema("atom without weight"))?,
            })
        })
        .collect::<Result<_>>()?;
    measure_of(rows, tol_pt)
}

/// Loads a measure from `.csv` or JSON by extension.
pub fn load_measure(path: &str, tol_pt: f64) -> Result<AtomicMeasure> {
    let text = read(path)?;
    if path.ends_with(".csv") {
        measure_from_csv(&text, tol_pt)
    } else {
        measure_from_json(&parse_json(&text)?, tol_pt)
    }
}

fn tpoly(v: &Value) -> Result<TPoly> {
    match v {
        Value::Array(a) => Ok(TPoly(a.iter().map(parse_scalar).collect::<Result<_>>()?)),
        _ => Ok(TPoly(vec![parse_scalar(v)?])),
    }
}

/// Family JSON: `{"degree":d, "coeff_num":[[poly-in-t]…], "coeff_den":[…],
/// "schedule":{"type":"geometric","start":…,"ratio":…,"count":…}}`; each
/// polynomial lists its coefficients in increasing powers of `t`, and the
/// `2d+2` entries are `a_0..a_d, b_0..b_d`. `coeff_den` defaults to ones.
pub fn family_from_json(v: &Value) -> Result<FamilySpec> {
    let d = usize_field(v, "degree")?;
    let num = array(v, "coeff_num")?.iter().map(tpoly).collect::<Result<Vec<_>>>()?;
    let den = match v.get("coeff_den") {
        None | Some(Value::Null) => vec![TPoly::from_ints(&[1]); num.len()],
        Some(_) => array(v, "coeff_den")?.iter().map(tpoly).collect::<Result<_>>()?,
    };
    let s = v.get("schedule").ok_or_else(|| schema("missing schedule"))?;
    match s.get("type").and_then(Value::as_str).unwrap_or("geometric") {
        "geometric" => {}
        other => return Err(schema(format!("unsupported schedule type {other:?}"))),
    }
    let start = s.get("start").ok_or_else(|| schema("schedule needs start"))?;
    let ratio = s.get("ratio").ok_or_else(|| schema("schedule needs ratio"))?;
    let sched = Schedule::geometric(real(start)?, real(ratio)?, usize_field(s, "count")?)?;
    FamilySpec::new(d, num, den, sched)
}

/// Scalings JSON for tree building: `{"eps":[…], "labels":[…],
/// "scalings":[[matrix per sample] per sphere]}`.
pub struct ScalingsInput {
    pub eps: Vec<f64>,
    pub labels: Vec<usize>,
    pub scalings: Vec<Vec<MoebiusMap>>,
}

pub fn scalings_from_json(v: &Value) -> Result<ScalingsInput> {
    let eps: Vec<f64> = array(v, "eps")?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| schema("eps must be numbers")))
        .collect::<Result<_>>()?;
    let scalings: Vec<Vec<MoebiusMap>> = array(v, "scalings")?
        .iter()
        .map(|s| {
            s.as_array()
                .ok_or_else(|| schema("scalings must be arrays of matrices"))?
                .iter()
                .map(moebius_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if scalings.iter().any(|s| s.len() != eps.len()) {
        return Err(schema("every scaling needs one matrix per eps value"));
    }
    let labels: Vec<usize> = match v.get("labels") {
        Some(Value::Array(a)) => a
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| schema("labels must be integers")))
            .collect::<Result<_>>()?,
        _ => (0..scalings.len()).collect(),
    };
    if labels.len() != scalings.len() {
        return Err(schema("labels and scalings differ in length"));
    }
    Ok(ScalingsInput { eps, labels, scalings })
}

pub fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| schema(format!("{path}: {e}")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(schema)
}

pub fn load_json(path: &str) -> Result<Value> {
    parse_json(&read(path)?)
}

pub fn write(path: &str, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| schema(format!("{path}: {e}")))
}
