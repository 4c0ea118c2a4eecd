use std::sync::Arc;

use adelic_heights::adelic::{
    extended_height, global_energy, nef_check, product_formula_check, raw_exceptions, AdelicFamily, Place,
    ToricDivisor,
};
use adelic_heights::convex::{legendre_dual, monge_ampere, ConcaveFn, DualFn};
use adelic_heights::divisorial::{
    check_intersection_axioms, extend_intersection, Cell, CompletionElement, Constraint, DivisorialSpace,
    IntersectionMap, RationalVector, SemilinearCone,
};
use adelic_heights::rational::{format_rational, from_f64, parse_rational, qi, qr, to_f64, Q};
use adelic_heights::{Error, Result};
use serde_json::{json, Value};

use crate::output::{num, record_csv, table_csv};

/// A command's result in both output formats.
pub struct Report {
    pub json: Value,
    pub csv: String,
}

impl Report {
    fn record(json: Value) -> Self {
        let csv = record_csv(&json);
        Report { json, csv }
    }
}

/// `a:b:n` sample grid; `n` defaults to 513.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub const DEFAULT_POINTS: usize = 513;

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }

    fn over(lo: &Q, hi: &Q) -> Grid {
        let n = if lo == hi { 1 } else { DEFAULT_POINTS };
        Grid { lo: to_f64(lo), hi: to_f64(hi), n }
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let value = |t: &str| parse_rational(t).map(|q| to_f64(&q)).map_err(|e| e.to_string());
        let (lo, hi, n) = match parts.as_slice() {
            [a, b] => (value(a)?, value(b)?, DEFAULT_POINTS),
            [a, b, n] => (value(a)?, value(b)?, n.trim().parse().map_err(|_| format!("bad point count {n:?}"))?),
            _ => return Err(format!("grid must be a:b or a:b:n, got {s:?}")),
        };
        if lo >= hi || lo.is_nan() || hi.is_nan() || n < 2 {
            return Err(format!("grid {s:?} needs a < b and n >= 2"));
        }
        Ok(Grid { lo, hi, n })
    }
}

fn family_json(f: &AdelicFamily) -> Value {
    f.to_json()
}

fn dual_summary(roof: &DualFn) -> Value {
    json!({
        "lo": format_rational(roof.lo()),
        "hi": format_rational(roof.hi()),
        "value_lo": num(roof.value_at_lo()),
        "value_hi": num(roof.value_at_hi()),
    })
}

pub fn height(input: &Value) -> Result<Report> {
    let f = AdelicFamily::from_json(input)?;
    let roof = f.roof()?;
    let h = f.global_height()?;
    let nef = f.nef_status()?;
    let singular: Vec<Value> = f.singular_places()?.iter().map(Place::to_json).collect();
    let json = json!({
        "height": num(h.value),
        "roof": roof.to_json(),
        "roof_endpoints": dual_summary(&roof),
        "status": nef.status.to_string(),
        "mu_min_asy": nef.mu_min_asy.map_or(Value::Null, num),
        "singular_places": singular,
    });
    let csv = record_csv(&json!({
        "height": num(h.value),
        "status": nef.status.to_string(),
        "mu_min_asy": nef.mu_min_asy.map_or(Value::Null, num),
        "roof_lo": format_rational(roof.lo()),
        "roof_hi": format_rational(roof.hi()),
        "roof_value_lo": num(roof.value_at_lo()),
        "roof_value_hi": num(roof.value_at_hi()),
    }));
    Ok(Report { json, csv })
}

/// Input `{"reference": family?, "singular": family}`; the reference
/// defaults to the canonical family of the same divisor.
pub fn energy(input: &Value) -> Result<Report> {
    let singular =
        AdelicFamily::from_json(input.get("singular").ok_or_else(|| Error::Parse("missing \"singular\" family".into()))?)?;
    let reference = match input.get("reference") {
        Some(r) => AdelicFamily::from_json(r)?,
        None => AdelicFamily::canonical(singular.divisor().clone()),
    };
    let report = global_energy(&reference, &singular)?;
    let per_place: Vec<Value> = report
        .per_place
        .iter()
        .map(|(v, e)| json!({"place": v.to_json(), "energy": num(e.value)}))
        .collect();
    let mut rows: Vec<Vec<Value>> =
        report.per_place.iter().map(|(v, e)| vec![Value::from(v.to_string()), num(e.value)]).collect();
    rows.push(vec![Value::from("total"), num(report.total.value)]);
    let extended = match reference.nef_status()?.status.is_arithmetically_nef() {
        true => num(extended_height(&reference, &singular)?.value),
        false => Value::Null,
    };
    let json = json!({
        "energy": num(report.total.value),
        "per_place": per_place,
        "reference": family_json(&reference),
        "extended_height": extended,
    });
    Ok(Report { json, csv: table_csv(&["place", "energy"], &rows) })
}

pub fn dual(input: &Value, grid: Option<&Grid>) -> Result<Report> {
    let f = ConcaveFn::from_json(input)?;
    let d = legendre_dual(&f)?;
    let grid = grid.cloned().unwrap_or_else(|| Grid::over(d.lo(), d.hi()));
    let rows: Vec<Vec<Value>> = grid.points().into_iter().map(|m| vec![num(m), num(d.eval(m))]).collect();
    let json = json!({"dual": d.to_json(), "samples": rows});
    Ok(Report { json, csv: table_csv(&["m", "value"], &rows) })
}

pub fn ma(input: &Value) -> Result<Report> {
    let f = ConcaveFn::from_json(input)?;
    let mu = monge_ampere(&f);
    let mass = mu.total_mass()?;
    let mut rows = Vec::new();
    for a in mu.atoms() {
        let loc = Value::from(format_rational(&a.location));
        let mass = a.exact_mass.as_ref().map_or_else(|| num(a.mass), |m| Value::from(format_rational(m)));
        rows.push(vec![Value::from("atom"), loc.clone(), loc, mass]);
    }
    for d in mu.densities() {
        let end = |e: &Option<Q>, inf: &str| e.as_ref().map_or(Value::from(inf), |q| Value::from(format_rational(q)));
        rows.push(vec![Value::from("density"), end(&d.from, "-inf"), end(&d.to, "+inf"), Value::from(d.density.to_string())]);
    }
    let json = json!({"measure": mu.to_json(), "total_mass": num(mass)});
    Ok(Report { json, csv: table_csv(&["kind", "from", "to", "mass"], &rows) })
}

pub fn nef(input: &Value) -> Result<Report> {
    let divisor =
        ToricDivisor::from_json(input.get("divisor").ok_or_else(|| Error::Parse("missing \"divisor\"".into()))?)?;
    let r = nef_check(divisor, raw_exceptions(input)?)?;
    Ok(Report::record(json!({
        "status": r.status.to_string(),
        "mu_min_asy": r.mu_min_asy.map_or(Value::Null, num),
        "failing_place": r.failing_place.as_ref().map_or(Value::Null, Place::to_json),
    })))
}

pub fn product_formula(q: &str) -> Result<Report> {
    let q = parse_rational(q)?;
    let pf = product_formula_check(&q)?;
    let contributions: Vec<Value> = pf
        .contributions
        .iter()
        .map(|(v, c)| json!({"place": v.to_json(), "log_abs": c.to_string()}))
        .collect();
    let result = if pf.holds() { "0 (exact)".to_string() } else { format!("{} (nonzero)", pf.total) };
    let rows: Vec<Vec<Value>> = pf
        .contributions
        .iter()
        .map(|(v, c)| vec![Value::from(v.to_string()), Value::from(c.to_string())])
        .chain(std::iter::once(vec![Value::from("total"), Value::from(pf.total.to_string())]))
        .collect();
    let json = json!({
        "rational": format_rational(&q),
        "contributions": contributions,
        "total": pf.total.to_string(),
        "result": result,
    });
    Ok(Report { json, csv: table_csv(&["place", "log_abs"], &rows) })
}

/// `(2 − 3α) / (α(2α − 1))` below `1/2`, `−∞` from there on.
pub fn alpha_closed_form(alpha: &Q) -> f64 {
    if *alpha >= qr(1, 2) {
        return f64::NEG_INFINITY;
    }
    to_f64(&((qi(2) - qi(3) * alpha) / (alpha * (qi(2) * alpha - qi(1)))))
}

pub fn example_alpha(alpha: &str, place: &str, tol: f64) -> Result<Report> {
    let alpha = parse_rational(alpha)?;
    let place: Place = place.parse()?;
    let family = AdelicFamily::alpha_family(&alpha, place)?;
    let canonical = AdelicFamily::canonical(ToricDivisor::infinity());
    let closed = alpha_closed_form(&alpha);
    let roof = family.global_height()?.value;
    let energy = extended_height(&canonical, &family)?.value;
    let error = |x: f64| if x == closed { 0.0 } else { (x - closed).abs() };
    let gap = if roof == energy { 0.0 } else { (roof - energy).abs() };
    let worst = error(roof).max(error(energy));
    Ok(Report::record(json!({
        "alpha": format_rational(&alpha),
        "place": place.to_json(),
        "closed_form": num(closed),
        "roof_route": num(roof),
        "energy_route": num(energy),
        "gap": num(gap),
        "max_error": num(worst),
        "within_tol": worst <= tol,
    })))
}

pub fn plot(input: &Value, grid: Option<&Grid>, roof_grid: Option<&Grid>) -> Result<Report> {
    let f = AdelicFamily::from_json(input)?;
    let roof = f.roof()?;
    let u_grid = grid.cloned().unwrap_or(Grid { lo: -10.0, hi: 10.0, n: DEFAULT_POINTS });
    let m_grid = roof_grid.cloned().unwrap_or_else(|| Grid::over(roof.lo(), roof.hi()));

    let mut series: Vec<(String, ConcaveFn)> =
        f.exceptions().iter().map(|(v, psi)| (format!("psi@{v}"), psi.clone())).collect();
    series.push(("psi@default".to_string(), f.divisor().canonical_function()));
    let mut rows = Vec::new();
    let mut psi_json = serde_json::Map::new();
    for (name, psi) in &series {
        let pts: Vec<Value> = u_grid.points().into_iter().map(|u| json!([num(u), num(psi.eval(u))])).collect();
        for u in u_grid.points() {
            rows.push(vec![Value::from(name.as_str()), num(u), num(psi.eval(u))]);
        }
        psi_json.insert(name.trim_start_matches("psi@").to_string(), Value::Array(pts));
    }
    let roof_pts: Vec<Value> = m_grid.points().into_iter().map(|m| json!([num(m), num(roof.eval(m))])).collect();
    for m in m_grid.points() {
        rows.push(vec![Value::from("roof"), num(m), num(roof.eval(m))]);
    }
    let json = json!({"psi": psi_json, "roof": roof_pts});
    Ok(Report { json, csv: table_csv(&["series", "x", "y"], &rows) })
}

fn v(c: &[i64]) -> RationalVector {
    RationalVector::from_ints(c)
}

fn q_json(q: &Q) -> Value {
    Value::from(format_rational(q))
}

fn half_open_order() -> Result<SemilinearCone> {
    SemilinearCone::new(
        2,
        vec![
            Cell::new(vec![Constraint::gt(vec![qi(1), qi(0)])]),
            Cell::new(vec![
                Constraint::ge(vec![qi(1), qi(0)]),
                Constraint::ge(vec![qi(-1), qi(0)]),
                Constraint::ge(vec![qi(0), qi(1)]),
            ]),
        ],
    )
}

/// The worked examples on divisorial spaces.
pub fn core_demo(tol: f64) -> Result<Report> {
    let standard = Arc::new(DivisorialSpace::standard(2));
    let pathological = DivisorialSpace::new(2, half_open_order()?, SemilinearCone::nonnegative_orthant(2))?;
    let b = v(&[1, 1]);
    let distances = json!([
        {"order": "half-open", "b": "(1, 0)", "x": "(0, 1)", "y": "(0, 0)",
         "d_b": q_json(&pathological.d_b(&v(&[1, 0]), &v(&[0, 1]), &v(&[0, 0]))?)},
        {"order": "standard", "b": "(1, 1)", "x": "(3, 1)", "y": "(0, 0)",
         "d_b": q_json(&standard.d_b(&b, &v(&[3, 1]), &v(&[0, 0]))?)},
        {"order": "standard", "b": "(1, 1)", "x": "(1/2, 1/4)", "y": "(0, 0)",
         "d_b": q_json(&standard.d_b(&b, &RationalVector::new(vec![qr(1, 2), qr(1, 4)]), &v(&[0, 0]))?)},
    ]);

    let open = SemilinearCone::open_orthant_with_origin(2);
    let generated = SemilinearCone::open_from_generators(2, &[v(&[1, 2]), v(&[2, 1])])?;
    let closure = json!([
        {"cone": "open quadrant with origin", "x": "(1, 0)",
         "contains": open.contains(&v(&[1, 0]))?, "closure_contains": open.closure_contains(&v(&[1, 0]))?},
        {"cone": "open cone on (1, 2), (2, 1)", "x": "(1, 2)",
         "contains": generated.contains(&v(&[1, 2]))?, "closure_contains": generated.closure_contains(&v(&[1, 2]))?},
        {"cone": "open cone on (1, 2), (2, 1)", "x": "(1, 3)",
         "contains": generated.contains(&v(&[1, 3]))?, "closure_contains": generated.closure_contains(&v(&[1, 3]))?},
    ]);

    let h = IntersectionMap::new(2, 2, vec![qi(0), qi(1), qi(1), qi(0)])?;
    let eps = from_f64(tol)?;
    let seq = |x: RationalVector, r: RationalVector| -> Result<CompletionElement> {
        let size = r.coords().iter().fold(Q::from_integer(0.into()), |a, c| a.max(if *c < qi(0) { -c.clone() } else { c.clone() }));
        CompletionElement::new(
            standard.clone(),
            b.clone(),
            move |n| &x + &r.scale(&qr(1, n as i64)),
            move |e| (&size / e).ceil().to_integer().try_into().unwrap_or(u64::MAX - 1) + 1,
        )
    };
    let ext = extend_intersection(&h, &[seq(v(&[1, 0]), v(&[0, 1]))?, seq(v(&[0, 1]), v(&[1, 0]))?], &b, &eps)?;

    let gens = [v(&[1, 0]), v(&[0, 1])];
    let pass = check_intersection_axioms(&h, &gens, &gens)?;
    let fail = check_intersection_axioms(&h, &[v(&[1, 0]), v(&[0, 1]), v(&[1, -1])], &gens)?;
    let zero = check_intersection_axioms(&IntersectionMap::new(1, 2, vec![qi(0)])?, &[v(&[1])], &[v(&[1])])?;
    let violation = fail.nef.as_ref().map_or(Value::Null, |w| {
        json!({"args": w.args.iter().map(|a| a.to_string()).collect::<Vec<_>>(), "value": q_json(&w.value)})
    });
    let axioms = json!([
        {"form": "x1*y2 + x2*y1 on the quadrant", "nef_eff": pass.nef_eff_hold(), "amp": pass.amp_holds()},
        {"form": "x1*y2 + x2*y1 with (1, -1) in N", "nef_eff": fail.nef_eff_hold(), "worst": violation},
        {"form": "zero map on (Q, Q>=0)", "nef_eff": zero.nef_eff_hold(), "amp": zero.amp_holds()},
    ]);

    Ok(Report::record(json!({
        "distances": distances,
        "closure": closure,
        "extension": {
            "form": "x1*y2 + x2*y1",
            "args": "(1, 1/n), (1/n, 1)",
            "value": num(ext.to_f64()),
            "exact_at_depth": q_json(&ext.value),
            "depth": ext.depth,
            "tolerance": num(tol),
        },
        "axioms": axioms,
    })))
}
