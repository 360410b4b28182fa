use crate::numfmt::{self, csv};
use crate::svg::{self, Panel, Series, PALETTE};
use crate::{CliError, Format};
use freenormal_core::curve::{self, BoundingBox, Branch, Curve, LevelSetTrace};
use freenormal_core::levy;
use freenormal_core::series;
use freenormal_core::transforms;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};
use std::f64::consts::{FRAC_PI_2, PI};

/// One output file: a name relative to the output location and its contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Column-oriented numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|v| csv(*v)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(|v| json_number(*v))).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Inverse of [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Table, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty table")?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = numfmt::parse_list(line)?;
            if row.len() != columns.len() {
                return Err(format!("row {} has {} cells, header has {}", i + 1, row.len(), columns.len()));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn to_json_text<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Log-uniform abscissa range shared by `curve` and `density`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.xmin > 0.0 && self.xmin < self.xmax && self.xmax.is_finite()) {
            return Err(CliError::Usage(format!("need 0 < xmin < xmax, got xmin = {}, xmax = {}", self.xmin, self.xmax)));
        }
        if self.n < 2 {
            return Err(CliError::Usage(format!("need n >= 2, got {}", self.n)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let ratio = (self.xmax / self.xmin).ln();
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.xmax } else { self.xmin * (ratio * i as f64 / (self.n - 1) as f64).exp() })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalFn {
    #[value(name = "G")]
    G,
    #[value(name = "Gprime")]
    GPrime,
    #[value(name = "F")]
    F,
    #[value(name = "Fprime")]
    FPrime,
    #[value(name = "rho")]
    Rho,
}

pub fn eval(function: EvalFn, z: Complex64) -> Result<String, CliError> {
    let v = match function {
        EvalFn::G => transforms::g_tilde(z),
        EvalFn::GPrime => transforms::g_tilde_prime(z),
        EvalFn::F => transforms::f_tilde(z)?,
        EvalFn::FPrime => transforms::f_tilde_prime(z)?,
        EvalFn::Rho => {
            if z.im != 0.0 {
                return Err(CliError::Domain(format!("rho takes a real argument, got {}", numfmt::complex(z))));
            }
            transforms::rho(z.re)
        }
    };
    if !v.mantissa().re.is_finite() || !v.mantissa().im.is_finite() {
        return Err(CliError::Domain(format!("{function:?} is not finite at {}", numfmt::complex(z))));
    }
    Ok(numfmt::scaled(&v))
}

fn xi_boundary(x_lo: f64, x_hi: f64, n: usize) -> Vec<(f64, f64)> {
    let ratio = (x_hi / x_lo).ln();
    (0..n)
        .map(|i| {
            let x = x_lo * (ratio * i as f64 / (n - 1) as f64).exp();
            (x, -FRAC_PI_2 / x)
        })
        .collect()
}

pub fn curve(grid: Grid, format: Format, command: &str) -> Result<String, CliError> {
    grid.validate()?;
    let trace = curve::trace_p0(grid.xmin, grid.xmax, grid.n)?;
    Ok(match format {
        Format::Json => to_json_text(&trace),
        Format::Csv => {
            let mut t = Table::new(&["x", "g", "h", "residual"]);
            t.rows = trace.points.iter().map(|p| vec![p.x, p.g, p.h, p.residual]).collect();
            t.to_csv()
        }
        Format::Svg => {
            let graph: Vec<(f64, f64)> = trace.points.iter().map(|p| (p.x, p.h)).collect();
            let right: Vec<(f64, f64)> = trace.points.iter().map(|p| (p.g, -p.h)).collect();
            let left: Vec<(f64, f64)> = right.iter().map(|&(a, b)| (-a, b)).collect();
            let g_max = trace.points.iter().map(|p| p.g).fold(0.0, f64::max);
            let h_max = trace.points.iter().map(|p| p.h).fold(0.0, f64::max);
            let depth = 1.15 * h_max;
            let edge = xi_boundary(FRAC_PI_2 / (1.5 * depth), 1.05 * g_max, 200);
            let edge_left: Vec<(f64, f64)> = edge.iter().map(|&(a, b)| (-a, b)).collect();
            let graph_panel = Panel {
                title: "height of the boundary curve".into(),
                x_label: "x".into(),
                y_label: "h(x)".into(),
                x_log: true,
                y_log: true,
                series: vec![Series::line("h", graph, PALETTE[0])],
                ..Panel::default()
            };
            let plane = Panel {
                title: "boundary curve and pole-free region".into(),
                x_label: "Re z".into(),
                y_label: "Im z".into(),
                x_range: Some((-1.05 * g_max, 1.05 * g_max)),
                y_range: Some((-depth, 0.1 * depth)),
                series: vec![
                    Series { label: "g - ih".into(), segments: vec![right, left], color: PALETTE[0].into(), dashed: false },
                    Series { label: "xy = -pi/2".into(), segments: vec![edge, edge_left], color: PALETTE[1].into(), dashed: true },
                ],
                ..Panel::default()
            };
            svg::render(&[graph_panel, plane], command)
        }
    })
}

pub fn density_table(grid: Grid) -> Result<Table, CliError> {
    grid.validate()?;
    let xs = grid.points();
    let samples = levy::levy_table(&xs)?;
    let mut t = Table::new(&["x", "density", "k"]);
    t.rows = samples.iter().map(|s| vec![s.x, s.density, s.x * s.density]).collect();
    Ok(t)
}

pub fn density(grid: Grid, format: Format, command: &str) -> Result<String, CliError> {
    let t = density_table(grid)?;
    Ok(match format {
        Format::Csv => t.to_csv(),
        Format::Json => to_json_text(&t.to_json()),
        Format::Svg => {
            let xs = t.column("x").unwrap();
            let pair = |name: &str| -> Vec<(f64, f64)> { xs.iter().copied().zip(t.column(name).unwrap()).collect() };
            let panel = |title: &str, y: &str, col: &str, color: &str| Panel {
                title: title.into(),
                x_label: "x".into(),
                y_label: y.into(),
                x_log: true,
                y_log: true,
                series: vec![Series::line(col, pair(col), color)],
                ..Panel::default()
            };
            svg::render(
                &[panel("Levy measure density", "density", "density", PALETTE[0]), panel("x times density", "k(x)", "k", PALETTE[2])],
                command,
            )
        }
    })
}

/// `t` formatted for file names.
pub fn level_file_stem(t: f64) -> String {
    format!("levelset_t{t}")
}

pub fn validate_levels(ts: &[f64], bbox: &BoundingBox, step: f64) -> Result<(), CliError> {
    if ts.is_empty() || ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!("level values must be finite and >= 0, got {ts:?}")));
    }
    if !(bbox.re_min < bbox.re_max && bbox.im_min < bbox.im_max) {
        return Err(CliError::Usage(format!("bounding box must be ordered, got {bbox:?}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    Ok(())
}

pub fn level_sets(ts: &[f64], bbox: BoundingBox, step: f64) -> Result<Vec<(f64, Vec<LevelSetTrace>)>, CliError> {
    validate_levels(ts, &bbox, step)?;
    let curve = Curve::default();
    ts.iter().map(|&t| Ok((t, curve.trace_level_set(t, bbox, step)?))).collect()
}

pub fn level_set_csv(traces: &[LevelSetTrace]) -> String {
    let mut out = String::from("t,branch,segment,re,im\n");
    for (k, tr) in traces.iter().enumerate() {
        let branch = match tr.branch {
            Branch::Left => "left",
            Branch::Right => "right",
        };
        for z in &tr.points {
            out.push_str(&format!("{},{branch},{k},{},{}\n", csv(tr.t), csv(z.re), csv(z.im)));
        }
    }
    out
}

pub fn levelsets(ts: &[f64], bbox: BoundingBox, step: f64, format: Format, command: &str) -> Result<Vec<Artifact>, CliError> {
    let sets = level_sets(ts, bbox, step)?;
    Ok(match format {
        Format::Csv => sets.iter().map(|(t, tr)| Artifact { name: format!("{}.csv", level_file_stem(*t)), contents: level_set_csv(tr) }).collect(),
        Format::Json => sets.iter().map(|(t, tr)| Artifact { name: format!("{}.json", level_file_stem(*t)), contents: to_json_text(tr) }).collect(),
        Format::Svg => {
            let mut series: Vec<Series> = sets
                .iter()
                .enumerate()
                .map(|(i, (t, tr))| Series {
                    label: format!("Im F = {t}"),
                    segments: tr.iter().map(|s| s.points.iter().map(|z| (z.re, z.im)).collect()).collect(),
                    color: PALETTE[i % PALETTE.len()].into(),
                    dashed: false,
                })
                .collect();
            let reach = bbox.re_max.abs().max(bbox.re_min.abs());
            let x_lo = (FRAC_PI_2 / bbox.im_min.abs().max(1e-3)).min(reach);
            let edge = xi_boundary(x_lo, reach, 200);
            let edge_left: Vec<(f64, f64)> = edge.iter().map(|&(a, b)| (-a, b)).collect();
            series.push(Series { label: "xy = -pi/2".into(), segments: vec![edge, edge_left], color: "#555555".into(), dashed: true });
            let panel = Panel {
                title: "level sets of Im F".into(),
                x_label: "Re z".into(),
                y_label: "Im z".into(),
                x_range: Some((bbox.re_min, bbox.re_max)),
                y_range: Some((bbox.im_min, bbox.im_max)),
                series,
                ..Panel::default()
            };
            vec![Artifact { name: "levelsets.svg".into(), contents: svg::render(&[panel], command) }]
        }
    })
}

pub fn cumulants(order: usize, format: Format) -> Result<String, CliError> {
    if order < 2 || order % 2 == 1 {
        return Err(CliError::Usage(format!("order must be an even number >= 2, got {order}")));
    }
    let n = order / 2;
    let moments = series::moments(n + 1).to_strings()[1..].to_vec();
    let boolean = series::boolean_cumulants(n);
    let free = series::free_cumulants(n);
    let h_inf = series::h_infinity_coefficients(n);
    let indices: Vec<usize> = (1..=n).map(|k| 2 * k).collect();
    match format {
        Format::Json => {
            let pairs = |s: &series::RationalSeries| -> Value {
                s.coefficients.iter().map(|q| Value::from(vec![q.numer().to_string(), q.denom().to_string()])).collect()
            };
            let mut exact = Map::new();
            exact.insert("boolean".into(), pairs(&boolean));
            exact.insert("free".into(), pairs(&free));
            exact.insert("h_infinity".into(), pairs(&h_inf));
            let mut obj = Map::new();
            obj.insert("order".into(), order.into());
            obj.insert("index".into(), indices.into());
            obj.insert("moments".into(), moments.into());
            obj.insert("boolean".into(), boolean.to_strings().into());
            obj.insert("free".into(), free.to_strings().into());
            obj.insert("h_infinity".into(), h_inf.to_strings().into());
            obj.insert("exact".into(), Value::Object(exact));
            Ok(to_json_text(&Value::Object(obj)))
        }
        Format::Csv => {
            let mut out = String::from("index,moment,boolean,free,h_infinity\n");
            for k in 0..n {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    indices[k],
                    moments[k],
                    boolean.to_strings()[k],
                    free.to_strings()[k],
                    h_inf.to_strings()[k]
                ));
            }
            Ok(out)
        }
        Format::Svg => Err(CliError::Usage("cumulants supports csv and json".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Regime {
    Zero,
    Infinity,
}

impl Regime {
    pub fn default_points(self) -> Vec<f64> {
        match self {
            Regime::Zero => (2..=8).map(|k| 10f64.powi(-k)).collect(),
            Regime::Infinity => vec![4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0],
        }
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn asymptotics_table(regime: Regime, xs: &[f64]) -> Result<Table, CliError> {
    if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(CliError::Usage(format!("abscissas must be positive, got {xs:?}")));
    }
    let curve = Curve::default();
    match regime {
        Regime::Zero => {
            let mut t = Table::new(&["x", "g_solver", "h_solver", "g_zero", "h_zero", "g_rel_err", "h_rel_err", "gh_gap"]);
            for &x in xs {
                let p = curve.solve_h(x)?;
                let g0 = series::eval_g_asym_zero(x)?;
                let h0 = series::eval_h_asym_zero(x)?;
                t.rows.push(vec![x, p.g, p.h, g0, h0, rel_err(p.g, g0), rel_err(p.h, h0), (p.g * p.h - FRAC_PI_2).abs()]);
            }
            Ok(t)
        }
        Regime::Infinity => {
            let mut t = Table::new(&[
                "x",
                "g_solver",
                "h_solver",
                "g_infinity",
                "h_infinity_1",
                "h_infinity_2",
                "h_infinity_3",
                "g_rel_err",
                "h_rel_err_1",
                "h_rel_err_2",
                "h_rel_err_3",
            ]);
            for &x in xs {
                let p = curve.solve_h(x)?;
                let g_inf = series::eval_g_asym_infinity(x, 3);
                let hs: Vec<f64> = (1..=3).map(|n| series::eval_h_asym_infinity(x, n).re()).collect();
                let mut row = vec![x, p.g, p.h, g_inf, hs[0], hs[1], hs[2], rel_err(p.g, g_inf)];
                row.extend(hs.iter().map(|h| rel_err(p.h, *h)));
                t.rows.push(row);
            }
            Ok(t)
        }
    }
}

pub fn asymptotics(regime: Regime, xs: &[f64], format: Format) -> Result<String, CliError> {
    let t = asymptotics_table(regime, xs)?;
    match format {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => Ok(to_json_text(&t.to_json())),
        Format::Svg => Err(CliError::Usage("asymptotics supports csv and json".into())),
    }
}

/// Pi-normalised height `h(x)/(pi x)`; decreasing along the curve.
pub fn k_of(x: f64, h: f64) -> f64 {
    h / (PI * x)
}
