//! Dispatch from a parsed problem file to the library and back to a JSON
//! report. The binary in `main.rs` is a thin wrapper around [`run`].

use std::fmt;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::connection::{Connection, CurvatureClass};
use crate::error::{ErrorClass, NctError, Result};
use crate::heisenberg::{commutator_coefficient, integrability_report};
use crate::io::{self, Context, Element, Problem};
use crate::matrix::MatrixElement;
use crate::moduli::{canonicalize, matching, ModuliPoint};
use crate::spectral::{gauge_fix, GaugeFixFlag, GaugeFixOptions, TruncationWindow};

pub const DEFAULT_WINDOW: i32 = 8;
/// Admission tolerance for skew-adjointness, unitarity and commutation.
pub const ADMISSION_TOL: f64 = 1e-10;
/// Grid of canonical moduli coordinates when comparing points.
pub const CANONICAL_GRID: f64 = 1e-9;
pub const DEFAULT_EQUIV_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Algebra,
    Connection,
    Moduli,
    Equiv,
    Heisenberg,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Algebra => "algebra",
            Command::Connection => "connection",
            Command::Moduli => "moduli",
            Command::Equiv => "equiv",
            Command::Heisenberg => "heisenberg",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub window: Option<i32>,
    pub tol: Option<f64>,
    /// Seconds to record as `wall_time_s`; reports are only deterministic
    /// without it.
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

pub fn exit_code(err: &NctError) -> i32 {
    match err.class() {
        ErrorClass::Input => 2,
        ErrorClass::Precondition => 3,
        ErrorClass::NonConvergence => 4,
    }
}

fn class_name(err: &NctError) -> &'static str {
    match err.class() {
        ErrorClass::Input => "input",
        ErrorClass::Precondition => "precondition",
        ErrorClass::NonConvergence => "non-convergence",
    }
}

struct Section {
    op: Option<String>,
    outputs: Value,
    diagnostics: Value,
}

/// Runs one command on the raw contents of a problem file.
pub fn run(command: Command, input: &str, opts: &RunOptions) -> Outcome {
    let digest = Sha256::digest(input.as_bytes());
    let digest: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let mut report = Map::new();
    report.insert("command".into(), json!(command.to_string()));
    report.insert("input_sha256".into(), json!(digest));
    report.insert("seed".into(), json!(opts.seed));
    let result = io::parse_problem(input).and_then(|p| dispatch(command, &p, opts));
    let exit_code = match result {
        Ok(s) => {
            if let Some(op) = s.op {
                report.insert("op".into(), json!(op));
            }
            report.insert("status".into(), json!("ok"));
            report.insert("outputs".into(), s.outputs);
            report.insert("diagnostics".into(), s.diagnostics);
            0
        }
        Err(e) => {
            let code = exit_code(&e);
            report.insert("status".into(), json!("error"));
            report.insert(
                "error".into(),
                json!({ "class": class_name(&e), "exit_code": code, "message": e.to_string() }),
            );
            code
        }
    };
    if let Some(t) = opts.wall_time {
        report.insert("wall_time_s".into(), json!(t));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
    text.push('\n');
    Outcome { report: text, exit_code }
}

fn dispatch(command: Command, p: &Problem, opts: &RunOptions) -> Result<Section> {
    match command {
        Command::Algebra => cmd_algebra(p),
        Command::Connection => cmd_connection(p, opts),
        Command::Moduli => cmd_moduli(p, opts),
        Command::Equiv => cmd_equiv(p, opts),
        Command::Heisenberg => cmd_heisenberg(p),
    }
}

fn op_name(p: &Problem, allowed: &[&str]) -> Result<String> {
    let op = p.params.op.clone().ok_or_else(|| NctError::Input("missing params.op".into()))?;
    if !allowed.contains(&op.as_str()) {
        return Err(NctError::Input(format!("unknown op {op:?}, expected one of {allowed:?}")));
    }
    Ok(op)
}

fn args(p: &Problem, count: usize) -> Result<&[String]> {
    if p.params.args.len() != count {
        return Err(NctError::Input(format!("expected {count} args, found {}", p.params.args.len())));
    }
    Ok(&p.params.args)
}

/// 1-based in the file, 0-based in the library.
fn axis(p: &Problem, dim: usize) -> Result<usize> {
    match p.params.axis {
        Some(a) if (1..=dim).contains(&a) => Ok(a - 1),
        Some(a) => Err(NctError::Input(format!("axis {a} outside 1..={dim}"))),
        None => Err(NctError::Input("missing params.axis".into())),
    }
}

fn same_kind(a: Element, b: Element) -> Result<(Element, Element)> {
    match (a, b) {
        (Element::Torus(a), Element::Torus(b)) => Ok((Element::Torus(a), Element::Torus(b))),
        (a, b) => Ok((Element::Matrix(a.into_matrix()), Element::Matrix(b.into_matrix()))),
    }
}

fn cmd_algebra(p: &Problem) -> Result<Section> {
    let op = op_name(p, &["mul", "adjoint", "trace", "derive", "inner"])?;
    let ctx = Context::new(p)?;
    let outputs = match op.as_str() {
        "mul" | "inner" => {
            let a = args(p, 2)?;
            let (x, y) = same_kind(ctx.named(&a[0])?, ctx.named(&a[1])?)?;
            match (op.as_str(), x, y) {
                ("mul", Element::Torus(x), Element::Torus(y)) => {
                    json!({ "result": io::torus_value(&x.multiply(&y)?) })
                }
                ("mul", Element::Matrix(x), Element::Matrix(y)) => {
                    json!({ "result": io::matrix_value(&x.mat_multiply(&y)?) })
                }
                (_, Element::Torus(x), Element::Torus(y)) => json!({ "result": io::complex_value(x.inner(&y)?) }),
                (_, Element::Matrix(x), Element::Matrix(y)) => {
                    json!({ "result": io::complex_value(y.mat_adjoint().mat_multiply(&x)?.mat_trace()) })
                }
                _ => unreachable!("same_kind returns matching variants"),
            }
        }
        "adjoint" => {
            let a = args(p, 1)?;
            let r = match ctx.named(&a[0])? {
                Element::Torus(x) => Element::Torus(x.adjoint()),
                Element::Matrix(x) => Element::Matrix(x.mat_adjoint()),
            };
            json!({ "result": io::element_value(&r) })
        }
        "trace" => {
            let a = args(p, 1)?;
            let t = match ctx.named(&a[0])? {
                Element::Torus(x) => x.trace(),
                Element::Matrix(x) => x.mat_trace(),
            };
            json!({ "result": io::complex_value(t) })
        }
        _ => {
            let a = args(p, 1)?;
            let k = axis(p, ctx.dim())?;
            let r = match ctx.named(&a[0])? {
                Element::Torus(x) => Element::Torus(x.derive(k)?),
                Element::Matrix(x) => Element::Matrix(x.mat_derive(k)?),
            };
            json!({ "result": io::element_value(&r) })
        }
    };
    Ok(Section { op: Some(op), outputs, diagnostics: json!({}) })
}

fn connection_of(p: &Problem, ctx: &Context<'_>) -> Result<Connection<f64>> {
    let rec = p.connection.as_ref().ok_or_else(|| NctError::Input("missing connection".into()))?;
    ctx.connection(rec, ADMISSION_TOL)
}

fn h_value(conn: &Connection<f64>) -> Value {
    Value::Array(conn.h().iter().map(io::matrix_value).collect())
}

fn cmd_connection(p: &Problem, opts: &RunOptions) -> Result<Section> {
    let op = op_name(p, &["curvature", "classify", "ym", "gauge"])?;
    let ctx = Context::new(p)?;
    let conn = connection_of(p, &ctx)?;
    let tol = opts.tol.or(p.params.tol).unwrap_or(ADMISSION_TOL);
    let gauge = |name: &str| -> Result<MatrixElement<f64>> { Ok(ctx.named(name)?.into_matrix()) };
    let (outputs, diagnostics) = match op.as_str() {
        "curvature" => {
            let mut entries = Vec::new();
            for i in 0..conn.dim() {
                for j in (i + 1)..conn.dim() {
                    let c = conn.curvature(i, j)?;
                    entries.push(json!({ "i": i + 1, "j": j + 1, "value": io::matrix_value(&c) }));
                }
            }
            (json!({ "curvature": entries }), json!({ "yang_mills": conn.yang_mills() }))
        }
        "classify" => {
            let r = conn.classify_curvature(tol);
            let scalars = match (&r.classification, &r.scalars) {
                (CurvatureClass::NonConstant, _) | (_, None) => Value::Null,
                (_, Some(s)) => io::scalar_matrix_value(s),
            };
            (
                json!({ "classification": r.classification.to_string(), "scalars": scalars }),
                json!({ "residual": r.residual, "tol": tol }),
            )
        }
        "ym" => {
            let ym = conn.yang_mills();
            let diagnostics = match &p.params.gauge {
                Some(name) => {
                    let after = conn.gauge_transform(&gauge(name)?, tol)?.yang_mills();
                    json!({ "gauge": name, "yang_mills_gauged": after, "gauge_difference": (after - ym).abs() })
                }
                None => json!({}),
            };
            (json!({ "yang_mills": ym }), diagnostics)
        }
        _ => {
            let name = p.params.gauge.as_ref().ok_or_else(|| NctError::Input("missing params.gauge".into()))?;
            let transformed = conn.gauge_transform(&gauge(name)?, tol)?;
            let (before, after) = (conn.yang_mills(), transformed.yang_mills());
            (
                json!({ "h": h_value(&transformed) }),
                json!({ "gauge": name, "yang_mills_before": before, "yang_mills_after": after,
                        "gauge_difference": (after - before).abs() }),
            )
        }
    };
    Ok(Section { op: Some(op), outputs, diagnostics })
}

fn gauge_options(opts: &RunOptions) -> GaugeFixOptions<f64> {
    GaugeFixOptions { seed: opts.seed, ..GaugeFixOptions::default() }
}

fn window_size(p: &Problem, opts: &RunOptions) -> Result<i32> {
    let m = opts.window.or(p.params.window).unwrap_or(DEFAULT_WINDOW);
    if m < 1 {
        return Err(NctError::Input(format!("window M = {m} must be positive")));
    }
    Ok(m)
}

fn flag_name(f: &GaugeFixFlag) -> &'static str {
    match f {
        GaugeFixFlag::ResidualAboveTolerance => "ResidualAboveTolerance",
        GaugeFixFlag::BoundaryMass => "BoundaryMass",
        GaugeFixFlag::NotUnitary => "NotUnitary",
    }
}

/// Gauge-fixes and canonicalizes, returning the point and its diagnostics.
fn fix(conn: &Connection<f64>, m: i32, gopts: &GaugeFixOptions<f64>, grid: f64) -> Result<(ModuliPoint<f64>, Value)> {
    let window = TruncationWindow::new(m, conn.n(), conn.dim());
    let r = gauge_fix(conn, &window, gopts)?;
    let point = canonicalize(&r.lambdas, grid)?;
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            json!({
                "h_eigenvalue": s.h_eigenvalue,
                "lambdas": s.lambdas.iter().map(|&l| io::complex_value(l)).collect::<Vec<_>>(),
                "residual": s.residual,
                "boundary_mass": s.boundary_mass,
            })
        })
        .collect();
    let diagnostics = json!({
        "window": m,
        "residual": r.residual,
        "isometry_log": r.isometry_log,
        "ground_energy": r.ground_energy,
        "unitarity_defect": r.unitarity_defect,
        "boundary_mass": r.boundary_mass,
        "flags": r.flags.iter().map(flag_name).collect::<Vec<_>>(),
        "lambdas": r.lambdas.iter().map(io::scalar_matrix_value).collect::<Vec<_>>(),
        "steps": steps,
    });
    Ok((point, diagnostics))
}

fn cmd_moduli(p: &Problem, opts: &RunOptions) -> Result<Section> {
    let ctx = Context::new(p)?;
    let conn = connection_of(p, &ctx)?;
    let m = window_size(p, opts)?;
    let grid = opts.tol.or(p.params.tol).unwrap_or(CANONICAL_GRID);
    if !(grid > 0.0 && grid < 0.5) {
        return Err(NctError::Input(format!("tol {grid} outside (0, 0.5)")));
    }
    let (point, diagnostics) = fix(&conn, m, &gauge_options(opts), grid)?;
    Ok(Section { op: None, outputs: json!({ "point": io::point_value(&point) }), diagnostics })
}

fn cmd_equiv(p: &Problem, opts: &RunOptions) -> Result<Section> {
    let tol = opts.tol.or(p.params.tol).unwrap_or(DEFAULT_EQUIV_TOL);
    let (points, diagnostics) = match (&p.connections, &p.points) {
        (Some(cs), None) if cs.len() == 2 => {
            let ctx = Context::new(p)?;
            let m = window_size(p, opts)?;
            let gopts = gauge_options(opts);
            let mut points = Vec::new();
            let mut diags = Vec::new();
            for rec in cs {
                let conn = ctx.connection(rec, ADMISSION_TOL)?;
                let (pt, d) = fix(&conn, m, &gopts, CANONICAL_GRID)?;
                points.push(pt);
                diags.push(d);
            }
            (points, json!({ "gauge_fix": diags, "tol": tol }))
        }
        (None, Some(ps)) if ps.len() == 2 => {
            let points = ps.iter().map(|c| ModuliPoint::new(c.clone())).collect::<Result<Vec<_>>>()?;
            (points, json!({ "tol": tol }))
        }
        _ => return Err(NctError::Input("equiv needs exactly two connections or exactly two points".into())),
    };
    let rho = matching(&points[0], &points[1], tol)?;
    let outputs = json!({
        "equivalent": rho.is_some(),
        "permutation": rho,
        "points": points.iter().map(io::point_value).collect::<Vec<_>>(),
    });
    Ok(Section { op: None, outputs, diagnostics })
}

fn cmd_heisenberg(p: &Problem) -> Result<Section> {
    let rec = p.lattice.as_ref().ok_or_else(|| NctError::Input("missing lattice".into()))?;
    let lat = io::lattice(rec)?;
    let r = integrability_report(&lat)?;
    let pp = lat.p();
    let mut delta_residual: f64 = 0.0;
    for l in 0..2 * pp {
        let g = lat.generator(l);
        for k in 0..2 * pp {
            let c = commutator_coefficient(&r.coefficients, k, &g[..pp], &g[pp..])?;
            let want = if k == l { 1.0 } else { 0.0 };
            delta_residual = delta_residual.max((c - want).abs());
        }
    }
    let outputs = json!({
        "p": pp,
        "G": io::real_matrix_value(lat.generators()),
        "K": io::real_matrix_value(r.coefficients.k()),
        "theta": io::theta_value(&r.theta),
        "dual_G": io::real_matrix_value(r.dual.generators()),
        "dual_K": io::real_matrix_value(r.dual_coefficients.k()),
        "dual_theta": io::theta_value(&r.dual_theta),
        "epsilon": io::real_matrix_value(&r.epsilon),
        "epsilon_det": r.epsilon_det,
        "curvature": io::real_matrix_value(&r.curvature),
        "dual_curvature": io::real_matrix_value(&r.dual_curvature),
        "conventions": {
            "coefficients": "[nabla_k, u_g] = (K g)_k u_g",
            "curvature": "[nabla_k, nabla_l] = -i curvature_kl",
            "theta": "u_k u_l = exp(2 pi i theta_kl) u_l u_k, upper entries in [0,1)",
        },
        "flags": {
            "curvature_constant": r.curvature_constant,
            "curvature_zero": r.curvature_norm <= 1e-10,
            "epsilon_invertible": r.epsilon_invertible,
            "pairing_integral": r.pairing_integral,
        },
    });
    let diagnostics = json!({
        "condition": r.condition,
        "inverse_residual": r.coefficients.residual(),
        "dual_inverse_residual": r.dual_coefficients.residual(),
        "generator_delta_residual": delta_residual,
        "epsilon_residual": r.epsilon_residual,
        "pairing_defect": r.pairing_defect,
        "curvature_norm": r.curvature_norm,
    });
    Ok(Section { op: None, outputs, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(command: Command, text: &str) -> Value {
        let out = run(command, text, &RunOptions::default());
        assert_eq!(out.exit_code, 0, "{}", out.report);
        serde_json::from_str(&out.report).unwrap()
    }

    #[test]
    fn algebra_examples() {
        let base = r#""version":1,"theta":[[0,-0.3],[0.3,0]],
            "elements":{"u1":[[1,0,1,0]],"u2":[[0,1,1,0]],"one":[[0,0,1,0]]}"#;
        let v = run_ok(Command::Algebra, &format!(r#"{{{base},"params":{{"op":"mul","args":["u2","u1"]}}}}"#));
        let rec = &v["outputs"]["result"][0];
        let phase = std::f64::consts::TAU * 0.3;
        assert_eq!(rec[0], 1);
        assert_eq!(rec[1], 1);
        assert!((rec[2].as_f64().unwrap() - phase.cos()).abs() < 1e-15);
        assert!((rec[3].as_f64().unwrap() - phase.sin()).abs() < 1e-15);
        let v = run_ok(Command::Algebra, &format!(r#"{{{base},"params":{{"op":"trace","args":["one"]}}}}"#));
        assert_eq!(v["outputs"]["result"], json!([1.0, 0.0]));
        let v = run_ok(Command::Algebra, &format!(r#"{{{base},"params":{{"op":"derive","args":["u1"],"axis":1}}}}"#));
        assert_eq!(v["outputs"]["result"], json!([[1, 0, 0.0, 1.0]]));
    }

    #[test]
    fn exit_codes() {
        let cases = [
            (Command::Algebra, "not json", 2),
            (Command::Algebra, r#"{"version":1,"theta":[[0]],"params":{"op":"pow"}}"#, 2),
            (Command::Heisenberg, r#"{"version":1,"lattice":{"p":1,"G":[[1,2],[2,4]]}}"#, 3),
            (
                Command::Moduli,
                r#"{"version":1,"theta":[[0,0],[0,0]],"connection":{"h":[[],[[1,0,0,1],[-1,0,0,1]]]}}"#,
                3,
            ),
        ];
        for (c, text, code) in cases {
            let out = run(c, text, &RunOptions::default());
            assert_eq!(out.exit_code, code, "{}", out.report);
            let v: Value = serde_json::from_str(&out.report).unwrap();
            assert_eq!(v["status"], "error");
        }
    }

    #[test]
    fn moduli_of_trivial_is_zero() {
        let v = run_ok(Command::Moduli, r#"{"version":1,"theta":[[0,0.1],[-0.1,0]],"n":2,"connection":{"trivial":true}}"#);
        assert_eq!(v["outputs"]["point"]["coords"], json!([[0.0, 0.0], [0.0, 0.0]]));
    }

    #[test]
    fn equiv_points() {
        let v = run_ok(Command::Equiv, r#"{"version":1,"points":[[[0.1]],[[0.3]]]}"#);
        assert_eq!(v["outputs"]["equivalent"], false);
        let v = run_ok(Command::Equiv, r#"{"version":1,"points":[[[0.1,0.2],[0.5,0.6]],[[0.5,0.6],[1.1,0.2]]]}"#);
        assert_eq!(v["outputs"]["equivalent"], true);
    }
}
