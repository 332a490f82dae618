//! JSON records for problem files and reports.
//!
//! A torus element is a list of records `[α_1, …, α_N, re, im]`; a matrix
//! element is `{"n": n, "entries": [...]}` with `n²` torus elements in
//! row-major order; a complex scalar is `[re, im]`; a constant matrix is a
//! list of rows of complex scalars. Axes in files are 1-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::connection::Connection;
use crate::error::{NctError, Result};
use crate::heisenberg::HeisenbergLattice;
use crate::matrix::{MatrixElement, ScalarMatrix};
use crate::moduli::ModuliPoint;
use crate::torus::{MultiIndex, ThetaMatrix, TorusElement};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub version: u32,
    #[serde(default)]
    pub theta: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub elements: BTreeMap<String, ElementRecord>,
    #[serde(default)]
    pub connection: Option<ConnectionRecord>,
    #[serde(default)]
    pub connections: Option<Vec<ConnectionRecord>>,
    #[serde(default)]
    pub points: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub lattice: Option<LatticeRecord>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElementRecord {
    Torus(Vec<Vec<f64>>),
    Matrix(MatrixRecord),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub n: usize,
    pub entries: Vec<Vec<Vec<f64>>>,
}

/// An element given inline or by name.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Name(String),
    Inline(ElementRecord),
}

/// Exactly one of `h`, `constant`, `trivial`; `gauge` elements are applied
/// in order, `∇ ↦ γ_{g_1}(∇) ↦ γ_{g_2}(γ_{g_1}(∇)) …`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionRecord {
    #[serde(default)]
    pub h: Option<Vec<ElementRef>>,
    #[serde(default)]
    pub constant: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(default)]
    pub trivial: bool,
    #[serde(default)]
    pub gauge: Vec<ElementRef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRecord {
    pub p: usize,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub op: Option<String>,
    #[serde(default)]
    pub args: Vec<String>,
    /// 1-based.
    #[serde(default)]
    pub axis: Option<usize>,
    #[serde(default)]
    pub gauge: Option<String>,
    #[serde(default)]
    pub window: Option<i32>,
    #[serde(default)]
    pub tol: Option<f64>,
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let p: Problem = serde_json::from_str(text).map_err(|e| NctError::Input(format!("schema: {e}")))?;
    if p.version != FORMAT_VERSION {
        return Err(NctError::Input(format!("unsupported version {}", p.version)));
    }
    Ok(p)
}

/// An element of `A_θ` or of `M_n(A_θ)`.
#[derive(Debug, Clone)]
pub enum Element {
    Torus(TorusElement<f64>),
    Matrix(MatrixElement<f64>),
}

impl Element {
    /// Views a torus element as a `1×1` matrix.
    pub fn into_matrix(self) -> MatrixElement<f64> {
        match self {
            Element::Torus(e) => {
                let theta = Arc::clone(e.theta());
                MatrixElement::from_entries(&theta, 1, vec![e]).expect("1x1")
            }
            Element::Matrix(m) => m,
        }
    }
}

pub struct Context<'a> {
    pub theta: Arc<ThetaMatrix<f64>>,
    problem: &'a Problem,
}

impl<'a> Context<'a> {
    pub fn new(problem: &'a Problem) -> Result<Self> {
        let rows = problem.theta.clone().ok_or_else(|| NctError::Input("missing theta".into()))?;
        Ok(Self { theta: Arc::new(ThetaMatrix::new(rows)?), problem })
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn torus(&self, records: &[Vec<f64>]) -> Result<TorusElement<f64>> {
        let dim = self.dim();
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            if r.len() != dim + 2 {
                return Err(NctError::Input(format!("term record of length {} for N = {dim}", r.len())));
            }
            let mut alpha = Vec::with_capacity(dim);
            for &a in &r[..dim] {
                if a.fract() != 0.0 || a.abs() > i32::MAX as f64 {
                    return Err(NctError::Input(format!("non-integer index component {a}")));
                }
                alpha.push(a as i32);
            }
            let (re, im) = (r[dim], r[dim + 1]);
            if !re.is_finite() || !im.is_finite() {
                return Err(NctError::Input("non-finite coefficient".into()));
            }
            terms.push((MultiIndex::new(&alpha), Complex::new(re, im)));
        }
        TorusElement::from_terms(&self.theta, terms)
    }

    pub fn element(&self, rec: &ElementRecord) -> Result<Element> {
        match rec {
            ElementRecord::Torus(r) => Ok(Element::Torus(self.torus(r)?)),
            ElementRecord::Matrix(m) => {
                let entries = m.entries.iter().map(|r| self.torus(r)).collect::<Result<Vec<_>>>()?;
                Ok(Element::Matrix(MatrixElement::from_entries(&self.theta, m.n, entries)?))
            }
        }
    }

    pub fn named(&self, name: &str) -> Result<Element> {
        let rec = self.problem.elements.get(name).ok_or_else(|| NctError::Input(format!("unknown element {name:?}")))?;
        self.element(rec)
    }

    pub fn resolve(&self, r: &ElementRef) -> Result<Element> {
        match r {
            ElementRef::Name(s) => self.named(s),
            ElementRef::Inline(rec) => self.element(rec),
        }
    }

    pub fn rank(&self) -> Result<usize> {
        self.problem.n.ok_or_else(|| NctError::Input("missing n".into()))
    }

    pub fn connection(&self, rec: &ConnectionRecord, tol: f64) -> Result<Connection<f64>> {
        let given = rec.h.is_some() as u8 + rec.constant.is_some() as u8 + rec.trivial as u8;
        if given != 1 {
            return Err(NctError::Input("connection needs exactly one of h, constant, trivial".into()));
        }
        let mut conn = if let Some(h) = &rec.h {
            let h = h.iter().map(|r| Ok(self.resolve(r)?.into_matrix())).collect::<Result<Vec<_>>>()?;
            let n = h.first().map_or(0, MatrixElement::n);
            Connection::new(&self.theta, n, h)?
        } else if let Some(c) = &rec.constant {
            let lambdas = c.iter().map(|m| scalar_matrix(m)).collect::<Result<Vec<_>>>()?;
            if lambdas.is_empty() {
                return Err(NctError::Input("empty constant family".into()));
            }
            Connection::constant(&self.theta, &lambdas, tol)?
        } else {
            Connection::trivial(&self.theta, self.rank()?)
        };
        for g in &rec.gauge {
            let u = self.resolve(g)?.into_matrix();
            conn = conn.gauge_transform(&u, tol)?;
        }
        Ok(conn)
    }
}

pub fn scalar_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ScalarMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(NctError::Input("constant matrix must be square and nonempty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}

pub fn lattice(rec: &LatticeRecord) -> Result<HeisenbergLattice<f64>> {
    let n = 2 * rec.p;
    if rec.p == 0 || rec.g.len() != n || rec.g.iter().any(|r| r.len() != n) {
        return Err(NctError::Input(format!("G must be {n}x{n} for p = {}", rec.p)));
    }
    HeisenbergLattice::from_rows(rec.p, &rec.g)
}

/// Writes `-0.0` as `0.0`.
fn num(x: f64) -> f64 {
    x + 0.0
}

pub fn complex_value(c: Complex<f64>) -> Value {
    json!([num(c.re), num(c.im)])
}

pub fn torus_value(e: &TorusElement<f64>) -> Value {
    let terms: Vec<Value> = e
        .terms()
        .map(|(a, c)| {
            let mut rec: Vec<Value> = a.components().iter().map(|&x| json!(x)).collect();
            rec.push(json!(num(c.re)));
            rec.push(json!(num(c.im)));
            Value::Array(rec)
        })
        .collect();
    Value::Array(terms)
}

pub fn matrix_value(m: &MatrixElement<f64>) -> Value {
    json!({ "n": m.n(), "entries": m.entries().iter().map(torus_value).collect::<Vec<_>>() })
}

pub fn element_value(e: &Element) -> Value {
    match e {
        Element::Torus(t) => torus_value(t),
        Element::Matrix(m) => matrix_value(m),
    }
}

pub fn scalar_matrix_value(m: &ScalarMatrix<f64>) -> Value {
    let rows: Vec<Value> =
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect();
    Value::Array(rows)
}

pub fn real_matrix_value(m: &DMatrix<f64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| num(m[(i, j)])).collect::<Vec<_>>())).collect();
    Value::Array(rows)
}

pub fn theta_value(t: &ThetaMatrix<f64>) -> Value {
    let rows: Vec<Vec<f64>> = t.rows().into_iter().map(|r| r.into_iter().map(num).collect()).collect();
    json!(rows)
}

pub fn point_value(p: &ModuliPoint<f64>) -> Value {
    json!({ "n": p.n(), "N": p.dim(), "coords": p.coords() })
}
