//! Model files: TOML documents with a `[reduced]` or a `[full]` section.
//!
//! ```toml
//! [reduced]
//! psi1 = "sin(2*s)/(2 + cos(s))"
//! psi2 = "-sin(s)/(2 + cos(s))"
//! topology = "circle"
//! period = "2*pi"
//!
//! [constants]          # optional, usable in every expression
//! lambda = 0.5
//!
//! [options]            # optional overrides of numeric defaults
//! grid = 2048
//! ```
//!
//! A `[full]` section declares `n` and the entries `D.i.j`, `P`, `B.i.j`,
//! `Bperp.i`, `h.i`, `sigma.i` (1-based), with expressions in `q1..qn`
//! (`sigma` in `s`).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

use crate::expr::{Expr, ExprError};
use crate::reduction::{FullModel, FullModelParts, ReducedDynamics, ReductionError, Topology, ValidationOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cannot read model file: {0}")]
    Io(String),
    #[error("malformed model file: {0}")]
    Syntax(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("in `{key}`: {source}")]
    Expr { key: String, source: ExprError },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Numeric settings a model file may override. Unset fields fall back to
/// the library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ModelOptions {
    pub grid: Option<usize>,
    pub quad_tol: Option<f64>,
    pub eps_m: Option<f64>,
    pub eps_v: Option<f64>,
    pub line_half_width: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub eps_close: Option<f64>,
    pub eps_eq: Option<f64>,
    pub escape_factor: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullSpec {
    pub n: usize,
    #[serde(rename = "D")]
    pub d: Vec<Vec<String>>,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    #[serde(rename = "Bperp")]
    pub bperp: Vec<String>,
    pub h: Vec<String>,
    pub sigma: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "section", rename_all = "snake_case")]
pub enum ModelSpec {
    Reduced { psi1: String, psi2: String },
    Full(FullSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Model {
    pub spec: ModelSpec,
    #[serde(serialize_with = "ser_topology")]
    pub topology: Topology,
    pub constants: BTreeMap<String, f64>,
    pub options: ModelOptions,
}

fn ser_topology<S: serde::Serializer>(t: &Topology, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(None)?;
    m.serialize_entry("topology", t.name())?;
    if let Some(p) = t.period() {
        m.serialize_entry("period", &p)?;
    }
    m.end()
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Invalid(msg.into())
}

/// A constant-valued number or expression string (e.g. `"2*pi"`).
fn number(v: &Value, key: &str, constants: &BTreeMap<String, f64>) -> Result<f64, ModelError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => {
            let e = Expr::parse_with_constants(s, &[], constants).map_err(|source| ModelError::Expr { key: key.into(), source })?;
            e.eval(&[]).map_err(|source| ModelError::Expr { key: key.into(), source })
        }
        _ => Err(invalid(format!("`{key}` must be a number or a constant expression"))),
    }
}

fn string(t: &Table, key: &str, section: &str) -> Result<String, ModelError> {
    match t.get(key) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(invalid(format!("`{section}.{key}` must be a string"))),
        None => Err(invalid(format!("missing `{section}.{key}`"))),
    }
}

fn check_keys(t: &Table, allowed: &[&str], section: &str) -> Result<(), ModelError> {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(invalid(format!("unknown key `{k}` in [{section}]")));
        }
    }
    Ok(())
}

/// 1-based index key within `1..=n`.
fn index(key: &str, n: usize, path: &str) -> Result<usize, ModelError> {
    match key.parse::<usize>() {
        Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
        _ => Err(invalid(format!("index `{key}` in `{path}` is outside 1..={n}"))),
    }
}

fn vector(t: &Table, key: &str, len: usize) -> Result<Vec<String>, ModelError> {
    let Some(v) = t.get(key) else { return Err(invalid(format!("missing `full.{key}`"))) };
    let Value::Table(tab) = v else { return Err(invalid(format!("`full.{key}` must be indexed as {key}.i"))) };
    let mut out = vec![None; len];
    for (k, e) in tab {
        let i = index(k, len, key)?;
        let Value::String(s) = e else { return Err(invalid(format!("`{key}.{k}` must be a string"))) };
        out[i] = Some(s.clone());
    }
    out.into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| invalid(format!("missing `{key}.{}`", i + 1))))
        .collect()
}

fn matrix(t: &Table, key: &str, rows: usize, cols: usize) -> Result<Vec<Vec<String>>, ModelError> {
    let Some(v) = t.get(key) else { return Err(invalid(format!("missing `full.{key}`"))) };
    let Value::Table(tab) = v else { return Err(invalid(format!("`full.{key}` must be indexed as {key}.i.j"))) };
    let mut out = vec![vec![None; cols]; rows];
    for (ki, row) in tab {
        let i = index(ki, rows, key)?;
        let Value::Table(row) = row else { return Err(invalid(format!("`{key}.{ki}` must be indexed as {key}.i.j"))) };
        for (kj, e) in row {
            let j = index(kj, cols, &format!("{key}.{ki}"))?;
            let Value::String(s) = e else { return Err(invalid(format!("`{key}.{ki}.{kj}` must be a string"))) };
            out[i][j] = Some(s.clone());
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.into_iter()
                .enumerate()
                .map(|(j, s)| s.ok_or_else(|| invalid(format!("missing `{key}.{}.{}`", i + 1, j + 1))))
                .collect()
        })
        .collect()
}

fn topology(t: &Table, section: &str, constants: &BTreeMap<String, f64>) -> Result<Topology, ModelError> {
    let name = string(t, "topology", section)?;
    match (name.as_str(), t.get("period")) {
        ("circle", Some(p)) => {
            let period = number(p, &format!("{section}.period"), constants)?;
            if !(period.is_finite() && period > 0.0) {
                return Err(invalid(format!("period must be finite and positive, got {period}")));
            }
            Ok(Topology::Circle { period })
        }
        ("circle", None) => Err(invalid("topology \"circle\" requires a period")),
        ("line", None) => Ok(Topology::Line),
        ("line", Some(_)) => Err(invalid("topology \"line\" takes no period")),
        (other, _) => Err(invalid(format!("unknown topology `{other}` (expected \"circle\" or \"line\")"))),
    }
}

fn options(t: &Table, constants: &BTreeMap<String, f64>) -> Result<ModelOptions, ModelError> {
    let mut o = ModelOptions::default();
    for (k, v) in t {
        let x = number(v, &format!("options.{k}"), constants)?;
        let slot = match k.as_str() {
            "grid" => {
                if !(x >= 1.0 && x.fract() == 0.0) {
                    return Err(invalid("options.grid must be a positive integer"));
                }
                o.grid = Some(x as usize);
                continue;
            }
            "quad_tol" => &mut o.quad_tol,
            "eps_m" => &mut o.eps_m,
            "eps_v" => &mut o.eps_v,
            "line_half_width" => &mut o.line_half_width,
            "rtol" => &mut o.rtol,
            "atol" => &mut o.atol,
            "eps_close" => &mut o.eps_close,
            "eps_eq" => &mut o.eps_eq,
            "escape_factor" => &mut o.escape_factor,
            "k1" => &mut o.k1,
            "k2" => &mut o.k2,
            _ => return Err(invalid(format!("unknown option `{k}`"))),
        };
        if !x.is_finite() {
            return Err(invalid(format!("options.{k} must be finite")));
        }
        *slot = Some(x);
    }
    Ok(o)
}

impl Model {
    pub fn from_path(path: &std::path::Path) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Model, ModelError> {
        let doc: Table = text.parse().map_err(|e: toml::de::Error| ModelError::Syntax(e.message().to_string()))?;
        check_keys(&doc, &["reduced", "full", "constants", "options"], "top level")?;
        let section = |name: &str| -> Result<Option<&Table>, ModelError> {
            match doc.get(name) {
                None => Ok(None),
                Some(Value::Table(t)) => Ok(Some(t)),
                Some(_) => Err(invalid(format!("`{name}` must be a section"))),
            }
        };
        let mut constants = BTreeMap::new();
        if let Some(c) = section("constants")? {
            for (k, v) in c {
                let builtin = BTreeMap::new();
                constants.insert(k.clone(), number(v, &format!("constants.{k}"), &builtin)?);
            }
        }
        let options = match section("options")? {
            Some(t) => options(t, &constants)?,
            None => ModelOptions::default(),
        };
        let (spec, topology) = match (section("reduced")?, section("full")?) {
            (Some(_), Some(_)) => return Err(invalid("exactly one of [reduced] or [full] must be present, found both")),
            (None, None) => return Err(invalid("exactly one of [reduced] or [full] must be present, found neither")),
            (Some(r), None) => {
                check_keys(r, &["psi1", "psi2", "topology", "period"], "reduced")?;
                let spec = ModelSpec::Reduced { psi1: string(r, "psi1", "reduced")?, psi2: string(r, "psi2", "reduced")? };
                (spec, topology(r, "reduced", &constants)?)
            }
            (None, Some(f)) => {
                check_keys(f, &["n", "D", "P", "B", "Bperp", "h", "sigma", "topology", "period"], "full")?;
                let n = match f.get("n") {
                    Some(Value::Integer(n)) if *n >= 2 => *n as usize,
                    Some(_) => return Err(invalid("`full.n` must be an integer of at least 2")),
                    None => return Err(invalid("missing `full.n`")),
                };
                let spec = FullSpec {
                    n,
                    d: matrix(f, "D", n, n)?,
                    p: string(f, "P", "full")?,
                    b: matrix(f, "B", n, n - 1)?,
                    bperp: vector(f, "Bperp", n)?,
                    h: vector(f, "h", n - 1)?,
                    sigma: vector(f, "sigma", n)?,
                };
                (ModelSpec::Full(spec), topology(f, "full", &constants)?)
            }
        };
        let model = Model { spec, topology, constants, options };
        // surface expression errors at load time
        match &model.spec {
            ModelSpec::Reduced { .. } => {
                model.reduced_exprs()?;
            }
            ModelSpec::Full(_) => {
                model.full_parts()?;
            }
        }
        Ok(model)
    }

    fn expr(&self, src: &str, vars: &[&str], key: &str) -> Result<Expr, ModelError> {
        Expr::parse_with_constants(src, vars, &self.constants).map_err(|source| ModelError::Expr { key: key.into(), source })
    }

    fn reduced_exprs(&self) -> Result<(Expr, Expr), ModelError> {
        let ModelSpec::Reduced { psi1, psi2 } = &self.spec else { unreachable!() };
        Ok((self.expr(psi1, &["s"], "reduced.psi1")?, self.expr(psi2, &["s"], "reduced.psi2")?))
    }

    pub fn full_parts(&self) -> Result<FullModelParts, ModelError> {
        let ModelSpec::Full(f) = &self.spec else { return Err(invalid("not a [full] model")) };
        let names = FullModel::q_vars(f.n);
        let qv: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let q = |src: &str, key: String| self.expr(src, &qv, &key);
        let d = (0..f.n)
            .map(|i| (0..f.n).map(|j| q(&f.d[i][j], format!("D.{}.{}", i + 1, j + 1))).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let b = (0..f.n)
            .map(|i| (0..f.n - 1).map(|j| q(&f.b[i][j], format!("B.{}.{}", i + 1, j + 1))).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let bperp = f.bperp.iter().enumerate().map(|(i, e)| q(e, format!("Bperp.{}", i + 1))).collect::<Result<_, _>>()?;
        let h = f.h.iter().enumerate().map(|(i, e)| q(e, format!("h.{}", i + 1))).collect::<Result<_, _>>()?;
        let sigma =
            f.sigma.iter().enumerate().map(|(i, e)| self.expr(e, &["s"], &format!("sigma.{}", i + 1))).collect::<Result<_, _>>()?;
        Ok(FullModelParts { d, p: q(&f.p, "P".into())?, b, bperp, h, sigma, topology: self.topology })
    }

    pub fn is_full(&self) -> bool {
        matches!(self.spec, ModelSpec::Full(_))
    }

    /// Validated full model (`[full]` files only).
    pub fn full_model(&self) -> Result<FullModel, ModelError> {
        Ok(FullModel::new(self.full_parts()?, &ValidationOptions::default())?)
    }

    /// Reduced dynamics, computing the reduction for `[full]` files.
    pub fn reduced(&self) -> Result<ReducedDynamics, ModelError> {
        match &self.spec {
            ModelSpec::Reduced { .. } => {
                let (p1, p2) = self.reduced_exprs()?;
                use crate::function::ScalarFn;
                Ok(ReducedDynamics::new(ScalarFn::expr(p1), ScalarFn::expr(p2), self.topology)?)
            }
            ModelSpec::Full(_) => Ok(self.full_model()?.reduce()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"
[reduced]
psi1 = "sin(2*s)/(2 + cos(s))"
psi2 = "-sin(s)/(2 + cos(s))"
topology = "circle"
period = "2*pi"
"#;

    #[test]
    fn reduced_section() {
        let m = Model::parse(EX1).unwrap();
        assert_eq!(m.topology, Topology::Circle { period: std::f64::consts::TAU });
        let rd = m.reduced().unwrap();
        assert!((rd.psi1(1.0) - (2.0f64).sin() / (2.0 + 1.0f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn section_rules() {
        let both = format!("{EX1}\n[full]\nn = 2\n");
        assert!(matches!(Model::parse(&both), Err(ModelError::Invalid(_))));
        assert!(matches!(Model::parse("[options]\ngrid = 10\n"), Err(ModelError::Invalid(_))));
        let no_period = "[reduced]\npsi1 = \"0\"\npsi2 = \"0\"\ntopology = \"circle\"\n";
        assert!(matches!(Model::parse(no_period), Err(ModelError::Invalid(_))));
        let line_period = "[reduced]\npsi1 = \"0\"\npsi2 = \"0\"\ntopology = \"line\"\nperiod = 1\n";
        assert!(matches!(Model::parse(line_period), Err(ModelError::Invalid(_))));
        assert!(matches!(Model::parse("[reduced\n"), Err(ModelError::Syntax(_))));
    }

    #[test]
    fn expression_errors_name_the_key() {
        let bad = "[reduced]\npsi1 = \"sin(\"\npsi2 = \"0\"\ntopology = \"line\"\n";
        match Model::parse(bad) {
            Err(ModelError::Expr { key, .. }) => assert_eq!(key, "reduced.psi1"),
            other => panic!("{other:?}"),
        }
        let unknown = "[reduced]\npsi1 = \"q\"\npsi2 = \"0\"\ntopology = \"line\"\n";
        assert!(matches!(Model::parse(unknown), Err(ModelError::Expr { .. })));
    }

    #[test]
    fn constants_and_options() {
        let src = "[constants]\nlambda = 0.5\nw = \"pi/2\"\n[options]\ngrid = 1024\nrtol = 1e-8\n\
                   [reduced]\npsi1 = \"lambda*w\"\npsi2 = \"0\"\ntopology = \"circle\"\nperiod = 6\n";
        let m = Model::parse(src).unwrap();
        assert_eq!(m.options.grid, Some(1024));
        assert_eq!(m.options.rtol, Some(1e-8));
        assert!((m.reduced().unwrap().psi1(0.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(Model::parse(&src.replace("rtol", "bogus")).is_err());
    }

    #[test]
    fn full_indices_are_checked() {
        let src = r#"
[full]
n = 2
D.1.1 = "1"
D.1.2 = "0"
D.2.1 = "0"
D.2.3 = "1"
P = "0"
B.1.1 = "q1"
B.2.1 = "q2"
Bperp.1 = "-q2"
Bperp.2 = "q1"
h.1 = "q1^2 + q2^2 - 1"
sigma.1 = "cos(s)"
sigma.2 = "sin(s)"
topology = "circle"
period = "2*pi"
"#;
        assert!(matches!(Model::parse(src), Err(ModelError::Invalid(m)) if m.contains("outside")));
        let ok = Model::parse(&src.replace("D.2.3", "D.2.2")).unwrap();
        let rd = ok.reduced().unwrap();
        // free particle on the unit circle: s̈ = 0
        assert!(rd.psi1(0.4).abs() < 1e-12 && rd.psi2(0.4).abs() < 1e-12);
    }
}
