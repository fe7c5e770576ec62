use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::{Classification, Kind, VirtualPair};
use crate::dynamics::{OrbitClass, OrbitDiagnostics, OrbitTag, RateFit, TrajectoryMeta};
use crate::lagrangian::Descriptor;
use crate::model::Model;
use crate::reduction::ReducedDynamics;

pub const SCHEMA: &str = "vhc-report/1";

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub grid: usize,
    pub quad_tol: f64,
    pub eps_m: f64,
    pub eps_v: f64,
    pub rtol: f64,
    pub atol: f64,
    pub eps_close: f64,
    pub eps_eq: f64,
    pub escape_factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReducedEcho {
    pub psi1: String,
    pub psi2: String,
    pub topology: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl ReducedEcho {
    pub fn new(rd: &ReducedDynamics) -> Self {
        let show = |f: &crate::function::ScalarFn| match f.as_expr() {
            Some(e) => e.to_canonical(),
            None => f.to_string(),
        };
        ReducedEcho { psi1: show(rd.psi1_fn()), psi2: show(rd.psi2_fn()), topology: rd.topology().name(), period: rd.period() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    #[serde(rename = "MT")]
    pub mt: Option<f64>,
    #[serde(rename = "VT")]
    pub vt: Option<f64>,
    pub int_psi2: Option<f64>,
    pub vmin: f64,
    pub vmax: f64,
}

impl PairSummary {
    pub fn new(vp: &VirtualPair) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        PairSummary { mt: finite(vp.mt()), vt: finite(vp.vt()), int_psi2: finite(vp.int_psi2()), vmin: vp.vmin(), vmax: vp.vmax() }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LimitCycleBlock {
    pub hypotheses: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seam_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub i: usize,
    pub j: usize,
    pub s0: f64,
    pub sdot0: f64,
    pub tag: OrbitTag,
    pub diagnostics: OrbitDiagnostics,
    pub meta: TrajectoryMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
}

impl TrajectoryReport {
    pub fn new(i: usize, j: usize, s0: f64, sdot0: f64, class: &OrbitClass, meta: TrajectoryMeta) -> Self {
        TrajectoryReport { i, j, s0, sdot0, tag: class.tag, diagnostics: class.diagnostics.clone(), meta, energy_drift: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackingBlock {
    pub k1: f64,
    pub k2: f64,
    pub horizon: f64,
    pub sup_error: f64,
    pub max_constraint_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformBlock {
    pub mode: &'static str,
    pub t1: f64,
    pub t2: f64,
    pub degree: i8,
    pub closed_form: bool,
    pub transformed: ReducedEcho,
    pub virtual_pair: PairSummary,
    pub psi2_sup: f64,
    pub mass_deviation_sup: f64,
    pub kind_before: Kind,
    pub kind_after: Kind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub schema: &'static str,
    pub command: &'static str,
    pub model: &'a Model,
    pub reduced: ReducedEcho,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virtual_pair: Option<PairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<Descriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_cycle: Option<LimitCycleBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trajectories: Vec<TrajectoryReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub verdicts: BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_tracking: Option<TrackingBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformBlock>,
}

impl<'a> Report<'a> {
    pub fn new(command: &'static str, model: &'a Model, rd: &ReducedDynamics, tolerances: Tolerances) -> Self {
        Report {
            schema: SCHEMA,
            command,
            model,
            reduced: ReducedEcho::new(rd),
            tolerances,
            virtual_pair: None,
            classification: None,
            lagrangian: None,
            limit_cycle: None,
            trajectories: Vec::new(),
            verdicts: BTreeMap::new(),
            full_tracking: None,
            transform: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
