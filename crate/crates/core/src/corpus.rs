//! Built-in worked examples and the end-to-end pipeline run over them.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{assemble_boundary, verify_d_squared};
use crate::error::{Error, Result};
use crate::flow::shoot::build_morse_data_with_report;
use crate::flow::{parse_flow_problem, ShootingConfig};
use crate::homology::{compare_reference, euler_characteristic, homology, morse_inequalities, HomologyResult};
use crate::morse_data::{parse_morse_data, validate, MorseData};

pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub morse_data: &'static str,
    pub flow_problem: Option<&'static str>,
    pub reference: &'static str,
    pub euler: i64,
}

macro_rules! corpus_file {
    ($name:literal, $ext:literal) => {
        include_str!(concat!("../../../corpus/", $name, $ext))
    };
}

macro_rules! entry {
    ($name:literal, $euler:expr, $desc:expr) => {
        CorpusEntry {
            name: $name,
            description: $desc,
            morse_data: corpus_file!($name, ".json"),
            flow_problem: Some(corpus_file!($name, ".flow.json")),
            reference: corpus_file!($name, ".homology.json"),
            euler: $euler,
        }
    };
}

/// Entries in name order.
pub fn entries() -> Vec<CorpusEntry> {
    vec![
        entry!(
            "annulus-cross",
            0,
            "Annulus whose bottom circle has f_N = cos, one positive and one negative point; \
             the top circle is all negative and an interior minimum sits in between. \
             Exercises the full boundary formula for a positive generator."
        ),
        entry!(
            "annulus-split",
            0,
            "Annulus with an all-positive bottom circle (c = 0) and an all-negative top \
             circle (c = 1). The positive circle alone carries the homology."
        ),
        entry!(
            "disk-neg",
            1,
            "Disk with an everywhere negative boundary function and one interior minimum; \
             no boundary generators, so every mixed term vanishes."
        ),
        entry!(
            "sphere-closed",
            2,
            "Round sphere as a closed manifold: one maximum, one minimum, empty boundary."
        ),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct EntrySummary {
    pub name: String,
    pub description: String,
    pub has_flow_problem: bool,
    pub reference: HomologyResult,
    pub euler: i64,
}

pub fn corpus_list() -> Vec<EntrySummary> {
    entries()
        .into_iter()
        .map(|e| EntrySummary {
            name: e.name.to_string(),
            description: e.description.to_string(),
            has_flow_problem: e.flow_problem.is_some(),
            reference: HomologyResult::from_json(e.reference).expect("shipped reference parses"),
            euler: e.euler,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowCheck {
    pub homology: HomologyResult,
    pub identical_homology: bool,
    pub counts_match_stored: bool,
    pub same_component_returns: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub passed: bool,
    /// Pipeline stage that failed, if any.
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub validation_ok: bool,
    pub d_squared_ok: bool,
    pub homology: Option<HomologyResult>,
    pub matches_reference: bool,
    pub inequalities_hold: bool,
    pub euler: Option<i64>,
    pub flow: Option<FlowCheck>,
    /// Excluded from JSON so that reports are byte-stable.
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub entries: Vec<EntryReport>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn run_entry(e: &CorpusEntry, use_flow: bool, cfg: &ShootingConfig) -> EntryReport {
    let start = Instant::now();
    let mut rep = EntryReport {
        name: e.name.to_string(),
        passed: false,
        failed_stage: None,
        error: None,
        validation_ok: false,
        d_squared_ok: false,
        homology: None,
        matches_reference: false,
        inequalities_hold: false,
        euler: None,
        flow: None,
        wall_seconds: 0.0,
    };
    let outcome = pipeline(e, use_flow, cfg, &mut rep);
    if let Err((stage, err)) = outcome {
        rep.failed_stage = Some(stage.to_string());
        rep.error = Some(err);
    } else {
        rep.passed = true;
    }
    rep.wall_seconds = start.elapsed().as_secs_f64();
    rep
}

type StageResult<T> = std::result::Result<T, (&'static str, String)>;

fn stage<T>(name: &'static str, r: Result<T>) -> StageResult<T> {
    r.map_err(|e| (name, e.to_string()))
}

fn pipeline(e: &CorpusEntry, use_flow: bool, cfg: &ShootingConfig, rep: &mut EntryReport) -> StageResult<()> {
    let data = stage("parse", parse_morse_data(e.morse_data))?;
    let reference = stage("parse", HomologyResult::from_json(e.reference))?;
    let h = algebra(&data, rep)?;
    rep.matches_reference = compare_reference(&h, &reference);
    if !rep.matches_reference {
        return Err(("compare", format!("computed\n{h}differs from reference\n{reference}")));
    }
    let lines = stage("inequalities", morse_inequalities(&data, &reference.bettis()))?;
    rep.inequalities_hold = lines.iter().all(|l| l.holds());
    if !rep.inequalities_hold {
        return Err(("inequalities", "Morse inequality violated".into()));
    }
    rep.euler = Some(euler_characteristic(&data));
    if rep.euler != Some(e.euler) {
        return Err(("euler", format!("Euler characteristic {:?}, expected {}", rep.euler, e.euler)));
    }
    if use_flow {
        let text = e
            .flow_problem
            .ok_or(("flow", "entry has no flow problem".to_string()))?;
        let fp = stage("flow", parse_flow_problem(text))?;
        let (generated, build) = stage("flow", build_morse_data_with_report(&fp, cfg))?;
        let mut scratch = rep.clone();
        let hf = algebra(&generated, &mut scratch).map_err(|(s, m)| ("flow", format!("{s}: {m}")))?;
        let check = FlowCheck {
            identical_homology: hf == h,
            counts_match_stored: generated.counts() == data.counts(),
            same_component_returns: build.same_component_returns(),
            homology: hf,
        };
        let ok = check.identical_homology && check.same_component_returns == 0;
        rep.flow = Some(check);
        if !ok {
            return Err(("flow", "flow-generated data disagrees with the stored tables".into()));
        }
    }
    Ok(())
}

fn algebra(data: &MorseData, rep: &mut EntryReport) -> StageResult<HomologyResult> {
    let v = validate(data);
    rep.validation_ok = v.ok();
    if !v.ok() {
        let msgs: Vec<_> = v.violations.iter().map(|x| format!("{}: {}", x.rule, x.message)).collect();
        return Err(("validate", msgs.join("; ")));
    }
    let cx = stage("assemble", assemble_boundary(data))?;
    let d2 = stage("verify", verify_d_squared(&cx))?;
    rep.d_squared_ok = d2.ok();
    if let Some(f) = d2.failure {
        return Err(("verify", format!("d^2 != 0 at k = {}, ({}, {})", f.k, f.row, f.col)));
    }
    let h = stage("homology", homology(&cx, false))?;
    rep.homology = Some(h.clone());
    Ok(h)
}

/// Runs the pipeline on the named entries, or all of them for `None`.
pub fn corpus_run(names: Option<&[String]>, use_flow: bool, cfg: &ShootingConfig) -> Result<RunReport> {
    let all = entries();
    let selected: Vec<&CorpusEntry> = match names {
        None => all.iter().collect(),
        Some(names) => {
            let mut picked = Vec::new();
            for n in names {
                let e = all
                    .iter()
                    .find(|e| e.name == n)
                    .ok_or_else(|| Error::NoSuchEntry(n.clone()))?;
                picked.push(e);
            }
            picked.sort_by_key(|e| e.name);
            picked.dedup_by_key(|e| e.name);
            picked
        }
    };
    let entries = selected.par_iter().map(|e| run_entry(e, use_flow, cfg)).collect();
    Ok(RunReport { entries })
}
