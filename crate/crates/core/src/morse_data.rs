//! Combinatorial Morse data: boundary components, classified critical points
//! and the signed trajectory-count tables `M` (through the interior) and `N`
//! (inside one boundary component).
//!
//! Parsing only checks structure. All semantic constraints coming from the
//! cone-end geometry are checked by [`validate`], which reports every problem
//! instead of stopping at the first one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    pub id: String,
    /// Additive constant of the cone-end function on this component.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointKind {
    Interior,
    Boundary { component: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub id: String,
    pub index: u32,
    pub kind: PointKind,
}

/// Sign class of a critical point, derived from its critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignClass {
    Interior,
    Positive,
    Negative,
    /// Boundary point with critical value zero; never valid.
    Degenerate,
}

impl CriticalPoint {
    pub fn interior(id: impl Into<String>, index: u32) -> Self {
        CriticalPoint {
            id: id.into(),
            index,
            kind: PointKind::Interior,
        }
    }

    pub fn boundary(id: impl Into<String>, index: u32, component: impl Into<String>, value: f64) -> Self {
        CriticalPoint {
            id: id.into(),
            index,
            kind: PointKind::Boundary {
                component: component.into(),
                value,
            },
        }
    }

    pub fn sign_class(&self) -> SignClass {
        match &self.kind {
            PointKind::Interior => SignClass::Interior,
            PointKind::Boundary { value, .. } if *value > 0.0 => SignClass::Positive,
            PointKind::Boundary { value, .. } if *value < 0.0 => SignClass::Negative,
            PointKind::Boundary { .. } => SignClass::Degenerate,
        }
    }

    pub fn component(&self) -> Option<&str> {
        match &self.kind {
            PointKind::Interior => None,
            PointKind::Boundary { component, .. } => Some(component),
        }
    }

    pub fn is_generator(&self) -> bool {
        matches!(self.sign_class(), SignClass::Interior | SignClass::Positive)
    }
}

/// Sparse signed count tables; a missing key means count zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrajectoryCounts {
    m: BTreeMap<(String, String), i64>,
    n: BTreeMap<(String, String), i64>,
}

impl TrajectoryCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an `M` entry; fails on a repeated key.
    pub fn insert_m(&mut self, from: &str, to: &str, count: i64) -> Result<()> {
        insert_unique(&mut self.m, "M", from, to, count)
    }

    pub fn insert_n(&mut self, from: &str, to: &str, count: i64) -> Result<()> {
        insert_unique(&mut self.n, "N", from, to, count)
    }

    pub fn m(&self, from: &str, to: &str) -> i64 {
        lookup(&self.m, from, to)
    }

    pub fn n(&self, from: &str, to: &str) -> i64 {
        lookup(&self.n, from, to)
    }

    pub fn m_entries(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.m.iter().map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    pub fn n_entries(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.n.iter().map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    /// Applies `f` to every key and count, producing a new table pair.
    pub fn map(&self, mut f: impl FnMut(Table, &str, &str, i64) -> (String, String, i64)) -> Self {
        let mut out = TrajectoryCounts::new();
        for ((a, b), &c) in &self.m {
            let (a, b, c) = f(Table::M, a, b, c);
            out.m.insert((a, b), c);
        }
        for ((a, b), &c) in &self.n {
            let (a, b, c) = f(Table::N, a, b, c);
            out.n.insert((a, b), c);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    M,
    N,
}

fn insert_unique(
    table: &mut BTreeMap<(String, String), i64>,
    name: &str,
    from: &str,
    to: &str,
    count: i64,
) -> Result<()> {
    let key = (from.to_string(), to.to_string());
    if table.contains_key(&key) {
        return Err(Error::Malformed(format!(
            "duplicate {name} entry {from} -> {to}"
        )));
    }
    table.insert(key, count);
    Ok(())
}

fn lookup(table: &BTreeMap<(String, String), i64>, from: &str, to: &str) -> i64 {
    // BTreeMap<(String, String), _> cannot be queried with (&str, &str)
    // without allocating; tables are tiny.
    table
        .get(&(from.to_string(), to.to_string()))
        .copied()
        .unwrap_or(0)
}

/// Complete combinatorial input of the Morse complex.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseData {
    dimension: usize,
    components: Vec<BoundaryComponent>,
    points: Vec<CriticalPoint>,
    counts: TrajectoryCounts,
}

impl MorseData {
    /// Builds structurally well-formed data. Ids must be unique; semantic
    /// checks are left to [`validate`].
    pub fn new(
        dimension: usize,
        mut components: Vec<BoundaryComponent>,
        mut points: Vec<CriticalPoint>,
        counts: TrajectoryCounts,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if !c.c.is_finite() {
                return Err(Error::Malformed(format!("constant of `{}` is not finite", c.id)));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateId(c.id.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if let PointKind::Boundary { value, .. } = &p.kind {
                if !value.is_finite() {
                    return Err(Error::Malformed(format!("value of `{}` is not finite", p.id)));
                }
            }
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        components.sort_by(|a, b| a.id.cmp(&b.id));
        points.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(MorseData {
            dimension,
            components,
            points,
            counts,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Dimension of every boundary component, `n - 1`.
    pub fn boundary_dimension(&self) -> Option<usize> {
        self.dimension.checked_sub(1)
    }

    pub fn components(&self) -> &[BoundaryComponent] {
        &self.components
    }

    pub fn points(&self) -> &[CriticalPoint] {
        &self.points
    }

    pub fn counts(&self) -> &TrajectoryCounts {
        &self.counts
    }

    pub fn point(&self, id: &str) -> Option<&CriticalPoint> {
        self.points
            .binary_search_by(|p| p.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn component(&self, id: &str) -> Option<&BoundaryComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Same points and components with different count tables.
    pub fn with_counts(&self, counts: TrajectoryCounts) -> Self {
        MorseData {
            counts,
            ..self.clone()
        }
    }

    /// Same data with different critical points (ids are re-checked).
    pub fn with_points(&self, points: Vec<CriticalPoint>) -> Result<Self> {
        MorseData::new(self.dimension, self.components.clone(), points, self.counts.clone())
    }

    pub fn to_json(&self) -> String {
        let doc = MorseDocument::from(self);
        let mut out = serde_json::to_string_pretty(&doc).expect("finite values serialize");
        out.push('\n');
        out
    }
}

/// Parses the JSON input format. Does not run [`validate`].
pub fn parse_morse_data(text: &str) -> Result<MorseData> {
    let doc: MorseDocument = serde_json::from_str(text).map_err(Error::from_json)?;
    doc.into_data()
}

/// Generators of `CM_k`: interior points of index `k`, then boundary points of
/// index `k` with positive value, each group sorted by id.
pub fn generators(data: &MorseData, k: usize) -> Result<Vec<String>> {
    if k > data.dimension {
        return Err(Error::Precondition(format!(
            "degree {k} exceeds dimension {}",
            data.dimension
        )));
    }
    let pick = |class: SignClass| {
        data.points
            .iter()
            .filter(move |p| p.index as usize == k && p.sign_class() == class)
            .map(|p| p.id.clone())
    };
    Ok(pick(SignClass::Interior).chain(pick(SignClass::Positive)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    NonzeroBoundaryValue,
    SameComponentDeltaGamma,
    NegToPosInN,
    IndexM,
    IndexN,
    CrossComponentConstant,
    DanglingId,
    IndexRange,
    /// A table key whose endpoint kinds admit no trajectory of that table.
    IllegalShape,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::NonzeroBoundaryValue => "NONZERO-BOUNDARY-VALUE",
            Rule::SameComponentDeltaGamma => "SAME-COMPONENT-DELTA-GAMMA",
            Rule::NegToPosInN => "NEG-TO-POS-IN-N",
            Rule::IndexM => "INDEX-M",
            Rule::IndexN => "INDEX-N",
            Rule::CrossComponentConstant => "CROSS-COMPONENT-CONSTANT",
            Rule::DanglingId => "DANGLING-ID",
            Rule::IndexRange => "INDEX-RANGE",
            Rule::IllegalShape => "ILLEGAL-SHAPE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn rules(&self) -> BTreeSet<Rule> {
        self.violations.iter().map(|v| v.rule).collect()
    }

    fn push(&mut self, rule: Rule, message: String, ids: &[&str]) {
        self.violations.push(Violation {
            rule,
            message,
            ids: ids.iter().map(|s| s.to_string()).collect(),
        });
    }
}

/// Checks every semantic constraint on points and count tables.
pub fn validate(data: &MorseData) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = data.dimension;
    let constants: HashMap<&str, f64> = data
        .components
        .iter()
        .map(|c| (c.id.as_str(), c.c))
        .collect();

    for p in &data.points {
        match &p.kind {
            PointKind::Interior => {
                if p.index as usize > n {
                    report.push(
                        Rule::IndexRange,
                        format!("interior point {} has index {} > {n}", p.id, p.index),
                        &[&p.id],
                    );
                }
            }
            PointKind::Boundary { component, value } => {
                if !constants.contains_key(component.as_str()) {
                    report.push(
                        Rule::DanglingId,
                        format!("boundary point {} names unknown component {component}", p.id),
                        &[&p.id, component],
                    );
                }
                if n == 0 || p.index as usize > n - 1 {
                    report.push(
                        Rule::IndexRange,
                        format!("boundary point {} has index {} > {}", p.id, p.index, n as i64 - 1),
                        &[&p.id],
                    );
                }
                if *value == 0.0 {
                    report.push(
                        Rule::NonzeroBoundaryValue,
                        format!("boundary point {} has critical value 0", p.id),
                        &[&p.id],
                    );
                }
            }
        }
    }

    for (from, to, count) in data.counts.m_entries() {
        let Some((a, b)) = endpoints(data, &mut report, "M", from, to) else {
            continue;
        };
        let (ca, cb) = (a.sign_class(), b.sign_class());
        if ca == SignClass::Degenerate || cb == SignClass::Degenerate {
            continue;
        }
        use SignClass::*;
        // minimum index gap allowing a nonzero count
        let gap = match (ca, cb) {
            (Interior, Interior) | (Interior, Positive) => 1,
            (Negative, Interior) => 0,
            (Negative, Positive) => {
                let (ia, ib) = (a.component().unwrap(), b.component().unwrap());
                if ia == ib {
                    report.push(
                        Rule::SameComponentDeltaGamma,
                        format!("M entry {from} -> {to} stays on component {ia}"),
                        &[from, to],
                    );
                    continue;
                }
                let (Some(&c_from), Some(&c_to)) = (constants.get(ia), constants.get(ib)) else {
                    continue;
                };
                if c_from <= c_to {
                    report.push(
                        Rule::CrossComponentConstant,
                        format!(
                            "M entry {from} -> {to} needs c({ia}) > c({ib}), got {c_from} <= {c_to}"
                        ),
                        &[from, to],
                    );
                    continue;
                }
                0
            }
            _ => {
                if a.component().is_some() && a.component() == b.component() {
                    report.push(
                        Rule::SameComponentDeltaGamma,
                        format!("M entry {from} -> {to} stays on one boundary component"),
                        &[from, to],
                    );
                } else {
                    report.push(
                        Rule::IllegalShape,
                        format!("M entry {from} -> {to} connects {ca:?} to {cb:?}"),
                        &[from, to],
                    );
                }
                continue;
            }
        };
        if count != 0 && a.index as i64 + 1 - gap <= b.index as i64 {
            report.push(
                Rule::IndexM,
                format!(
                    "M entry {from} -> {to} is {count} but indices {} -> {} admit no isolated trajectory",
                    a.index, b.index
                ),
                &[from, to],
            );
        }
    }

    for (from, to, count) in data.counts.n_entries() {
        let Some((a, b)) = endpoints(data, &mut report, "N", from, to) else {
            continue;
        };
        let (ca, cb) = (a.sign_class(), b.sign_class());
        if ca == SignClass::Degenerate || cb == SignClass::Degenerate {
            continue;
        }
        if ca == SignClass::Interior || cb == SignClass::Interior || a.component() != b.component() {
            report.push(
                Rule::IllegalShape,
                format!("N entry {from} -> {to} does not lie in one boundary component"),
                &[from, to],
            );
            continue;
        }
        if ca == SignClass::Negative && cb == SignClass::Positive {
            report.push(
                Rule::NegToPosInN,
                format!("N entry {from} -> {to} runs from a negative to a positive value"),
                &[from, to],
            );
            continue;
        }
        if count != 0 && a.index <= b.index {
            report.push(
                Rule::IndexN,
                format!(
                    "N entry {from} -> {to} is {count} but indices {} -> {} admit no isolated trajectory",
                    a.index, b.index
                ),
                &[from, to],
            );
        }
    }
    report
}

fn endpoints<'a>(
    data: &'a MorseData,
    report: &mut ValidationReport,
    table: &str,
    from: &str,
    to: &str,
) -> Option<(&'a CriticalPoint, &'a CriticalPoint)> {
    let a = data.point(from);
    let b = data.point(to);
    for (id, p) in [(from, a), (to, b)] {
        if p.is_none() {
            report.push(
                Rule::DanglingId,
                format!("{table} entry {from} -> {to} references unknown point {id}"),
                &[id],
            );
        }
    }
    Some((a?, b?))
}

// JSON document layer.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MorseDocument {
    dimension: usize,
    boundary_components: Vec<ComponentDoc>,
    critical_points: Vec<PointDoc>,
    counts: CountsDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    id: String,
    c: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Interior,
    Boundary,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    id: String,
    kind: KindDoc,
    index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsDoc {
    #[serde(rename = "M")]
    m: Vec<CountDoc>,
    #[serde(rename = "N")]
    n: Vec<CountDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountDoc {
    from: String,
    to: String,
    count: i64,
}

impl MorseDocument {
    fn into_data(self) -> Result<MorseData> {
        let components = self
            .boundary_components
            .into_iter()
            .map(|c| BoundaryComponent { id: c.id, c: c.c })
            .collect();
        let mut points = Vec::with_capacity(self.critical_points.len());
        for p in self.critical_points {
            let kind = match (p.kind, p.component, p.value) {
                (KindDoc::Interior, None, None) => PointKind::Interior,
                (KindDoc::Interior, _, _) => {
                    return Err(Error::Malformed(format!(
                        "interior point `{}` must not carry component or value",
                        p.id
                    )))
                }
                (KindDoc::Boundary, Some(component), Some(value)) => {
                    PointKind::Boundary { component, value }
                }
                (KindDoc::Boundary, None, _) => {
                    return Err(Error::Malformed(format!(
                        "missing field `component` on boundary point `{}`",
                        p.id
                    )))
                }
                (KindDoc::Boundary, _, None) => {
                    return Err(Error::Malformed(format!(
                        "missing field `value` on boundary point `{}`",
                        p.id
                    )))
                }
            };
            points.push(CriticalPoint {
                id: p.id,
                index: p.index,
                kind,
            });
        }
        let mut counts = TrajectoryCounts::new();
        for e in self.counts.m {
            counts.insert_m(&e.from, &e.to, e.count)?;
        }
        for e in self.counts.n {
            counts.insert_n(&e.from, &e.to, e.count)?;
        }
        MorseData::new(self.dimension, components, points, counts)
    }
}

impl From<&MorseData> for MorseDocument {
    fn from(data: &MorseData) -> Self {
        let row = |(from, to, count): (&str, &str, i64)| CountDoc {
            from: from.to_string(),
            to: to.to_string(),
            count,
        };
        MorseDocument {
            dimension: data.dimension,
            boundary_components: data
                .components
                .iter()
                .map(|c| ComponentDoc {
                    id: c.id.clone(),
                    c: c.c,
                })
                .collect(),
            critical_points: data
                .points
                .iter()
                .map(|p| match &p.kind {
                    PointKind::Interior => PointDoc {
                        id: p.id.clone(),
                        kind: KindDoc::Interior,
                        index: p.index,
                        component: None,
                        value: None,
                    },
                    PointKind::Boundary { component, value } => PointDoc {
                        id: p.id.clone(),
                        kind: KindDoc::Boundary,
                        index: p.index,
                        component: Some(component.clone()),
                        value: Some(*value),
                    },
                })
                .collect(),
            counts: CountsDoc {
                m: data.counts.m_entries().map(row).collect(),
                n: data.counts.n_entries().map(row).collect(),
            },
        }
    }
}
