//! The Morse chain complex `(CM_*, ∂_*)` assembled from validated data.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::morse_data::{generators, validate, MorseData, SignClass};

/// Free modules `CM_0..CM_n` with boundary matrices `∂_1..∂_n`.
///
/// `∂_k` has one row per generator of degree `k - 1` and one column per
/// generator of degree `k`, both in [`generators`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedComplex {
    dimension: usize,
    generators: Vec<Vec<String>>,
    boundaries: Vec<IntMatrix>,
}

impl GradedComplex {
    /// `boundaries[k - 1]` is `∂_k`.
    pub fn new(dimension: usize, generators: Vec<Vec<String>>, boundaries: Vec<IntMatrix>) -> Result<Self> {
        if generators.len() != dimension + 1 || boundaries.len() != dimension {
            return Err(Error::Malformed(format!(
                "complex of dimension {dimension} needs {} generator lists and {dimension} boundary maps",
                dimension + 1
            )));
        }
        for (i, d) in boundaries.iter().enumerate() {
            let k = i + 1;
            if d.nrows() != generators[k - 1].len() || d.ncols() != generators[k].len() {
                return Err(Error::Malformed(format!(
                    "boundary map {k} has shape {}x{}, expected {}x{}",
                    d.nrows(),
                    d.ncols(),
                    generators[k - 1].len(),
                    generators[k].len()
                )));
            }
        }
        Ok(GradedComplex {
            dimension,
            generators,
            boundaries,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self, k: usize) -> &[String] {
        self.generators.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn rank(&self, k: usize) -> usize {
        self.generators(k).len()
    }

    /// `∂_k`; the zero map for `k = 0` and `k = n + 1`.
    pub fn boundary(&self, k: usize) -> IntMatrix {
        if k == 0 {
            IntMatrix::zeros(0, self.rank(0))
        } else if k > self.dimension {
            IntMatrix::zeros(self.rank(self.dimension), 0)
        } else {
            self.boundaries[k - 1].clone()
        }
    }

    pub fn boundary_ref(&self, k: usize) -> Option<&IntMatrix> {
        k.checked_sub(1).and_then(|i| self.boundaries.get(i))
    }

    pub fn to_json(&self) -> String {
        let doc = ComplexDocument {
            dimension: self.dimension,
            generators: self
                .generators
                .iter()
                .enumerate()
                .map(|(k, g)| (k.to_string(), g.clone()))
                .collect(),
            boundary: self
                .boundaries
                .iter()
                .enumerate()
                .map(|(i, d)| ((i + 1).to_string(), d.to_rows()))
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("integers serialize");
        out.push('\n');
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexDocument {
    dimension: usize,
    generators: BTreeMap<String, Vec<String>>,
    boundary: BTreeMap<String, Vec<Vec<i64>>>,
}

pub fn parse_complex(text: &str) -> Result<GradedComplex> {
    let doc: ComplexDocument = serde_json::from_str(text).map_err(Error::from_json)?;
    let n = doc.dimension;
    let mut gens = Vec::with_capacity(n + 1);
    for k in 0..=n {
        gens.push(doc.generators.get(&k.to_string()).cloned().unwrap_or_default());
    }
    if let Some(bad) = doc
        .generators
        .keys()
        .find(|key| key.parse::<usize>().map_or(true, |k| k > n))
    {
        return Err(Error::Malformed(format!("unexpected generator degree `{bad}`")));
    }
    if let Some(bad) = doc
        .boundary
        .keys()
        .find(|key| key.parse::<usize>().map_or(true, |k| k == 0 || k > n))
    {
        return Err(Error::Malformed(format!("unexpected boundary degree `{bad}`")));
    }
    let mut maps = Vec::with_capacity(n);
    for k in 1..=n {
        let (rows, cols) = (gens[k - 1].len(), gens[k].len());
        let m = match doc.boundary.get(&k.to_string()) {
            Some(body) => IntMatrix::from_rows_shaped(rows, cols, body)?,
            None => IntMatrix::zeros(rows, cols),
        };
        maps.push(m);
    }
    GradedComplex::new(n, gens, maps)
}

/// Builds `∂_k` column by column:
///
/// * interior `p`: `∂p = Σ M(p,p') p' + Σ M(p,γ) γ`
/// * positive `γ` on component `N_i`:
///   `∂γ = Σ_δ N(γ,δ) M(δ,p) p + Σ_δ N(γ,δ) M(δ,γ') γ' + Σ N(γ,γ') γ'`
///   with `δ` running over the negative points of degree `k - 1` on `N_i`.
pub fn assemble_boundary(data: &MorseData) -> Result<GradedComplex> {
    let report = validate(data);
    if !report.ok() {
        return Err(Error::Precondition(format!(
            "data fails validation: {}",
            report
                .violations
                .iter()
                .map(|v| v.rule.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let n = data.dimension();
    let gens: Vec<Vec<String>> = (0..=n).map(|k| generators(data, k)).collect::<Result<_>>()?;

    // negative boundary points grouped by (component, index)
    let mut negatives: HashMap<(&str, u32), Vec<&str>> = HashMap::new();
    for p in data.points() {
        if p.sign_class() == SignClass::Negative {
            negatives
                .entry((p.component().unwrap(), p.index))
                .or_default()
                .push(p.id.as_str());
        }
    }
    let counts = data.counts();
    let mut maps = Vec::with_capacity(n);
    for k in 1..=n {
        let rows = &gens[k - 1];
        let cols = &gens[k];
        let mut d = IntMatrix::zeros(rows.len(), cols.len());
        for (j, col) in cols.iter().enumerate() {
            let point = data.point(col).expect("generator ids exist");
            match point.sign_class() {
                SignClass::Positive => {
                    let comp = point.component().unwrap();
                    let deltas = negatives
                        .get(&(comp, (k - 1) as u32))
                        .map_or(&[][..], Vec::as_slice);
                    for (i, row) in rows.iter().enumerate() {
                        let mut acc = counts.n(col, row);
                        for delta in deltas {
                            let term = counts
                                .n(col, delta)
                                .checked_mul(counts.m(delta, row))
                                .ok_or(Error::Overflow("boundary assembly"))?;
                            acc = acc.checked_add(term).ok_or(Error::Overflow("boundary assembly"))?;
                        }
                        d[(i, j)] = acc;
                    }
                }
                _ => {
                    for (i, row) in rows.iter().enumerate() {
                        d[(i, j)] = counts.m(col, row);
                    }
                }
            }
        }
        maps.push(d);
    }
    GradedComplex::new(n, gens, maps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeFailure {
    pub k: usize,
    pub row: usize,
    pub col: usize,
    pub value: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSquaredReport {
    pub failure: Option<CompositeFailure>,
}

impl DSquaredReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Certifies `∂_{k-1} ∘ ∂_k = 0` for every `k`; reports the first nonzero
/// entry by ascending `k`, then row-major position.
pub fn verify_d_squared(cx: &GradedComplex) -> Result<DSquaredReport> {
    for k in 2..=cx.dimension() {
        let lower = cx.boundary_ref(k - 1).unwrap();
        let upper = cx.boundary_ref(k).unwrap();
        let prod = lower.wide_mul(upper)?;
        if let Some(pos) = prod.iter().position(|&v| v != 0) {
            let cols = upper.ncols();
            return Ok(DSquaredReport {
                failure: Some(CompositeFailure {
                    k,
                    row: pos / cols,
                    col: pos % cols,
                    value: prod[pos],
                }),
            });
        }
    }
    Ok(DSquaredReport { failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse_data::{parse_morse_data, BoundaryComponent, CriticalPoint, TrajectoryCounts};
    use proptest::prelude::*;

    fn one_entry() -> MorseData {
        let mut counts = TrajectoryCounts::new();
        counts.insert_m("q", "p", 2).unwrap();
        MorseData::new(
            1,
            vec![],
            vec![CriticalPoint::interior("p", 0), CriticalPoint::interior("q", 1)],
            counts,
        )
        .unwrap()
    }

    #[test]
    fn single_entry_boundary() {
        let cx = assemble_boundary(&one_entry()).unwrap();
        assert_eq!(cx.boundary(1).to_rows(), vec![vec![2]]);
        assert!(verify_d_squared(&cx).unwrap().ok());
    }

    #[test]
    fn disk_neg_shape() {
        let data = parse_morse_data(include_str!("../../../corpus/disk-neg.json")).unwrap();
        let cx = assemble_boundary(&data).unwrap();
        assert_eq!((cx.rank(0), cx.rank(1), cx.rank(2)), (1, 0, 0));
        assert!(cx.boundary(1).is_zero() && cx.boundary(2).is_zero());
    }

    #[test]
    fn rejects_invalid_data() {
        let mut counts = TrajectoryCounts::new();
        counts.insert_m("p", "p", 1).unwrap();
        let data = one_entry().with_counts(counts);
        assert!(matches!(assemble_boundary(&data), Err(Error::Precondition(_))));
    }

    #[test]
    fn broken_complex_reports_position() {
        let one = IntMatrix::from_rows(&[vec![1]]).unwrap();
        let gens = vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]];
        let cx = GradedComplex::new(2, gens, vec![one.clone(), one]).unwrap();
        let report = verify_d_squared(&cx).unwrap();
        assert_eq!(
            report.failure,
            Some(CompositeFailure { k: 2, row: 0, col: 0, value: 1 })
        );
    }

    #[test]
    fn zero_maps_pass() {
        let gens = vec![vec!["a".into()], vec!["b".into(), "c".into()], vec![]];
        let cx = GradedComplex::new(2, gens, vec![IntMatrix::zeros(1, 2), IntMatrix::zeros(2, 0)]).unwrap();
        assert!(verify_d_squared(&cx).unwrap().ok());
        assert_eq!(cx.boundary(0).ncols(), 1);
        assert_eq!(cx.boundary(3).nrows(), 0);
    }

    #[test]
    fn json_round_trip() {
        let cx = assemble_boundary(&one_entry()).unwrap();
        assert_eq!(parse_complex(&cx.to_json()).unwrap(), cx);
        assert!(parse_complex(r#"{"dimension": 1, "generators": {"0": ["a"], "1": ["b"]}, "boundary": {"1": [[1, 2]]}}"#).is_err());
        assert!(parse_complex(r#"{"dimension": 1, "generators": {"5": []}, "boundary": {}}"#).is_err());
    }

    #[test]
    fn overflow_in_products_is_an_error() {
        let pts = vec![
            CriticalPoint::boundary("g", 1, "A", 1.0),
            CriticalPoint::boundary("d", 0, "A", -1.0),
            CriticalPoint::interior("p", 0),
        ];
        let mut counts = TrajectoryCounts::new();
        counts.insert_n("g", "d", i64::MAX).unwrap();
        counts.insert_m("d", "p", 2).unwrap();
        let data = MorseData::new(2, vec![BoundaryComponent { id: "A".into(), c: 0.0 }], pts, counts).unwrap();
        assert!(matches!(assemble_boundary(&data), Err(Error::Overflow(_))));
    }

    /// Evaluates the three-term formula by brute force over every point.
    fn naive_entry(data: &MorseData, col: &str, row: &str) -> i64 {
        let c = data.counts();
        let p = data.point(col).unwrap();
        if p.sign_class() != SignClass::Positive {
            return c.m(col, row);
        }
        let mut acc = c.n(col, row);
        for delta in data.points() {
            if delta.sign_class() == SignClass::Negative && delta.index + 1 == p.index {
                acc += c.n(col, &delta.id) * c.m(&delta.id, row);
            }
        }
        acc
    }

    /// Random valid data on a surface with two boundary circles.
    fn arb_data() -> impl Strategy<Value = MorseData> {
        let point = (0u32..3, 0u8..3, prop::bool::ANY, 1u32..4);
        (prop::collection::vec(point, 1..9), prop::collection::vec(-3i64..=3, 200))
            .prop_map(|(specs, pool)| {
                let mut pts = Vec::new();
                for (i, (index, where_, positive, mag)) in specs.into_iter().enumerate() {
                    let id = format!("x{i}");
                    if where_ == 0 {
                        pts.push(CriticalPoint::interior(id, index.min(2)));
                    } else {
                        let comp = if where_ == 1 { "A" } else { "B" };
                        let v = if positive { mag as f64 } else { -(mag as f64) };
                        pts.push(CriticalPoint::boundary(id, index.min(1), comp, v));
                    }
                }
                let comps = vec![
                    BoundaryComponent { id: "A".into(), c: 0.0 },
                    BoundaryComponent { id: "B".into(), c: 1.0 },
                ];
                let base = MorseData::new(2, comps, pts.clone(), TrajectoryCounts::new()).unwrap();
                let mut counts = TrajectoryCounts::new();
                let mut draw = pool.into_iter().cycle();
                for a in &pts {
                    for b in &pts {
                        let mut single = TrajectoryCounts::new();
                        single.insert_m(&a.id, &b.id, 1).unwrap();
                        if validate(&base.with_counts(single)).ok() {
                            counts.insert_m(&a.id, &b.id, draw.next().unwrap()).unwrap();
                        }
                        let mut single = TrajectoryCounts::new();
                        single.insert_n(&a.id, &b.id, 1).unwrap();
                        if validate(&base.with_counts(single)).ok() {
                            counts.insert_n(&a.id, &b.id, draw.next().unwrap()).unwrap();
                        }
                    }
                }
                base.with_counts(counts)
            })
    }

    proptest! {
        #[test]
        fn matches_naive_evaluator(data in arb_data()) {
            let cx = assemble_boundary(&data).unwrap();
            for k in 1..=2 {
                let d = cx.boundary(k);
                for (j, col) in cx.generators(k).iter().enumerate() {
                    for (i, row) in cx.generators(k - 1).iter().enumerate() {
                        prop_assert_eq!(d[(i, j)], naive_entry(&data, col, row));
                    }
                }
            }
        }

        #[test]
        fn assembly_is_deterministic(data in arb_data()) {
            prop_assert_eq!(assemble_boundary(&data).unwrap(), assemble_boundary(&data).unwrap());
        }
    }
}
