//! Integer homology of a [`GradedComplex`] and the numerical statements that
//! follow from it: Morse inequalities and the Euler characteristic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{verify_d_squared, GradedComplex};
use crate::error::{Error, Result};
use crate::morse_data::{MorseData, SignClass};
use crate::smith::smith_normal_form;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyGroup {
    pub degree: usize,
    pub betti: u64,
    /// Torsion coefficients, each at least 2, forming a divisibility chain.
    pub torsion: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyResult {
    pub groups: Vec<HomologyGroup>,
}

impl HomologyResult {
    /// Free groups of the given ranks, no torsion.
    pub fn free(bettis: &[u64]) -> Self {
        HomologyResult {
            groups: bettis
                .iter()
                .enumerate()
                .map(|(degree, &betti)| HomologyGroup {
                    degree,
                    betti,
                    torsion: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn bettis(&self) -> Vec<u64> {
        self.groups.iter().map(|g| g.betti).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("integers serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from_json)
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

impl fmt::Display for HomologyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            writeln!(f, "H_{} = {}", g.degree, g)?;
        }
        Ok(())
    }
}

/// Homology via Smith normal form of each boundary map.
///
/// Refuses complexes with `∂∘∂ ≠ 0` unless `force` is set; forced results
/// clamp negative Betti numbers at zero.
pub fn homology(cx: &GradedComplex, force: bool) -> Result<HomologyResult> {
    if !force {
        if let Some(f) = verify_d_squared(cx)?.failure {
            return Err(Error::NotAChainComplex {
                k: f.k,
                row: f.row,
                col: f.col,
                value: f.value,
            });
        }
    }
    let n = cx.dimension();
    // ranks[k] = rank ∂_k, divisors[k] = elementary divisors of ∂_k, k = 0..=n+1
    let mut ranks = vec![0usize; n + 2];
    let mut divisors = vec![Vec::new(); n + 2];
    for k in 1..=n {
        let snf = smith_normal_form(&cx.boundary(k))?;
        ranks[k] = snf.rank;
        divisors[k] = snf.diagonal;
    }
    let groups = (0..=n)
        .map(|k| HomologyGroup {
            degree: k,
            betti: cx.rank(k).saturating_sub(ranks[k] + ranks[k + 1]) as u64,
            torsion: divisors[k + 1]
                .iter()
                .filter(|&&d| d > 1)
                .map(|&d| d as u64)
                .collect(),
        })
        .collect();
    Ok(HomologyResult { groups })
}

/// Whether two results describe isomorphic graded groups.
pub fn compare_reference(result: &HomologyResult, reference: &HomologyResult) -> bool {
    result.groups.len() == reference.groups.len()
        && result
            .groups
            .iter()
            .zip(&reference.groups)
            .all(|(a, b)| a.betti == b.betti && a.torsion == b.torsion)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityLine {
    pub degree: usize,
    /// `#Cr_k(f) + #Cr_k^+(f_N)`
    pub generators: u64,
    pub betti: u64,
}

impl InequalityLine {
    pub fn holds(&self) -> bool {
        self.generators >= self.betti
    }

    pub fn is_equality(&self) -> bool {
        self.generators == self.betti
    }
}

fn generator_counts(data: &MorseData) -> Vec<u64> {
    let mut counts = vec![0u64; data.dimension() + 1];
    for p in data.points() {
        if matches!(p.sign_class(), SignClass::Interior | SignClass::Positive) {
            if let Some(slot) = counts.get_mut(p.index as usize) {
                *slot += 1;
            }
        }
    }
    counts
}

/// Compares generator counts per degree against real Betti numbers.
pub fn morse_inequalities(data: &MorseData, betti: &[u64]) -> Result<Vec<InequalityLine>> {
    let counts = generator_counts(data);
    if betti.len() != counts.len() {
        return Err(Error::Precondition(format!(
            "expected {} Betti numbers, got {}",
            counts.len(),
            betti.len()
        )));
    }
    Ok(counts
        .into_iter()
        .zip(betti)
        .enumerate()
        .map(|(degree, (generators, &betti))| InequalityLine {
            degree,
            generators,
            betti,
        })
        .collect())
}

/// Alternating sum of generator counts.
pub fn euler_characteristic(data: &MorseData) -> i64 {
    generator_counts(data)
        .into_iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::assemble_boundary;
    use crate::matrix::IntMatrix;
    use crate::morse_data::{parse_morse_data, TrajectoryCounts};

    fn named(k: usize, count: usize) -> Vec<String> {
        (0..count).map(|i| format!("c{k}_{i}")).collect()
    }

    #[test]
    fn zero_differential() {
        let cx = GradedComplex::new(
            2,
            vec![named(0, 1), named(1, 1), vec![]],
            vec![IntMatrix::zeros(1, 1), IntMatrix::zeros(1, 0)],
        )
        .unwrap();
        assert_eq!(homology(&cx, false).unwrap(), HomologyResult::free(&[1, 1, 0]));
    }

    #[test]
    fn multiplication_by_two() {
        let cx = GradedComplex::new(
            1,
            vec![named(0, 1), named(1, 1)],
            vec![IntMatrix::from_rows(&[vec![2]]).unwrap()],
        )
        .unwrap();
        let h = homology(&cx, false).unwrap();
        assert_eq!(h.groups[0], HomologyGroup { degree: 0, betti: 0, torsion: vec![2] });
        assert_eq!(h.groups[1], HomologyGroup { degree: 1, betti: 0, torsion: vec![] });
        assert_eq!(h.to_string(), "H_0 = Z/2\nH_1 = 0\n");
    }

    #[test]
    fn refuses_non_complex_unless_forced() {
        let one = IntMatrix::from_rows(&[vec![1]]).unwrap();
        let cx = GradedComplex::new(2, vec![named(0, 1), named(1, 1), named(2, 1)], vec![one.clone(), one]).unwrap();
        assert!(matches!(homology(&cx, false), Err(Error::NotAChainComplex { k: 2, .. })));
        assert!(homology(&cx, true).is_ok());
    }

    #[test]
    fn disk_neg() {
        let data = parse_morse_data(include_str!("../../../corpus/disk-neg.json")).unwrap();
        let h = homology(&assemble_boundary(&data).unwrap(), false).unwrap();
        assert_eq!(h, HomologyResult::free(&[1, 0, 0]));
        assert_eq!(euler_characteristic(&data), 1);
        let lines = morse_inequalities(&data, &[1, 0, 0]).unwrap();
        assert!(lines.iter().all(InequalityLine::is_equality));
    }

    #[test]
    fn annulus_split() {
        let data = parse_morse_data(include_str!("../../../corpus/annulus-split.json")).unwrap();
        assert_eq!(euler_characteristic(&data), 0);
        let lines = morse_inequalities(&data, &[1, 1, 0]).unwrap();
        assert!(lines.iter().all(InequalityLine::is_equality));
        assert!(morse_inequalities(&data, &[1, 1]).is_err());
    }

    #[test]
    fn inequality_violation_flagged() {
        let data = MorseData::new(1, vec![], vec![], TrajectoryCounts::new()).unwrap();
        let lines = morse_inequalities(&data, &[1, 0]).unwrap();
        assert!(!lines[0].holds());
        assert!(lines[1].holds());
        assert_eq!(euler_characteristic(&data), 0);
    }

    #[test]
    fn reference_comparison() {
        let a = HomologyResult::free(&[1, 0, 0]);
        assert!(compare_reference(&a, &a.clone()));
        let mut torsion = HomologyResult::free(&[1, 0]);
        torsion.groups[1].torsion.push(2);
        assert!(!compare_reference(&torsion, &HomologyResult::free(&[1, 0])));
        assert!(!compare_reference(&a, &HomologyResult::free(&[1, 0])));
    }

    #[test]
    fn json_shape() {
        let h = HomologyResult::free(&[1]);
        let v: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
        assert_eq!(v, serde_json::json!({"groups": [{"degree": 0, "betti": 1, "torsion": []}]}));
        assert_eq!(HomologyResult::from_json(&h.to_json()).unwrap(), h);
    }
}
