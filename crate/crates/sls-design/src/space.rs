//! Finite design spaces and probability measures on them.
//!
//! Two spaces arise. The binary space holds every nonnull 0/1 vector of
//! length q (spring balance weighing): 2^q - 1 points, partitioned into
//! weight classes by the number of ones, with class j holding C(q, j)
//! points. The chemical-balance space holds every nonnull vector with
//! entries in {-1, 0, 1}: 3^q - 1 points.
//!
//! A design measure assigns nonnegative masses summing to one to the points
//! of a space. Many optimal measures are constant on the weight classes of
//! the binary space; such measures carry a compact class form pi_1..pi_q
//! alongside the full mass vector.

use std::collections::HashMap;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Enumeration cap for the binary space (2^q - 1 points).
pub const MAX_BINARY_Q: usize = 20;
/// Enumeration cap for the chemical-balance space (3^q - 1 points).
pub const MAX_CHEMICAL_Q: usize = 10;
/// Full mass vectors must sum to one within this tolerance.
pub const MASS_TOL: f64 = 1e-12;
/// Class mass vectors must satisfy sum_j n_j pi_j = 1 within this tolerance.
pub const CLASS_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Binary,
    ChemicalBalance,
}

/// One design point: q coordinates in {0, 1} or {-1, 0, 1}, never all zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DesignPoint {
    coords: Vec<i8>,
}

impl DesignPoint {
    pub fn new(coords: Vec<i8>, kind: SpaceKind) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain(
                "design point needs at least one coordinate".into(),
            ));
        }
        let ok = match kind {
            SpaceKind::Binary => coords.iter().all(|&c| c == 0 || c == 1),
            SpaceKind::ChemicalBalance => coords.iter().all(|&c| (-1..=1).contains(&c)),
        };
        if !ok {
            return Err(Error::Domain(
                "coordinate outside the space's alphabet".into(),
            ));
        }
        if coords.iter().all(|&c| c == 0) {
            return Err(Error::Domain(
                "the all-zero vector is not a design point".into(),
            ));
        }
        Ok(DesignPoint { coords })
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    /// Number of nonzero coordinates; for binary points, the number of ones.
    pub fn weight(&self) -> usize {
        self.coords.iter().filter(|&&c| c != 0).count()
    }
}

/// An enumerated design space with deterministic point order.
///
/// Binary spaces are ordered by weight class ascending and lexicographically
/// within a class; the order is identical across runs.
#[derive(Debug)]
pub struct DesignSpace {
    q: usize,
    kind: SpaceKind,
    points: Vec<DesignPoint>,
    classes: Vec<usize>,
    class_sizes: Vec<usize>,
    // Chemical-balance points are looked up through a map; binary points are
    // ranked combinatorially instead.
    lookup: HashMap<Vec<i8>, usize>,
    binomials: Vec<Vec<u64>>,
}

impl DesignSpace {
    /// All 2^q - 1 nonnull binary vectors, grouped by weight class.
    pub fn binary(q: usize) -> Result<Arc<Self>> {
        if !(2..=MAX_BINARY_Q).contains(&q) {
            return Err(Error::Capacity {
                q,
                min: 2,
                max: MAX_BINARY_Q,
            });
        }
        let binomials = pascal(q);
        let mut points = Vec::with_capacity((1usize << q) - 1);
        let mut classes = Vec::with_capacity((1usize << q) - 1);
        for j in 1..=q {
            let start = points.len();
            for mask in 1u32..(1u32 << q) {
                if mask.count_ones() as usize != j {
                    continue;
                }
                let coords: Vec<i8> = (0..q).map(|i| ((mask >> i) & 1) as i8).collect();
                points.push(DesignPoint { coords });
                classes.push(j);
            }
            points[start..].sort_by(|a, b| a.coords.cmp(&b.coords));
        }
        let class_sizes = (1..=q).map(|j| binomials[q][j] as usize).collect();
        Ok(Arc::new(DesignSpace {
            q,
            kind: SpaceKind::Binary,
            points,
            classes,
            class_sizes,
            lookup: HashMap::new(),
            binomials,
        }))
    }

    /// All 3^q - 1 nonnull vectors with entries in {-1, 0, 1}, in
    /// lexicographic order with -1 < 0 < 1.
    pub fn chemical_balance(q: usize) -> Result<Arc<Self>> {
        if !(1..=MAX_CHEMICAL_Q).contains(&q) {
            return Err(Error::Capacity {
                q,
                min: 1,
                max: MAX_CHEMICAL_Q,
            });
        }
        let n = 3usize.pow(q as u32) - 1;
        let mut points = Vec::with_capacity(n);
        let mut classes = Vec::with_capacity(n);
        let mut lookup = HashMap::with_capacity(n);
        let mut coords = vec![-1i8; q];
        loop {
            if coords.iter().any(|&c| c != 0) {
                let pt = DesignPoint {
                    coords: coords.clone(),
                };
                classes.push(pt.weight());
                lookup.insert(coords.clone(), points.len());
                points.push(pt);
            }
            // Mixed-radix increment over {-1, 0, 1}^q, rightmost digit
            // fastest; the all-ones vector rolling over ends the sweep.
            let mut pos = q;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if coords[pos] < 1 {
                    coords[pos] += 1;
                    break;
                }
                coords[pos] = -1;
                if pos == 0 {
                    return Ok(Arc::new(DesignSpace {
                        q,
                        kind: SpaceKind::ChemicalBalance,
                        points,
                        classes,
                        class_sizes: Vec::new(),
                        lookup,
                        binomials: pascal(q),
                    }));
                }
            }
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_binary(&self) -> bool {
        self.kind == SpaceKind::Binary
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[DesignPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &DesignPoint {
        &self.points[i]
    }

    /// Weight class of point `i` (number of nonzero coordinates).
    pub fn class_of(&self, i: usize) -> usize {
        self.classes[i]
    }

    /// Binary class sizes n_1..n_q with n_j = C(q, j); empty for
    /// chemical-balance spaces.
    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Index of the point with the given coordinates, if it lies in the space.
    pub fn position(&self, coords: &[i8]) -> Option<usize> {
        if coords.len() != self.q {
            return None;
        }
        match self.kind {
            SpaceKind::Binary => {
                if !coords.iter().all(|&c| c == 0 || c == 1) {
                    return None;
                }
                let j = coords.iter().filter(|&&c| c == 1).count();
                if j == 0 {
                    return None;
                }
                // Offset of class j, then the lexicographic rank within it:
                // a one at `pos` is preceded by every vector that keeps a
                // zero there and parks the remaining ones further right.
                let offset: u64 = (1..j).map(|i| self.binomials[self.q][i]).sum();
                let mut rank = 0u64;
                let mut remaining = j;
                for (pos, &c) in coords.iter().enumerate() {
                    if remaining == 0 {
                        break;
                    }
                    let slots_right = self.q - pos - 1;
                    if c == 1 {
                        if remaining <= slots_right {
                            rank += self.binomials[slots_right][remaining];
                        }
                        remaining -= 1;
                    }
                }
                Some(offset as usize + rank as usize)
            }
            SpaceKind::ChemicalBalance => self.lookup.get(coords).copied(),
        }
    }
}

impl Serialize for DesignSpace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DesignSpace", 3)?;
        s.serialize_field("q", &self.q)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("points", &self.points)?;
        s.end()
    }
}

/// Pascal's triangle up to row `n`.
fn pascal(n: usize) -> Vec<Vec<u64>> {
    let mut rows = vec![vec![1u64]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1u64; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

/// Two measures are comparable when they live on the same space; spaces are
/// deterministic given dimension and kind.
pub(crate) fn same_space(a: &DesignSpace, b: &DesignSpace) -> bool {
    std::ptr::eq(a, b) || (a.q == b.q && a.kind == b.kind)
}

/// A probability measure on a design space.
#[derive(Debug, Clone)]
pub struct DesignMeasure {
    space: Arc<DesignSpace>,
    masses: Vec<f64>,
    class_masses: Option<Vec<f64>>,
}

impl DesignMeasure {
    /// The uniform measure 1/n on every point. On binary spaces the class
    /// form is populated with pi_j = 1/n.
    pub fn uniform(space: &Arc<DesignSpace>) -> Self {
        let n = space.num_points();
        let mass = 1.0 / n as f64;
        let class_masses = if space.is_binary() {
            Some(vec![mass; space.q()])
        } else {
            None
        };
        DesignMeasure {
            space: Arc::clone(space),
            masses: vec![mass; n],
            class_masses,
        }
    }

    /// A measure from explicit per-point masses. Masses must be nonnegative
    /// and sum to one within `MASS_TOL`; they are then normalized exactly.
    pub fn from_masses(space: &Arc<DesignSpace>, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != space.num_points() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} masses, got {}",
                space.num_points(),
                masses.len()
            )));
        }
        if let Some(bad) = masses.iter().find(|&&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "negative or non-finite mass {bad}"
            )));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("masses sum to {sum}, not 1")));
        }
        let masses = masses.into_iter().map(|m| m / sum).collect();
        Ok(DesignMeasure {
            space: Arc::clone(space),
            masses,
            class_masses: None,
        })
    }

    /// A class-symmetric measure on a binary space: mass pi_j on every point
    /// of weight class j. Requires sum_j n_j pi_j = 1 within `CLASS_MASS_TOL`.
    pub fn from_class_masses(space: &Arc<DesignSpace>, pi: &[f64]) -> Result<Self> {
        if !space.is_binary() {
            return Err(Error::InvalidMeasure(
                "class masses need a binary space".into(),
            ));
        }
        if pi.len() != space.q() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} class masses, got {}",
                space.q(),
                pi.len()
            )));
        }
        if let Some(bad) = pi.iter().find(|&&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "negative or non-finite class mass {bad}"
            )));
        }
        let total: f64 = pi
            .iter()
            .zip(space.class_sizes())
            .map(|(&p, &n)| p * n as f64)
            .sum();
        if (total - 1.0).abs() > CLASS_MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "class masses weight to {total}, not 1"
            )));
        }
        let pi: Vec<f64> = pi.iter().map(|p| p / total).collect();
        let masses = (0..space.num_points())
            .map(|i| pi[space.class_of(i) - 1])
            .collect();
        Ok(DesignMeasure {
            space: Arc::clone(space),
            masses,
            class_masses: Some(pi),
        })
    }

    pub fn space(&self) -> &Arc<DesignSpace> {
        &self.space
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn class_masses(&self) -> Option<&[f64]> {
        self.class_masses.as_deref()
    }

    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|&&m| m > 0.0).count()
    }

    /// Collapse to the class form pi_1..pi_q if, within each weight class,
    /// all masses agree within `tol`. Returns `None` for non-symmetric
    /// measures; this is a reportable outcome, not an error.
    pub fn collapse_to_classes(&self, tol: f64) -> Option<Vec<f64>> {
        if !self.space.is_binary() {
            return None;
        }
        if let Some(pi) = &self.class_masses {
            return Some(pi.clone());
        }
        let q = self.space.q();
        let mut sums = vec![0.0f64; q];
        let mut mins = vec![f64::INFINITY; q];
        let mut maxs = vec![f64::NEG_INFINITY; q];
        for (i, &m) in self.masses.iter().enumerate() {
            let j = self.space.class_of(i) - 1;
            sums[j] += m;
            mins[j] = mins[j].min(m);
            maxs[j] = maxs[j].max(m);
        }
        for j in 0..q {
            if maxs[j] - mins[j] > tol {
                return None;
            }
        }
        Some(
            sums.iter()
                .zip(self.space.class_sizes())
                .map(|(&s, &n)| s / n as f64)
                .collect(),
        )
    }
}

impl Serialize for DesignMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DesignMeasure", 4)?;
        s.serialize_field("q", &self.space.q())?;
        s.serialize_field("kind", &self.space.kind())?;
        s.serialize_field("masses", &self.masses)?;
        s.serialize_field("class_masses", &self.class_masses)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_q2_is_the_three_point_space() {
        let s = DesignSpace::binary(2).unwrap();
        assert_eq!(s.num_points(), 3);
        let pts: Vec<&[i8]> = s.points().iter().map(|p| p.coords()).collect();
        assert_eq!(pts, vec![&[0, 1][..], &[1, 0], &[1, 1]]);
        assert_eq!(
            (0..3).map(|i| s.class_of(i)).collect::<Vec<_>>(),
            vec![1, 1, 2]
        );
    }

    #[test]
    fn binary_q4_class_sizes() {
        let s = DesignSpace::binary(4).unwrap();
        assert_eq!(s.num_points(), 15);
        assert_eq!(s.class_sizes(), &[4, 6, 4, 1]);
    }

    #[test]
    fn binary_q6_weight_three_count() {
        // Independent count over raw bitmasks.
        let by_mask = (1u32..64).filter(|m| m.count_ones() == 3).count();
        assert_eq!(by_mask, 20);
        let s = DesignSpace::binary(6).unwrap();
        assert_eq!(s.num_points(), 63);
        assert_eq!(s.class_sizes()[2], by_mask);
    }

    #[test]
    fn capacity_bounds_enforced() {
        assert!(matches!(
            DesignSpace::binary(1),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            DesignSpace::binary(21),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            DesignSpace::chemical_balance(11),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn position_ranks_every_binary_point() {
        for q in [2usize, 3, 5, 7] {
            let s = DesignSpace::binary(q).unwrap();
            for (i, p) in s.points().iter().enumerate() {
                assert_eq!(s.position(p.coords()), Some(i), "q={q} point {i}");
            }
            assert_eq!(s.position(&vec![0i8; q]), None);
        }
    }

    #[test]
    fn chemical_space_size_and_lookup() {
        let s = DesignSpace::chemical_balance(3).unwrap();
        assert_eq!(s.num_points(), 26);
        for (i, p) in s.points().iter().enumerate() {
            assert_eq!(s.position(p.coords()), Some(i));
        }
        assert!(s.position(&[2, 0, 0]).is_none());
    }

    #[test]
    fn uniform_measure_examples() {
        let s2 = DesignSpace::binary(2).unwrap();
        let u2 = DesignMeasure::uniform(&s2);
        assert!(u2.masses().iter().all(|&m| (m - 1.0 / 3.0).abs() < 1e-15));

        let s3 = DesignSpace::binary(3).unwrap();
        let u3 = DesignMeasure::uniform(&s3);
        assert!(u3.masses().iter().all(|&m| (m - 1.0 / 7.0).abs() < 1e-15));
        let pi = u3.class_masses().unwrap();
        assert!(pi.iter().all(|&p| (p - 1.0 / 7.0).abs() < 1e-15));

        let s4 = DesignSpace::binary(4).unwrap();
        let u4 = DesignMeasure::uniform(&s4);
        assert!(u4.masses().iter().all(|&m| (m - 1.0 / 15.0).abs() < 1e-15));
    }

    #[test]
    fn class_measure_places_mass_on_the_named_class() {
        let s = DesignSpace::binary(4).unwrap();
        let m = DesignMeasure::from_class_masses(&s, &[0.0, 1.0 / 6.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.support_size(), 6);
        for (i, &mass) in m.masses().iter().enumerate() {
            let want = if s.class_of(i) == 2 { 1.0 / 6.0 } else { 0.0 };
            assert!((mass - want).abs() < 1e-15);
        }

        let s3 = DesignSpace::binary(3).unwrap();
        let modd = DesignMeasure::from_class_masses(&s3, &[0.0, 1.0 / 3.0, 0.0]).unwrap();
        assert_eq!(modd.support_size(), 3);

        let s2 = DesignSpace::binary(2).unwrap();
        let u = DesignMeasure::from_class_masses(&s2, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(u.masses().iter().all(|&m| (m - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn class_measure_rejects_bad_normalization() {
        let s = DesignSpace::binary(4).unwrap();
        let err = DesignMeasure::from_class_masses(&s, &[0.0, 0.2, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn collapse_round_trips_class_measures() {
        let s = DesignSpace::binary(4).unwrap();
        let pi = [0.0, 1.0 / 6.0, 0.0, 0.0];
        let m = DesignMeasure::from_class_masses(&s, &pi).unwrap();
        let back = m.collapse_to_classes(1e-12).unwrap();
        for (a, b) in back.iter().zip(pi.iter()) {
            assert!((a - b).abs() < 1e-15);
        }

        // The uniform measure collapses to 1/15 per class.
        let u = DesignMeasure::uniform(&s);
        let pi_u = u.collapse_to_classes(1e-12).unwrap();
        assert!(pi_u.iter().all(|&p| (p - 1.0 / 15.0).abs() < 1e-15));
    }

    #[test]
    fn collapse_detects_asymmetry() {
        let s = DesignSpace::binary(2).unwrap();
        // Two different masses inside class 1.
        let m = DesignMeasure::from_masses(&s, vec![0.5, 0.25, 0.25]).unwrap();
        assert!(m.collapse_to_classes(1e-9).is_none());
    }

    #[test]
    fn collapse_is_binary_only() {
        let s = DesignSpace::chemical_balance(2).unwrap();
        let u = DesignMeasure::uniform(&s);
        assert!(u.class_masses().is_none());
        assert!(u.collapse_to_classes(1e-9).is_none());
    }

    #[test]
    fn from_masses_validates() {
        let s = DesignSpace::binary(2).unwrap();
        assert!(DesignMeasure::from_masses(&s, vec![0.5, 0.5]).is_err());
        assert!(DesignMeasure::from_masses(&s, vec![0.7, 0.4, -0.1]).is_err());
        assert!(DesignMeasure::from_masses(&s, vec![0.5, 0.4, 0.2]).is_err());
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = DesignSpace::binary(5).unwrap();
        let b = DesignSpace::binary(5).unwrap();
        assert_eq!(a.points(), b.points());
        let ja = serde_json::to_string(&*a).unwrap();
        let jb = serde_json::to_string(&*b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn measure_serialization_shape() {
        let s = DesignSpace::binary(2).unwrap();
        let m = DesignMeasure::uniform(&s);
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["q"], 2);
        assert_eq!(v["kind"], "binary");
        assert_eq!(v["masses"].as_array().unwrap().len(), 3);
        assert_eq!(v["class_masses"].as_array().unwrap().len(), 2);
    }
}
