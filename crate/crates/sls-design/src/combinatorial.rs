//! Hadamard matrices, balanced incomplete block designs and the reduced-
//! support measures they induce.
//!
//! A measure that spreads mass 1/b over the b columns of a BIB incidence
//! matrix has moment objects determined entirely by the design parameters
//! (q, k): N N^T = (r - lambda) I + lambda J and each column sums to k. So a
//! BIB design with the same q and k as a class-uniform measure, but far
//! fewer blocks, reproduces that measure's information matrix exactly at
//! every t while shrinking the support from a binomial coefficient to O(q).
//!
//! Three families cover every dimension needed here:
//!
//! ```text
//!   d1: (q, b, r, k, lambda) = (2m, 4m-2, 2m-1, m, m-1)     even q
//!   d2: (4s+1, 8s+2, 4s+2, 2s+1, 2s+1)                      q = 1 mod 4
//!   d3: (4s+3, 4s+3, 2s+2, 2s+2, s+1)                       q = 3 mod 4
//! ```
//!
//! d1 and d3 are carved out of Hadamard matrices, d2 is developed cyclically
//! from two searched base blocks. Every construction passes an exact
//! integer certification gate (row sums, column sums, pairwise inner
//! products) before it is returned, so a construction bug cannot leak a
//! non-design downstream.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::information::information;
use crate::space::{same_space, DesignMeasure, DesignSpace, SpaceKind};

/// Largest constructible Hadamard order.
pub const MAX_HADAMARD_ORDER: usize = 48;

/// Entrywise tolerance for declaring two information matrices equal.
pub const H_EQUIVALENCE_TOL: f64 = 1e-12;

/// A +/-1 matrix of order w with pairwise orthogonal rows (H H^T = w I).
#[derive(Debug, Clone, Serialize)]
pub struct HadamardMatrix {
    order: usize,
    /// Row-major entries, each +1 or -1.
    entries: Vec<i8>,
    /// First row (and first column) all +1.
    normalized: bool,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    fn verify(&self) -> bool {
        let w = self.order;
        for i in 0..w {
            for j in i..w {
                let dot: i32 = (0..w)
                    .map(|k| self.entry(i, k) as i32 * self.entry(j, k) as i32)
                    .sum();
                let want = if i == j { w as i32 } else { 0 };
                if dot != want {
                    return false;
                }
            }
        }
        true
    }
}

/// Construct a normalized Hadamard matrix of the given order.
///
/// Supported orders are 1, 2 and the multiples of 4 up to
/// `MAX_HADAMARD_ORDER`, built from doubling, the quadratic-residue
/// construction over a prime p = order - 1 congruent to 3 mod 4, or its
/// symmetric-conference variant for order = 2(p+1) with p congruent to
/// 1 mod 4. Every matrix is checked against H H^T = w I in integer
/// arithmetic before it is returned.
pub fn hadamard(order: usize) -> Result<HadamardMatrix> {
    let raw = build_hadamard(order)?;
    let normalized = normalize(raw, order);
    let matrix = HadamardMatrix {
        order,
        entries: normalized,
        normalized: true,
    };
    if !matrix.verify() {
        return Err(Error::Construction(format!(
            "order-{order} matrix failed the orthogonality gate"
        )));
    }
    Ok(matrix)
}

fn build_hadamard(order: usize) -> Result<Vec<i8>> {
    match order {
        1 => return Ok(vec![1]),
        2 => return Ok(vec![1, 1, 1, -1]),
        o if o % 4 != 0 || o == 0 || o > MAX_HADAMARD_ORDER => {
            return Err(Error::UnsupportedOrder(order))
        }
        _ => {}
    }
    if order.is_power_of_two() {
        return Ok(double(build_hadamard(order / 2)?, order / 2));
    }
    if is_prime(order - 1) && (order - 1) % 4 == 3 {
        return Ok(paley_skew(order - 1));
    }
    if order.is_multiple_of(2) {
        let half = order / 2;
        if half >= 2 && is_prime(half - 1) && (half - 1) % 4 == 1 {
            return Ok(paley_symmetric(half - 1));
        }
        if half.is_multiple_of(4) {
            if let Ok(inner) = build_hadamard(half) {
                return Ok(double(inner, half));
            }
        }
    }
    Err(Error::UnsupportedOrder(order))
}

/// [[H, H], [H, -H]].
fn double(h: Vec<i8>, w: usize) -> Vec<i8> {
    let n = 2 * w;
    let mut out = vec![0i8; n * n];
    for i in 0..w {
        for j in 0..w {
            let v = h[i * w + j];
            out[i * n + j] = v;
            out[i * n + w + j] = v;
            out[(w + i) * n + j] = v;
            out[(w + i) * n + w + j] = -v;
        }
    }
    out
}

/// Order p+1 from the skew conference matrix of a prime p = 3 mod 4:
/// H = I + C with C antisymmetric built from the quadratic character.
fn paley_skew(p: usize) -> Vec<i8> {
    let chi = quadratic_character(p);
    let n = p + 1;
    let mut h = vec![0i8; n * n];
    for i in 0..n {
        h[i * n + i] = 1;
    }
    for j in 1..n {
        h[j] += 1; // C[0][j] = 1
        h[j * n] -= 1; // C[j][0] = -1
    }
    for i in 1..n {
        for j in 1..n {
            if i != j {
                h[i * n + j] += chi[(p + i - j) % p];
            }
        }
    }
    h
}

/// Order 2(p+1) from the symmetric conference matrix of a prime p = 1 mod 4:
/// blocks [[C+I, C-I], [C-I, -C-I]].
fn paley_symmetric(p: usize) -> Vec<i8> {
    let chi = quadratic_character(p);
    let m = p + 1;
    let mut c = vec![0i32; m * m];
    for j in 1..m {
        c[j] = 1;
        c[j * m] = 1;
    }
    for i in 1..m {
        for j in 1..m {
            if i != j {
                c[i * m + j] = chi[(p + i - j) % p] as i32;
            }
        }
    }
    let n = 2 * m;
    let mut h = vec![0i8; n * n];
    for i in 0..m {
        for j in 0..m {
            let v = c[i * m + j];
            let diag = if i == j { 1 } else { 0 };
            h[i * n + j] = (v + diag) as i8;
            h[i * n + m + j] = (v - diag) as i8;
            h[(m + i) * n + j] = (v - diag) as i8;
            h[(m + i) * n + m + j] = (-v - diag) as i8;
        }
    }
    h
}

/// chi[d] = +1 if d is a nonzero square mod p, -1 otherwise; chi[0] = 0.
fn quadratic_character(p: usize) -> Vec<i8> {
    let mut chi = vec![-1i8; p];
    chi[0] = 0;
    for x in 1..p {
        chi[(x * x) % p] = 1;
    }
    chi
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Negate columns until the first row is all +1, then rows until the first
/// column is too; both operations preserve row orthogonality.
fn normalize(mut h: Vec<i8>, w: usize) -> Vec<i8> {
    for col in 0..w {
        if h[col] == -1 {
            for row in 0..w {
                h[row * w + col] = -h[row * w + col];
            }
        }
    }
    for row in 1..w {
        if h[row * w] == -1 {
            for col in 0..w {
                h[row * w + col] = -h[row * w + col];
            }
        }
    }
    h
}

/// Incidence matrix of a BIB design: q symbol rows, b block columns, with
/// constant row sum r, column sum k, and pairwise row inner product lambda.
#[derive(Debug, Clone, Serialize)]
pub struct IncidenceMatrix {
    pub q: usize,
    pub b: usize,
    pub r: usize,
    pub k: usize,
    pub lambda: usize,
    /// Row-major 0/1 entries, q rows by b columns.
    columns: Vec<Vec<u8>>,
}

impl IncidenceMatrix {
    /// Certify the four BIB axioms in exact integer arithmetic, plus the
    /// counting identities q r = b k and r(k-1) = lambda(q-1), and derive
    /// the parameters. Columns must be pairwise distinct so support-size
    /// bookkeeping stays exact.
    fn certify(q: usize, columns: Vec<Vec<u8>>) -> Result<Self> {
        let b = columns.len();
        if b == 0 || columns.iter().any(|c| c.len() != q) {
            return Err(Error::Construction(
                "incidence columns have inconsistent shape".into(),
            ));
        }
        let k = columns[0].iter().map(|&v| v as usize).sum::<usize>();
        for (idx, col) in columns.iter().enumerate() {
            if col.iter().any(|&v| v > 1) {
                return Err(Error::Construction("incidence entries must be 0/1".into()));
            }
            let sum: usize = col.iter().map(|&v| v as usize).sum();
            if sum != k {
                return Err(Error::Construction(format!(
                    "column {idx} sums to {sum}, expected block size {k}"
                )));
            }
        }
        for i in 0..b {
            for j in (i + 1)..b {
                if columns[i] == columns[j] {
                    return Err(Error::Construction(format!("blocks {i} and {j} coincide")));
                }
            }
        }
        let row_sum = |row: usize| -> usize { columns.iter().map(|c| c[row] as usize).sum() };
        let r = row_sum(0);
        for row in 1..q {
            let sum = row_sum(row);
            if sum != r {
                return Err(Error::Construction(format!(
                    "row {row} sums to {sum}, expected replication {r}"
                )));
            }
        }
        let pair = |a: usize, c: usize| -> usize {
            columns.iter().map(|col| (col[a] & col[c]) as usize).sum()
        };
        let lambda = pair(0, 1);
        for a in 0..q {
            for c in (a + 1)..q {
                let l = pair(a, c);
                if l != lambda {
                    return Err(Error::Construction(format!(
                        "symbols {a} and {c} concur {l} times, expected {lambda}"
                    )));
                }
            }
        }
        if q * r != b * k || r * (k - 1) != lambda * (q - 1) {
            return Err(Error::Construction(format!(
                "parameters (q={q}, b={b}, r={r}, k={k}, lambda={lambda}) violate the counting identities"
            )));
        }
        Ok(IncidenceMatrix {
            q,
            b,
            r,
            k,
            lambda,
            columns,
        })
    }

    pub fn column(&self, j: usize) -> &[u8] {
        &self.columns[j]
    }

    /// Column as design-point coordinates.
    pub fn column_coords(&self, j: usize) -> Vec<i8> {
        self.columns[j].iter().map(|&v| v as i8).collect()
    }

    pub fn params(&self) -> (usize, usize, usize, usize, usize) {
        (self.q, self.b, self.r, self.k, self.lambda)
    }

    /// Plain-text 0/1 grid, one symbol row per line.
    pub fn text_grid(&self) -> String {
        let mut out = String::with_capacity(self.q * (self.b + 1));
        for row in 0..self.q {
            for col in &self.columns {
                out.push(if col[row] == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for IncidenceMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.text_grid())
    }
}

/// BIB(2m, 4m-2, 2m-1, m, m-1): the residual of the symmetric Hadamard
/// design. Normalize an order-4m Hadamard matrix, split on its second row,
/// keep the 2m columns where that row is -1, and read one block off each
/// remaining row at its +1 positions.
pub fn bib_d1(m: usize) -> Result<IncidenceMatrix> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "the even-dimension family needs m >= 2, got {m}"
        )));
    }
    let h = hadamard(4 * m)?;
    let split_row = 1;
    let symbols: Vec<usize> = (0..h.order())
        .filter(|&c| h.entry(split_row, c) == -1)
        .collect();
    if symbols.len() != 2 * m {
        return Err(Error::Construction(format!(
            "splitting row carries {} minus entries, expected {}",
            symbols.len(),
            2 * m
        )));
    }
    let columns: Vec<Vec<u8>> = (0..h.order())
        .filter(|&row| row != 0 && row != split_row)
        .map(|row| {
            symbols
                .iter()
                .map(|&c| u8::from(h.entry(row, c) == 1))
                .collect()
        })
        .collect();
    let design = IncidenceMatrix::certify(2 * m, columns)?;
    expect_params(design, (2 * m, 4 * m - 2, 2 * m - 1, m, m - 1))
}

/// BIB(4s+1, 8s+2, 4s+2, 2s+1, 2s+1): cyclic development of two base
/// blocks modulo q = 4s+1. The base blocks are found by a bounded search
/// over k-subsets containing zero, paired through their difference counts;
/// the first pair (in lexicographic order) whose development certifies is
/// returned.
pub fn bib_d2(s: usize) -> Result<IncidenceMatrix> {
    if !(1..=4).contains(&s) {
        return Err(Error::Domain(format!(
            "the cyclic family is built for 1 <= s <= 4, got {s}"
        )));
    }
    let q = 4 * s + 1;
    let k = 2 * s + 1;
    let lambda = 2 * s + 1;
    let candidates = subsets_with_zero(q, k);
    // Difference vector -> candidate indices, in candidate order.
    let mut by_diffs: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (idx, block) in candidates.iter().enumerate() {
        by_diffs
            .entry(difference_counts(block, q))
            .or_default()
            .push(idx);
    }
    for (i1, b1) in candidates.iter().enumerate() {
        let d1 = difference_counts(b1, q);
        if d1.iter().any(|&c| c > lambda) {
            continue;
        }
        let need: Vec<usize> = d1.iter().map(|&c| lambda - c).collect();
        let Some(matches) = by_diffs.get(&need) else {
            continue;
        };
        for &i2 in matches {
            if i2 < i1 {
                continue;
            }
            let columns = develop(&[b1.as_slice(), candidates[i2].as_slice()], q);
            if let Ok(design) = IncidenceMatrix::certify(q, columns) {
                return expect_params(design, (q, 8 * s + 2, 4 * s + 2, k, lambda));
            }
        }
    }
    Err(Error::Construction(format!(
        "no cyclic base-block pair found for q={q}, k={k}, lambda={lambda}"
    )))
}

/// BIB(4s+3, 4s+3, 2s+2, 2s+2, s+1): the core of a normalized order-(4s+4)
/// Hadamard matrix with -1 mapped to 1 and +1 to 0.
pub fn bib_d3(s: usize) -> Result<IncidenceMatrix> {
    if s > 4 {
        return Err(Error::Domain(format!(
            "the symmetric family is built for s <= 4, got {s}"
        )));
    }
    let q = 4 * s + 3;
    let h = hadamard(4 * s + 4)?;
    let columns: Vec<Vec<u8>> = (1..h.order())
        .map(|col| {
            (1..h.order())
                .map(|row| u8::from(h.entry(row, col) == -1))
                .collect()
        })
        .collect();
    let design = IncidenceMatrix::certify(q, columns)?;
    expect_params(design, (q, q, 2 * s + 2, 2 * s + 2, s + 1))
}

fn expect_params(
    design: IncidenceMatrix,
    want: (usize, usize, usize, usize, usize),
) -> Result<IncidenceMatrix> {
    if design.params() != want {
        return Err(Error::Construction(format!(
            "certified parameters {:?} differ from target {:?}",
            design.params(),
            want
        )));
    }
    Ok(design)
}

/// All k-subsets of 0..q containing 0, ascending lexicographic.
fn subsets_with_zero(q: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; 1];
    fn recurse(
        q: usize,
        k: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for next in start..q {
            current.push(next);
            recurse(q, k, next + 1, current, out);
            current.pop();
        }
    }
    recurse(q, k, 1, &mut current, &mut out);
    out
}

/// Counts of each nonzero difference x - y mod q over ordered pairs of
/// distinct block elements; index d-1 holds the count of difference d.
fn difference_counts(block: &[usize], q: usize) -> Vec<usize> {
    let mut counts = vec![0usize; q - 1];
    for &x in block {
        for &y in block {
            if x != y {
                counts[(q + x - y) % q - 1] += 1;
            }
        }
    }
    counts
}

/// Develop base blocks cyclically: block + i mod q for i = 0..q.
fn develop(bases: &[&[usize]], q: usize) -> Vec<Vec<u8>> {
    let mut columns = Vec::with_capacity(bases.len() * q);
    for base in bases {
        for shift in 0..q {
            let mut col = vec![0u8; q];
            for &x in *base {
                col[(x + shift) % q] = 1;
            }
            columns.push(col);
        }
    }
    columns
}

/// The measure spreading mass 1/b over the columns of an incidence matrix,
/// placed on an already-enumerated binary space. Repeated columns would
/// accumulate mass; the certification gate keeps them distinct.
pub fn measure_from_incidence(
    design: &IncidenceMatrix,
    space: &Arc<DesignSpace>,
) -> Result<DesignMeasure> {
    if space.kind() != SpaceKind::Binary || space.q() != design.q {
        return Err(Error::Domain(format!(
            "incidence columns of length {} need the binary space of dimension {}",
            design.q, design.q
        )));
    }
    let mut masses = vec![0.0f64; space.num_points()];
    let share = 1.0 / design.b as f64;
    for j in 0..design.b {
        let coords = design.column_coords(j);
        let idx = space.position(&coords).ok_or_else(|| {
            Error::Domain(format!("column {j} is not a point of the design space"))
        })?;
        masses[idx] += share;
    }
    DesignMeasure::from_masses(space, masses)
}

/// The reduced-support measure for dimension q: the even family for even q,
/// the cyclic family for q = 1 mod 4, the symmetric family for q = 3 mod 4.
pub fn reduced_support_design(q: usize) -> Result<IncidenceMatrix> {
    if q < 3 {
        return Err(Error::Domain(format!(
            "support reduction starts at q = 3, got {q}"
        )));
    }
    if q.is_multiple_of(2) {
        bib_d1(q / 2)
    } else if q % 4 == 1 {
        bib_d2((q - 1) / 4)
    } else {
        bib_d3((q - 3) / 4)
    }
}

/// The chemical-balance measure built from q rows of a normalized Hadamard
/// matrix of order w (the smallest supported order with w >= q + 1), with
/// mass 1/w on each column. Its mean vector vanishes and its information
/// matrix is exactly the identity, so it is both D- and A-optimal for every
/// t.
pub fn example1_measure(q: usize) -> Result<(Arc<DesignSpace>, DesignMeasure)> {
    let space = DesignSpace::chemical_balance(q)?;
    let w = (q + 1..=MAX_HADAMARD_ORDER + 1)
        .find(|&o| o == 1 || o == 2 || (o.is_multiple_of(4) && o <= MAX_HADAMARD_ORDER))
        .ok_or(Error::UnsupportedOrder(q + 1))?;
    let h = hadamard(w)?;
    let mut masses = vec![0.0f64; space.num_points()];
    let share = 1.0 / w as f64;
    for col in 0..w {
        // The q rows after the all-ones row, in order.
        let coords: Vec<i8> = (1..=q).map(|row| h.entry(row, col)).collect();
        let idx = space
            .position(&coords)
            .expect("a +/-1 vector is always a chemical-balance point");
        masses[idx] += share;
    }
    let measure = DesignMeasure::from_masses(&space, masses)?;
    Ok((space, measure))
}

/// Entrywise comparison of the two information matrices at the same t.
/// True iff they agree within `H_EQUIVALENCE_TOL`.
pub fn verify_h_equivalence(
    p_reduced: &DesignMeasure,
    p_full: &DesignMeasure,
    t: f64,
) -> (bool, f64) {
    assert!(
        same_space(p_reduced.space(), p_full.space()),
        "equivalence check needs measures on a common space"
    );
    let a = information(p_reduced, t).information_matrix;
    let b = information(p_full, t).information_matrix;
    let diff = a.max_abs_diff(&b);
    (diff <= H_EQUIVALENCE_TOL, diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_measure_on, MeasureFamily};
    use crate::information::{check_optimal, phi, psi_values, Criterion};

    #[test]
    fn all_supported_orders_verify() {
        for order in [1usize, 2, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40, 44, 48] {
            let h = hadamard(order).unwrap();
            assert!(h.normalized());
            assert!(h.row(0).iter().all(|&v| v == 1), "order {order}");
        }
    }

    #[test]
    fn unsupported_orders_error() {
        for order in [3usize, 6, 10, 52, 100] {
            assert!(
                matches!(hadamard(order), Err(Error::UnsupportedOrder(_))),
                "order {order}"
            );
        }
    }

    #[test]
    fn d1_parameter_ladder() {
        for (m, want) in [
            (2usize, (4, 6, 3, 2, 1)),
            (3, (6, 10, 5, 3, 2)),
            (4, (8, 14, 7, 4, 3)),
            (5, (10, 18, 9, 5, 4)),
        ] {
            let d = bib_d1(m).unwrap();
            assert_eq!(d.params(), want);
        }
        assert!(bib_d1(1).is_err());
    }

    #[test]
    fn d2_parameter_ladder() {
        for (s, want) in [(1usize, (5, 10, 6, 3, 3)), (2, (9, 18, 10, 5, 5))] {
            let d = bib_d2(s).unwrap();
            assert_eq!(d.params(), want);
        }
        assert!(bib_d2(0).is_err());
        assert!(bib_d2(5).is_err());
    }

    #[test]
    fn d2_concurrence_spot_check() {
        // Every pair of symbols meets in exactly lambda = 3 blocks at s = 1.
        let d = bib_d2(1).unwrap();
        for a in 0..d.q {
            for c in (a + 1)..d.q {
                let meet: usize = (0..d.b)
                    .filter(|&j| d.column(j)[a] == 1 && d.column(j)[c] == 1)
                    .count();
                assert_eq!(meet, 3);
            }
        }
    }

    #[test]
    fn d3_parameter_ladder() {
        for (s, want) in [
            (0usize, (3, 3, 2, 2, 1)),
            (1, (7, 7, 4, 4, 2)),
            (2, (11, 11, 6, 6, 3)),
        ] {
            let d = bib_d3(s).unwrap();
            assert_eq!(d.params(), want);
        }
    }

    #[test]
    fn reduced_measures_sit_on_the_right_classes() {
        // Even q = 6: ten support points, all of weight 3, mass 1/10 each.
        let space = DesignSpace::binary(6).unwrap();
        let p1 = measure_from_incidence(&bib_d1(3).unwrap(), &space).unwrap();
        assert_eq!(p1.support_size(), 10);
        for (i, &m) in p1.masses().iter().enumerate() {
            if m > 0.0 {
                assert_eq!(space.class_of(i), 3);
                assert!((m - 0.1).abs() < 1e-15);
            }
        }

        // q = 7: seven support points of weight 4, mass 1/7.
        let space7 = DesignSpace::binary(7).unwrap();
        let p3 = measure_from_incidence(&bib_d3(1).unwrap(), &space7).unwrap();
        assert_eq!(p3.support_size(), 7);
        for (i, &m) in p3.masses().iter().enumerate() {
            if m > 0.0 {
                assert_eq!(space7.class_of(i), 4);
                assert!((m - 1.0 / 7.0).abs() < 1e-15);
            }
        }

        // q = 9: eighteen support points of weight 5.
        let space9 = DesignSpace::binary(9).unwrap();
        let p2 = measure_from_incidence(&bib_d2(2).unwrap(), &space9).unwrap();
        assert_eq!(p2.support_size(), 18);
        for (i, &m) in p2.masses().iter().enumerate() {
            if m > 0.0 {
                assert_eq!(space9.class_of(i), 5);
            }
        }
    }

    #[test]
    fn h_equivalence_against_class_families() {
        // Reduced and full measures share G and g, hence H at every t.
        let cases: &[(usize, MeasureFamily)] = &[
            (6, MeasureFamily::EvenCentral),
            (5, MeasureFamily::OddCentral),
            (7, MeasureFamily::OddCentral),
        ];
        for &(q, family) in cases {
            let space = DesignSpace::binary(q).unwrap();
            let reduced =
                measure_from_incidence(&reduced_support_design(q).unwrap(), &space).unwrap();
            let full = analytic_measure_on(&space, family, None).unwrap();
            let mut t = 0.0;
            while t < 1.0 {
                let (ok, diff) = verify_h_equivalence(&reduced, &full, t);
                assert!(ok, "q={q} t={t}: diff {diff}");
                t += 0.1;
            }
        }
    }

    #[test]
    fn example1_is_identity_information() {
        // (q, smallest supported order w >= q+1): support size equals w.
        for (q, w) in [(3usize, 4usize), (6, 8), (7, 8)] {
            let (space, measure) = example1_measure(q).unwrap();
            assert_eq!(measure.support_size(), w, "q={q}");
            let summary = information(&measure, 0.5);
            assert!(!summary.singular);
            let mut max_dev = 0.0f64;
            for i in 0..q {
                for j in 0..q {
                    let want = if i == j { 1.0 } else { 0.0 };
                    max_dev = max_dev.max((summary.information_matrix.get(i, j) - want).abs());
                }
            }
            assert!(max_dev < 1e-12, "q={q}: dev {max_dev}");
            for v in &summary.mean_vector {
                assert!(v.abs() < 1e-15);
            }
            // Identity information: phi_D = 0 and phi_A = -q.
            assert!(phi(&summary, Criterion::D).abs() < 1e-12);
            assert!((phi(&summary, Criterion::A) + q as f64).abs() < 1e-12);
            let _ = space;
        }
    }

    #[test]
    fn example1_psi_equals_squared_norm() {
        let (space, measure) = example1_measure(6).unwrap();
        let summary = information(&measure, 0.3);
        for criterion in [Criterion::D, Criterion::A] {
            let report = psi_values(&measure, &summary, criterion).unwrap();
            for (idx, &psi) in report.psi.iter().enumerate() {
                let norm_sq = space.point(idx).weight() as f64;
                assert!((psi - norm_sq).abs() < 1e-10, "idx {idx}");
            }
        }
    }

    #[test]
    fn example1_optimal_for_every_t() {
        for q in [3usize, 6] {
            let (_, measure) = example1_measure(q).unwrap();
            for t in [0.0, 0.5, 0.9] {
                for criterion in [Criterion::D, Criterion::A] {
                    let (ok, report) = check_optimal(&measure, t, criterion, 1e-9);
                    assert!(
                        ok,
                        "q={q} t={t} {criterion}: {:?}",
                        report.map(|r| r.max_gap)
                    );
                }
            }
        }
    }

    #[test]
    fn incidence_serialization_and_grid() {
        let d = bib_d3(0).unwrap();
        let grid = d.text_grid();
        assert_eq!(grid.lines().count(), 3);
        assert!(grid.lines().all(|l| l.len() == 3));
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["q"], 3);
        assert_eq!(json["lambda"], 1);
    }

    #[test]
    fn column_mismatch_is_a_domain_error() {
        let space = DesignSpace::binary(5).unwrap();
        let d = bib_d1(3).unwrap(); // q = 6 design
        assert!(matches!(
            measure_from_incidence(&d, &space),
            Err(Error::Domain(_))
        ));
    }
}
