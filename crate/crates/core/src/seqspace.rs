//! Finitely supported vector model of separable Hilbert space.
//!
//! A `SparseVec` is a finitely supported coefficient sequence over a 1-based
//! orthonormal basis. Block decompositions carve the index range into named
//! disjoint blocks; the upper-sphere chart realizes the graph of
//! `s(u) = sqrt(1 - |u|^2)` over the open unit ball.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Finitely supported coefficient sequence. Entries are sorted by index and
/// never store an exact zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn zero() -> Self {
        SparseVec {
            entries: Vec::new(),
        }
    }

    /// Build from index/value pairs; duplicate indices are summed, zeros dropped.
    /// Index 0 is rejected (the basis is 1-based).
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, f64)> = pairs.to_vec();
        for &(i, _) in &sorted {
            if i == 0 {
                return Err(CoreError::Domain {
                    op: "SparseVec::from_pairs",
                    detail: "basis indices start at 1".into(),
                });
            }
        }
        sorted.sort_unstable_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (i, v) in sorted {
            match entries.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Ok(SparseVec { entries })
    }

    /// Unit basis vector `e_k`.
    pub fn basis(k: usize) -> Self {
        SparseVec {
            entries: vec![(k, 1.0)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// a*v + w over the merged support, exact zeros dropped.
    pub fn add_scaled(a: f64, v: &SparseVec, w: &SparseVec) -> SparseVec {
        let mut entries = Vec::with_capacity(v.entries.len() + w.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < v.entries.len() || j < w.entries.len() {
            let value = match (v.entries.get(i), w.entries.get(j)) {
                (Some(&(iv, xv)), Some(&(iw, xw))) => {
                    if iv == iw {
                        i += 1;
                        j += 1;
                        (iv, a * xv + xw)
                    } else if iv < iw {
                        i += 1;
                        (iv, a * xv)
                    } else {
                        j += 1;
                        (iw, xw)
                    }
                }
                (Some(&(iv, xv)), None) => {
                    i += 1;
                    (iv, a * xv)
                }
                (None, Some(&(iw, xw))) => {
                    j += 1;
                    (iw, xw)
                }
                (None, None) => unreachable!(),
            };
            if value.1 != 0.0 {
                entries.push(value);
            }
        }
        SparseVec { entries }
    }

    pub fn add(v: &SparseVec, w: &SparseVec) -> SparseVec {
        SparseVec::add_scaled(1.0, v, w)
    }

    pub fn sub(v: &SparseVec, w: &SparseVec) -> SparseVec {
        SparseVec::add_scaled(-1.0, w, v)
    }

    pub fn scale(&self, a: f64) -> SparseVec {
        if a == 0.0 {
            return SparseVec::zero();
        }
        SparseVec {
            entries: self.entries.iter().map(|&(i, v)| (i, a * v)).collect(),
        }
    }

    /// Inner product over the shared support.
    pub fn inner(v: &SparseVec, w: &SparseVec) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < v.entries.len() && j < w.entries.len() {
            let (iv, xv) = v.entries[i];
            let (iw, xw) = w.entries[j];
            if iv == iw {
                acc += xv * xw;
                i += 1;
                j += 1;
            } else if iv < iw {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    pub fn norm_l2(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dist_l2(v: &SparseVec, w: &SparseVec) -> f64 {
        SparseVec::sub(v, w).norm_l2()
    }

    /// Restriction to an index set (projection onto the spanned block).
    pub fn restrict(&self, indices: &BTreeSet<usize>) -> SparseVec {
        SparseVec {
            entries: self
                .entries
                .iter()
                .filter(|&&(i, _)| indices.contains(&i))
                .copied()
                .collect(),
        }
    }

    /// Replace a single coordinate, dropping it when the value is zero.
    pub fn with_coord(&self, index: usize, value: f64) -> SparseVec {
        let mut entries: Vec<(usize, f64)> = self
            .entries
            .iter()
            .filter(|&&(i, _)| i != index)
            .copied()
            .collect();
        if value != 0.0 {
            entries.push((index, value));
            entries.sort_unstable_by_key(|&(i, _)| i);
        }
        SparseVec { entries }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut dense = vec![0.0; dim];
        for &(i, v) in &self.entries {
            if i <= dim {
                dense[i - 1] = v;
            }
        }
        dense
    }
}

/// Truncated sequence space: every checked operation rejects indices beyond
/// the truncation dimension.
#[derive(Debug, Clone)]
pub struct SeqSpace {
    dim: usize,
}

impl SeqSpace {
    pub fn new(dim: usize) -> Self {
        SeqSpace { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check(&self, v: &SparseVec) -> Result<()> {
        if let Some(top) = v.max_index() {
            if top > self.dim {
                return Err(CoreError::TruncationViolation {
                    index: top,
                    dim: self.dim,
                });
            }
        }
        Ok(())
    }

    /// a*v + w with truncation checking.
    pub fn algebra(&self, a: f64, v: &SparseVec, w: &SparseVec) -> Result<SparseVec> {
        self.check(v)?;
        self.check(w)?;
        Ok(SparseVec::add_scaled(a, v, w))
    }

    pub fn inner(&self, v: &SparseVec, w: &SparseVec) -> Result<f64> {
        self.check(v)?;
        self.check(w)?;
        Ok(SparseVec::inner(v, w))
    }

    pub fn l2_norm(&self, v: &SparseVec) -> Result<f64> {
        self.check(v)?;
        Ok(v.norm_l2())
    }
}

/// Named disjoint index blocks partitioning 1..=D.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    dim: usize,
    blocks: Vec<(String, BTreeSet<usize>)>,
}

impl BlockDecomposition {
    pub fn new(dim: usize, blocks: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut stored = Vec::with_capacity(blocks.len());
        for (name, indices) in blocks {
            let set: BTreeSet<usize> = indices.into_iter().collect();
            for &i in &set {
                if i == 0 || i > dim {
                    return Err(CoreError::TruncationViolation { index: i, dim });
                }
                if !seen.insert(i) {
                    return Err(CoreError::Domain {
                        op: "BlockDecomposition::new",
                        detail: format!("index {i} assigned to two blocks"),
                    });
                }
            }
            stored.push((name, set));
        }
        if seen.len() != dim {
            return Err(CoreError::Domain {
                op: "BlockDecomposition::new",
                detail: format!("blocks cover {} of {dim} indices", seen.len()),
            });
        }
        Ok(BlockDecomposition {
            dim,
            blocks: stored,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, name: &str) -> Option<&BTreeSet<usize>> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    /// Projection of `v` onto the named block. Idempotent; never increases
    /// the l2 norm (the basis is suppression-unconditional).
    pub fn project(&self, name: &str, v: &SparseVec) -> Result<SparseVec> {
        let set = self.block(name).ok_or_else(|| CoreError::Domain {
            op: "BlockDecomposition::project",
            detail: format!("no block named {name}"),
        })?;
        Ok(v.restrict(set))
    }
}

/// A two-block split of the index range: base and fiber of a product
/// decomposition E = E1 x E2.
#[derive(Debug, Clone)]
pub struct ProductSplit {
    pub first: BTreeSet<usize>,
    pub second: BTreeSet<usize>,
}

impl ProductSplit {
    pub fn new(first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        let f: BTreeSet<usize> = first.into_iter().collect();
        let s: BTreeSet<usize> = second.into_iter().collect();
        if let Some(i) = f.intersection(&s).next() {
            return Err(CoreError::Domain {
                op: "ProductSplit::new",
                detail: format!("index {i} lies in both factors"),
            });
        }
        Ok(ProductSplit {
            first: f,
            second: s,
        })
    }

    pub fn split(&self, v: &SparseVec) -> Result<ProductPoint> {
        for i in v.support() {
            if !self.first.contains(&i) && !self.second.contains(&i) {
                return Err(CoreError::Domain {
                    op: "ProductSplit::split",
                    detail: format!("index {i} lies in neither factor"),
                });
            }
        }
        Ok(ProductPoint {
            x1: v.restrict(&self.first),
            x2: v.restrict(&self.second),
        })
    }

    pub fn join(&self, p: &ProductPoint) -> SparseVec {
        SparseVec::add(&p.x1, &p.x2)
    }

    pub fn validate(&self, p: &ProductPoint) -> Result<()> {
        for i in p.x1.support() {
            if !self.first.contains(&i) {
                return Err(CoreError::Domain {
                    op: "ProductSplit::validate",
                    detail: format!("first component carries foreign index {i}"),
                });
            }
        }
        for i in p.x2.support() {
            if !self.second.contains(&i) {
                return Err(CoreError::Domain {
                    op: "ProductSplit::validate",
                    detail: format!("second component carries foreign index {i}"),
                });
            }
        }
        Ok(())
    }
}

/// A pair (x1, x2) over a declared block decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    pub x1: SparseVec,
    pub x2: SparseVec,
}

impl ProductPoint {
    pub fn new(x1: SparseVec, x2: SparseVec) -> Self {
        ProductPoint { x1, x2 }
    }

    pub fn norm_l2(&self) -> f64 {
        (self.x1.norm_l2().powi(2) + self.x2.norm_l2().powi(2)).sqrt()
    }

    pub fn dist_l2(p: &ProductPoint, q: &ProductPoint) -> f64 {
        (SparseVec::dist_l2(&p.x1, &q.x1).powi(2) + SparseVec::dist_l2(&p.x2, &q.x2).powi(2))
            .sqrt()
    }
}

/// A point (u, t) of the upper sphere: |u|^2 + t^2 = 1, t > 0.
#[derive(Debug, Clone)]
pub struct SpherePoint {
    pub u: SparseVec,
    pub t: f64,
}

/// Chart of the upper sphere over the open unit ball: u -> (u, sqrt(1-|u|^2)).
/// Rejects inputs whose height would fall below the equator margin.
pub fn lift_to_sphere(u: &SparseVec, equator_margin: f64) -> Result<SpherePoint> {
    let n = u.norm_l2();
    let t_sq = 1.0 - n * n;
    if t_sq <= equator_margin * equator_margin {
        return Err(CoreError::EquatorProximity {
            norm: n,
            t_min: equator_margin,
        });
    }
    Ok(SpherePoint {
        u: u.clone(),
        t: t_sq.sqrt(),
    })
}

/// Slope of the tangent hyperplane at `y` in direction `w`:
/// `L_y(w) = -<u_y, w> / t_y`, the derivative of the chart height.
pub fn tangent_slope(y: &SpherePoint, w: &SparseVec) -> f64 {
    -SparseVec::inner(&y.u, w) / y.t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space() -> SeqSpace {
        SeqSpace::new(64)
    }

    #[test]
    fn zero_scale_is_identity_on_w() {
        let v = SparseVec::from_pairs(&[(1, 2.0), (5, -3.0)]).unwrap();
        let w = SparseVec::from_pairs(&[(2, 1.5), (5, 0.25)]).unwrap();
        assert_eq!(space().algebra(0.0, &v, &w).unwrap(), w);
    }

    #[test]
    fn unit_basis_norm_is_one() {
        assert_eq!(space().l2_norm(&SparseVec::basis(7)).unwrap(), 1.0);
    }

    #[test]
    fn truncation_violation_rejected() {
        let v = SparseVec::basis(65);
        assert!(matches!(
            space().l2_norm(&v),
            Err(CoreError::TruncationViolation { index: 65, dim: 64 })
        ));
    }

    #[test]
    fn algebra_matches_dense_oracle_on_random_supports() {
        // Dense-array brute force over 20-support pairs.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut pairs_v = Vec::new();
            let mut pairs_w = Vec::new();
            for _ in 0..20 {
                pairs_v.push((rng.gen_range(1..=64usize), rng.gen_range(-2.0..2.0)));
                pairs_w.push((rng.gen_range(1..=64usize), rng.gen_range(-2.0..2.0)));
            }
            let v = SparseVec::from_pairs(&pairs_v).unwrap();
            let w = SparseVec::from_pairs(&pairs_w).unwrap();
            let a = rng.gen_range(-3.0..3.0);

            let dense_v = v.to_dense(64);
            let dense_w = w.to_dense(64);
            let expect: Vec<f64> = dense_v
                .iter()
                .zip(&dense_w)
                .map(|(x, y)| a * x + y)
                .collect();
            let got = space().algebra(a, &v, &w).unwrap().to_dense(64);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() <= 1e-14, "entry mismatch: {g} vs {e}");
            }
            let inner_dense: f64 = dense_v.iter().zip(&dense_w).map(|(x, y)| x * y).sum();
            assert!((space().inner(&v, &w).unwrap() - inner_dense).abs() <= 1e-14);
            let norm_dense: f64 = dense_v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((space().l2_norm(&v).unwrap() - norm_dense).abs() <= 1e-14);
        }
    }

    #[test]
    fn lift_pole() {
        let p = lift_to_sphere(&SparseVec::zero(), 0.1).unwrap();
        assert_eq!(p.t, 1.0);
        assert!(p.u.is_zero());
    }

    #[test]
    fn lift_three_four_five() {
        let u = SparseVec::basis(1).scale(0.6);
        let p = lift_to_sphere(&u, 0.1).unwrap();
        assert!((p.t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lift_rejects_equator() {
        let u = SparseVec::basis(1).scale(0.9999);
        assert!(lift_to_sphere(&u, 0.1).is_err());
    }

    #[test]
    fn lift_then_drop_t_is_identity_and_chart_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let pairs: Vec<(usize, f64)> = (0..8)
                .map(|_| (rng.gen_range(1..=64usize), rng.gen_range(-0.3..0.3)))
                .collect();
            let u = SparseVec::from_pairs(&pairs).unwrap();
            if u.norm_l2() >= 0.99 {
                continue;
            }
            let p = lift_to_sphere(&u, 0.1).unwrap();
            assert_eq!(p.u, u);
            let r = p.u.norm_l2().powi(2) + p.t * p.t;
            assert!((r - 1.0).abs() <= 1e-14, "chart drifted: {r}");
        }
    }

    #[test]
    fn tangent_slope_at_pole_vanishes() {
        let y = lift_to_sphere(&SparseVec::zero(), 0.1).unwrap();
        let w = SparseVec::from_pairs(&[(3, 1.0), (9, -2.0)]).unwrap();
        assert_eq!(tangent_slope(&y, &w), 0.0);
    }

    #[test]
    fn tangent_slope_orthogonal_direction_vanishes() {
        let y = lift_to_sphere(&SparseVec::basis(1).scale(0.5), 0.1).unwrap();
        assert_eq!(tangent_slope(&y, &SparseVec::basis(2)), 0.0);
    }

    #[test]
    fn tangent_slope_matches_finite_difference_of_chart_height() {
        // Central difference of s(u) = sqrt(1 - |u|^2) along w, step 1e-6.
        let u = SparseVec::basis(1).scale(0.6);
        let w = SparseVec::basis(1);
        let y = lift_to_sphere(&u, 0.1).unwrap();
        let s = |v: &SparseVec| (1.0 - v.norm_l2().powi(2)).sqrt();
        let h = 1e-6;
        let fd = (s(&SparseVec::add_scaled(h, &w, &u)) - s(&SparseVec::add_scaled(-h, &w, &u)))
            / (2.0 * h);
        let slope = tangent_slope(&y, &w);
        assert!((slope - fd).abs() < 1e-9, "slope {slope} vs fd {fd}");
        assert!((slope - (-0.75)).abs() < 1e-9);
    }

    #[test]
    fn tangent_slope_is_linear() {
        let y = lift_to_sphere(
            &SparseVec::from_pairs(&[(1, 0.3), (2, -0.4)]).unwrap(),
            0.1,
        )
        .unwrap();
        let w1 = SparseVec::from_pairs(&[(1, 1.0), (3, 2.0)]).unwrap();
        let w2 = SparseVec::from_pairs(&[(2, -1.0), (3, 0.5)]).unwrap();
        let a = 1.7;
        let lhs = tangent_slope(&y, &SparseVec::add_scaled(a, &w1, &w2));
        let rhs = a * tangent_slope(&y, &w1) + tangent_slope(&y, &w2);
        assert!((lhs - rhs).abs() <= 1e-13);
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(pairs_v in proptest::collection::vec((1usize..=64, -5.0..5.0f64), 0..12),
                          pairs_w in proptest::collection::vec((1usize..=64, -5.0..5.0f64), 0..12)) {
            let v = SparseVec::from_pairs(&pairs_v).unwrap();
            let w = SparseVec::from_pairs(&pairs_w).unwrap();
            let lhs = SparseVec::inner(&v, &w).abs();
            let rhs = v.norm_l2() * w.norm_l2();
            prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn block_projection_never_increases_norm(
            pairs in proptest::collection::vec((1usize..=64, -5.0..5.0f64), 0..16)) {
            let v = SparseVec::from_pairs(&pairs).unwrap();
            let layout = crate::config::BlockLayout::standard(64).unwrap();
            let decomp = BlockDecomposition::new(64, vec![
                ("data1".into(), layout.data1.clone()),
                ("data2".into(), layout.data2.clone()),
                ("extraction".into(), layout.extraction.clone()),
                ("guarded".into(), layout.guarded.clone()),
            ]).unwrap();
            for name in ["data1", "data2", "extraction", "guarded"] {
                let p = decomp.project(name, &v).unwrap();
                prop_assert!(p.norm_l2() <= v.norm_l2() + 1e-15);
                let pp = decomp.project(name, &p).unwrap();
                prop_assert_eq!(p, pp); // idempotent
            }
        }
    }
}
