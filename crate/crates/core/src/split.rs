//! Cutting the pp-matrix into exponent intervals.
//!
//! Row `i` and column `j` of the (never materialised) pp-matrix hold
//! `gamma(i, j) = alpha_i + beta_j`. With both operands sorted ascending, the
//! matrix increases along rows and columns. A [`SplitSet`] lists bounds
//! `S_1 < ... < S_ns`; interval `k` is `[S_k, S_{k+1})`, and for every row the
//! columns it covers form a contiguous run found by [`find_edge`].
//!
//! Indices in this module are 0-based. Interval `k` runs from `bounds[k]` to
//! `bounds[k + 1]`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// Grid density `l`. The nominal number of grid points is `(l + 1)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridParams {
    l: usize,
}

impl GridParams {
    pub const DEFAULT_L: usize = 64;

    pub fn new(l: usize) -> Result<GridParams> {
        if l == 0 {
            return Err(Error::InvalidParameter(
                "grid density l must be >= 1".into(),
            ));
        }
        Ok(GridParams { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn nominal_points(&self) -> usize {
        (self.l + 1) * (self.l + 1)
    }

    /// Density actually used for an `na x nb` matrix: small operands get a
    /// coarser grid so that both strides stay >= 1.
    pub fn clamped(&self, na: usize, nb: usize) -> usize {
        self.l.min(na).min(nb).max(1)
    }
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { l: Self::DEFAULT_L }
    }
}

/// Sorted, deduplicated interval bounds ending with [`Exponent::END`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitSet {
    bounds: Vec<Exponent>,
    candidates: usize,
}

impl SplitSet {
    /// Validates arbitrary bounds: strictly ascending, first equal to
    /// `gamma(0, 0)`, last equal to the sentinel.
    pub fn from_bounds(a: &[Exponent], b: &[Exponent], bounds: Vec<Exponent>) -> Result<SplitSet> {
        let first = match (a.first(), b.first()) {
            (Some(&x), Some(&y)) => x.add_unchecked(y),
            _ => return Err(Error::InvalidParameter("empty operand".into())),
        };
        if bounds.len() < 2 || bounds[0] != first || *bounds.last().unwrap() != Exponent::END {
            return Err(Error::InvalidParameter(
                "split bounds must start at gamma(1,1) and end at the sentinel".into(),
            ));
        }
        if !bounds.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "split bounds must be strictly ascending".into(),
            ));
        }
        let candidates = bounds.len();
        Ok(SplitSet { bounds, candidates })
    }

    pub(crate) fn from_trusted(bounds: Vec<Exponent>) -> SplitSet {
        debug_assert!(bounds.windows(2).all(|w| w[0] < w[1]));
        let candidates = bounds.len();
        SplitSet { bounds, candidates }
    }

    pub fn bounds(&self) -> &[Exponent] {
        &self.bounds
    }

    /// `n_s`, the number of bounds.
    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// `n_s - 1`.
    pub fn intervals(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn interval(&self, k: usize) -> (Exponent, Exponent) {
        (self.bounds[k], self.bounds[k + 1])
    }

    /// Number of grid points selected before sorting and deduplication.
    pub fn candidates(&self) -> usize {
        self.candidates
    }

    /// Index of the interval containing `e`.
    pub fn locate(&self, e: Exponent) -> Option<usize> {
        if e < self.bounds[0] || e >= Exponent::END {
            return None;
        }
        Some(self.bounds.partition_point(|&s| s <= e) - 1)
    }
}

/// Picks the interval bounds from an almost regular grid over the pp-matrix.
///
/// With `l` the clamped density, `ra = na / l` and `rb = nb / l`, the grid
/// takes (1-based) rows `i = 1, 1 + ra, ...` and in each of them columns
/// `j = j0(i), j0(i) + rb, ...` where `j0(i) = 1 + ((i / ra) mod 2) * (nb / 2l)`
/// staggers every other row. The last row and the last column are sampled
/// with the same strides, and `gamma(1, 1)` plus the sentinel are always
/// present.
pub fn select_grid(a: &[Exponent], b: &[Exponent], params: GridParams) -> SplitSet {
    let (na, nb) = (a.len(), b.len());
    assert!(na > 0 && nb > 0, "select_grid needs non-empty operands");
    let l = params.clamped(na, nb);
    let row_step = na / l;
    let col_step = nb / l;
    let stagger = nb / (2 * l);
    let gamma = |i: usize, j: usize| a[i - 1].add_unchecked(b[j - 1]);

    let mut points = Vec::with_capacity(params.nominal_points() + 2 * l + 4);
    points.push(gamma(1, 1));
    for i in (1..=na).step_by(row_step) {
        let j0 = 1 + ((i / row_step) % 2) * stagger;
        for j in (j0..=nb).step_by(col_step) {
            points.push(gamma(i, j));
        }
    }
    for j in (1..=nb).step_by(col_step) {
        points.push(gamma(na, j));
    }
    for i in (1..=na).step_by(row_step) {
        points.push(gamma(i, nb));
    }
    points.push(Exponent::END);

    let candidates = points.len();
    points.sort_unstable();
    points.dedup();
    SplitSet {
        bounds: points,
        candidates,
    }
}

/// Column runs of every row inside one interval. Row `i` covers columns
/// `start[i]..end[i]`; an empty run means the row has no product in the
/// interval. Both arrays are non-increasing in `i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Edge {
    start: Vec<u32>,
    end: Vec<u32>,
    probes: usize,
}

impl Edge {
    pub fn rows(&self) -> usize {
        self.start.len()
    }

    pub fn row(&self, i: usize) -> Range<usize> {
        self.start[i] as usize..self.end[i] as usize
    }

    pub fn is_row_empty(&self, i: usize) -> bool {
        self.start[i] == self.end[i]
    }

    /// Column comparisons performed by the search that built this edge.
    pub fn probes(&self) -> usize {
        self.probes
    }

    pub fn count_ops(&self) -> u64 {
        count_ops(self)
    }

    /// An edge selecting every pair.
    pub fn full(na: usize, nb: usize) -> Edge {
        Edge {
            start: vec![0; na],
            end: vec![nb as u32; na],
            probes: 0,
        }
    }
}

/// Finds, for every row, the run of columns `j` with `lo <= gamma(i, j) < hi`.
pub fn find_edge(a: &[Exponent], b: &[Exponent], lo: Exponent, hi: Exponent) -> Edge {
    let mut edge = Edge::default();
    find_edge_into(&mut edge, a, b, lo, hi);
    edge
}

/// [`find_edge`] reusing the buffers of `edge`.
///
/// Rows are scanned top to bottom. Both column pointers only ever move left,
/// since `gamma(i + 1, j) > gamma(i, j)`, so the whole search costs at most
/// `2 (na + nb)` comparisons.
pub fn find_edge_into(edge: &mut Edge, a: &[Exponent], b: &[Exponent], lo: Exponent, hi: Exponent) {
    debug_assert!(lo < hi);
    let na = a.len();
    edge.start.clear();
    edge.end.clear();
    edge.start.reserve(na);
    edge.end.reserve(na);

    let mut probes = 0;
    let mut s = b.len();
    let mut e = b.len();
    for &ai in a {
        while e > 0 {
            probes += 1;
            if ai.add_unchecked(b[e - 1]) >= hi {
                e -= 1;
            } else {
                break;
            }
        }
        if e == 0 {
            break;
        }
        if s > e {
            s = e;
        }
        while s > 0 {
            probes += 1;
            if ai.add_unchecked(b[s - 1]) >= lo {
                s -= 1;
            } else {
                break;
            }
        }
        edge.start.push(s as u32);
        edge.end.push(e as u32);
    }
    // every remaining row lies entirely at or above `hi`
    edge.start.resize(na, 0);
    edge.end.resize(na, 0);
    edge.probes = probes;
}

/// Number of products `O_k` inside the interval.
pub fn count_ops(edge: &Edge) -> u64 {
    edge.start
        .iter()
        .zip(&edge.end)
        .map(|(&s, &e)| (e - s) as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{Layout, MonomialOrder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn univariate(degrees: &[u32]) -> Vec<Exponent> {
        let l = Layout::new(MonomialOrder::Grlex, &[16], 16).unwrap();
        degrees.iter().map(|&d| l.pack(&[d]).unwrap()).collect()
    }

    fn x(d: u32) -> Exponent {
        univariate(&[d])[0]
    }

    /// Exhaustive classification of every matrix entry.
    fn brute_force_rows(
        a: &[Exponent],
        b: &[Exponent],
        lo: Exponent,
        hi: Exponent,
    ) -> Vec<Vec<usize>> {
        a.iter()
            .map(|&ai| {
                (0..b.len())
                    .filter(|&j| {
                        let g = ai.add_unchecked(b[j]);
                        lo <= g && g < hi
                    })
                    .collect()
            })
            .collect()
    }

    fn random_operand(rng: &mut ChaCha8Rng, layout: &Layout, n: usize, max: u32) -> Vec<Exponent> {
        let mut v: Vec<Exponent> = (0..n)
            .map(|_| {
                let comps: Vec<u32> = (0..layout.nvars())
                    .map(|_| rng.gen_range(0..=max))
                    .collect();
                layout.pack(&comps).unwrap()
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    #[test]
    fn grid_params() {
        assert!(GridParams::new(0).is_err());
        assert_eq!(GridParams::new(8).unwrap().nominal_points(), 81);
        assert_eq!(GridParams::new(64).unwrap().nominal_points(), 4225);
        assert_eq!(GridParams::new(64).unwrap().clamped(3, 100), 3);
        assert_eq!(GridParams::new(64).unwrap().clamped(1000, 1000), 64);
    }

    #[test]
    fn grid_on_three_by_three() {
        let a = univariate(&[0, 1, 2]);
        let s = select_grid(&a, &a, GridParams::new(1).unwrap());
        assert_eq!(s.bounds(), &[x(0), x(2), Exponent::END]);
        assert_eq!(s.intervals(), 2);
    }

    #[test]
    fn grid_on_single_terms() {
        let a = univariate(&[3]);
        let b = univariate(&[4]);
        let s = select_grid(&a, &b, GridParams::default());
        assert_eq!(s.bounds(), &[x(7), Exponent::END]);
    }

    #[test]
    fn grid_bounds_are_realised_sums() {
        let layout = Layout::even(MonomialOrder::Grlex, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let na = rng.gen_range(1..60);
            let a = random_operand(&mut rng, &layout, na, 6);
            let nb = rng.gen_range(1..60);
            let b = random_operand(&mut rng, &layout, nb, 6);
            let l = rng.gen_range(1..20);
            let s = select_grid(&a, &b, GridParams::new(l).unwrap());
            assert_eq!(s.bounds()[0], a[0].add_unchecked(b[0]));
            assert_eq!(*s.bounds().last().unwrap(), Exponent::END);
            assert!(s.bounds().windows(2).all(|w| w[0] < w[1]));
            for &g in &s.bounds()[..s.len() - 1] {
                assert!(a
                    .iter()
                    .any(|&ai| b.iter().any(|&bj| ai.add_unchecked(bj) == g)));
            }
        }
    }

    #[test]
    fn from_bounds_validation() {
        let a = univariate(&[0, 1, 2]);
        assert!(SplitSet::from_bounds(&a, &a, vec![x(0), x(3), Exponent::END]).is_ok());
        assert!(SplitSet::from_bounds(&a, &a, vec![x(1), Exponent::END]).is_err());
        assert!(SplitSet::from_bounds(&a, &a, vec![x(0), x(3)]).is_err());
        assert!(SplitSet::from_bounds(&a, &a, vec![x(0), x(3), x(3), Exponent::END]).is_err());
    }

    #[test]
    fn whole_matrix_edge() {
        let a = univariate(&[0, 1, 2, 5]);
        let b = univariate(&[0, 3, 4]);
        let edge = find_edge(&a, &b, x(0), Exponent::END);
        for i in 0..a.len() {
            assert_eq!(edge.row(i), 0..3);
        }
        assert_eq!(count_ops(&edge), 12);
    }

    #[test]
    fn three_by_three_lower_interval() {
        let a = univariate(&[0, 1, 2]);
        let edge = find_edge(&a, &a, x(0), x(2));
        // 1-based (L_min, L_max): row 1 -> (1, 2), row 2 -> (1, 1), row 3 empty
        assert_eq!(edge.row(0), 0..2);
        assert_eq!(edge.row(1), 0..1);
        assert!(edge.is_row_empty(2));
        assert_eq!(count_ops(&edge), 3);
    }

    #[test]
    fn empty_edge() {
        let a = univariate(&[0, 1, 2]);
        let edge = find_edge(&a, &a, x(10), x(12));
        assert_eq!(count_ops(&edge), 0);
        assert!((0..3).all(|i| edge.is_row_empty(i)));
    }

    #[test]
    fn edge_matches_brute_force_and_probe_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for round in 0..300 {
            let m = rng.gen_range(1..=4);
            let layout = Layout::even(MonomialOrder::Grlex, m).unwrap();
            let na = rng.gen_range(1..40);
            let a = random_operand(&mut rng, &layout, na, 5);
            let nb = rng.gen_range(1..40);
            let b = random_operand(&mut rng, &layout, nb, 5);
            let mut sums: Vec<Exponent> = a
                .iter()
                .flat_map(|&ai| b.iter().map(move |&bj| ai.add_unchecked(bj)))
                .collect();
            sums.push(Exponent::END);
            sums.sort_unstable();
            sums.dedup();
            let p = rng.gen_range(0..sums.len() - 1);
            let q = rng.gen_range(p + 1..sums.len());
            let (lo, hi) = (sums[p], sums[q]);
            let edge = find_edge(&a, &b, lo, hi);
            let brute = brute_force_rows(&a, &b, lo, hi);
            for (i, cols) in brute.iter().enumerate() {
                let run: Vec<usize> = edge.row(i).collect();
                assert_eq!(&run, cols, "round {round} row {i}");
            }
            for i in 1..a.len() {
                assert!(edge.start[i] <= edge.start[i - 1]);
                assert!(edge.end[i] <= edge.end[i - 1]);
            }
            assert!(edge.probes() <= 2 * (a.len() + b.len()));
        }
    }

    #[test]
    fn locate_uses_half_open_intervals() {
        let a = univariate(&[0, 1, 2]);
        let s = select_grid(&a, &a, GridParams::new(1).unwrap());
        assert_eq!(s.locate(x(0)), Some(0));
        assert_eq!(s.locate(x(1)), Some(0));
        assert_eq!(s.locate(x(2)), Some(1));
        assert_eq!(s.locate(x(4)), Some(1));
        assert_eq!(s.locate(Exponent::END), None);
    }
}
