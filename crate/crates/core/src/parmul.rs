//! Parallel multiplication driver.
//!
//! Step one picks the interval bounds on the calling thread. Step two hands
//! intervals to workers through a single atomic claim counter; each worker
//! owns its edge buffer, its merger and the containers it fills, so nothing
//! else is shared mutably. The containers are put back in interval order
//! after the workers are joined and concatenated.

use std::collections::{BTreeMap, HashSet};
use std::ops::{Range, RangeInclusive};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exponent::{Layout, MonomialOrder};
use crate::merge::{concat, IntervalResult, Merger, MergerKind};
use crate::poly::{PolySpace, Polynomial, VarTable};
use crate::split::{find_edge_into, select_grid, Edge, GridParams, SplitSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MulConfig {
    pub grid: GridParams,
    pub threads: usize,
    pub merger: MergerKind,
}

impl Default for MulConfig {
    fn default() -> Self {
        MulConfig {
            grid: GridParams::default(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            merger: MergerKind::Heap,
        }
    }
}

impl MulConfig {
    /// Single worker, default grid.
    pub fn sequential() -> Self {
        MulConfig {
            threads: 1,
            ..MulConfig::default()
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_l(mut self, l: usize) -> Result<Self> {
        self.grid = GridParams::new(l)?;
        Ok(self)
    }

    pub fn with_merger(mut self, merger: MergerKind) -> Self {
        self.merger = merger;
        self
    }
}

/// Which intervals each worker claimed, in claim order.
#[derive(Clone, Debug, Default)]
pub struct MulTrace {
    pub intervals: usize,
    pub claims: Vec<Vec<usize>>,
}

/// `a * b`, computed interval by interval.
pub fn mul<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    cfg: &MulConfig,
) -> Result<Polynomial<C>> {
    mul_traced(a, b, cfg).map(|(p, _)| p)
}

pub fn mul_traced<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    cfg: &MulConfig,
) -> Result<(Polynomial<C>, MulTrace)> {
    a.check_product_fits(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok((Polynomial::zero(a.space()), MulTrace::default()));
    }
    let (rows, cols) = orient(a, b);
    let split = select_grid(rows.exponents(), cols.exponents(), cfg.grid);
    let (parts, claims) = process_intervals(rows, cols, &split, 0..split.intervals(), cfg);
    let trace = MulTrace {
        intervals: split.intervals(),
        claims,
    };
    Ok((concat(a.space(), parts), trace))
}

/// Multiplies with caller-provided interval bounds instead of the grid.
pub fn mul_with_split<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    split: &SplitSet,
    cfg: &MulConfig,
) -> Result<Polynomial<C>> {
    a.check_product_fits(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(Polynomial::zero(a.space()));
    }
    SplitSet::from_bounds(a.exponents(), b.exponents(), split.bounds().to_vec())?;
    let (parts, _) = process_intervals(a, b, split, 0..split.intervals(), cfg);
    Ok(concat(a.space(), parts))
}

/// Rows of the pp-matrix are the smaller operand, which bounds the heap size
/// by `min(na, nb)`.
pub(crate) fn orient<'p, C: Coeff>(
    a: &'p Polynomial<C>,
    b: &'p Polynomial<C>,
) -> (&'p Polynomial<C>, &'p Polynomial<C>) {
    if a.len() <= b.len() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Step two over the intervals in `range`; containers come back in interval
/// order together with the per-worker claim log.
pub(crate) fn process_intervals<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    split: &SplitSet,
    range: Range<usize>,
    cfg: &MulConfig,
) -> (Vec<IntervalResult<C>>, Vec<Vec<usize>>) {
    map_intervals(a, b, split, range, cfg, |part| part)
}

/// Step two with every interval container passed through `sink` on the
/// worker that produced it. Outputs come back in interval order.
pub(crate) fn map_intervals<C: Coeff, T: Send>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    split: &SplitSet,
    range: Range<usize>,
    cfg: &MulConfig,
    sink: impl Fn(IntervalResult<C>) -> T + Sync,
) -> (Vec<T>, Vec<Vec<usize>>) {
    let count = range.len();
    let workers = cfg.threads.max(1).min(count.max(1));

    let run_one = |k: usize, edge: &mut Edge, merger: &mut Merger<C>| {
        let (lo, hi) = split.interval(k);
        find_edge_into(edge, a.exponents(), b.exponents(), lo, hi);
        sink(merger.merge(a, b, edge))
    };

    if workers <= 1 {
        let mut edge = Edge::default();
        let mut merger = Merger::new(cfg.merger);
        let parts = range
            .clone()
            .map(|k| run_one(k, &mut edge, &mut merger))
            .collect();
        return (parts, vec![range.collect()]);
    }

    let next = AtomicUsize::new(range.start);
    let end = range.end;
    let per_worker: Vec<Vec<(usize, T)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut edge = Edge::default();
                    let mut merger = Merger::new(cfg.merger);
                    let mut done = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        if k >= end {
                            break;
                        }
                        done.push((k, run_one(k, &mut edge, &mut merger)));
                    }
                    done
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("multiplication worker panicked"))
            .collect()
    });

    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let mut claims = Vec::with_capacity(workers);
    for done in per_worker {
        let mut mine = Vec::with_capacity(done.len());
        for (k, part) in done {
            mine.push(k);
            slots[k - range.start] = Some(part);
        }
        claims.push(mine);
    }
    let parts = slots
        .into_iter()
        .map(|s| s.expect("every interval is claimed exactly once"))
        .collect();
    (parts, claims)
}

/// Number of terms of `a * b`. Each interval is merged and dropped, so
/// memory stays bounded by the largest interval rather than the product.
pub fn count_terms<C: Coeff>(a: &Polynomial<C>, b: &Polynomial<C>, cfg: &MulConfig) -> Result<u64> {
    a.check_product_fits(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(0);
    }
    let (rows, cols) = orient(a, b);
    let split = select_grid(rows.exponents(), cols.exponents(), cfg.grid);
    let (counts, _) = map_intervals(rows, cols, &split, 0..split.intervals(), cfg, |part| {
        part.len() as u64
    });
    Ok(counts.iter().sum())
}

/// Space with variables `x1..xm`, sized so that products of polynomials with
/// components up to `max_deg` still fit.
pub fn random_space(m: usize, max_deg: u32, order: MonomialOrder) -> Result<Arc<PolySpace>> {
    let names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let layout = Layout::for_max_degrees(order, &vec![2 * max_deg; m])?;
    PolySpace::new(VarTable::new(names)?, layout)
}

/// Exactly `terms` distinct exponents with components uniform in
/// `0..=max_deg` and non-zero coefficients uniform in `-100..=100`.
/// Deterministic for a given seed.
pub fn random_sparse<C: Coeff>(
    seed: u64,
    space: &Arc<PolySpace>,
    terms: usize,
    max_deg: u32,
) -> Result<Polynomial<C>> {
    if terms == 0 {
        return Err(Error::InvalidParameter(
            "at least one term is required".into(),
        ));
    }
    let m = space.nvars();
    let available = (max_deg as u128 + 1)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if terms as u128 > available {
        return Err(Error::Infeasible {
            requested: terms,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(terms);
    let mut out = Vec::with_capacity(terms);
    while out.len() < terms {
        let v: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=max_deg)).collect();
        let e = space.pack(&v)?;
        if !seen.insert(e) {
            continue;
        }
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-100i64..=100);
        }
        out.push((C::from_i64(c), e));
    }
    Ok(crate::poly::canonicalize(space, out))
}

/// Parameters of a grid tuning run.
#[derive(Clone, Debug)]
pub struct TuneSpec {
    pub seed: u64,
    pub products: usize,
    pub terms: RangeInclusive<usize>,
    pub nvars: RangeInclusive<usize>,
    pub max_deg: u32,
    pub l_values: Vec<usize>,
    pub base: MulConfig,
}

impl Default for TuneSpec {
    fn default() -> Self {
        TuneSpec {
            seed: 1,
            products: 20,
            terms: 1000..=5000,
            nvars: 4..=8,
            max_deg: 20,
            l_values: vec![4, 8, 16, 32, 64],
            base: MulConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneReport {
    /// For every tested `l`, the number of products whose time with that `l`
    /// is within 10% of the product's best time.
    pub histogram: BTreeMap<usize, usize>,
    pub recommended: usize,
    pub products: usize,
    /// `timings[p][k]`: product `p` with the `k`-th value of `l`.
    pub timings: Vec<Vec<Duration>>,
}

impl TuneReport {
    pub const TOLERANCE: f64 = 0.10;

    pub fn from_timings(l_values: &[usize], timings: Vec<Vec<Duration>>) -> Result<TuneReport> {
        if l_values.is_empty() {
            return Err(Error::InvalidParameter("no grid densities to tune".into()));
        }
        let mut histogram: BTreeMap<usize, usize> = l_values.iter().map(|&l| (l, 0)).collect();
        for row in &timings {
            if row.len() != l_values.len() {
                return Err(Error::InvalidParameter("timing row length mismatch".into()));
            }
            let best = row.iter().min().copied().unwrap_or_default();
            let limit = best.as_secs_f64() * (1.0 + Self::TOLERANCE);
            for (&l, t) in l_values.iter().zip(row) {
                if t.as_secs_f64() <= limit {
                    *histogram.get_mut(&l).unwrap() += 1;
                }
            }
        }
        // largest count, ties to the smaller l
        let recommended = histogram
            .iter()
            .fold(None, |best: Option<(usize, usize)>, (&l, &n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((l, n)),
            })
            .map(|(l, _)| l)
            .unwrap();
        Ok(TuneReport {
            products: timings.len(),
            histogram,
            recommended,
            timings,
        })
    }
}

/// Times every random product with every `l` (one discarded warm-up run
/// each) and builds the histogram of densities within 10% of the best.
pub fn tune_l<C: Coeff>(spec: &TuneSpec) -> Result<TuneReport> {
    if spec.l_values.is_empty() {
        return Err(Error::InvalidParameter("no grid densities to tune".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut timings = Vec::with_capacity(spec.products);
    for _ in 0..spec.products {
        let m = rng.gen_range(spec.nvars.clone());
        let space = random_space(m, spec.max_deg, MonomialOrder::Grlex)?;
        let na = rng.gen_range(spec.terms.clone());
        let nb = rng.gen_range(spec.terms.clone());
        let a: Polynomial<C> = random_sparse(rng.gen(), &space, na, spec.max_deg)?;
        let b: Polynomial<C> = random_sparse(rng.gen(), &space, nb, spec.max_deg)?;
        let mut row = Vec::with_capacity(spec.l_values.len());
        for &l in &spec.l_values {
            let cfg = spec.base.with_l(l)?;
            let _warm_up = mul(&a, &b, &cfg)?;
            let t0 = Instant::now();
            let p = mul(&a, &b, &cfg)?;
            row.push(t0.elapsed());
            drop(p);
        }
        timings.push(row);
    }
    TuneReport::from_timings(&spec.l_values, timings)
}
