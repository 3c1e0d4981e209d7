//! Exact codeword counting on finite regions.
//!
//! Two independent routes to the same number: a branching brute force over
//! free sites (the oracle, feasible to ~32 free sites) and a column-sweep
//! transfer count (feasible for bounding boxes up to 30 rows and long
//! widths).  Counts are exact big integers; partial fixings condition both
//! routes.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::lattice::{FiniteRegion, Point};
use crate::{Error, Result};

/// A partial 0/1 assignment on lattice sites.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Configuration {
    map: BTreeMap<Point, bool>,
}

impl Configuration {
    pub fn empty() -> Configuration {
        Configuration::default()
    }

    pub fn fixed<I: IntoIterator<Item = (Point, bool)>>(entries: I) -> Configuration {
        Configuration {
            map: entries.into_iter().collect(),
        }
    }

    pub fn set(&mut self, p: Point, occupied: bool) {
        self.map.insert(p, occupied);
    }

    pub fn with(mut self, p: Point, occupied: bool) -> Configuration {
        self.set(p, occupied);
        self
    }

    pub fn get(&self, p: Point) -> Option<bool> {
        self.map.get(&p).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, bool)> + '_ {
        self.map.iter().map(|(&p, &b)| (p, b))
    }
}

/// An exact count together with its binary logarithm.
#[derive(Clone, PartialEq, Debug)]
pub struct CountResult {
    pub count: BigUint,
    pub log2: f64,
}

impl CountResult {
    fn new(count: BigUint) -> CountResult {
        let log2 = log2_biguint(&count);
        CountResult { count, log2 }
    }
}

/// log2 of a big integer, `-inf` for zero.
pub fn log2_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Count independent sets of an arbitrary graph under a partial fixing.
///
/// `fixed[v] = Some(true)` forces v occupied (its neighbors empty),
/// `Some(false)` forces v empty.  At most 64 vertices may remain free.
pub fn count_independent_sets(adj: &[Vec<usize>], fixed: &[Option<bool>]) -> Result<BigUint> {
    let n = adj.len();
    if fixed.len() != n {
        return Err(Error::InvalidParameter(
            "fixing vector length must match vertex count".into(),
        ));
    }
    // occupied-occupied adjacency is the one infeasible situation
    for v in 0..n {
        if fixed[v] == Some(true) {
            for &w in &adj[v] {
                if fixed[w] == Some(true) {
                    return Err(Error::InfeasibleFixing(format!(
                        "vertices {v} and {w} are adjacent and both fixed occupied"
                    )));
                }
            }
        }
    }
    // free = unfixed and not adjacent to a fixed-occupied vertex
    let mut forced_empty = vec![false; n];
    for v in 0..n {
        if fixed[v] == Some(true) {
            for &w in &adj[v] {
                forced_empty[w] = true;
            }
        }
    }
    let free: Vec<usize> = (0..n)
        .filter(|&v| fixed[v].is_none() && !forced_empty[v])
        .collect();
    if free.len() > 64 {
        return Err(Error::RegionTooLarge(format!(
            "{} free vertices exceed the brute-force limit of 64",
            free.len()
        )));
    }
    let index: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let masks: Vec<u64> = free
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter_map(|w| index.get(w))
                .fold(0u64, |acc, &k| acc | 1 << k)
        })
        .collect();
    Ok(count_masks(&masks))
}

/// Independent sets of the graph on `masks.len()` vertices given by
/// adjacency bitmasks, via the self-reduction T(G) = T(G-v) + T(G-N[v]).
fn count_masks(masks: &[u64]) -> BigUint {
    let k = masks.len();
    let full = if k == 64 { !0u64 } else { (1u64 << k) - 1 };
    let mut total = BigUint::zero();
    let mut stack: Vec<(u64, u32)> = vec![(full, 0)];
    while let Some((mut alive, mut doublings)) = stack.pop() {
        // isolated vertices contribute an independent factor of 2
        let mut t = alive;
        while t != 0 {
            let v = t.trailing_zeros() as usize;
            t &= t - 1;
            if masks[v] & alive == 0 {
                alive &= !(1 << v);
                doublings += 1;
            }
        }
        if alive == 0 {
            total += BigUint::one() << doublings;
            continue;
        }
        let v = alive.trailing_zeros() as usize;
        stack.push((alive & !(1 << v), doublings));
        stack.push((alive & !(masks[v] | (1 << v)), doublings));
    }
    total
}

fn validate_fixing(region: &FiniteRegion, fixed: &Configuration) -> Result<()> {
    let dirs = region.constraint().directions();
    for (p, occ) in fixed.iter() {
        if !region.contains(p) {
            return Err(Error::InvalidParameter(format!(
                "fixed site {p:?} is outside the region"
            )));
        }
        if occ {
            for d in &dirs {
                let q = d.offset(p);
                if region.contains(q) && fixed.get(q) == Some(true) {
                    return Err(Error::InfeasibleFixing(format!(
                        "adjacent sites {p:?} and {q:?} both fixed occupied"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Brute-force count of configurations of `region` consistent with `fixed`.
pub fn count_bruteforce(region: &FiniteRegion, fixed: &Configuration) -> Result<CountResult> {
    validate_fixing(region, fixed)?;
    let pts: Vec<Point> = region.iter().collect();
    let index: HashMap<Point, usize> = pts.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let adj: Vec<Vec<usize>> = pts
        .iter()
        .map(|&p| {
            region
                .neighbors_in(p)
                .into_iter()
                .map(|q| index[&q])
                .collect()
        })
        .collect();
    let mut fix = vec![None; pts.len()];
    for (p, occ) in fixed.iter() {
        fix[index[&p]] = Some(occ);
    }
    let free = fix.iter().filter(|f| f.is_none()).count();
    if free > 32 {
        return Err(Error::RegionTooLarge(format!(
            "{free} free sites exceed the brute-force limit of 32"
        )));
    }
    count_independent_sets(&adj, &fix).map(CountResult::new)
}

/// Transfer count: sweep the bounding box column by column, carrying exact
/// weights per column occupation mask.  Requires at most 30 rows.
pub fn count_transfer(region: &FiniteRegion, fixed: &Configuration) -> Result<CountResult> {
    validate_fixing(region, fixed)?;
    if region.is_empty() {
        return Ok(CountResult::new(BigUint::one()));
    }
    let imin = region.iter().map(|p| p.0).min().unwrap();
    let imax = region.iter().map(|p| p.0).max().unwrap();
    let jmin = region.iter().map(|p| p.1).min().unwrap();
    let jmax = region.iter().map(|p| p.1).max().unwrap();
    let m = (imax - imin + 1) as usize;
    let ncols = (jmax - jmin + 1) as usize;
    if m > 30 {
        return Err(Error::RegionTooLarge(format!(
            "bounding box has {m} rows; the transfer sweep supports at most 30"
        )));
    }
    let row_mask: u32 = if m == 32 { !0 } else { (1u32 << m) - 1 };

    // per-column masks: which rows exist, and which are forced
    let mut present = vec![0u32; ncols];
    let mut one = vec![0u32; ncols];
    let mut zero = vec![0u32; ncols];
    for p in region.iter() {
        let b = 1u32 << (p.0 - imin) as usize;
        let c = (p.1 - jmin) as usize;
        present[c] |= b;
        match fixed.get(p) {
            Some(true) => one[c] |= b,
            Some(false) => zero[c] |= b,
            None => {}
        }
    }

    let dirs = region.constraint().directions();
    // edges within a column: row offsets (positive)
    let intra: Vec<u32> = dirs
        .iter()
        .filter(|d| d.dj == 0 && d.di > 0)
        .map(|d| d.di as u32)
        .collect();
    // edges into the next column: row shifts
    let cross: Vec<i64> = dirs.iter().filter(|d| d.dj == 1).map(|d| d.di).collect();

    let intra_ok = |mask: u32| intra.iter().all(|&a| mask & (mask >> a) == 0);
    let shift = |mask: u32, di: i64| -> u32 {
        let s = if di >= 0 {
            mask.checked_shl(di as u32).unwrap_or(0)
        } else {
            mask >> (-di) as u32
        };
        s & row_mask
    };

    let mut states: HashMap<u32, BigUint> = HashMap::new();
    {
        let forced = one[0];
        let free = present[0] & !zero[0] & !forced;
        let mut sub = free;
        loop {
            let mask = sub | forced;
            if intra_ok(mask) {
                states.insert(mask, BigUint::one());
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    for c in 1..ncols {
        let mut next: HashMap<u32, BigUint> = HashMap::new();
        for (&s, cnt) in &states {
            let forb = cross.iter().fold(0u32, |acc, &di| acc | shift(s, di));
            let allowed = present[c] & !zero[c] & !forb;
            let forced = one[c];
            if forced & !allowed != 0 {
                continue;
            }
            let free = allowed & !forced;
            let mut sub = free;
            loop {
                let mask = sub | forced;
                if intra_ok(mask) {
                    *next.entry(mask).or_insert_with(BigUint::zero) += cnt;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
        states = next;
    }
    let total = states.into_values().sum();
    Ok(CountResult::new(total))
}

/// Count by whichever route fits: transfer when the bounding box is short
/// enough, brute force otherwise.
pub fn count(region: &FiniteRegion, fixed: &Configuration) -> Result<CountResult> {
    let rows = match (
        region.iter().map(|p| p.0).min(),
        region.iter().map(|p| p.0).max(),
    ) {
        (Some(lo), Some(hi)) => (hi - lo + 1) as usize,
        _ => 0,
    };
    if rows <= 30 {
        count_transfer(region, fixed)
    } else {
        count_bruteforce(region, fixed)
    }
}

/// Exact probability that site `v` is unoccupied in a uniform random
/// configuration of `region` consistent with `fixed`.
pub fn marginal_unoccupied(
    region: &FiniteRegion,
    v: Point,
    fixed: &Configuration,
) -> Result<BigRational> {
    if !region.contains(v) {
        return Err(Error::InvalidParameter(format!(
            "site {v:?} is outside the region"
        )));
    }
    if fixed.get(v).is_some() {
        return Err(Error::InvalidParameter(format!(
            "site {v:?} is already fixed"
        )));
    }
    let all = count(region, fixed)?.count;
    let unocc = count(region, &fixed.clone().with(v, false))?.count;
    if all.is_zero() {
        return Err(Error::InfeasibleFixing(
            "no configuration is consistent with the fixing".into(),
        ));
    }
    Ok(BigRational::new(unocc.into(), all.into()))
}
