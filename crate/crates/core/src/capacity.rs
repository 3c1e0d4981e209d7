//! Capacity estimation through conditioned central marginals.
//!
//! The capacity of a constraint equals `-log2 p`, where `p` is the marginal
//! probability that one site is unoccupied given that every site written
//! before it (in raster order) is unoccupied.  Truncating that half-plane
//! condition to a `(2t+1) x (2t+1)` window around the site gives a finite
//! computation whose error decays with `t` wherever correlations decay, so
//! the estimate is the window marginal at the first `t` whose successive
//! difference drops below the requested tolerance.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::certify::certify_best;
use crate::exactcount::{count, log2_biguint, marginal_unoccupied, Configuration};
use crate::lattice::{Constraint, FiniteRegion, Point};
use crate::{Error, Result};

/// One truncated-window instance: the square region, the conditioned prefix
/// `Q` (all fixed unoccupied), and the central site.
#[derive(Clone, Debug)]
pub struct CavityInstance {
    pub constraint: Constraint,
    pub t: usize,
    pub region: FiniteRegion,
    pub q: Vec<Point>,
    pub center: Point,
}

/// Build the window for radius `t`: the center is `(t, t)` and `Q` holds
/// every site that precedes it in row-major order — rows `0..t` entirely
/// plus the first `t` sites of row `t` — all fixed unoccupied.  This is the
/// window restriction of the half-plane prefix whose conditional marginals
/// telescope to the full count, which is what makes `-log2 p_t` converge to
/// the capacity; conditioning on anything short of the full prefix converges
/// to a different constant.
pub fn cavity_instance(cons: Constraint, t: usize) -> Result<CavityInstance> {
    if t == 0 {
        return Err(Error::InvalidParameter("window radius must be positive".into()));
    }
    let side = 2 * t + 1;
    if side > 30 {
        return Err(Error::RegionTooLarge(format!(
            "window side {side} exceeds the transfer limit of 30"
        )));
    }
    let region = FiniteRegion::rect(cons, side, side)?;
    let ti = t as i64;
    let mut q = Vec::new();
    for i in 0..ti {
        for j in 0..side as i64 {
            q.push((i, j));
        }
    }
    for j in 0..ti {
        q.push((ti, j));
    }
    Ok(CavityInstance {
        constraint: cons,
        t,
        region,
        q,
        center: (ti, ti),
    })
}

/// The conditioned central marginal `p_t`, exactly.
pub fn cavity_marginal(cons: Constraint, t: usize) -> Result<BigRational> {
    let inst = cavity_instance(cons, t)?;
    // fixing a site unoccupied only removes it, so condition by deletion
    let cavity = inst.region.without(inst.q.iter().copied());
    marginal_unoccupied(&cavity, inst.center, &Configuration::empty())
}

/// The marginal and estimate at one window radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelEstimate {
    pub t: usize,
    #[serde(rename = "p_t")]
    pub p_t: f64,
    pub estimate: f64,
    #[serde(rename = "deltaFromPrev")]
    pub delta_from_prev: Option<f64>,
}

/// The capacity estimate with its convergence record.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityEstimate {
    pub cons: Constraint,
    pub t: usize,
    #[serde(rename = "p_t")]
    pub p_t: f64,
    pub estimate: f64,
    #[serde(rename = "deltaFromPrev")]
    pub delta_from_prev: Option<f64>,
    pub eps: f64,
    pub series: Vec<LevelEstimate>,
    pub converged: bool,
    pub certified: bool,
}

/// Cycle bound at which each constraint's decay certificate is attempted.
fn certificate_level(cons: Constraint) -> usize {
    match cons {
        Constraint::Rwim => 8,
        _ => 4,
    }
}

/// Grow the window until successive estimates differ by at most `eps` or
/// the radius cap is hit; the certificate flag records whether the decay
/// needed for this stopping rule to be sound was established.
pub fn estimate_capacity(cons: Constraint, eps: f64, t_max: usize) -> Result<CapacityEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {eps}"
        )));
    }
    if t_max < 1 {
        return Err(Error::InvalidParameter("radius cap must be at least 1".into()));
    }
    let certified = certify_best(cons, certificate_level(cons), 1e-6)?
        .0
        .certified();
    let mut series: Vec<LevelEstimate> = Vec::new();
    let mut converged = false;
    for t in 1..=t_max {
        let p = cavity_marginal(cons, t)?
            .to_f64()
            .ok_or_else(|| Error::InvalidParameter("marginal does not fit a double".into()))?;
        let estimate = -p.log2();
        let delta = series.last().map(|prev| (estimate - prev.estimate).abs());
        series.push(LevelEstimate {
            t,
            p_t: p,
            estimate,
            delta_from_prev: delta,
        });
        if let Some(d) = delta {
            if d <= eps {
                converged = true;
                break;
            }
        }
    }
    let last = *series.last().expect("at least one level");
    Ok(CapacityEstimate {
        cons,
        t: last.t,
        p_t: last.p_t,
        estimate: last.estimate,
        delta_from_prev: last.delta_from_prev,
        eps,
        series,
        converged,
        certified,
    })
}

/// Log-count growth per column of a width-`rows` strip, measured between
/// half length and full length so end effects cancel.
fn strip_slope(cons: Constraint, rows: usize, length: usize) -> Result<f64> {
    let dirs = cons.directions();
    let vertical: Vec<u32> = dirs
        .iter()
        .filter(|d| d.dj == 0 && d.di > 0)
        .map(|d| d.di as u32)
        .collect();
    let cross: Vec<i64> = dirs.iter().filter(|d| d.dj == 1).map(|d| d.di).collect();
    let full: u32 = if rows == 32 { u32::MAX } else { (1u32 << rows) - 1 };
    let intra_ok = |m: u32| vertical.iter().all(|&a| m & (m >> a) == 0);
    let masks: Vec<u32> = (0..=full).filter(|&m| intra_ok(m)).collect();
    let index: std::collections::HashMap<u32, usize> =
        masks.iter().enumerate().map(|(k, &m)| (m, k)).collect();
    // per mask, the column masks allowed to follow it
    let compat: Vec<Vec<usize>> = masks
        .iter()
        .map(|&s| {
            let mut forbidden = 0u32;
            for &d in &cross {
                forbidden |= if d >= 0 { s << d } else { s >> (-d) };
            }
            forbidden &= full;
            let free = full & !forbidden;
            let mut next = Vec::new();
            let mut sub = free;
            loop {
                if intra_ok(sub) {
                    next.push(index[&sub]);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
            next
        })
        .collect();

    let half = length / 2;
    let mut cur = vec![1.0f64; masks.len()];
    let mut log2_norm = 0.0f64;
    let mut at_half = 0.0f64;
    for col in 1..length {
        let mut next = vec![0.0f64; masks.len()];
        for (i, list) in compat.iter().enumerate() {
            let w = cur[i];
            if w == 0.0 {
                continue;
            }
            for &j in list {
                next[j] += w;
            }
        }
        let norm: f64 = next.iter().sum();
        if norm <= 0.0 {
            return Err(Error::NoConvergence("strip recursion vanished".into()));
        }
        for x in &mut next {
            *x /= norm;
        }
        log2_norm += norm.log2();
        cur = next;
        if col == half - 1 {
            at_half = log2_norm;
        }
    }
    Ok((log2_norm - at_half) / (length - half) as f64)
}

/// Independent capacity oracle: per-column growth of a strip of width `m`
/// minus that of width `m-1`, which strips off the boundary contribution.
pub fn strip_capacity_oracle(cons: Constraint, width: usize, length: usize) -> Result<f64> {
    if width < 2 || width > 16 {
        return Err(Error::InvalidParameter(format!(
            "oracle width must be in 2..=16, got {width}"
        )));
    }
    if length < 8 {
        return Err(Error::InvalidParameter("oracle length must be at least 8".into()));
    }
    let a_w = strip_slope(cons, width, length)?;
    let a_prev = strip_slope(cons, width - 1, length)?;
    Ok(a_w - a_prev)
}

/// Raw finite-grid rates `log2(count) / (m n)` for every `m, n <= maxmn`.
pub fn capacity_bounds_bruteforce(
    cons: Constraint,
    maxmn: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    if maxmn == 0 {
        return Err(Error::InvalidParameter("need at least a 1 x 1 grid".into()));
    }
    let mut out = Vec::new();
    for m in 1..=maxmn {
        for n in 1..=maxmn {
            let region = FiniteRegion::rect(cons, m, n)?;
            let c = count(&region, &Configuration::empty())?;
            out.push((m, n, log2_biguint(&c.count) / (m * n) as f64));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn ratio(num: u64, den: u64) -> BigRational {
        BigRational::new(
            num_bigint::BigInt::from_u64(num).unwrap(),
            num_bigint::BigInt::from_u64(den).unwrap(),
        )
    }

    #[test]
    fn smallest_window_conditions_on_the_first_row_and_site() {
        let inst = cavity_instance(Constraint::Hs, 1).unwrap();
        let expect: Vec<Point> = vec![(0, 0), (0, 1), (0, 2), (1, 0)];
        assert_eq!(inst.q, expect);
        assert_eq!(inst.center, (1, 1));
        assert_eq!(inst.region.len(), 9);
        // deleting Q leaves a 4-cycle through (1,1),(1,2),(2,2),(2,1) with the
        // pendant (2,0); 12 independent sets, 8 of which avoid the center
        assert_eq!(cavity_marginal(Constraint::Hs, 1).unwrap(), ratio(2, 3));
    }

    #[test]
    fn window_two_conditions_on_the_raster_prefix() {
        let inst = cavity_instance(Constraint::Hh, 2).unwrap();
        let mut expect: Vec<Point> = Vec::new();
        for i in 0..2 {
            for j in 0..5 {
                expect.push((i, j));
            }
        }
        expect.push((2, 0));
        expect.push((2, 1));
        assert_eq!(inst.q, expect);
        assert_eq!(inst.center, (2, 2));
        assert_eq!(inst.region.len(), 25);
    }

    #[test]
    fn isolating_the_center_forces_exactly_half() {
        // with the remaining neighbors of the center also fixed empty the
        // center becomes a free isolated site, whatever the constraint
        let inst = cavity_instance(Constraint::Hs, 1).unwrap();
        let mut zeros = inst.q.clone();
        zeros.extend([(1, 2), (2, 1)]);
        let fixed = Configuration::fixed(zeros.iter().map(|&p| (p, false)));
        let p = marginal_unoccupied(&inst.region, inst.center, &fixed).unwrap();
        assert_eq!(p, ratio(1, 2));
    }

    #[test]
    fn marginals_stay_between_half_and_one() {
        for cons in Constraint::ALL {
            for t in 1..=2 {
                let p = cavity_marginal(cons, t).unwrap().to_f64().unwrap();
                assert!((0.5..=1.0).contains(&p), "{cons} t={t}: {p}");
            }
        }
    }

    #[test]
    fn window_marginal_matches_direct_conditioning() {
        // fixing Q to zero explicitly must equal deleting Q
        for cons in [Constraint::Hs, Constraint::Nak] {
            for t in 1..=2 {
                let inst = cavity_instance(cons, t).unwrap();
                let fixed =
                    Configuration::fixed(inst.q.iter().map(|&p| (p, false)));
                let direct =
                    marginal_unoccupied(&inst.region, inst.center, &fixed).unwrap();
                let cavity = cavity_marginal(cons, t).unwrap();
                assert_eq!(direct, cavity, "{cons} t={t}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(cavity_instance(Constraint::Hs, 0).is_err());
        assert!(cavity_instance(Constraint::Hs, 15).is_err());
        assert!(estimate_capacity(Constraint::Hs, 0.0, 6).is_err());
        assert!(estimate_capacity(Constraint::Hs, 1.5, 6).is_err());
        assert!(strip_capacity_oracle(Constraint::Hs, 1, 100).is_err());
    }

    #[test]
    fn estimates_shrink_their_increments() {
        let est = estimate_capacity(Constraint::Hh, 5e-3, 6).unwrap();
        assert!(est.converged);
        assert!(est.certified);
        let deltas: Vec<f64> = est
            .series
            .iter()
            .filter_map(|l| l.delta_from_prev)
            .collect();
        assert!(deltas.len() >= 2);
        for pair in deltas.windows(2) {
            assert!(
                pair[1] < 0.9 * pair[0],
                "increments {pair:?} did not shrink geometrically"
            );
        }
        assert!(est.estimate > 0.0 && est.estimate < 1.0);
    }

    #[test]
    fn kings_estimate_is_flagged_uncertified() {
        let est = estimate_capacity(Constraint::Nak, 0.05, 3).unwrap();
        assert!(!est.certified);
        assert!(est.estimate > 0.0 && est.estimate < 1.0);
    }

    #[test]
    fn strip_oracle_hits_the_known_square_lattice_rate() {
        // independently computed growth rate of the hard-squares count
        let c = strip_capacity_oracle(Constraint::Hs, 12, 400).unwrap();
        assert!((c - 0.5878911617).abs() < 1e-3, "oracle gave {c}");
    }

    #[test]
    fn oracle_and_window_estimates_agree_for_hard_squares() {
        let est = estimate_capacity(Constraint::Hs, 1e-3, 6).unwrap();
        assert!(est.converged);
        let oracle = strip_capacity_oracle(Constraint::Hs, 12, 400).unwrap();
        assert!(
            (est.estimate - oracle).abs() < 2e-3,
            "window {} vs strip {oracle}",
            est.estimate
        );
    }

    #[test]
    fn finite_grid_rates_match_hand_counts() {
        let table = capacity_bounds_bruteforce(Constraint::Hs, 2).unwrap();
        let get = |m: usize, n: usize| {
            table
                .iter()
                .find(|&&(a, b, _)| (a, b) == (m, n))
                .map(|&(_, _, r)| r)
                .unwrap()
        };
        assert!((get(1, 1) - 1.0).abs() < 1e-12);
        assert!((get(2, 2) - 7f64.log2() / 4.0).abs() < 1e-12);
        let kings = capacity_bounds_bruteforce(Constraint::Nak, 2).unwrap();
        let k22 = kings
            .iter()
            .find(|&&(a, b, _)| (a, b) == (2, 2))
            .map(|&(_, _, r)| r)
            .unwrap();
        assert!((k22 - 5f64.log2() / 4.0).abs() < 1e-12);
    }
}
