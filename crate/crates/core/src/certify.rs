//! Decay-of-correlation certificates from branching-matrix growth rates.
//!
//! A walk tree for a lattice of degree `d + 1` branches at most `d` ways
//! below the root.  Correlation decays fast enough for marginal truncation
//! whenever the growth rate of the tree stays below
//!
//! ```text
//! gamma(d) = inf_{x > 0} (1 + (1+x)^d) (1+x) / (d x),
//! ```
//!
//! so a certificate compares the Perron root of a (pruned) branching matrix
//! against that threshold.

use serde::Serialize;

use crate::branching::build_matrix;
use crate::lattice::{Constraint, NeighborOrder};
use crate::{Error, Result};

/// The decay threshold for branching factor `d`, with its minimizer.
#[derive(Clone, Copy, Debug)]
pub struct Threshold {
    pub d: u32,
    pub gamma: f64,
    pub x_star: f64,
}

fn objective(d: u32, x: f64) -> f64 {
    (1.0 + (1.0 + x).powi(d as i32)) * (1.0 + x) / (d as f64 * x)
}

/// psi(x) = (1+x)^d (dx - 1) - 1; the stationary point of the objective.
fn psi(d: u32, x: f64) -> f64 {
    (1.0 + x).powi(d as i32) * (d as f64 * x - 1.0) - 1.0
}

/// Threshold `gamma(d)`.  The objective blows up at both ends of `(0, inf)`
/// and has a single stationary point, the root of `psi`.
pub fn gamma(d: u32) -> Result<Threshold> {
    if d == 0 {
        return Err(Error::InvalidParameter("branching factor must be positive".into()));
    }
    // psi < 0 at x = 1/d and grows without bound
    let mut lo = 1.0 / d as f64;
    let mut hi = 2.0;
    while psi(d, hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(d, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish
    for _ in 0..8 {
        let df = d as f64;
        let deriv = df * (1.0 + x).powi(d as i32 - 1) * (df * x - 1.0)
            + (1.0 + x).powi(d as i32) * df;
        let step = psi(d, x) / deriv;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(Threshold {
        d,
        gamma: objective(d, x),
        x_star: x,
    })
}

/// Whether the growth rate clears the decay threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "SSM_CERTIFIED")]
    SsmCertified,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// The outcome of one certification run.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub cons: Constraint,
    pub l: usize,
    pub ordered: bool,
    #[serde(rename = "lambdaStar")]
    pub lambda_star: f64,
    pub gamma: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::SsmCertified
    }
}

/// Certify with the ordered matrix at cycle bound `l`; `order` defaults to
/// the clockwise scan.  The verdict is `SSM_CERTIFIED` exactly when the
/// Perron root stays below `gamma(degree - 1) - margin`.
pub fn certify(
    cons: Constraint,
    l: usize,
    order: Option<&NeighborOrder>,
    margin: f64,
) -> Result<Certificate> {
    let default_order;
    let order = match order {
        Some(o) => o,
        None => {
            default_order = NeighborOrder::default_for(cons);
            &default_order
        }
    };
    let matrix = build_matrix(cons, l, Some(order))?;
    let spectral = matrix.spectral_radius(1e-10)?;
    let threshold = gamma(cons.degree() as u32 - 1)?;
    let verdict = if spectral.lambda < threshold.gamma - margin {
        Verdict::SsmCertified
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate {
        cons,
        l,
        ordered: true,
        lambda_star: spectral.lambda,
        gamma: threshold.gamma,
        margin,
        verdict,
    })
}

/// Certify with the best order among the scan's rotations and reflections.
/// Returns the certificate together with the winning order.
pub fn certify_best(
    cons: Constraint,
    l: usize,
    margin: f64,
) -> Result<(Certificate, NeighborOrder)> {
    let mut best: Option<(Certificate, NeighborOrder)> = None;
    for order in NeighborOrder::symmetry_candidates(cons) {
        let cert = certify(cons, l, Some(&order), margin)?;
        let better = match &best {
            None => true,
            Some((b, _)) => cert.lambda_star < b.lambda_star,
        };
        if better {
            best = Some((cert, order));
        }
    }
    Ok(best.expect("at least one candidate order"))
}
