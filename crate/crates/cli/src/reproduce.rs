//! Regenerate the reference tables and figure data and compare every cell
//! against the published values embedded in `fixtures/expected.json`.
//!
//! Each target produces its artifacts in memory (CSV rows, a JSON summary,
//! and one pass/fail line per cell); the driver writes the files and prints
//! the lines afterwards, so a parallel `all` run stays deterministic.

use std::collections::BTreeMap;
use std::env;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::thread;

use anyhow::{anyhow, Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use spatialmix::branching::build_matrix;
use spatialmix::certify::gamma;
use spatialmix::lattice::{Constraint, NeighborOrder};
use spatialmix::nakdynamics::{
    fhat1, fhat2, iterate_gap, jacobian_abs, solve_fixed_point, StabilityVerdict,
};

use crate::emit::{sig10_str, to_json_string};

const SPECTRAL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// expected-value fixtures

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fixtures {
    pub version: u32,
    pub source: String,
    pub lambda_tol: f64,
    pub tables: BTreeMap<String, TableFixture>,
    pub gamma: GammaFixture,
    pub fig4: Fig4Fixture,
    pub nak_fixed_point: FixedPointFixture,
}

#[derive(Deserialize)]
pub struct TableFixture {
    pub cons: String,
    pub ordered: bool,
    pub rows: Vec<RowFixture>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowFixture {
    pub cell: String,
    pub l: usize,
    pub types: usize,
    pub lambda: f64,
    #[serde(default)]
    pub lambda_alt: Option<f64>,
}

#[derive(Deserialize)]
pub struct GammaFixture {
    pub d5: IntervalFixture,
    pub d7: IntervalFixture,
}

#[derive(Deserialize)]
pub struct IntervalFixture {
    pub cell: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fig4Fixture {
    pub cell: String,
    pub first_gap: f64,
    pub tail: f64,
    pub tail_tol: f64,
    pub tail_depth: usize,
    pub window_lo: usize,
    pub window_hi: usize,
    pub window_bound: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixedPointFixture {
    pub cell: String,
    pub fhat1_at: f64,
    pub fhat1_value: f64,
    pub fhat2_at: f64,
    pub fhat2_value: f64,
    pub probe_tol: f64,
    pub jacobian_at: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    pub jacobian_tol: f64,
    pub lambda_star: f64,
    pub lambda_star_tol: f64,
    pub residual_tol: f64,
    pub verdict: String,
}

/// The embedded expected-value data, parsed once.
pub fn fixtures() -> &'static Fixtures {
    static CACHE: OnceLock<Fixtures> = OnceLock::new();
    CACHE.get_or_init(|| {
        serde_json::from_str(include_str!("../fixtures/expected.json"))
            .expect("embedded fixture file parses")
    })
}

// ---------------------------------------------------------------------------
// targets

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Target {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
    Table6,
    Fig4,
    Gamma,
    NakFixedpoint,
    All,
}

impl Target {
    pub const NAMES: [&'static str; 10] = [
        "table1",
        "table2",
        "table3",
        "table4",
        "table5",
        "table6",
        "fig4",
        "gamma",
        "nak-fixedpoint",
        "all",
    ];

    pub fn parse(s: &str) -> Result<Target> {
        match s {
            "table1" => Ok(Target::Table1),
            "table2" => Ok(Target::Table2),
            "table3" => Ok(Target::Table3),
            "table4" => Ok(Target::Table4),
            "table5" => Ok(Target::Table5),
            "table6" => Ok(Target::Table6),
            "fig4" => Ok(Target::Fig4),
            "gamma" => Ok(Target::Gamma),
            "nak-fixedpoint" => Ok(Target::NakFixedpoint),
            "all" => Ok(Target::All),
            other => Err(anyhow!(
                "unknown target {other:?}; expected one of {}",
                Target::NAMES.join(", ")
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Table3 => "table3",
            Target::Table4 => "table4",
            Target::Table5 => "table5",
            Target::Table6 => "table6",
            Target::Fig4 => "fig4",
            Target::Gamma => "gamma",
            Target::NakFixedpoint => "nak-fixedpoint",
            Target::All => "all",
        }
    }

    /// Concrete targets to run, in reporting order.
    pub fn expand(self) -> Vec<Target> {
        match self {
            Target::All => vec![
                Target::Table1,
                Target::Table2,
                Target::Table3,
                Target::Table4,
                Target::Table5,
                Target::Table6,
                Target::Fig4,
                Target::Gamma,
                Target::NakFixedpoint,
            ],
            t => vec![t],
        }
    }
}

/// One pass/fail comparison line.
pub struct CellLine {
    pub cell: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything one target produced; nothing is written or printed yet.
pub struct TargetReport {
    pub lines: Vec<CellLine>,
    /// (file name, bytes) pairs, relative to the output directory
    pub files: Vec<(String, Vec<u8>)>,
    pub pass: bool,
}

/// Run the given targets, fanning out across threads when there are several.
/// `SPATIALMIX_THREADS` caps the worker count.
pub fn run_targets(targets: &[Target], hash: &str) -> Result<Vec<TargetReport>> {
    if targets.len() <= 1 {
        return targets.iter().map(|&t| run_target(t, hash)).collect();
    }
    let workers = thread_cap(targets.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<TargetReport>>>> =
        targets.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= targets.len() {
                    break;
                }
                let report = run_target(targets[i], hash);
                *slots[i].lock().expect("slot lock") = Some(report);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("slot lock")
                .expect("every index was claimed by a worker")
        })
        .collect()
}

fn thread_cap(jobs: usize) -> usize {
    let available = thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1);
    env::var("SPATIALMIX_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&c| c >= 1)
        .unwrap_or(available)
        .min(jobs)
        .max(1)
}

pub fn run_target(target: Target, hash: &str) -> Result<TargetReport> {
    let fx = fixtures();
    match target {
        Target::Table1 | Target::Table2 | Target::Table3 | Target::Table4 | Target::Table5
        | Target::Table6 => {
            let name = target.name();
            let table = fx
                .tables
                .get(name)
                .ok_or_else(|| anyhow!("no fixture rows for {name}"))?;
            run_table(target, table, fx.lambda_tol, hash)
        }
        Target::Fig4 => run_fig4(&fx.fig4, hash),
        Target::Gamma => run_gamma(&fx.gamma, hash),
        Target::NakFixedpoint => run_fixed_point(&fx.nak_fixed_point, hash),
        Target::All => Err(anyhow!("`all` must be expanded before running")),
    }
}

// ---------------------------------------------------------------------------
// branching-matrix tables

struct RowOutcome {
    cell: String,
    l: usize,
    types: usize,
    lambda: f64,
    expected_types: usize,
    expected_lambda: f64,
    expected_lambda_alt: Option<f64>,
    pass: bool,
    note: Option<String>,
}

fn lambda_matches(lambda: f64, row: &RowFixture, tol: f64) -> bool {
    (lambda - row.lambda).abs() <= tol
        || row
            .lambda_alt
            .is_some_and(|alt| (lambda - alt).abs() <= tol)
}

fn row_outcome(
    row: &RowFixture,
    types: usize,
    lambda: f64,
    tol: f64,
    allow_off_by_one: bool,
) -> RowOutcome {
    let exact = types == row.types;
    let near = (types as i64 - row.types as i64).abs() <= 1;
    let types_ok = exact || (allow_off_by_one && near);
    let lambda_ok = lambda_matches(lambda, row, tol);
    let mut notes = Vec::new();
    if !exact && types_ok {
        notes.push("type count differs by one (root-type convention)".to_string());
    }
    if let Some(alt) = row.lambda_alt {
        if (lambda - row.lambda).abs() <= tol {
            notes.push(format!(
                "alternative published value {alt} not reproduced (off by {})",
                sig10_str((lambda - alt).abs())
            ));
        } else if (lambda - alt).abs() <= tol {
            notes.push(format!(
                "matched the alternative published value {alt}; primary {} off by {}",
                row.lambda,
                sig10_str((lambda - row.lambda).abs())
            ));
        }
    }
    RowOutcome {
        cell: row.cell.clone(),
        l: row.l,
        types,
        lambda,
        expected_types: row.types,
        expected_lambda: row.lambda,
        expected_lambda_alt: row.lambda_alt,
        pass: types_ok && lambda_ok,
        note: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    }
}

fn run_table(
    target: Target,
    table: &TableFixture,
    tol: f64,
    hash: &str,
) -> Result<TargetReport> {
    let cons: Constraint = table
        .cons
        .parse()
        .map_err(|e| anyhow!("fixture constraint: {e}"))?;
    let (order, order_matched, outcomes) = if table.ordered {
        ordered_table(cons, &table.rows, tol)?
    } else {
        let mut outcomes = Vec::new();
        for row in &table.rows {
            let m = build_matrix(cons, row.l, None)?;
            let s = m.spectral_radius(SPECTRAL_TOL)?;
            outcomes.push(row_outcome(row, m.size(), s.lambda, tol, true));
        }
        (None, true, outcomes)
    };

    let name = target.name();
    let mut csv = String::new();
    csv.push_str(&format!("# manifest: {hash}\n"));
    csv.push_str("l,types,lambda,expectedTypes,expectedLambda,pass\n");
    for o in &outcomes {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.l,
            o.types,
            sig10_str(o.lambda),
            o.expected_types,
            o.expected_lambda,
            o.pass
        ));
    }

    let pass = order_matched && outcomes.iter().all(|o| o.pass);
    let rows_json: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "cell": o.cell,
                "l": o.l,
                "types": o.types,
                "lambda": o.lambda,
                "expectedTypes": o.expected_types,
                "expectedLambda": o.expected_lambda,
                "expectedLambdaAlt": o.expected_lambda_alt,
                "pass": o.pass,
                "note": o.note,
            })
        })
        .collect();
    let summary = json!({
        "target": name,
        "cons": cons.name(),
        "ordered": table.ordered,
        "order": order.as_ref().map(|o| o.to_string()),
        "orderMatched": if table.ordered { Some(order_matched) } else { None },
        "lambdaTol": tol,
        "rows": rows_json,
        "pass": pass,
        "manifest": hash,
        "fixturesVersion": fixtures().version,
        "fixturesSource": fixtures().source,
    });

    let mut lines = Vec::new();
    if table.ordered {
        let order_str = order
            .as_ref()
            .map(|o| o.to_string())
            .unwrap_or_else(|| "none".to_string());
        let detail = if order_matched {
            format!("neighbor order {order_str}")
        } else {
            format!("no canonical neighbor order reproduces this table; closest is {order_str}")
        };
        lines.push(CellLine {
            cell: format!("{name}:order"),
            pass: order_matched,
            detail,
        });
    }
    for o in &outcomes {
        let mut detail = format!(
            "types {} (expected {}), lambda {} (expected {} +/-{})",
            o.types,
            o.expected_types,
            sig10_str(o.lambda),
            o.expected_lambda,
            tol
        );
        if let Some(note) = &o.note {
            detail.push_str("; ");
            detail.push_str(note);
        }
        lines.push(CellLine {
            cell: o.cell.clone(),
            pass: o.pass,
            detail,
        });
    }

    Ok(TargetReport {
        lines,
        files: vec![
            (format!("{name}.csv"), csv.into_bytes()),
            (
                format!("{name}.json"),
                artifact_bytes(&summary)?,
            ),
        ],
        pass,
    })
}

/// Find a canonical neighbor order reproducing the published rows.
///
/// Every candidate is screened at the smallest cycle bound, survivors are
/// re-checked at the middle one, and only then is the expensive final bound
/// built, for the first survivor (falling back to the rest if it fails).
/// When nothing matches, the closest candidate's values are reported with
/// its rows marked failed.
fn ordered_table(
    cons: Constraint,
    rows: &[RowFixture],
    tol: f64,
) -> Result<(Option<NeighborOrder>, bool, Vec<RowOutcome>)> {
    let cands = NeighborOrder::symmetry_candidates(cons);
    // evaluated (types, lambda) per candidate and row index
    let mut seen: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    let eval = |ci: usize, ri: usize, seen: &mut BTreeMap<(usize, usize), (usize, f64)>| {
        if let Some(&v) = seen.get(&(ci, ri)) {
            return Ok::<(usize, f64), anyhow::Error>(v);
        }
        let m = build_matrix(cons, rows[ri].l, Some(&cands[ci]))?;
        let s = m.spectral_radius(SPECTRAL_TOL)?;
        seen.insert((ci, ri), (m.size(), s.lambda));
        Ok((m.size(), s.lambda))
    };

    let mut alive: Vec<usize> = (0..cands.len()).collect();
    let mut matched = true;
    for (ri, row) in rows.iter().enumerate() {
        let last = ri + 1 == rows.len();
        let mut survivors = Vec::new();
        for &ci in &alive {
            let (types, lambda) = eval(ci, ri, &mut seen)?;
            if types == row.types && lambda_matches(lambda, row, tol) {
                survivors.push(ci);
                if last {
                    // one full match suffices on the heaviest bound
                    break;
                }
            }
        }
        if survivors.is_empty() {
            matched = false;
            break;
        }
        alive = survivors;
    }

    if matched {
        // the head of `alive` passed every row, the final one included
        let ci = alive[0];
        let outcomes = rows
            .iter()
            .enumerate()
            .map(|(ri, row)| {
                let (types, lambda) = seen[&(ci, ri)];
                row_outcome(row, types, lambda, tol, false)
            })
            .collect();
        return Ok((Some(cands[ci].clone()), true, outcomes));
    }

    // nothing matched: report the candidate closest on the deepest row it
    // was evaluated at, with every row computed for it
    let deepest = seen.keys().map(|&(_, ri)| ri).max().unwrap_or(0);
    let closest = seen
        .iter()
        .filter(|((_, ri), _)| *ri == deepest)
        .min_by(|(_, (_, la)), (_, (_, lb))| {
            let da = (la - rows[deepest].lambda).abs();
            let db = (lb - rows[deepest].lambda).abs();
            da.total_cmp(&db)
        })
        .map(|((ci, _), _)| *ci)
        .unwrap_or(0);
    let mut outcomes = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        let (types, lambda) = eval(closest, ri, &mut seen)?;
        let mut o = row_outcome(row, types, lambda, tol, false);
        o.pass = false; // the table as a whole was not reproduced
        outcomes.push(o);
    }
    Ok((Some(cands[closest].clone()), false, outcomes))
}

// ---------------------------------------------------------------------------
// gamma thresholds

fn run_gamma(fx: &GammaFixture, hash: &str) -> Result<TargetReport> {
    let mut lines = Vec::new();
    let mut csv = String::new();
    csv.push_str(&format!("# manifest: {hash}\n"));
    csv.push_str("d,gamma,xStar,lo,hi,pass\n");
    let mut values = serde_json::Map::new();
    let mut pass = true;
    for (key, interval, d) in [("d5", &fx.d5, 5u32), ("d7", &fx.d7, 7u32)] {
        let t = gamma(d)?;
        let ok = interval.lo < t.gamma && t.gamma < interval.hi;
        pass &= ok;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d,
            sig10_str(t.gamma),
            sig10_str(t.x_star),
            interval.lo,
            interval.hi,
            ok
        ));
        values.insert(
            key.to_string(),
            json!({
                "cell": interval.cell,
                "d": d,
                "gamma": t.gamma,
                "xStar": t.x_star,
                "lo": interval.lo,
                "hi": interval.hi,
                "pass": ok,
            }),
        );
        lines.push(CellLine {
            cell: interval.cell.clone(),
            pass: ok,
            detail: format!(
                "gamma({d}) = {} in ({}, {})",
                sig10_str(t.gamma),
                interval.lo,
                interval.hi
            ),
        });
    }
    let summary = json!({
        "target": "gamma",
        "values": Value::Object(values),
        "pass": pass,
        "manifest": hash,
        "fixturesVersion": fixtures().version,
        "fixturesSource": fixtures().source,
    });
    Ok(TargetReport {
        lines,
        files: vec![
            ("gamma.csv".to_string(), csv.into_bytes()),
            ("gamma.json".to_string(), artifact_bytes(&summary)?),
        ],
        pass,
    })
}

// ---------------------------------------------------------------------------
// boundary-gap series

fn run_fig4(fx: &Fig4Fixture, hash: &str) -> Result<TargetReport> {
    let gaps = iterate_gap(fx.tail_depth)?;
    let mut csv = String::new();
    csv.push_str(&format!("# manifest: {hash}\n"));
    csv.push_str("depth,gap\n");
    for (k, g) in gaps.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, sig10_str(*g)));
    }

    let first = gaps[0];
    let tail = *gaps.last().expect("depth >= 1");
    let window = &gaps[fx.window_lo - 1..fx.window_hi];
    let window_min = window.iter().copied().fold(f64::INFINITY, f64::min);

    let first_ok = (first - fx.first_gap).abs() <= 1e-12;
    let tail_ok = (tail - fx.tail).abs() <= fx.tail_tol;
    let window_ok = window_min >= fx.window_bound;
    let pass = first_ok && tail_ok && window_ok;

    let lines = vec![
        CellLine {
            cell: "fig4:firstGap".to_string(),
            pass: first_ok,
            detail: format!("gap(1) = {} (expected {})", sig10_str(first), fx.first_gap),
        },
        CellLine {
            cell: fx.cell.clone(),
            pass: tail_ok,
            detail: format!(
                "gap({}) = {} (expected {} +/-{})",
                fx.tail_depth,
                sig10_str(tail),
                fx.tail,
                fx.tail_tol
            ),
        },
        CellLine {
            cell: "fig4:window".to_string(),
            pass: window_ok,
            detail: format!(
                "min gap over depths {}..{} = {} (bound {})",
                fx.window_lo,
                fx.window_hi,
                sig10_str(window_min),
                fx.window_bound
            ),
        },
    ];

    let summary = json!({
        "target": "fig4",
        "depth": fx.tail_depth,
        "firstGap": first,
        "tail": tail,
        "tailExpected": fx.tail,
        "tailTol": fx.tail_tol,
        "windowLo": fx.window_lo,
        "windowHi": fx.window_hi,
        "windowMin": window_min,
        "windowBound": fx.window_bound,
        "pass": pass,
        "manifest": hash,
        "fixturesVersion": fixtures().version,
        "fixturesSource": fixtures().source,
    });
    Ok(TargetReport {
        lines,
        files: vec![
            ("fig4.csv".to_string(), csv.into_bytes()),
            ("fig4.json".to_string(), artifact_bytes(&summary)?),
        ],
        pass,
    })
}

// ---------------------------------------------------------------------------
// ratio-recursion fixed point

fn run_fixed_point(fx: &FixedPointFixture, hash: &str) -> Result<TargetReport> {
    let report = solve_fixed_point()?;

    let p1 = fhat1(fx.fhat1_at);
    let p2 = fhat2(fx.fhat2_at);
    let probe1_ok = p1 > 0.0 && (p1 - fx.fhat1_value).abs() <= fx.probe_tol;
    let probe2_ok = p2 > 0.0 && (p2 - fx.fhat2_value).abs() <= fx.probe_tol;

    let jac = jacobian_abs(fx.jacobian_at[0], fx.jacobian_at[1]);
    let mut jac_err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            jac_err = jac_err.max((jac[i][j] - fx.jacobian[i][j]).abs());
        }
    }
    let jac_ok = jac_err <= fx.jacobian_tol;

    let lambda_ok = (report.lambda_star - fx.lambda_star).abs() <= fx.lambda_star_tol;
    let identity = (report.yhat - report.xhat / (1.0 + report.xhat)).abs();
    let fixed_ok = report.delta1 <= fx.residual_tol
        && report.delta2 <= fx.residual_tol
        && identity <= fx.residual_tol
        && report.xhat < fx.fhat1_at
        && report.yhat < fx.fhat2_at;
    let verdict_str = match report.verdict {
        StabilityVerdict::Repelling => "REPELLING",
        StabilityVerdict::Attracting => "ATTRACTING",
    };
    let verdict_ok = verdict_str == fx.verdict;

    let pass = probe1_ok && probe2_ok && jac_ok && lambda_ok && fixed_ok && verdict_ok;
    let lines = vec![
        CellLine {
            cell: format!("{}:probe1", fx.cell),
            pass: probe1_ok,
            detail: format!(
                "Fhat1({}) = {} (expected {} +/-{})",
                fx.fhat1_at,
                sig10_str(p1),
                fx.fhat1_value,
                fx.probe_tol
            ),
        },
        CellLine {
            cell: format!("{}:probe2", fx.cell),
            pass: probe2_ok,
            detail: format!(
                "Fhat2({}) = {} (expected {} +/-{})",
                fx.fhat2_at,
                sig10_str(p2),
                fx.fhat2_value,
                fx.probe_tol
            ),
        },
        CellLine {
            cell: format!("{}:jacobian", fx.cell),
            pass: jac_ok,
            detail: format!(
                "max entry error {} at ({}, {}) (tol {})",
                sig10_str(jac_err),
                fx.jacobian_at[0],
                fx.jacobian_at[1],
                fx.jacobian_tol
            ),
        },
        CellLine {
            cell: format!("{}:lambdaStar", fx.cell),
            pass: lambda_ok,
            detail: format!(
                "lambda* = {} (expected {} +/-{})",
                sig10_str(report.lambda_star),
                fx.lambda_star,
                fx.lambda_star_tol
            ),
        },
        CellLine {
            cell: format!("{}:fixedPoint", fx.cell),
            pass: fixed_ok,
            detail: format!(
                "xhat = {}, yhat = {}, residuals {} / {}, identity gap {}",
                sig10_str(report.xhat),
                sig10_str(report.yhat),
                sig10_str(report.delta1),
                sig10_str(report.delta2),
                sig10_str(identity)
            ),
        },
        CellLine {
            cell: format!("{}:verdict", fx.cell),
            pass: verdict_ok,
            detail: format!("{verdict_str} (expected {})", fx.verdict),
        },
    ];

    let summary = json!({
        "target": "nak-fixedpoint",
        "report": report,
        "probes": {
            "fhat1": {"at": fx.fhat1_at, "value": p1, "expected": fx.fhat1_value, "pass": probe1_ok},
            "fhat2": {"at": fx.fhat2_at, "value": p2, "expected": fx.fhat2_value, "pass": probe2_ok},
        },
        "jacobianProbe": {
            "at": fx.jacobian_at,
            "value": jac,
            "expected": fx.jacobian,
            "maxError": jac_err,
            "pass": jac_ok,
        },
        "pass": pass,
        "manifest": hash,
        "fixturesVersion": fixtures().version,
        "fixturesSource": fixtures().source,
    });
    Ok(TargetReport {
        lines,
        files: vec![(
            "nak-fixedpoint.json".to_string(),
            artifact_bytes(&summary)?,
        )],
        pass,
    })
}

fn artifact_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut text = to_json_string(value).context("rendering artifact")?;
    text.push('\n');
    Ok(text.into_bytes())
}
