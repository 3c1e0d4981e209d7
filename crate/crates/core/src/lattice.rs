//! The four constraint lattices and finite regions of them.
//!
//! A binary m x n array satisfies a constraint exactly when its support is an
//! independent set of the corresponding lattice graph, so everything downstream
//! works with induced subgraphs of infinite translation-invariant lattices.
//! Points are `(row, col)` pairs; the compass overlay puts north at `row - 1`
//! and east at `col + 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::{Error, Result};

/// Lattice site, `(row, col)`.
pub type Point = (i64, i64);

/// A unit offset between lattice sites.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Dir {
    pub di: i64,
    pub dj: i64,
}

impl Dir {
    pub const NW: Dir = Dir { di: -1, dj: -1 };
    pub const N: Dir = Dir { di: -1, dj: 0 };
    pub const NE: Dir = Dir { di: -1, dj: 1 };
    pub const E: Dir = Dir { di: 0, dj: 1 };
    pub const SE: Dir = Dir { di: 1, dj: 1 };
    pub const S: Dir = Dir { di: 1, dj: 0 };
    pub const SW: Dir = Dir { di: 1, dj: -1 };
    pub const W: Dir = Dir { di: 0, dj: -1 };

    /// The eight compass offsets in clockwise order starting at north-west.
    pub const COMPASS: [Dir; 8] = [
        Dir::NW,
        Dir::N,
        Dir::NE,
        Dir::E,
        Dir::SE,
        Dir::S,
        Dir::SW,
        Dir::W,
    ];

    pub fn negate(self) -> Dir {
        Dir {
            di: -self.di,
            dj: -self.dj,
        }
    }

    pub fn offset(self, p: Point) -> Point {
        (p.0 + self.di, p.1 + self.dj)
    }

    pub fn compass_name(self) -> &'static str {
        match (self.di, self.dj) {
            (-1, -1) => "NW",
            (-1, 0) => "N",
            (-1, 1) => "NE",
            (0, 1) => "E",
            (1, 1) => "SE",
            (1, 0) => "S",
            (1, -1) => "SW",
            (0, -1) => "W",
            _ => "?",
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.compass_name())
    }
}

impl FromStr for Dir {
    type Err = Error;

    fn from_str(s: &str) -> Result<Dir> {
        Dir::COMPASS
            .iter()
            .copied()
            .find(|d| d.compass_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown direction {s:?}")))
    }
}

/// One of the four supported hard constraints.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Hard squares: no two 1s orthogonally adjacent.
    Hs,
    /// Hard hexagons: hard squares plus one diagonal.
    Hh,
    /// Read/write isolated memory: no two 1s horizontally or diagonally adjacent.
    Rwim,
    /// Non-attacking kings: no two 1s among the eight surrounding cells.
    Nak,
}

impl Constraint {
    pub const ALL: [Constraint; 4] = [
        Constraint::Hs,
        Constraint::Hh,
        Constraint::Rwim,
        Constraint::Nak,
    ];

    /// Generator offsets; the edge set is these together with their negations.
    pub fn generators(self) -> &'static [Dir] {
        match self {
            Constraint::Hs => &[Dir::S, Dir::E],
            Constraint::Hh => &[Dir::S, Dir::E, Dir::SW],
            Constraint::Rwim => &[Dir::E, Dir::SE, Dir::SW],
            Constraint::Nak => &[Dir::S, Dir::E, Dir::SE, Dir::SW],
        }
    }

    /// The full symmetric offset set, in clockwise compass order from NW.
    pub fn directions(self) -> Vec<Dir> {
        let gens = self.generators();
        Dir::COMPASS
            .iter()
            .copied()
            .filter(|d| gens.contains(d) || gens.contains(&d.negate()))
            .collect()
    }

    /// Number of lattice neighbors of every site.
    pub fn degree(self) -> usize {
        match self {
            Constraint::Hs => 4,
            Constraint::Hh | Constraint::Rwim => 6,
            Constraint::Nak => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constraint::Hs => "hs",
            Constraint::Hh => "hh",
            Constraint::Rwim => "rwim",
            Constraint::Nak => "nak",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Constraint> {
        match s.to_ascii_lowercase().as_str() {
            "hs" => Ok(Constraint::Hs),
            "hh" => Ok(Constraint::Hh),
            "rwim" => Ok(Constraint::Rwim),
            "nak" => Ok(Constraint::Nak),
            _ => Err(Error::Parse(format!("unknown constraint {s:?}"))),
        }
    }
}

/// All lattice neighbors of `p`, in clockwise compass order.
pub fn neighbors(cons: Constraint, p: Point) -> Vec<Point> {
    cons.directions().iter().map(|d| d.offset(p)).collect()
}

/// A total order on the neighbor offsets of a site, the same at every site.
///
/// Rank 1 is the most preferred direction.  The order decides which branch
/// survives when a walk tree closes a cycle, so different orders give
/// different (equally valid) pruned trees.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NeighborOrder {
    dirs: Vec<Dir>,
}

impl NeighborOrder {
    /// Clockwise from NW, restricted to the constraint's offsets.
    pub fn default_for(cons: Constraint) -> NeighborOrder {
        NeighborOrder {
            dirs: cons.directions(),
        }
    }

    /// Build from an explicit ranking; must be a permutation of the
    /// constraint's offsets.
    pub fn new(cons: Constraint, dirs: Vec<Dir>) -> Result<NeighborOrder> {
        let expect: BTreeSet<Dir> = cons.directions().into_iter().collect();
        let got: BTreeSet<Dir> = dirs.iter().copied().collect();
        if got.len() != dirs.len() || got != expect {
            return Err(Error::InvalidParameter(format!(
                "order must be a permutation of the {} offsets of {}",
                cons.degree(),
                cons
            )));
        }
        Ok(NeighborOrder { dirs })
    }

    /// Parse a comma-separated compass list such as `"NW,N,NE,E,SE,S,SW,W"`.
    pub fn parse(cons: Constraint, s: &str) -> Result<NeighborOrder> {
        let dirs = s
            .split(',')
            .map(|tok| tok.trim().parse())
            .collect::<Result<Vec<Dir>>>()?;
        NeighborOrder::new(cons, dirs)
    }

    /// 1-based rank of `d`, or `None` if `d` is not an offset of the lattice.
    pub fn rank(&self, d: Dir) -> Option<usize> {
        self.dirs.iter().position(|&x| x == d).map(|i| i + 1)
    }

    pub fn dirs(&self) -> &[Dir] {
        &self.dirs
    }

    /// All rotations of the clockwise cycle and of its reversal: the
    /// candidate orders induced by lattice symmetries (at most 16).
    pub fn symmetry_candidates(cons: Constraint) -> Vec<NeighborOrder> {
        let base = cons.directions();
        let k = base.len();
        let mut out = Vec::new();
        for rev in [false, true] {
            let seq: Vec<Dir> = if rev {
                base.iter().rev().copied().collect()
            } else {
                base.clone()
            };
            for r in 0..k {
                let rotated: Vec<Dir> = (0..k).map(|i| seq[(i + r) % k]).collect();
                let cand = NeighborOrder { dirs: rotated };
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        out
    }
}

impl fmt::Display for NeighborOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.dirs.iter().map(|d| d.compass_name()).collect();
        f.write_str(&names.join(","))
    }
}

/// A finite set of sites of one constraint lattice, with the induced edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteRegion {
    constraint: Constraint,
    vertices: BTreeSet<Point>,
}

impl FiniteRegion {
    /// The m x n box `{0..m} x {0..n}`.
    pub fn rect(cons: Constraint, m: usize, n: usize) -> Result<FiniteRegion> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension(format!(
                "box must be nonempty, got {m} x {n}"
            )));
        }
        let mut vertices = BTreeSet::new();
        for i in 0..m as i64 {
            for j in 0..n as i64 {
                vertices.insert((i, j));
            }
        }
        Ok(FiniteRegion {
            constraint: cons,
            vertices,
        })
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(cons: Constraint, pts: I) -> FiniteRegion {
        FiniteRegion {
            constraint: cons,
            vertices: pts.into_iter().collect(),
        }
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.vertices.contains(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.vertices.iter().copied()
    }

    /// The region with `pts` removed.  Unoccupied-by-fiat and absent are the
    /// same thing for counting, so deletion doubles as fixing to 0.
    pub fn without<I: IntoIterator<Item = Point>>(&self, pts: I) -> FiniteRegion {
        let mut vertices = self.vertices.clone();
        for p in pts {
            vertices.remove(&p);
        }
        FiniteRegion {
            constraint: self.constraint,
            vertices,
        }
    }

    /// Neighbors of `p` inside the region, clockwise compass order.
    pub fn neighbors_in(&self, p: Point) -> Vec<Point> {
        self.constraint
            .directions()
            .iter()
            .map(|d| d.offset(p))
            .filter(|q| self.vertices.contains(q))
            .collect()
    }

    pub fn degree_in(&self, p: Point) -> usize {
        self.neighbors_in(p).len()
    }

    /// Induced edges, each listed once.
    pub fn edges(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for &v in &self.vertices {
            for g in self.constraint.generators() {
                let w = g.offset(v);
                if self.vertices.contains(&w) {
                    out.push((v, w));
                }
            }
        }
        out
    }
}
