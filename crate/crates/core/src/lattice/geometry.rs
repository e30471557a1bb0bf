use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
}

/// Unordered site pair. `(x, y)` is the cell the bond starts from; the partner sits at
/// `+span` along `dir`, wrapped periodically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub dir: Direction,
    pub x: usize,
    pub y: usize,
    pub layer: usize,
    pub span: usize,
}

/// Rectangular grid of `nx * ny` cells, optionally stacked in two layers.
///
/// Sites are numbered row-major, `x` fastest, layers outermost:
/// `index = x + nx * y + nx * ny * layer`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    nx: usize,
    ny: usize,
    layers: usize,
    periodic: bool,
    nn_edges: Vec<Edge>,
    nnn_axial_edges: Vec<Edge>,
}

impl Lattice {
    pub fn new(nx: usize, ny: usize, layers: usize, periodic: bool) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Lattice(format!("need at least 2 sites per direction, got {nx}x{ny}")));
        }
        if !(1..=2).contains(&layers) {
            return Err(Error::Lattice(format!("layers must be 1 or 2, got {layers}")));
        }
        let mut lat = Lattice {
            nx,
            ny,
            layers,
            periodic,
            nn_edges: Vec::new(),
            nnn_axial_edges: Vec::new(),
        };
        lat.nn_edges = lat.edges(1, true);
        lat.nnn_axial_edges = lat.edges(2, false);
        Ok(lat)
    }

    fn edges(&self, span: usize, dedup: bool) -> Vec<Edge> {
        let mut out: Vec<Edge> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for layer in 0..self.layers {
            for dir in [Direction::X, Direction::Y] {
                let extent = match dir {
                    Direction::X => self.nx,
                    Direction::Y => self.ny,
                };
                for y in 0..self.ny {
                    for x in 0..self.nx {
                        let along = if dir == Direction::X { x } else { y };
                        if !self.periodic && along + span >= extent {
                            continue;
                        }
                        let (tx, ty) = match dir {
                            Direction::X => ((x + span) % self.nx, y),
                            Direction::Y => (x, (y + span) % self.ny),
                        };
                        let a = self.site_index(x, y, layer);
                        let b = self.site_index(tx, ty, layer);
                        if a == b {
                            continue;
                        }
                        if dedup && !seen.insert((a.min(b), a.max(b))) {
                            continue;
                        }
                        out.push(Edge {
                            a,
                            b,
                            dir,
                            x,
                            y,
                            layer,
                            span,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny * self.layers
    }

    pub fn site_index(&self, x: usize, y: usize, layer: usize) -> usize {
        x + self.nx * (y + self.ny * layer)
    }

    pub fn coords(&self, site: usize) -> (usize, usize, usize) {
        let x = site % self.nx;
        let y = (site / self.nx) % self.ny;
        (x, y, site / self.n_cells())
    }

    /// Deduplicated nearest-neighbour bonds, layer by layer, x bonds before y bonds.
    pub fn nn_edges(&self) -> &[Edge] {
        &self.nn_edges
    }

    /// Axial next-nearest-neighbour bonds (`+2` along x and along y), one per cell and axis.
    pub fn nnn_axial_edges(&self) -> &[Edge] {
        &self.nnn_axial_edges
    }

    /// Site permutation for a periodic shift by `(dx, dy)`; layers are preserved.
    pub fn translation(&self, dx: isize, dy: isize) -> Result<Vec<usize>> {
        if !self.periodic {
            return Err(Error::Lattice("translations require periodic boundaries".into()));
        }
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        Ok((0..self.n_sites())
            .map(|s| {
                let (x, y, l) = self.coords(s);
                let tx = (x as isize + dx).rem_euclid(nx) as usize;
                let ty = (y as isize + dy).rem_euclid(ny) as usize;
                self.site_index(tx, ty, l)
            })
            .collect())
    }
}

pub fn build_lattice(nx: usize, ny: usize, layers: usize, periodic: bool) -> Result<Lattice> {
    Lattice::new(nx, ny, layers, periodic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        let l = build_lattice(3, 3, 1, true).unwrap();
        assert_eq!(l.n_sites(), 9);
        assert_eq!(l.nn_edges().len(), 18);
        assert_eq!(l.nnn_axial_edges().len(), 18);
        let l = build_lattice(4, 6, 1, true).unwrap();
        assert_eq!(l.n_sites(), 24);
        assert_eq!(l.nn_edges().len(), 48);
        assert_eq!(l.nnn_axial_edges().len(), 48);
    }

    #[test]
    fn every_site_has_two_bonds_per_direction() {
        let l = build_lattice(4, 3, 1, true).unwrap();
        for s in 0..l.n_sites() {
            for dir in [Direction::X, Direction::Y] {
                let k = l.nn_edges().iter().filter(|e| e.dir == dir && (e.a == s || e.b == s)).count();
                assert_eq!(k, 2);
            }
        }
    }

    #[test]
    fn extent_two_is_deduplicated() {
        let l = build_lattice(3, 2, 1, true).unwrap();
        // 3 x bonds per row on the ring of 3, one y bond per column
        assert_eq!(l.nn_edges().len(), 6 + 3);
        let l = build_lattice(2, 2, 2, true).unwrap();
        assert_eq!(l.nn_edges().len(), 2 * 4);
    }

    #[test]
    fn open_boundaries() {
        let l = build_lattice(3, 4, 1, false).unwrap();
        assert_eq!(l.nn_edges().len(), 2 * 4 + 3 * 3);
        assert!(l.translation(1, 0).is_err());
    }

    #[test]
    fn site_index_is_bijective() {
        let l = build_lattice(4, 3, 2, true).unwrap();
        let mut seen = vec![false; l.n_sites()];
        for layer in 0..2 {
            for y in 0..3 {
                for x in 0..4 {
                    let s = l.site_index(x, y, layer);
                    assert!(!seen[s]);
                    seen[s] = true;
                    assert_eq!(l.coords(s), (x, y, layer));
                }
            }
        }
    }

    #[test]
    fn rejects_small() {
        assert!(build_lattice(1, 4, 1, true).is_err());
        assert!(build_lattice(3, 3, 3, true).is_err());
    }
}
