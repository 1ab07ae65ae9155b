//! Marching-squares extraction of the curve separating capture cells from the
//! rest (breach, timeout, error) on a capture map.
//!
//! Vertices sit at the midpoints of lattice edges whose endpoints differ in
//! class. Saddle cells always separate the non-capture corners. Segments are
//! chained into polylines: open chains (ending on the grid border) first, in
//! ascending order of their starting edge, then closed loops.

use std::collections::BTreeMap;

use serde::Serialize;

use super::grid::{CaptureMap, GridSpec};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    /// The last point connects back to the first.
    pub closed: bool,
}

impl Polyline {
    /// Even-odd containment; always `false` for open polylines.
    pub fn contains(&self, p: Point) -> bool {
        if !self.closed || self.points.len() < 3 {
            return false;
        }
        let n = self.points.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Shoelace area of a closed polyline.
    pub fn area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        let n = self.points.len();
        let mut s = 0.0;
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            s += a.x * b.y - b.x * a.y;
        }
        0.5 * s.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeId(usize);

fn horizontal(grid: &GridSpec, i: usize, j: usize) -> EdgeId {
    EdgeId(2 * grid.index(i, j))
}

fn vertical(grid: &GridSpec, i: usize, j: usize) -> EdgeId {
    EdgeId(2 * grid.index(i, j) + 1)
}

fn midpoint(grid: &GridSpec, e: EdgeId) -> Point {
    let (i, j) = grid.coords(e.0 / 2);
    if e.0.is_multiple_of(2) {
        Point::new(0.5 * (grid.x(i) + grid.x(i + 1)), grid.y(j))
    } else {
        Point::new(grid.x(i), 0.5 * (grid.y(j) + grid.y(j + 1)))
    }
}

/// Boundary polylines between capture and non-capture cells. Empty for single-class maps.
pub fn extract_boundary(map: &CaptureMap) -> Vec<Polyline> {
    let grid = &map.grid;
    let outside = |i: usize, j: usize| !map.outcome(i, j).is_capture();

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let case = (outside(i, j + 1) as u8) << 3
                | (outside(i + 1, j + 1) as u8) << 2
                | (outside(i + 1, j) as u8) << 1
                | outside(i, j) as u8;
            let bottom = horizontal(grid, i, j);
            let top = horizontal(grid, i, j + 1);
            let left = vertical(grid, i, j);
            let right = vertical(grid, i + 1, j);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((top, right)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    segments.push((left, bottom));
                    segments.push((top, right));
                }
                10 => {
                    segments.push((left, top));
                    segments.push((bottom, right));
                }
                _ => unreachable!("4-bit case"),
            }
        }
    }

    let mut incident: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];

    let walk = |start: EdgeId, used: &mut Vec<bool>| -> (Vec<EdgeId>, bool) {
        let mut chain = vec![start];
        let mut at = start;
        loop {
            let next = incident[&at].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segments[k];
            at = if a == at { b } else { a };
            if at == start {
                return (chain, true);
            }
            chain.push(at);
        }
        (chain, false)
    };

    let mut out = Vec::new();
    let ends: Vec<EdgeId> = incident
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(&e, _)| e)
        .collect();
    for e in ends {
        if incident[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let (chain, closed) = walk(e, &mut used);
        out.push(to_polyline(grid, chain, closed));
    }
    let starts: Vec<EdgeId> = incident.keys().copied().collect();
    for e in starts {
        if incident[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let (chain, closed) = walk(e, &mut used);
        out.push(to_polyline(grid, chain, closed));
    }
    out
}

fn to_polyline(grid: &GridSpec, chain: Vec<EdgeId>, closed: bool) -> Polyline {
    Polyline {
        points: chain.into_iter().map(|e| midpoint(grid, e)).collect(),
        closed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::grid::CellOutcome;

    fn map_from(grid: GridSpec, f: impl Fn(Point) -> bool) -> CaptureMap {
        let outcomes = (0..grid.len())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                if f(grid.point(i, j)) {
                    CellOutcome::Capture { time: 1.0 }
                } else {
                    CellOutcome::Breach { time: 1.0 }
                }
            })
            .collect();
        CaptureMap { grid, outcomes }
    }

    #[test]
    fn single_class_maps_have_no_boundary() {
        let g = GridSpec::square(5.0, 11);
        assert!(extract_boundary(&map_from(g, |_| true)).is_empty());
        assert!(extract_boundary(&map_from(g, |_| false)).is_empty());
    }

    #[test]
    fn interior_disc_gives_one_closed_loop_around_centre() {
        let g = GridSpec::square(5.0, 21);
        let map = map_from(g, |p| p.norm() > 2.2);
        let b = extract_boundary(&map);
        assert_eq!(b.len(), 1);
        assert!(b[0].closed);
        assert!(b[0].contains(Point::ORIGIN));
        assert!(!b[0].contains(Point::new(4.0, 4.0)));
        // vertices lie between cells of differing class
        for p in &b[0].points {
            assert!((p.norm() - 2.2).abs() < 0.6, "{p:?}");
        }
        let area = b[0].area();
        assert!(
            (area - std::f64::consts::PI * 2.2 * 2.2).abs() < 3.0,
            "{area}"
        );
    }

    #[test]
    fn half_plane_gives_one_open_chain() {
        let g = GridSpec::square(5.0, 11);
        let b = extract_boundary(&map_from(g, |p| p.x > 0.2));
        assert_eq!(b.len(), 1);
        assert!(!b[0].closed);
        assert_eq!(b[0].points.len(), 11);
        assert!(b[0].points.iter().all(|p| (p.x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn saddle_separates_non_capture_corners() {
        let g = GridSpec::square(1.0, 2);
        // bl and tr breach, br and tl capture
        let map = CaptureMap {
            grid: g,
            outcomes: vec![
                CellOutcome::Breach { time: 0.0 },
                CellOutcome::Capture { time: 0.0 },
                CellOutcome::Capture { time: 0.0 },
                CellOutcome::Breach { time: 0.0 },
            ],
        };
        let b = extract_boundary(&map);
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|p| !p.closed && p.points.len() == 2));
    }

    #[test]
    fn two_blobs_deterministic() {
        let g = GridSpec::square(6.0, 25);
        let f = |p: Point| {
            p.distance(Point::new(-3.0, 0.0)) > 1.6 && p.distance(Point::new(3.0, 0.0)) > 1.6
        };
        let a = extract_boundary(&map_from(g, f));
        let b = extract_boundary(&map_from(g, f));
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|p| p.closed));
    }
}
