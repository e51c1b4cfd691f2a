use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::Mesh;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// A facet belongs to more than two cells.
    OverShared { facet: Vec<usize>, cells: Vec<usize> },
    /// Two facets overlap in a set of positive measure without being the same
    /// facet, as in a hanging node.
    NonMatching { cells: [usize; 2], facets: [Vec<usize>; 2] },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverShared { facet, cells } => write!(f, "facet {facet:?} shared by cells {cells:?}"),
            Violation::NonMatching { cells, facets } => write!(
                f,
                "facet {:?} of cell {} overlaps facet {:?} of cell {}",
                facets[0], cells[0], facets[1], cells[1]
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConformityReport {
    pub conforming: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConformityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conforming {
            return write!(f, "conforming");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

struct BoundaryFacet {
    cell: usize,
    key: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Checks that every facet is shared by at most two cells and that no two
/// facets overlap without coinciding (no hanging nodes).
pub fn conformity_check(mesh: &Mesh) -> ConformityReport {
    let d = mesh.dim();
    let mut owners: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (c, cell) in mesh.cells().iter().enumerate() {
        for skip in 0..=d {
            let mut key: Vec<usize> = cell.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            key.sort_unstable();
            owners.entry(key).or_default().push(c);
        }
    }

    let mut violations = Vec::new();
    let mut boundary = Vec::new();
    let mut keys: Vec<_> = owners.into_iter().collect();
    keys.sort();
    for (key, cells) in keys {
        match cells.len() {
            1 => {
                let pts: Vec<&[f64]> = key.iter().map(|&v| mesh.vertices()[v].as_slice()).collect();
                let lo = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..d).map(|k| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
                boundary.push(BoundaryFacet { cell: cells[0], key, lo, hi });
            }
            2 => {}
            _ => violations.push(Violation::OverShared { facet: key, cells }),
        }
    }

    boundary.sort_by(|a, b| a.lo[0].total_cmp(&b.lo[0]));
    for (i, f) in boundary.iter().enumerate() {
        let slack = TOL * (0..d).map(|k| f.hi[k] - f.lo[k]).fold(0.0, f64::max);
        for g in &boundary[i + 1..] {
            if g.lo[0] > f.hi[0] + slack {
                break;
            }
            if (1..d).any(|k| g.lo[k] > f.hi[k] + slack || g.hi[k] < f.lo[k] - slack) {
                continue;
            }
            if overlap(mesh, &f.key, &g.key) {
                violations.push(Violation::NonMatching { cells: [f.cell, g.cell], facets: [f.key.clone(), g.key.clone()] });
            }
        }
    }
    ConformityReport { conforming: violations.is_empty(), violations }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether two facets are coplanar and intersect in a set of positive
/// `(d−1)`-measure.
fn overlap(mesh: &Mesh, f: &[usize], g: &[usize]) -> bool {
    let p = |v: usize| mesh.vertices()[v].as_slice();
    match mesh.dim() {
        2 => {
            let (a, b) = (p(f[0]), p(f[1]));
            let dir = sub(b, a);
            let len = dot(&dir, &dir).sqrt();
            let normal = [-dir[1] / len, dir[0] / len];
            if g.iter().any(|&v| dot(&sub(p(v), a), &normal).abs() > TOL * len) {
                return false;
            }
            let t: Vec<f64> = g.iter().map(|&v| dot(&sub(p(v), a), &dir) / len).collect();
            let (s0, s1) = (t[0].min(t[1]), t[0].max(t[1]));
            let common = s1.min(len) - s0.max(0.0);
            common > TOL * len.min(s1 - s0)
        }
        _ => {
            let origin = p(f[0]);
            let e1 = sub(p(f[1]), origin);
            let e2 = sub(p(f[2]), origin);
            let n = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
            let area2 = dot(&n, &n).sqrt();
            let n: Vec<f64> = n.iter().map(|x| x / area2).collect();
            let scale = dot(&e1, &e1).sqrt().max(dot(&e2, &e2).sqrt());
            if g.iter().any(|&v| dot(&sub(p(v), origin), &n).abs() > TOL * scale) {
                return false;
            }
            let u: Vec<f64> = e1.iter().map(|x| x / dot(&e1, &e1).sqrt()).collect();
            let w = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
            let project = |v: usize| {
                let r = sub(p(v), origin);
                [dot(&r, &u), dot(&r, &w)]
            };
            let tf: Vec<[f64; 2]> = f.iter().map(|&v| project(v)).collect();
            let tg: Vec<[f64; 2]> = g.iter().map(|&v| project(v)).collect();
            let common = polygon_area(&clip(&tg, &tf));
            common > TOL * polygon_area(&tf).min(polygon_area(&tg))
        }
    }
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum::<f64>().abs()
}

/// Sutherland–Hodgman clipping of `subject` against the convex polygon `clipper`.
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let orientation = {
        let (a, b, c) = (clipper[0], clipper[1], clipper[2]);
        ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).signum()
    };
    let mut out = subject.to_vec();
    for i in 0..clipper.len() {
        let (a, b) = (clipper[i], clipper[(i + 1) % clipper.len()]);
        let side = |p: [f64; 2]| orientation * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]));
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (cur, next) = (input[j], input[(j + 1) % input.len()]);
            let (sc, sn) = (side(cur), side(next));
            if sc >= 0.0 {
                out.push(cur);
            }
            if (sc >= 0.0) != (sn >= 0.0) {
                let t = sc / (sc - sn);
                out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}
