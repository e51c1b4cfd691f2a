use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::Mesh;
use crate::{Error, Result};

/// Coarse mesh refined by `uniform-ref`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// Unit right triangle.
    Triangle,
    /// Unit square split along its diagonal.
    Square,
    /// Unit tetrahedron.
    Tetra,
    /// Unit cube in the 6-tetrahedra Kuhn split.
    Cube,
}

impl Seed {
    fn name(self) -> &'static str {
        match self {
            Seed::Triangle => "triangle",
            Seed::Square => "square",
            Seed::Tetra => "tetra",
            Seed::Cube => "cube",
        }
    }

    pub fn mesh(self) -> Mesh {
        match self {
            Seed::Triangle => Mesh::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0, 1, 2]]),
            Seed::Square => strip(1, 1),
            Seed::Tetra => Mesh::new(
                3,
                vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                vec![vec![0, 1, 2, 3]],
            ),
            Seed::Cube => kuhn_box(1, 1, 1),
        }
        .expect("seed meshes are valid")
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Seed::Triangle, Seed::Square, Seed::Tetra, Seed::Cube]
            .into_iter()
            .find(|seed| seed.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown seed mesh '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Single tetrahedra `(0,0,0), (s,0,0), (s/2,s^ε,0), (0,0,s)`.
    RemarkTetra { s: Vec<f64>, eps: f64 },
    /// Unit square in right triangles with spacings `1/n` and `1/round(n^γ)`.
    AnisoStrip2d { gamma: f64, n: Vec<usize> },
    /// Unit cube in Kuhn tetrahedra with spacings `1/n`, `1/round(n^γ₂)`,
    /// `1/round(n^γ₃)`.
    AnisoBox3d { gamma2: f64, gamma3: f64, n: Vec<usize> },
    /// Uniform refinement of a seed mesh, 4 children per triangle and 8 per
    /// tetrahedron.
    UniformRef { seed: Seed, levels: Vec<u32> },
}

/// A mesh family: generator kind and parameter schedule, written as
/// `kind` or `kind:key=v1,v2;key=v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
}

fn strictly_monotone<T: PartialOrd>(values: &[T], increasing: bool) -> bool {
    values.windows(2).all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] })
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let spec = FamilySpec { kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            FamilyKind::RemarkTetra { .. } => "remark-tetra",
            FamilyKind::AnisoStrip2d { .. } => "aniso-strip-2d",
            FamilyKind::AnisoBox3d { .. } => "aniso-box-3d",
            FamilyKind::UniformRef { .. } => "uniform-ref",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            FamilyKind::AnisoStrip2d { .. } => 2,
            FamilyKind::UniformRef { seed: Seed::Triangle | Seed::Square, .. } => 2,
            _ => 3,
        }
    }

    pub fn levels(&self) -> usize {
        match &self.kind {
            FamilyKind::RemarkTetra { s, .. } => s.len(),
            FamilyKind::AnisoStrip2d { n, .. } | FamilyKind::AnisoBox3d { n, .. } => n.len(),
            FamilyKind::UniformRef { levels, .. } => levels.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.levels() == 0 {
            return bad(format!("{}: empty schedule", self.id()));
        }
        match &self.kind {
            FamilyKind::RemarkTetra { s, eps } => {
                if let Some(v) = s.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                    return bad(format!("remark-tetra: s = {v} outside (0, 1)"));
                }
                if !(*eps > 1.0 && *eps < 2.0) {
                    return bad(format!("remark-tetra: eps = {eps} outside (1, 2)"));
                }
                if !strictly_monotone(s, false) {
                    return bad("remark-tetra: s must be strictly decreasing".into());
                }
            }
            FamilyKind::AnisoStrip2d { gamma, n } => {
                if !(*gamma >= 1.0) {
                    return bad(format!("aniso-strip-2d: gamma = {gamma} < 1"));
                }
                check_counts(n)?;
            }
            FamilyKind::AnisoBox3d { gamma2, gamma3, n } => {
                if !(*gamma2 >= 1.0 && *gamma3 >= 1.0) {
                    return bad(format!("aniso-box-3d: gammas ({gamma2}, {gamma3}) must be >= 1"));
                }
                check_counts(n)?;
            }
            FamilyKind::UniformRef { levels, .. } => {
                if !strictly_monotone(levels, true) {
                    return bad("uniform-ref: levels must be strictly increasing".into());
                }
                if levels.iter().any(|&l| l > 8) {
                    return bad("uniform-ref: levels above 8 are not supported".into());
                }
            }
        }
        Ok(())
    }
}

fn check_counts(n: &[usize]) -> Result<()> {
    if n.contains(&0) {
        return Err(Error::InvalidParameter("subdivision counts must be positive".into()));
    }
    if !strictly_monotone(n, true) {
        return Err(Error::InvalidParameter("subdivision counts must be strictly increasing".into()));
    }
    Ok(())
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad value '{v}' for '{key}'"))))
        .collect()
}

fn single<T: FromStr>(key: &str, value: &str) -> Result<T> {
    let mut values = list(key, value)?;
    if values.len() != 1 {
        return Err(Error::InvalidParameter(format!("'{key}' takes a single value")));
    }
    Ok(values.remove(0))
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
        let mut params: HashMap<&str, &str> = HashMap::new();
        for pair in rest.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got '{pair}'")))?;
            if params.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::InvalidParameter(format!("repeated key '{}'", k.trim())));
            }
        }
        let mut take = |key: &str| params.remove(key);
        let kind = match name {
            "remark-tetra" => FamilyKind::RemarkTetra {
                s: take("s").map(|v| list("s", v)).transpose()?.unwrap_or_else(|| (4..=8).map(|j| 0.5f64.powi(j)).collect()),
                eps: take("eps").map(|v| single("eps", v)).transpose()?.unwrap_or(1.5),
            },
            "aniso-strip-2d" => {
                let gamma: f64 = take("gamma").map(|v| single("gamma", v)).transpose()?.unwrap_or(1.0);
                let n = take("n").map(|v| list("n", v)).transpose()?.unwrap_or_else(|| default_counts(gamma));
                FamilyKind::AnisoStrip2d { gamma, n }
            }
            "aniso-box-3d" => {
                let gamma2: f64 = take("gamma2").map(|v| single("gamma2", v)).transpose()?.unwrap_or(1.0);
                let gamma3 = take("gamma3").map(|v| single("gamma3", v)).transpose()?.unwrap_or(1.0);
                let n = take("n").map(|v| list("n", v)).transpose()?.unwrap_or_else(|| {
                    // n = 1 is isotropic whatever the exponents
                    if gamma2.max(gamma3) > 1.0 {
                        vec![2, 3, 4, 5]
                    } else {
                        vec![1, 2, 4, 8]
                    }
                });
                FamilyKind::AnisoBox3d { gamma2, gamma3, n }
            }
            "uniform-ref" => FamilyKind::UniformRef {
                seed: take("seed").map(str::parse).transpose()?.unwrap_or(Seed::Triangle),
                levels: take("levels").map(|v| list("levels", v)).transpose()?.unwrap_or_else(|| (1..=5).collect()),
            },
            other => return Err(Error::InvalidParameter(format!("unknown mesh family '{other}'"))),
        };
        if let Some(key) = params.keys().next() {
            return Err(Error::InvalidParameter(format!("unknown key '{key}' for family '{name}'")));
        }
        FamilySpec::new(kind)
    }
}

fn default_counts(gamma: f64) -> Vec<usize> {
    if gamma > 1.0 {
        vec![2, 3, 4, 6, 8]
    } else {
        vec![2, 4, 8, 16, 32]
    }
}

fn join<T: fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::RemarkTetra { s, eps } => write!(f, "remark-tetra:s={};eps={eps}", join(s)),
            FamilyKind::AnisoStrip2d { gamma, n } => write!(f, "aniso-strip-2d:gamma={gamma};n={}", join(n)),
            FamilyKind::AnisoBox3d { gamma2, gamma3, n } => {
                write!(f, "aniso-box-3d:gamma2={gamma2};gamma3={gamma3};n={}", join(n))
            }
            FamilyKind::UniformRef { seed, levels } => write!(f, "uniform-ref:seed={};levels={}", seed.name(), join(levels)),
        }
    }
}

fn anisotropic_count(n: usize, gamma: f64) -> usize {
    ((n as f64).powf(gamma).round() as usize).max(1)
}

fn strip(nx: usize, ny: usize) -> Result<Mesh> {
    let index = |i: usize, j: usize| j * (nx + 1) + i;
    let vertices = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| vec![i as f64 / nx as f64, j as f64 / ny as f64]))
        .collect();
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    Mesh::new(2, vertices, cells)
}

const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn kuhn_box(nx: usize, ny: usize, nz: usize) -> Result<Mesh> {
    let index = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(vec![i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64]);
            }
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in KUHN {
                    let mut corner = [i, j, k];
                    let mut cell = vec![index(corner[0], corner[1], corner[2])];
                    for axis in perm {
                        corner[axis] += 1;
                        cell.push(index(corner[0], corner[1], corner[2]));
                    }
                    cells.push(cell);
                }
            }
        }
    }
    Mesh::new(3, vertices, cells)
}

/// One level of uniform refinement: 4 congruent children per triangle,
/// 8 children per tetrahedron in Bey's ordering.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec<f64>>| {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let p = vertices[a].iter().zip(&vertices[b]).map(|(x, y)| 0.5 * (x + y)).collect();
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(mesh.n_cells() * if mesh.dim() == 2 { 4 } else { 8 });
    for cell in mesh.cells() {
        if mesh.dim() == 2 {
            let [x0, x1, x2] = [cell[0], cell[1], cell[2]];
            let x01 = mid(x0, x1, &mut vertices);
            let x02 = mid(x0, x2, &mut vertices);
            let x12 = mid(x1, x2, &mut vertices);
            cells.extend([vec![x0, x01, x02], vec![x01, x1, x12], vec![x02, x12, x2], vec![x01, x12, x02]]);
        } else {
            let [x0, x1, x2, x3] = [cell[0], cell[1], cell[2], cell[3]];
            let x01 = mid(x0, x1, &mut vertices);
            let x02 = mid(x0, x2, &mut vertices);
            let x03 = mid(x0, x3, &mut vertices);
            let x12 = mid(x1, x2, &mut vertices);
            let x13 = mid(x1, x3, &mut vertices);
            let x23 = mid(x2, x3, &mut vertices);
            cells.extend([
                vec![x0, x01, x02, x03],
                vec![x01, x1, x12, x13],
                vec![x02, x12, x2, x23],
                vec![x03, x13, x23, x3],
                vec![x01, x02, x03, x13],
                vec![x01, x02, x12, x13],
                vec![x02, x03, x13, x23],
                vec![x02, x12, x13, x23],
            ]);
        }
    }
    Mesh::new(mesh.dim(), vertices, cells)
}

/// The meshes of a family, ordered by decreasing `h`.
pub fn generate_family(spec: &FamilySpec) -> Result<Vec<Mesh>> {
    spec.validate()?;
    match &spec.kind {
        FamilyKind::RemarkTetra { s, eps } => s
            .iter()
            .map(|&s| {
                let v = vec![vec![0.0, 0.0, 0.0], vec![s, 0.0, 0.0], vec![s / 2.0, s.powf(*eps), 0.0], vec![0.0, 0.0, s]];
                Mesh::new(3, v, vec![vec![0, 1, 2, 3]])
            })
            .collect(),
        FamilyKind::AnisoStrip2d { gamma, n } => n.iter().map(|&n| strip(n, anisotropic_count(n, *gamma))).collect(),
        FamilyKind::AnisoBox3d { gamma2, gamma3, n } => n
            .iter()
            .map(|&n| kuhn_box(n, anisotropic_count(n, *gamma2), anisotropic_count(n, *gamma3)))
            .collect(),
        FamilyKind::UniformRef { seed, levels } => {
            let mut current = seed.mesh();
            let mut level = 0;
            let mut out = Vec::with_capacity(levels.len());
            for &target in levels {
                while level < target {
                    current = refine_uniform(&current)?;
                    level += 1;
                }
                out.push(current.clone());
            }
            Ok(out)
        }
    }
}
