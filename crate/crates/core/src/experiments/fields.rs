use std::f64::consts::PI;
use std::sync::Arc;

use crate::interp::remark_field;
use crate::poly::{Components, Factor1D, MultiIndex, MultiPoly, Separable, SmoothField};
use crate::{Error, Result};

/// Built-in field identifiers. Scalar fields first, then vector fields.
pub const SCALAR_FIELDS: [&str; 4] = ["remark-phi", "sinsin", "exp", "cubic"];
pub const VECTOR_FIELDS: [&str; 3] = ["sincos-vec", "exp-vec", "remark-grad"];

fn sin_product(dim: usize) -> Separable {
    Separable::product(vec![Factor1D::sin(PI); dim])
}

/// Scalar field by id in dimension `dim`:
///
/// * `remark-phi`: `x² + ¼y² + z²` (3D only)
/// * `sinsin`: `Π sin(π x_i)`
/// * `exp`: `exp(x + y/2 + z/4)`
/// * `cubic`: `x³ + x y² (+ y z²)`
pub fn scalar_field(id: &str, dim: usize) -> Result<Arc<dyn SmoothField>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dimension {dim} not supported")));
    }
    Ok(match id {
        "remark-phi" if dim == 3 => Arc::new(remark_field()),
        "remark-phi" => return Err(Error::InvalidParameter("remark-phi is a 3D field".into())),
        "sinsin" => Arc::new(sin_product(dim)),
        "exp" => Arc::new(Separable::product((0..dim).map(|i| Factor1D::Exp { rate: 0.5f64.powi(i as i32) }).collect())),
        "cubic" => {
            let mut p = MultiPoly::zero(dim);
            p.add_term(MultiIndex::new(&[3, 0, 0][..dim]), 1.0);
            p.add_term(MultiIndex::new(&[1, 2, 0][..dim]), 1.0);
            if dim == 3 {
                p.add_term(MultiIndex::new(&[0, 1, 2]), 1.0);
            }
            Arc::new(p)
        }
        _ => return Err(Error::InvalidParameter(format!("unknown scalar field '{id}'"))),
    })
}

/// Vector field by id in dimension `dim`:
///
/// * `sincos-vec`: component `i` is `sin(π x_i) Π_{j≠i} cos(π x_j)`
/// * `exp-vec`: component `i` is `exp(x_i − x_{i+1})` (cyclic)
/// * `remark-grad`: `∇(x² + ¼y² (+ z²))`
pub fn vector_field(id: &str, dim: usize) -> Result<Arc<dyn SmoothField>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dimension {dim} not supported")));
    }
    let comps: Vec<Arc<dyn SmoothField>> = match id {
        "sincos-vec" => (0..dim)
            .map(|i| {
                let factors = (0..dim).map(|j| if i == j { Factor1D::sin(PI) } else { Factor1D::cos(PI) }).collect();
                Arc::new(Separable::product(factors)) as Arc<dyn SmoothField>
            })
            .collect(),
        "exp-vec" => (0..dim)
            .map(|i| {
                let factors = (0..dim)
                    .map(|j| {
                        if j == i {
                            Factor1D::Exp { rate: 1.0 }
                        } else if j == (i + 1) % dim {
                            Factor1D::Exp { rate: -1.0 }
                        } else {
                            Factor1D::One
                        }
                    })
                    .collect();
                Arc::new(Separable::product(factors)) as Arc<dyn SmoothField>
            })
            .collect(),
        "remark-grad" => {
            let weights = [2.0, 0.5, 2.0];
            (0..dim)
                .map(|i| {
                    let mut a = vec![0.0; dim];
                    a[i] = weights[i];
                    Arc::new(MultiPoly::affine(0.0, &a)) as Arc<dyn SmoothField>
                })
                .collect()
        }
        _ => return Err(Error::InvalidParameter(format!("unknown vector field '{id}'"))),
    };
    Ok(Arc::new(Components(comps)))
}
