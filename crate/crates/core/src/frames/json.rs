//! JSON document for Galois frames: base algebra and action documents, plus the frame
//! families as coordinate lists in the orthonormal bases of base and cover.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{GaloisFrame, ModuleForm};
use crate::action::json::{ActionJson, AlgebraJson};
use crate::action::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{c, DenseMatrix};

/// Largest distance from its algebra an element may have and still be stored by coordinates.
const MEMBERSHIP_TOL: f64 = 1e-10;

type CoordsJson = Vec<[f64; 2]>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    base: AlgebraJson,
    action: ActionJson,
    form: ModuleForm,
    e_coords: Vec<CoordsJson>,
    xi_coords: Vec<CoordsJson>,
}

fn to_coords(alg: &StarAlgebra, m: &DenseMatrix, what: &str) -> Result<CoordsJson> {
    let residual = alg.membership_residual(m);
    if residual > MEMBERSHIP_TOL * m.norm().max(1.0) {
        return Err(Error::InvalidInput(format!("{what} lies outside its algebra (distance {residual:.2e})")));
    }
    Ok(alg.coords(m).iter().map(|z| [z.re, z.im]).collect())
}

fn from_coords(alg: &StarAlgebra, coords: &CoordsJson, what: &str) -> Result<DenseMatrix> {
    if coords.len() != alg.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} coordinates, algebra dimension {}",
            coords.len(),
            alg.dim()
        )));
    }
    Ok(alg.element(&DVector::from_iterator(coords.len(), coords.iter().map(|z| c(z[0], z[1])))))
}

impl GaloisFrame {
    /// Fails when some e_i is not in the base or some ξ_i is not in the cover.
    pub fn to_json(&self) -> Result<String> {
        let doc = FrameJson {
            base: AlgebraJson::from(&self.base),
            action: ActionJson::from(&self.action),
            form: self.form,
            e_coords: self.e_list.iter().map(|e| to_coords(&self.base, e, "e_i")).collect::<Result<_>>()?,
            xi_coords: self.xi_list.iter().map(|x| to_coords(self.cover(), x, "ξ_i")).collect::<Result<_>>()?,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FrameJson = serde_json::from_str(text)?;
        let base = doc.base.build()?;
        let action = doc.action.build()?;
        let e_list = doc.e_coords.iter().map(|x| from_coords(&base, x, "e_i")).collect::<Result<_>>()?;
        let xi_list = doc.xi_coords.iter().map(|x| from_coords(action.algebra(), x, "ξ_i")).collect::<Result<_>>()?;
        GaloisFrame::new(base, action, e_list, xi_list, doc.form)
    }
}
