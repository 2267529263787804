//! JSON documents for algebras and actions. Matrices are row-major nested arrays of [re, im]
//! pairs; groups are stored as labels plus multiplication table.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Automorphism, FiniteGroup, GroupAction, StarAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{c, C64};

pub(crate) type MatrixJson = Vec<Vec<[f64; 2]>>;

pub(crate) fn matrix_to_json(m: &DMatrix<C64>) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub(crate) fn matrix_from_json(rows: &MatrixJson) -> Result<DMatrix<C64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct AlgebraJson {
    ambient_dim: usize,
    basis: Vec<MatrixJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupJson {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MapJson {
    Permutation(Vec<usize>),
    Unitary(MatrixJson),
    Coordinates(MatrixJson),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ActionJson {
    group: GroupJson,
    algebra: AlgebraJson,
    maps: Vec<MapJson>,
}

impl From<&StarAlgebra> for AlgebraJson {
    fn from(a: &StarAlgebra) -> Self {
        Self { ambient_dim: a.ambient_dim(), basis: a.basis().iter().map(matrix_to_json).collect() }
    }
}

impl AlgebraJson {
    pub(crate) fn build(&self) -> Result<StarAlgebra> {
        let basis = self.basis.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        StarAlgebra::from_orthonormal(self.ambient_dim, basis)
    }
}

impl StarAlgebra {
    /// The orthonormal basis is stored as is, so coordinates survive a round trip.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AlgebraJson::from(self)).expect("algebra is plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<AlgebraJson>(text)?.build()
    }
}

impl From<&GroupAction> for ActionJson {
    fn from(action: &GroupAction) -> Self {
        let group = action.group();
        Self {
            group: GroupJson { labels: group.labels().to_vec(), table: group.table().to_vec() },
            algebra: AlgebraJson::from(action.algebra()),
            maps: action
                .maps()
                .iter()
                .map(|m| match m {
                    Automorphism::Permutation(p) => MapJson::Permutation(p.clone()),
                    Automorphism::Unitary(w) => MapJson::Unitary(matrix_to_json(w)),
                    Automorphism::Coordinates(t) => MapJson::Coordinates(matrix_to_json(t)),
                })
                .collect(),
        }
    }
}

impl ActionJson {
    /// Rebuilds the action and validates it as in `new_checked`.
    pub(crate) fn build(&self) -> Result<GroupAction> {
        let group = FiniteGroup::new(self.group.labels.clone(), self.group.table.clone())?;
        let algebra = self.algebra.build()?;
        let maps = self
            .maps
            .iter()
            .map(|m| {
                Ok(match m {
                    MapJson::Permutation(p) => Automorphism::Permutation(p.clone()),
                    MapJson::Unitary(w) => Automorphism::Unitary(matrix_from_json(w)?),
                    MapJson::Coordinates(t) => Automorphism::Coordinates(matrix_from_json(t)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GroupAction::new_checked(group, algebra, maps)
    }
}

impl GroupAction {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ActionJson::from(self)).expect("action is plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ActionJson>(text)?.build()
    }
}
