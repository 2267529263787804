use nalgebra::DMatrix;

use super::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{fro_norm, DenseMatrix, C64};

/// Finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup("table must be square with one row per label".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidGroup("entry out of range".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
            inverses.push(inv);
        }
        Ok(Self { labels, table, identity, inverses })
    }

    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|k| k.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(labels, table).expect("cyclic table is a group")
    }

    /// Direct product; element (a, b) has index a·|H| + b.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let mut labels = Vec::with_capacity(n * m);
        let mut table = vec![vec![0; n * m]; n * m];
        for a in 0..n {
            for b in 0..m {
                labels.push(format!("({},{})", g.labels[a], h.labels[b]));
                for c in 0..n {
                    for d in 0..m {
                        table[a * m + b][c * m + d] = g.mul(a, c) * m + h.mul(b, d);
                    }
                }
            }
        }
        Self::new(labels, table).expect("product of groups is a group")
    }

    /// Parses "Z<n>" or products such as "Z2xZ2".
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out: Option<FiniteGroup> = None;
        for part in spec.split(['x', 'X', '*']) {
            let n: usize = part
                .trim()
                .strip_prefix('Z')
                .and_then(|s| s.parse().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::InvalidGroup(format!("cannot parse group '{spec}'")))?;
            let z = FiniteGroup::cyclic(n);
            out = Some(match out {
                None => z,
                Some(g) => FiniteGroup::product(&g, &z),
            });
        }
        out.ok_or_else(|| Error::InvalidGroup(format!("cannot parse group '{spec}'")))
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// A *-automorphism, stored in the cheapest available form.
#[derive(Debug, Clone)]
pub enum Automorphism {
    /// x ↦ P x Pᵀ where P sends basis vector i to perm[i].
    Permutation(Vec<usize>),
    /// x ↦ W x W*.
    Unitary(DenseMatrix),
    /// Linear map on the coordinates of the algebra's orthonormal basis.
    Coordinates(DMatrix<C64>),
}

impl Automorphism {
    pub fn apply(&self, algebra: &StarAlgebra, x: &DenseMatrix) -> DenseMatrix {
        match self {
            Automorphism::Permutation(perm) => {
                let n = x.nrows();
                let mut out = DenseMatrix::zeros(n, n);
                for j in 0..n {
                    for i in 0..n {
                        out[(perm[i], perm[j])] = x[(i, j)];
                    }
                }
                out
            }
            Automorphism::Unitary(w) => w * x * w.adjoint(),
            Automorphism::Coordinates(m) => algebra.element(&(m * algebra.coords(x))),
        }
    }

    /// Implementing unitary W with x ↦ W x W*, when the map is spatial.
    pub fn as_unitary(&self) -> Option<DenseMatrix> {
        match self {
            Automorphism::Permutation(perm) => {
                let n = perm.len();
                let mut w = DenseMatrix::zeros(n, n);
                for (i, &p) in perm.iter().enumerate() {
                    w[(p, i)] = C64::from(1.0);
                }
                Some(w)
            }
            Automorphism::Unitary(w) => Some(w.clone()),
            Automorphism::Coordinates(_) => None,
        }
    }

    pub fn identity_permutation(n: usize) -> Self {
        Automorphism::Permutation((0..n).collect())
    }
}

/// Action of a finite group on a star algebra.
#[derive(Debug, Clone)]
pub struct GroupAction {
    group: FiniteGroup,
    algebra: StarAlgebra,
    maps: Vec<Automorphism>,
}

/// Worst defects found by `GroupAction::validate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDefects {
    pub invariance: f64,
    pub multiplicative: f64,
    pub star: f64,
    pub composition: f64,
}

impl ActionDefects {
    pub fn max(&self) -> f64 {
        self.invariance.max(self.multiplicative).max(self.star).max(self.composition)
    }
}

impl GroupAction {
    pub fn new(group: FiniteGroup, algebra: StarAlgebra, maps: Vec<Automorphism>) -> Result<Self> {
        if maps.len() != group.order() {
            return Err(Error::DimensionMismatch(format!("{} maps for a group of order {}", maps.len(), group.order())));
        }
        for m in &maps {
            let ok = match m {
                Automorphism::Permutation(p) => p.len() == algebra.ambient_dim(),
                Automorphism::Unitary(w) => w.nrows() == algebra.ambient_dim() && w.ncols() == algebra.ambient_dim(),
                Automorphism::Coordinates(c) => c.nrows() == algebra.dim() && c.ncols() == algebra.dim(),
            };
            if !ok {
                return Err(Error::DimensionMismatch("automorphism does not match the algebra".into()));
            }
        }
        Ok(Self { group, algebra, maps })
    }

    /// Builds and validates; fails with NotAutomorphism when a defect exceeds 1e-9.
    pub fn new_checked(group: FiniteGroup, algebra: StarAlgebra, maps: Vec<Automorphism>) -> Result<Self> {
        let action = Self::new(group, algebra, maps)?;
        let defect = action.validate().max();
        if defect > 1e-9 {
            return Err(Error::NotAutomorphism { defect });
        }
        Ok(action)
    }

    pub fn trivial(group: FiniteGroup, algebra: StarAlgebra) -> Self {
        let n = algebra.ambient_dim();
        let maps = (0..group.order()).map(|_| Automorphism::identity_permutation(n)).collect();
        Self { group, algebra, maps }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn algebra(&self) -> &StarAlgebra {
        &self.algebra
    }

    pub fn maps(&self) -> &[Automorphism] {
        &self.maps
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn apply(&self, g: usize, x: &DenseMatrix) -> DenseMatrix {
        self.maps[g].apply(&self.algebra, x)
    }

    /// Matrix of α_g on the algebra's orthonormal coordinates.
    pub fn coordinate_matrix(&self, g: usize) -> DMatrix<C64> {
        if let Automorphism::Coordinates(m) = &self.maps[g] {
            return m.clone();
        }
        let n = self.algebra.dim();
        let mut out = DMatrix::zeros(n, n);
        for (k, b) in self.algebra.basis().iter().enumerate() {
            out.set_column(k, &self.algebra.coords(&self.apply(g, b)));
        }
        out
    }

    /// (1/|G|) Σ_g α_g(x).
    pub fn average(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut acc = DenseMatrix::zeros(x.nrows(), x.ncols());
        for g in 0..self.order() {
            acc += self.apply(g, x);
        }
        acc / C64::from(self.order() as f64)
    }

    /// Σ_g α_g(x).
    pub fn sum_orbit(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut acc = DenseMatrix::zeros(x.nrows(), x.ncols());
        for g in 0..self.order() {
            acc += self.apply(g, x);
        }
        acc
    }

    pub fn validate(&self) -> ActionDefects {
        let basis = self.algebra.basis();
        let mut d = ActionDefects { invariance: 0.0, multiplicative: 0.0, star: 0.0, composition: 0.0 };
        let images: Vec<Vec<DenseMatrix>> = (0..self.order()).map(|g| basis.iter().map(|b| self.apply(g, b)).collect()).collect();
        for g in 0..self.order() {
            let implemented = !matches!(self.maps[g], Automorphism::Coordinates(_));
            for (i, a) in basis.iter().enumerate() {
                let ga = &images[g][i];
                d.invariance = d.invariance.max(self.algebra.membership_residual(ga));
                if !implemented {
                    d.star = d.star.max(fro_norm(&(self.apply(g, &a.adjoint()) - ga.adjoint())));
                    for (j, b) in basis.iter().enumerate() {
                        let lhs = self.apply(g, &(a * b));
                        d.multiplicative = d.multiplicative.max(fro_norm(&(lhs - ga * &images[g][j])));
                    }
                }
                for h in 0..self.order() {
                    let gh = self.group.mul(g, h);
                    let twice = self.apply(g, &images[h][i]);
                    d.composition = d.composition.max(fro_norm(&(twice - &images[gh][i])));
                }
            }
            if let Automorphism::Unitary(w) = &self.maps[g] {
                d.star = d.star.max(crate::linalg::unitary_defect(w));
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::algebra::{diagonal_algebra, full_matrix_algebra};
    use crate::linalg::{diag_real, from_real};

    #[test]
    fn cyclic_and_product() {
        let z4 = FiniteGroup::cyclic(4);
        assert_eq!(z4.inverse(1), 3);
        let v4 = FiniteGroup::parse("Z2xZ2").unwrap();
        assert_eq!(v4.order(), 4);
        assert!((0..4).all(|g| v4.mul(g, g) == v4.identity()));
        assert!(FiniteGroup::parse("Q8").is_err());
    }

    #[test]
    fn rejects_non_group() {
        let table = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::new(vec!["e".into(), "a".into()], table).is_err());
    }

    #[test]
    fn swap_action_is_valid() {
        let alg = diagonal_algebra(2);
        let action = GroupAction::new_checked(
            FiniteGroup::cyclic(2),
            alg,
            vec![Automorphism::identity_permutation(2), Automorphism::Permutation(vec![1, 0])],
        )
        .unwrap();
        let x = action.apply(1, &diag_real(&[1.0, 5.0]));
        assert!(fro_norm(&(x - diag_real(&[5.0, 1.0]))) < 1e-15);
    }

    #[test]
    fn coordinate_automorphism_roundtrip() {
        let alg = full_matrix_algebra(2);
        let w = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let action = GroupAction::new(
            FiniteGroup::cyclic(2),
            alg.clone(),
            vec![Automorphism::identity_permutation(2), Automorphism::Unitary(w)],
        )
        .unwrap();
        let coords = action.coordinate_matrix(1);
        let as_coords = GroupAction::new_checked(
            FiniteGroup::cyclic(2),
            alg,
            vec![Automorphism::Coordinates(action.coordinate_matrix(0)), Automorphism::Coordinates(coords)],
        )
        .unwrap();
        assert!(as_coords.validate().max() < 1e-12);
    }

    #[test]
    fn broken_composition_detected() {
        // an order-3 permutation cannot represent Z_2
        let alg = diagonal_algebra(3);
        let result = GroupAction::new_checked(
            FiniteGroup::cyclic(2),
            alg,
            vec![Automorphism::identity_permutation(3), Automorphism::Permutation(vec![1, 2, 0])],
        );
        assert!(matches!(result, Err(Error::NotAutomorphism { .. })));
    }
}
