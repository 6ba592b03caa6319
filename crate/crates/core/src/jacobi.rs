//! Jacobi coordinates generated by a binary partition of the particles.

use std::fmt;

use crate::canonical;
use crate::pzw::{Hamiltonian, ParticleSystem};
use crate::symkernel::{Frame, KernelError, LinearMap, OpExpr, ScalarExpr, VecAtom, VecExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JacobiError {
    #[error("partition `{text}`: {msg} at offset {at}")]
    Syntax {
        text: String,
        msg: String,
        at: usize,
    },
    #[error("partition leaves must be a permutation of 1..={n}, got {leaves:?}")]
    Leaves { n: usize, leaves: Vec<usize> },
    #[error("total mass is zero")]
    ZeroMass,
    #[error("singular coordinate matrix")]
    Singular,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Binary tree over particle indices. A pair `[x, y]` defines the relative
/// vector `centroid(x) − centroid(y)`; the order inside the brackets is the
/// sign convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionTree {
    Leaf(usize),
    Pair(Box<PartitionTree>, Box<PartitionTree>),
}

impl fmt::Display for PartitionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionTree::Leaf(i) => write!(f, "{i}"),
            PartitionTree::Pair(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

struct TreeParser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn err(&self, msg: &str) -> JacobiError {
        JacobiError::Syntax {
            text: self.text.to_owned(),
            msg: msg.to_owned(),
            at: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), JacobiError> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn node(&mut self) -> Result<PartitionTree, JacobiError> {
        self.skip_ws();
        match self.bytes.get(self.pos) {
            Some(b'[') => {
                self.pos += 1;
                let a = self.node()?;
                self.expect(b',')?;
                let b = self.node()?;
                self.expect(b']')?;
                Ok(PartitionTree::Pair(Box::new(a), Box::new(b)))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n = self.text[start..self.pos]
                    .parse()
                    .map_err(|_| self.err("bad index"))?;
                Ok(PartitionTree::Leaf(n))
            }
            _ => Err(self.err("expected `[` or a particle index")),
        }
    }
}

impl PartitionTree {
    /// Parses nested pairs such as `[3, [2, 1]]`.
    pub fn parse(text: &str) -> Result<PartitionTree, JacobiError> {
        let mut p = TreeParser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        };
        let t = p.node()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }

    pub fn leaves(&self) -> Vec<usize> {
        match self {
            PartitionTree::Leaf(i) => vec![*i],
            PartitionTree::Pair(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), JacobiError> {
        let leaves = self.leaves();
        let mut sorted = leaves.clone();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            return Err(JacobiError::Leaves { n, leaves });
        }
        Ok(())
    }
}

pub type Matrix = Vec<Vec<ScalarExpr>>;

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        ScalarExpr::one()
                    } else {
                        ScalarExpr::zero()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .fold(ScalarExpr::zero(), |acc, (x, brow)| {
                            acc.add(&x.mul(&brow[j]))
                        })
                })
                .collect()
        })
        .collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let n = a.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Exact Gauss-Jordan inversion.
pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut m: Matrix = a.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        inv.swap(col, p);
        let pivot = m[col][col].clone();
        for j in 0..n {
            m[col][j] = m[col][j].div(&pivot)?;
            inv[col][j] = inv[col][j].div(&pivot)?;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let k = m[r][col].clone();
                for j in 0..n {
                    m[r][j] = m[r][j].sub(&k.mul(&m[col][j]));
                    inv[r][j] = inv[r][j].sub(&k.mul(&inv[col][j]));
                }
            }
        }
    }
    Some(inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToJacobi,
    ToLab,
}

/// Matrices are indexed from 0; row/column `i` is particle or Jacobi index
/// `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiScheme {
    pub tree: PartitionTree,
    /// `r = C R`.
    pub forward: Matrix,
    /// `R = C⁻¹ r`.
    pub backward: Matrix,
    /// `p = D P` with `D = (C⁻¹)ᵀ`.
    pub momentum_forward: Matrix,
    /// `P = D⁻¹ p = Cᵀ p`.
    pub momentum_backward: Matrix,
    /// `M_1` is the total mass, `M_k` the reduced mass of node `k`.
    pub masses: Vec<ScalarExpr>,
    pub lab_masses: Vec<ScalarExpr>,
}

/// Returns (mass, centroid weights) for the subtree and appends relative
/// rows in post-order.
fn walk(
    t: &PartitionTree,
    s: &ParticleSystem,
    rows: &mut Vec<Vec<ScalarExpr>>,
    masses: &mut Vec<ScalarExpr>,
) -> Result<(ScalarExpr, Vec<ScalarExpr>), JacobiError> {
    let n = s.n();
    match t {
        PartitionTree::Leaf(i) => {
            let mut w = vec![ScalarExpr::zero(); n];
            w[i - 1] = ScalarExpr::one();
            Ok((s.mass(*i), w))
        }
        PartitionTree::Pair(a, b) => {
            let (ma, wa) = walk(a, s, rows, masses)?;
            let (mb, wb) = walk(b, s, rows, masses)?;
            let total = ma.add(&mb);
            if total.is_zero() {
                return Err(JacobiError::ZeroMass);
            }
            rows.push(wa.iter().zip(&wb).map(|(x, y)| x.sub(y)).collect());
            masses.push(ma.mul(&mb).div(&total).ok_or(JacobiError::ZeroMass)?);
            let w = wa
                .iter()
                .zip(&wb)
                .map(|(x, y)| x.mul(&ma).add(&y.mul(&mb)).div(&total).expect("nonzero"))
                .collect();
            Ok((total, w))
        }
    }
}

pub fn build_scheme(tree: &PartitionTree, s: &ParticleSystem) -> Result<JacobiScheme, JacobiError> {
    let n = s.n();
    tree.validate(n)?;
    let mut rows = Vec::new();
    let mut masses = Vec::new();
    let (total, com) = walk(tree, s, &mut rows, &mut masses)?;
    let mut backward = vec![com];
    backward.extend(rows);
    let mut all_masses = vec![total];
    all_masses.extend(masses);
    let forward = invert(&backward).ok_or(JacobiError::Singular)?;
    Ok(JacobiScheme {
        tree: tree.clone(),
        momentum_forward: transpose(&backward),
        momentum_backward: transpose(&forward),
        forward,
        backward,
        masses: all_masses,
        lab_masses: (1..=n).map(|a| s.mass(a)).collect(),
    })
}

fn combination(row: &[ScalarExpr], atom: impl Fn(u8) -> VecAtom) -> VecExpr {
    row.iter().enumerate().fold(VecExpr::zero(), |acc, (i, c)| {
        acc.add(&VecExpr::atom(atom(i as u8 + 1)).scale(c))
    })
}

impl JacobiScheme {
    pub fn n(&self) -> usize {
        self.forward.len()
    }

    /// `r_a` in Jacobi vectors.
    pub fn position_row(&self, a: usize) -> VecExpr {
        combination(&self.forward[a - 1], |i| {
            VecAtom::Position(Frame::Jacobi, i)
        })
    }

    /// `p_a` in Jacobi momenta.
    pub fn momentum_row(&self, a: usize) -> VecExpr {
        combination(&self.momentum_forward[a - 1], |i| {
            VecAtom::Momentum(Frame::Jacobi, i)
        })
    }

    /// `R_i` in lab positions.
    pub fn jacobi_position(&self, i: usize) -> VecExpr {
        combination(&self.backward[i - 1], |a| VecAtom::Position(Frame::Lab, a))
    }

    /// `P_i` in lab momenta.
    pub fn jacobi_momentum(&self, i: usize) -> VecExpr {
        combination(&self.momentum_backward[i - 1], |a| {
            VecAtom::Momentum(Frame::Lab, a)
        })
    }

    pub fn map(&self, dir: Direction) -> LinearMap {
        let mut m = LinearMap::new();
        for k in 1..=self.n() {
            let (pos, mom) = match dir {
                Direction::ToJacobi => (
                    (VecAtom::Position(Frame::Lab, k as u8), self.position_row(k)),
                    (VecAtom::Momentum(Frame::Lab, k as u8), self.momentum_row(k)),
                ),
                Direction::ToLab => (
                    (
                        VecAtom::Position(Frame::Jacobi, k as u8),
                        self.jacobi_position(k),
                    ),
                    (
                        VecAtom::Momentum(Frame::Jacobi, k as u8),
                        self.jacobi_momentum(k),
                    ),
                ),
            };
            m.insert(pos.0, pos.1).expect("particle atoms");
            m.insert(mom.0, mom.1).expect("particle atoms");
        }
        m
    }
}

fn frame_of(a: &VecAtom) -> Option<Frame> {
    match a {
        VecAtom::Position(f, _) | VecAtom::Momentum(f, _) => Some(*f),
        _ => None,
    }
}

/// Rewrites `e` into the other frame. Input must not already contain atoms of
/// the target frame.
pub fn transform(e: &OpExpr, scheme: &JacobiScheme, dir: Direction) -> Result<OpExpr, JacobiError> {
    let target = match dir {
        Direction::ToJacobi => Frame::Jacobi,
        Direction::ToLab => Frame::Lab,
    };
    let mut mixed = false;
    e.for_each_atom(&mut |a| mixed |= frame_of(a) == Some(target));
    if mixed {
        return Err(KernelError::MixedFrame.into());
    }
    Ok(e.substitute(&scheme.map(dir))?)
}

pub fn transform_hamiltonian(
    h: &Hamiltonian,
    scheme: &JacobiScheme,
    dir: Direction,
) -> Result<Hamiltonian, JacobiError> {
    let mut groups = Vec::new();
    for (g, e) in &h.groups {
        groups.push((*g, transform(e, scheme, dir)?));
    }
    Ok(Hamiltonian {
        scheme: h.scheme,
        groups,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Canonical text of the nonzero residual.
    pub residual: Option<String>,
}

fn matrix_residual(m: &Matrix) -> Option<String> {
    let id = identity(m.len());
    let mut parts = Vec::new();
    for (i, (row, irow)) in m.iter().zip(&id).enumerate() {
        for (j, (x, y)) in row.iter().zip(irow).enumerate() {
            let d = x.sub(y);
            if !d.is_zero() {
                parts.push(format!("[{},{}] {}", i + 1, j + 1, canonical::scalar(&d)));
            }
        }
    }
    (!parts.is_empty()).then(|| parts.join("; "))
}

fn op_residual(d: &OpExpr) -> Option<String> {
    (!d.is_zero()).then(|| canonical::op(d))
}

fn quadratic(vs: impl Iterator<Item = (VecExpr, ScalarExpr)>) -> OpExpr {
    vs.fold(OpExpr::zero(), |acc, (v, k)| {
        acc.add(&OpExpr::dot(&v, &v).scale(&k))
    })
}

/// Exact checks of the four scheme identities.
pub fn check_invariants(s: &JacobiScheme) -> Result<Vec<InvariantCheck>, JacobiError> {
    let n = s.n();
    let half = |m: &ScalarExpr| {
        ScalarExpr::one()
            .div(&m.mul(&ScalarExpr::int(2)))
            .expect("nonzero")
    };
    let lab_kin = quadratic((1..=n).map(|a| {
        (
            VecExpr::momentum(Frame::Lab, a as u8),
            half(&s.lab_masses[a - 1]),
        )
    }));
    let jac_kin = quadratic((1..=n).map(|i| {
        (
            VecExpr::momentum(Frame::Jacobi, i as u8),
            half(&s.masses[i - 1]),
        )
    }));
    let lab_i = quadratic((1..=n).map(|a| {
        (
            VecExpr::position(Frame::Lab, a as u8),
            s.lab_masses[a - 1].clone(),
        )
    }));
    let jac_i = quadratic((1..=n).map(|i| {
        (
            VecExpr::position(Frame::Jacobi, i as u8),
            s.masses[i - 1].clone(),
        )
    }));
    let kin = transform(&lab_kin, s, Direction::ToJacobi)?.sub(&jac_kin);
    let inertia = transform(&lab_i, s, Direction::ToJacobi)?.sub(&jac_i);
    let checks = vec![
        (
            "inverse",
            matrix_residual(&mat_mul(&s.forward, &s.backward)),
        ),
        ("kinetic", op_residual(&kin)),
        ("inertia", op_residual(&inertia)),
        (
            "canonical",
            matrix_residual(&mat_mul(&s.momentum_forward, &transpose(&s.forward))),
        ),
    ];
    Ok(checks
        .into_iter()
        .map(|(name, residual)| InvariantCheck {
            name,
            passed: residual.is_none(),
            residual,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(charges: Vec<i64>, masses: &[&str], nucleus: usize) -> ParticleSystem {
        let n = charges.len();
        ParticleSystem {
            name: "t".into(),
            charges,
            masses: masses.iter().map(|m| m.to_string()).collect(),
            nucleus,
            z: 1,
            spins: vec![true; n],
        }
    }

    fn m(name: &str) -> ScalarExpr {
        ScalarExpr::symbol(name)
    }

    #[test]
    fn partition_round_trip() {
        for text in [
            "1",
            "[1, 2]",
            "[3, [2, 1]]",
            "[4, [3, [1, 2]]]",
            "[[1, 2], [3, 4]]",
        ] {
            assert_eq!(PartitionTree::parse(text).unwrap().to_string(), text);
        }
        assert_eq!(
            PartitionTree::parse(" [ 1 ,2 ] ").unwrap().to_string(),
            "[1, 2]"
        );
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(
            PartitionTree::parse("[1, 2"),
            Err(JacobiError::Syntax { at: 5, .. })
        ));
        assert!(matches!(
            PartitionTree::parse("[1 2]"),
            Err(JacobiError::Syntax { .. })
        ));
        assert!(matches!(
            PartitionTree::parse("[1, 2] x"),
            Err(JacobiError::Syntax { .. })
        ));
        let t = PartitionTree::parse("[1, [2, 2]]").unwrap();
        assert!(matches!(
            t.validate(3),
            Err(JacobiError::Leaves { n: 3, .. })
        ));
        assert!(PartitionTree::parse("[1, 3]").unwrap().validate(2).is_err());
    }

    #[test]
    fn hydrogen_rows() {
        let s = system(vec![1, -1], &["m1", "m2"], 1);
        let j = build_scheme(&PartitionTree::parse("[1, 2]").unwrap(), &s).unwrap();
        let total = m("m1").add(&m("m2"));
        let frac = |a: &str| m(a).div(&total).unwrap();
        let r1 = VecExpr::position(Frame::Jacobi, 1);
        let r2 = VecExpr::position(Frame::Jacobi, 2);
        assert_eq!(j.position_row(1), r1.add(&r2.scale(&frac("m2"))));
        assert_eq!(j.position_row(2), r1.sub(&r2.scale(&frac("m1"))));
        let p1 = VecExpr::momentum(Frame::Jacobi, 1);
        let p2 = VecExpr::momentum(Frame::Jacobi, 2);
        assert_eq!(j.momentum_row(1), p1.scale(&frac("m1")).add(&p2));
        assert_eq!(j.momentum_row(2), p1.scale(&frac("m2")).sub(&p2));
        assert_eq!(j.masses[0], total);
        assert_eq!(j.masses[1], m("m1").mul(&m("m2")).div(&total).unwrap());
    }

    #[test]
    fn invariants_hold() {
        let cases = [
            (system(vec![1, -1], &["m1", "m2"], 1), "[1, 2]"),
            (
                system(vec![1, 1, -2], &["m1", "m1", "m3"], 3),
                "[3, [2, 1]]",
            ),
            (
                system(vec![1, 1, -2], &["m1", "m2", "m3"], 3),
                "[[1, 3], 2]",
            ),
            (
                system(vec![-1, -1, -1, 3], &["m1", "m1", "m1", "m2"], 4),
                "[4, [3, [1, 2]]]",
            ),
            (
                system(vec![-1, -1, 1, 1], &["m1", "m2", "m3", "m4"], 4),
                "[[1, 3], [2, 4]]",
            ),
        ];
        for (s, p) in cases {
            let j = build_scheme(&PartitionTree::parse(p).unwrap(), &s).unwrap();
            let checks = check_invariants(&j).unwrap();
            assert_eq!(checks.len(), 4);
            for c in checks {
                assert!(c.passed, "{p}: {} {:?}", c.name, c.residual);
            }
        }
    }

    #[test]
    fn round_trip_transform() {
        let s = system(vec![1, 1, -2], &["m1", "m2", "m3"], 3);
        let j = build_scheme(&PartitionTree::parse("[3, [2, 1]]").unwrap(), &s).unwrap();
        let e = OpExpr::dot(
            &VecExpr::position(Frame::Lab, 2),
            &VecExpr::momentum(Frame::Lab, 1),
        );
        let there = transform(&e, &j, Direction::ToJacobi).unwrap();
        assert_eq!(transform(&there, &j, Direction::ToLab).unwrap(), e);
        assert!(transform(&there, &j, Direction::ToJacobi).is_err());
    }

    #[test]
    fn invert_detects_singular() {
        let one = ScalarExpr::one();
        assert!(invert(&vec![
            vec![one.clone(), one.clone()],
            vec![one.clone(), one]
        ])
        .is_none());
    }
}
