//! Conservative commutation predicate. Two operands commute only when no
//! canonical pair (same-index position/momentum, mixed frames, two field or
//! photon operators, same-particle spins) can be found between them.

use std::collections::BTreeSet;

use super::operator::OpFactor;
use super::vector::{Frame, VecAtom, VecExpr, VecTerm};

#[derive(Default, Debug)]
struct Content {
    positions: BTreeSet<(Frame, u8)>,
    momenta: BTreeSet<(Frame, u8)>,
    spins: BTreeSet<u8>,
    photon: bool,
    opaque: bool,
}

impl Content {
    fn visit(&mut self, a: &VecAtom) {
        match a {
            VecAtom::Position(f, i) => {
                self.positions.insert((*f, *i));
            }
            VecAtom::Momentum(f, i) => {
                self.momenta.insert((*f, *i));
            }
            VecAtom::Spin(i) | VecAtom::MagneticMoment(i) => {
                self.spins.insert(*i);
            }
            VecAtom::Field(_) => self.photon = true,
        }
    }

    fn of_term(t: &VecTerm) -> Content {
        let mut c = Content::default();
        t.for_each_atom(&mut |a| c.visit(a));
        c
    }

    fn of_vec(v: &VecExpr) -> Content {
        let mut c = Content::default();
        v.for_each_atom(&mut |a| c.visit(a));
        c
    }

    fn of_factor(f: &OpFactor) -> Content {
        match f {
            OpFactor::Dot(a, b) => {
                let mut c = Content::of_term(a);
                c.merge(Content::of_term(b));
                c
            }
            OpFactor::InverseNorm(v) => Content::of_vec(v),
            OpFactor::Named(name) => {
                let mut c = Content::default();
                if name == crate::fields::FREE_FIELD_ATOM {
                    c.photon = true;
                } else {
                    c.opaque = true;
                }
                c
            }
        }
    }

    fn merge(&mut self, o: Content) {
        self.positions.extend(o.positions);
        self.momenta.extend(o.momenta);
        self.spins.extend(o.spins);
        self.photon |= o.photon;
        self.opaque |= o.opaque;
    }

    fn momenta_clash(&self, other: &Content) -> bool {
        self.momenta
            .iter()
            .any(|(f, i)| other.positions.iter().any(|(g, j)| f != g || i == j))
    }

    fn commutes_with(&self, o: &Content) -> bool {
        if self.opaque || o.opaque {
            return false;
        }
        if self.photon && o.photon {
            return false;
        }
        if self.momenta_clash(o) || o.momenta_clash(self) {
            return false;
        }
        self.spins.is_disjoint(&o.spins)
    }
}

pub fn vec_terms_commute(a: &VecTerm, b: &VecTerm) -> bool {
    Content::of_term(a).commutes_with(&Content::of_term(b))
}

/// `true` only for provably commuting operator factors.
pub fn commutes(x: &OpFactor, y: &OpFactor) -> bool {
    Content::of_factor(x).commutes_with(&Content::of_factor(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldAtom, FieldKind};

    fn jac(i: u8) -> VecTerm {
        VecTerm::Atom(VecAtom::Position(Frame::Jacobi, i))
    }

    fn mom(i: u8) -> VecTerm {
        VecTerm::Atom(VecAtom::Momentum(Frame::Jacobi, i))
    }

    #[test]
    fn conjugate_pair_does_not_commute() {
        let kin = OpFactor::Dot(mom(2), mom(2));
        let coul2 = OpFactor::InverseNorm(VecExpr::position(Frame::Jacobi, 2));
        let coul3 = OpFactor::InverseNorm(VecExpr::position(Frame::Jacobi, 3));
        assert!(!commutes(&kin, &coul2));
        assert!(commutes(&kin, &coul3));
    }

    #[test]
    fn field_point_mentions_position() {
        let b = FieldAtom::new(FieldKind::B, 1, VecExpr::position(Frame::Jacobi, 1));
        let spin = OpFactor::Dot(
            VecTerm::Atom(VecAtom::MagneticMoment(1)),
            VecTerm::Atom(VecAtom::Field(Box::new(b))),
        );
        assert!(!commutes(&OpFactor::Dot(mom(1), mom(1)), &spin));
        assert!(commutes(&OpFactor::Dot(mom(2), mom(2)), &spin));
        assert!(!commutes(&spin, &spin));
    }

    #[test]
    fn positions_commute_and_mixed_frames_do_not() {
        assert!(commutes(
            &OpFactor::Dot(jac(2), jac(3)),
            &OpFactor::Dot(jac(3), jac(3))
        ));
        let lab = OpFactor::Dot(
            VecTerm::Atom(VecAtom::Momentum(Frame::Lab, 1)),
            VecTerm::Atom(VecAtom::Momentum(Frame::Lab, 1)),
        );
        assert!(!commutes(&lab, &OpFactor::Dot(jac(3), jac(3))));
    }
}
