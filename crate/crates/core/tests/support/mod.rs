//! Random expression generators and kernel properties shared by the
//! property suite and the acceptance target.

#![allow(dead_code)]

use multipolar::canonical::{self, parse_op, parse_scalar, parse_vector};
use multipolar::fields::{field_vec, FieldKind};
use multipolar::symkernel::{
    Frame, LinearMap, OpExpr, ScalarExpr, SymbolKind, SymbolTable, VecAtom, VecExpr,
};
use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};

pub const CASES: u32 = 1000;

pub fn table() -> SymbolTable {
    let mut t = SymbolTable::standard();
    t.insert("m1", SymbolKind::Mass);
    t.insert("m2", SymbolKind::Mass);
    t
}

pub fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

pub fn scalar() -> impl Strategy<Value = ScalarExpr> {
    (
        -4i64..=4,
        1i64..=3,
        0u32..=2,
        0u32..=1,
        prop::bool::ANY,
        0i32..=2,
    )
        .prop_map(|(n, d, p1, p2, over_total, g)| {
            let n = if n == 0 { 1 } else { n };
            let m1 = ScalarExpr::symbol("m1");
            let m2 = ScalarExpr::symbol("m2");
            let mut s = ScalarExpr::ratio(n, d).mul(&m1.pow(p1)).mul(&m2.pow(p2));
            if over_total {
                s = s.div(&m1.add(&m2)).unwrap();
            }
            s.mul(&ScalarExpr::mu(g))
        })
}

/// Without `momenta` the momentum arm yields lab positions instead.
pub fn atom(momenta: bool) -> impl Strategy<Value = VecExpr> {
    prop_oneof![
        (1u8..=3).prop_map(|i| VecExpr::position(Frame::Lab, i)),
        (1u8..=3).prop_map(move |i| if momenta {
            VecExpr::momentum(Frame::Lab, i)
        } else {
            VecExpr::position(Frame::Lab, i)
        }),
        (1u8..=2).prop_map(|i| VecExpr::position(Frame::Jacobi, i)),
        (1u8..=2).prop_map(VecExpr::moment),
        (0u32..=1, prop::bool::ANY).prop_map(|(k, electric)| {
            let kind = if electric { FieldKind::E } else { FieldKind::B };
            let dirs = vec![VecExpr::position(Frame::Lab, 2); k as usize];
            field_vec(kind, 1, &VecExpr::position(Frame::Jacobi, 1), &dirs)
        }),
    ]
}

pub fn term(momenta: bool) -> impl Strategy<Value = VecExpr> {
    prop_oneof![
        3 => atom(momenta),
        1 => (atom(momenta), atom(momenta)).prop_map(|(a, b)| a.cross(&b)),
    ]
}

pub fn vector_over<S: Strategy<Value = ScalarExpr>>(
    coeff: S,
    momenta: bool,
) -> impl Strategy<Value = VecExpr> {
    prop::collection::vec((coeff, term(momenta)), 1..=3).prop_map(|ts| {
        ts.iter()
            .fold(VecExpr::zero(), |acc, (c, t)| acc.add(&t.scale(c)))
    })
}

pub fn vector() -> impl Strategy<Value = VecExpr> {
    vector_over(scalar(), true)
}

/// Positions only, so every pair of components commutes.
pub fn position_vector() -> impl Strategy<Value = VecExpr> {
    let pos = prop_oneof![
        (1u8..=3).prop_map(|i| VecExpr::position(Frame::Lab, i)),
        (1u8..=2).prop_map(|i| VecExpr::position(Frame::Jacobi, i)),
    ];
    let term = prop_oneof![
        3 => pos.clone(),
        1 => (pos.clone(), pos).prop_map(|(a, b)| a.cross(&b)),
    ];
    prop::collection::vec((scalar(), term), 1..=3).prop_map(|ts| {
        ts.iter()
            .fold(VecExpr::zero(), |acc, (c, t)| acc.add(&t.scale(c)))
    })
}

pub fn product(hc: bool) -> impl Strategy<Value = OpExpr> {
    product_over(scalar, true, hc)
}

pub fn product_over<S: Strategy<Value = ScalarExpr>>(
    coeff: fn() -> S,
    momenta: bool,
    hc: bool,
) -> impl Strategy<Value = OpExpr> {
    (
        coeff(),
        vector_over(coeff(), momenta),
        vector_over(coeff(), momenta),
        0u8..=3,
        any::<bool>(),
    )
        .prop_map(move |(c, u, v, extra, mark)| {
            let mut e = OpExpr::dot(&u, &v).scale(&c);
            let tail = match extra {
                1 => Some(OpExpr::named("H_f")),
                2 => Some(
                    OpExpr::inverse_norm(
                        &VecExpr::position(Frame::Lab, 1).sub(&VecExpr::position(Frame::Lab, 2)),
                    )
                    .unwrap(),
                ),
                _ => None,
            };
            if let Some(t) = tail {
                e = e.multiply(&t).unwrap();
            }
            if hc && mark {
                e = e.mark_hc();
            }
            e
        })
}

pub fn op_with(hc: bool) -> impl Strategy<Value = OpExpr> {
    prop::collection::vec(product(hc), 1..=3)
        .prop_map(|ps| ps.iter().fold(OpExpr::zero(), |acc, p| acc.add(p)))
}

pub fn op() -> impl Strategy<Value = OpExpr> {
    op_with(true)
}

pub fn number() -> impl Strategy<Value = ScalarExpr> {
    (-3i64..=3, 1i64..=2, 0i32..=1)
        .prop_map(|(n, d, g)| ScalarExpr::ratio(n, d).mul(&ScalarExpr::mu(g)))
}

/// Lab positions and momenta of particles 1..=3 sent to random Jacobi
/// combinations with numeric coefficients.
pub fn linear_map() -> impl Strategy<Value = LinearMap> {
    prop::collection::vec(prop::collection::vec(number(), 2), 6).prop_map(|rows| {
        let mut m = LinearMap::new();
        for (k, row) in rows.iter().enumerate() {
            let i = (k % 3) as u8 + 1;
            let (atom, image): (VecAtom, VecExpr) = if k < 3 {
                let img = VecExpr::position(Frame::Jacobi, 1)
                    .scale(&row[0])
                    .add(&VecExpr::position(Frame::Jacobi, 2).scale(&row[1]));
                (VecAtom::Position(Frame::Lab, i), img)
            } else {
                let img = VecExpr::momentum(Frame::Jacobi, 1)
                    .scale(&row[0])
                    .add(&VecExpr::momentum(Frame::Jacobi, 2).scale(&row[1]));
                (VecAtom::Momentum(Frame::Lab, i), img)
            };
            m.insert(atom, image).unwrap();
        }
        m
    })
}

type Check = Result<(), TestCaseError>;

pub fn canonicalize_idempotent(e: OpExpr) -> Check {
    let once = e.canonicalize();
    prop_assert_eq!(&once, &e);
    prop_assert_eq!(once.canonicalize(), once);
    Ok(())
}

pub fn equality_equivalence((a, b, c): (OpExpr, OpExpr, OpExpr)) -> Check {
    prop_assert!(a.equals(&a));
    let a2 = a.add(&b).sub(&b);
    prop_assert!(a.equals(&a2));
    prop_assert!(a2.equals(&a));
    let a3 = a2.add(&c).sub(&c);
    prop_assert!(a.equals(&a3));
    prop_assert_eq!(a.equals(&b), b.equals(&a));
    if a.equals(&b) && b.equals(&c) {
        prop_assert!(a.equals(&c));
    }
    Ok(())
}

pub fn substitution_additive((a, b, k, map): (OpExpr, OpExpr, ScalarExpr, LinearMap)) -> Check {
    // a collapsing map can send a norm argument to zero
    prop_assume!(a.substitute(&map).is_ok() && b.substitute(&map).is_ok());
    let s = |e: &OpExpr| e.substitute(&map).unwrap();
    prop_assert_eq!(s(&a.add(&b)), s(&a).add(&s(&b)));
    prop_assert_eq!(s(&a.scale(&k)), s(&a).scale(&k));
    Ok(())
}

/// A random linear map does not preserve commutators, so products are
/// checked on momentum-free operands only.
pub fn substitution_multiplicative((a, b, map): (OpExpr, OpExpr, LinearMap)) -> Check {
    prop_assume!(a.substitute(&map).is_ok() && b.substitute(&map).is_ok());
    let s = |e: &OpExpr| e.substitute(&map).unwrap();
    let ab = a.multiply(&b).unwrap();
    prop_assert_eq!(s(&ab), s(&a).multiply(&s(&b)).unwrap());
    Ok(())
}

pub fn marked_substitution((a, b, map): (OpExpr, OpExpr, LinearMap)) -> Check {
    prop_assume!(a.substitute(&map).is_ok() && b.substitute(&map).is_ok());
    let s = |e: &OpExpr| e.substitute(&map).unwrap();
    prop_assert_eq!(s(&a.add(&b)), s(&a).add(&s(&b)));
    Ok(())
}

pub fn cross_antisymmetric((u, v, k): (VecExpr, VecExpr, ScalarExpr)) -> Check {
    prop_assert_eq!(u.cross(&v), v.cross(&u).neg());
    prop_assert!(u.cross(&u).is_zero());
    prop_assert_eq!(u.scale(&k).cross(&v), u.cross(&v).scale(&k));
    Ok(())
}

pub fn cross_bilinear((u, v, w): (VecExpr, VecExpr, VecExpr)) -> Check {
    prop_assert_eq!(u.add(&v).cross(&w), u.cross(&w).add(&v.cross(&w)));
    prop_assert_eq!(w.cross(&u.add(&v)), w.cross(&u).add(&w.cross(&v)));
    Ok(())
}

pub fn parse_serialize((s, v, e): (ScalarExpr, VecExpr, OpExpr)) -> Check {
    let t = table();
    prop_assert_eq!(parse_scalar(&canonical::scalar(&s), &t).unwrap(), s);
    prop_assert_eq!(parse_vector(&canonical::vector(&v), &t).unwrap(), v);
    prop_assert_eq!(parse_op(&canonical::op(&e), &t).unwrap(), e.clone());
    prop_assert_eq!(parse_op(&canonical::op_multiline(&e), &t).unwrap(), e);
    Ok(())
}

fn run<S: Strategy>(strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String> {
    // no source file to persist regressions next to
    let cfg = ProptestConfig {
        failure_persistence: None,
        ..config()
    };
    TestRunner::new(cfg)
        .run(&strategy, check)
        .map_err(|e| e.to_string())
}

/// Every suite with `CASES` cases each, in a fixed order.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "canonicalization idempotence",
            run(op(), canonicalize_idempotent),
        ),
        (
            "equality is an equivalence",
            run((op(), op(), op()), equality_equivalence),
        ),
        (
            "substitution additive",
            run(
                (
                    product_over(number, true, false),
                    product_over(number, true, false),
                    scalar(),
                    linear_map(),
                ),
                substitution_additive,
            ),
        ),
        (
            "substitution multiplicative",
            run(
                (
                    product_over(number, false, false),
                    product_over(number, false, false),
                    linear_map(),
                ),
                substitution_multiplicative,
            ),
        ),
        (
            "marked substitution",
            run((op(), op(), linear_map()), marked_substitution),
        ),
        (
            "cross antisymmetry",
            run(
                (position_vector(), position_vector(), scalar()),
                cross_antisymmetric,
            ),
        ),
        (
            "cross bilinearity",
            run((vector(), vector(), vector()), cross_bilinear),
        ),
        (
            "parse of serialize",
            run((scalar(), vector(), op()), parse_serialize),
        ),
    ]
}
