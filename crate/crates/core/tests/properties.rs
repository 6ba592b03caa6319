//! Algebraic invariants of the symbolic kernel over random expressions.

mod support;

use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonicalize_is_idempotent(e in op()) {
        canonicalize_idempotent(e)?;
    }

    #[test]
    fn equality_is_an_equivalence(a in op(), b in op(), c in op()) {
        equality_equivalence((a, b, c))?;
    }

    #[test]
    fn substitution_is_additive(
        a in product_over(number, true, false),
        b in product_over(number, true, false),
        k in scalar(),
        map in linear_map(),
    ) {
        substitution_additive((a, b, k, map))?;
    }

    #[test]
    fn substitution_is_multiplicative(
        a in product_over(number, false, false),
        b in product_over(number, false, false),
        map in linear_map(),
    ) {
        substitution_multiplicative((a, b, map))?;
    }

    #[test]
    fn marked_terms_substitute_termwise(a in op(), b in op(), map in linear_map()) {
        marked_substitution((a, b, map))?;
    }

    #[test]
    fn cross_is_antisymmetric(u in position_vector(), v in position_vector(), k in scalar()) {
        cross_antisymmetric((u, v, k))?;
    }

    #[test]
    fn cross_is_bilinear(u in vector(), v in vector(), w in vector()) {
        cross_bilinear((u, v, w))?;
    }

    #[test]
    fn parse_inverts_serialize(s in scalar(), v in vector(), e in op()) {
        parse_serialize((s, v, e))?;
    }
}
