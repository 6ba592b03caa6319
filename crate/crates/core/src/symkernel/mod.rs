//! Exact symbolic kernel: rational-function scalars with a μ-grade, index-free
//! vectors, and ordered operator products.

pub mod commute;
pub mod operator;
pub mod poly;
pub mod scalar;
pub mod vector;

use std::collections::BTreeMap;

pub use commute::commutes;
pub use operator::{normal_order, LinearMap, OpExpr, OpFactor, OpKey, OpTerm};
pub use poly::{gcd, rational, Monomial, Poly, Rational, Symbol};
pub use scalar::{coefficient_list, RatFunc, ScalarExpr};
pub use vector::{Frame, VecAtom, VecExpr, VecTerm};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("a hermitian-marked term cannot be multiplied by another operator")]
    MarkedProduct,
    #[error("inverse norm of the zero vector")]
    ZeroNorm,
    #[error("substitution maps must act on particle atoms with field-free images")]
    FieldInMap,
    #[error("unknown symbol `{name}`{}", suggest(.suggestions))]
    UnknownSymbol {
        name: String,
        suggestions: Vec<String>,
    },
    #[error("field evaluation point {0} is not affine in the expansion point")]
    NotAffine(String),
    #[error("no scaling rule for atom `{0}`")]
    UnknownAtom(String),
    #[error("expression mixes lab and Jacobi atoms")]
    MixedFrame,
}

fn suggest(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", s.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolKind {
    Mass,
    ChargeUnit,
    Constant,
    Coupling,
    Integration,
}

/// Names that may appear in scalar coefficients of a session.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    kinds: BTreeMap<String, SymbolKind>,
}

pub const LAMBDA: &str = "lambda";
pub const LAMBDA_PRIME: &str = "lambdap";

impl SymbolTable {
    /// Physical constants plus the λ integration variables.
    pub fn standard() -> SymbolTable {
        let mut t = SymbolTable::default();
        t.insert("e", SymbolKind::ChargeUnit);
        for c in ["hbar", "c", "eps0"] {
            t.insert(c, SymbolKind::Constant);
        }
        t.insert("alpha", SymbolKind::Coupling);
        t.insert(LAMBDA, SymbolKind::Integration);
        t.insert(LAMBDA_PRIME, SymbolKind::Integration);
        t
    }

    pub fn insert(&mut self, name: &str, kind: SymbolKind) {
        self.kinds.entry(name.to_owned()).or_insert(kind);
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.kinds.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.kinds.keys().map(String::as_str)
    }

    pub fn lookup(&self, name: &str) -> Result<Symbol, KernelError> {
        if self.kinds.contains_key(name) {
            Ok(Symbol::new(name))
        } else {
            Err(KernelError::UnknownSymbol {
                name: name.to_owned(),
                suggestions: self.suggestions(name),
            })
        }
    }

    pub fn check(&self, symbols: &[Symbol]) -> Result<(), KernelError> {
        for s in symbols {
            self.lookup(s.name())?;
        }
        Ok(())
    }

    fn suggestions(&self, name: &str) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .kinds
            .keys()
            .map(|k| (strsim::levenshtein(name, k), k))
            .filter(|(d, k)| *d <= 2.max(k.len() / 3) && *d < k.len().max(name.len()))
            .collect();
        scored.sort();
        scored.into_iter().take(3).map(|(_, k)| k.clone()).collect()
    }
}
