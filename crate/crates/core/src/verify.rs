//! Reference documents and the grade-by-grade discrepancy report.
//!
//! A reference file is a sequence of canonical forms:
//!
//! ```text
//! (reference (system helium) (variant oracle))
//! (define M1 (+ m1 m1 m3))
//! (grade 1 (* 2 e (dot (R 3) (field E 1 (R 1)))))
//! (position-row 3 (+ (R 1) ...))
//! ```
//!
//! Grade blocks are written without the `μ^k` prefactor. The full list of
//! item forms is in `docs/grammar.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::canonical::{self, read_all, ParseError, Pos, Reader, Sexp};
use crate::config::RunConfig;
use crate::pipeline::{expand, PipelineError};
use crate::pzw::Group;
use crate::symkernel::{
    OpExpr, OpTerm, RatFunc, ScalarExpr, Symbol, SymbolKind, SymbolTable, VecExpr,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    AsPrinted,
    Oracle,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::AsPrinted => "as-printed",
            Variant::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Op(OpExpr),
    Vec(VecExpr),
}

impl Expr {
    fn sub(&self, o: &Expr) -> Expr {
        match (self, o) {
            (Expr::Op(a), Expr::Op(b)) => Expr::Op(a.sub(b)),
            (Expr::Vec(a), Expr::Vec(b)) => Expr::Vec(a.sub(b)),
            _ => unreachable!("items compare like with like"),
        }
    }

    fn neg(&self) -> Expr {
        match self {
            Expr::Op(a) => Expr::Op(a.neg()),
            Expr::Vec(a) => Expr::Vec(a.neg()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Op(a) => a.is_zero(),
            Expr::Vec(a) => a.is_zero(),
        }
    }

    fn map_coefficients(&self, f: &dyn Fn(&ScalarExpr) -> ScalarExpr) -> Expr {
        match self {
            Expr::Op(a) => Expr::Op(a.map_coefficients(f)),
            Expr::Vec(v) => {
                let mut out = VecExpr::zero();
                for (t, c) in v.terms() {
                    out = out.add(&VecExpr::from_term(f(c), t.clone()));
                }
                Expr::Vec(out)
            }
        }
    }

    /// Coefficient per term, keyed by the canonical text of the bare term.
    fn by_term(&self) -> BTreeMap<String, ScalarExpr> {
        match self {
            Expr::Op(a) => a
                .terms()
                .map(|(k, c)| {
                    let bare = OpTerm {
                        coeff: ScalarExpr::one(),
                        factors: k.factors.clone(),
                        hc: k.hc,
                    };
                    (canonical::term(&bare), c.clone())
                })
                .collect(),
            Expr::Vec(v) => v
                .terms()
                .map(|(t, c)| (canonical::vec_term(t), c.clone()))
                .collect(),
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            Expr::Op(a) => canonical::op(a),
            Expr::Vec(v) => canonical::vector(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ItemKind {
    /// Grade-`k` block of the interaction hierarchy.
    Grade(i32),
    H0,
    Kinetic,
    PositionRow(usize),
    MomentumRow(usize),
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemKind::Grade(g) => write!(f, "grade {g}"),
            ItemKind::H0 => f.write_str("h0"),
            ItemKind::Kinetic => f.write_str("kinetic"),
            ItemKind::PositionRow(a) => write!(f, "position-row {a}"),
            ItemKind::MomentumRow(a) => write!(f, "momentum-row {a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefItem {
    pub kind: ItemKind,
    pub expr: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceDoc {
    pub system: String,
    pub variant: Variant,
    pub items: Vec<RefItem>,
}

impl ReferenceDoc {
    pub fn max_grade(&self) -> i32 {
        self.items
            .iter()
            .filter_map(|i| match i.kind {
                ItemKind::Grade(g) => Some(g),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

fn expect_head<'a>(x: &'a Sexp, head: &str, arity: usize) -> Result<&'a [Sexp], ParseError> {
    match x {
        Sexp::List(items, _) if items.first().and_then(Sexp::as_atom) == Some(head) => {
            if items.len() != arity + 1 {
                return Err(x.error(format!("`{head}` takes {arity} argument(s)")));
            }
            Ok(&items[1..])
        }
        _ => Err(x.error(format!("expected `({head} ...)`"))),
    }
}

fn header(x: &Sexp) -> Result<(String, Variant), ParseError> {
    let Sexp::List(items, _) = x else {
        return Err(x.error("expected `(reference ...)` header"));
    };
    if items.first().and_then(Sexp::as_atom) != Some("reference") {
        return Err(x.error("expected `(reference ...)` header"));
    }
    let mut system = None;
    let mut variant = None;
    for it in &items[1..] {
        let Sexp::List(kv, _) = it else {
            return Err(it.error("expected `(key value)`"));
        };
        match (
            kv.first().and_then(Sexp::as_atom),
            kv.get(1).and_then(Sexp::as_atom),
            kv.len(),
        ) {
            (Some("system"), Some(v), 2) => system = Some(v.to_owned()),
            (Some("variant"), Some("as-printed"), 2) => variant = Some(Variant::AsPrinted),
            (Some("variant"), Some("oracle"), 2) => variant = Some(Variant::Oracle),
            (Some("variant"), _, _) => return Err(it.error("variant must be as-printed or oracle")),
            _ => return Err(it.error(format!("unknown header entry `{it}`"))),
        }
    }
    let system = system.ok_or_else(|| x.error("header lacks `(system NAME)`"))?;
    Ok((system, variant.unwrap_or(Variant::Oracle)))
}

/// Parses a reference document against the system's symbol table. `define`
/// forms name scalar shorthands that are expanded after reading.
pub fn parse_reference(text: &str, symbols: &SymbolTable) -> Result<ReferenceDoc, ParseError> {
    let forms = read_all(text)?;
    let Some((first, rest)) = forms.split_first() else {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "empty reference document".into(),
        });
    };
    let (system, variant) = header(first)?;
    let mut table = symbols.clone();
    let mut defines: Vec<(Symbol, RatFunc)> = Vec::new();
    let mut items = Vec::new();
    for x in rest {
        let head = match x {
            Sexp::List(v, _) => v.first().and_then(Sexp::as_atom).unwrap_or(""),
            Sexp::Atom(..) => "",
        };
        let reader = Reader { symbols: &table };
        let item = match head {
            "define" => {
                let args = expect_head(x, "define", 2)?;
                let name = args[0]
                    .as_atom()
                    .ok_or_else(|| args[0].error("expected a name"))?;
                if table.kind(name).is_some() {
                    return Err(args[0].error(format!("`{name}` is already defined")));
                }
                let value = reader.scalar(&args[1])?;
                if value.homogeneous_grade() != Some(0) {
                    return Err(args[1].error("definitions must be grade-free scalars"));
                }
                let name = name.to_owned();
                defines.push((Symbol::new(&name), value.grade_part(0)));
                table.insert(&name, SymbolKind::Mass);
                continue;
            }
            "grade" => {
                let args = expect_head(x, "grade", 2)?;
                let g = args[0].as_i64()?;
                if g < 1 {
                    return Err(args[0].error("grades start at 1"));
                }
                (ItemKind::Grade(g as i32), Expr::Op(reader.op(&args[1])?))
            }
            "h0" => (
                ItemKind::H0,
                Expr::Op(reader.op(&expect_head(x, "h0", 1)?[0])?),
            ),
            "kinetic" => (
                ItemKind::Kinetic,
                Expr::Op(reader.op(&expect_head(x, "kinetic", 1)?[0])?),
            ),
            "position-row" | "momentum-row" => {
                let args = expect_head(x, head, 2)?;
                let a = args[0].as_usize()?;
                if a == 0 {
                    return Err(args[0].error("particle indices start at 1"));
                }
                let kind = if head == "position-row" {
                    ItemKind::PositionRow(a)
                } else {
                    ItemKind::MomentumRow(a)
                };
                (kind, Expr::Vec(reader.vector(&args[1])?))
            }
            _ => return Err(x.error(format!("unknown reference item `{x}`"))),
        };
        if items.iter().any(|i: &RefItem| i.kind == item.0) {
            return Err(x.error(format!("duplicate item `{}`", item.0)));
        }
        items.push(RefItem {
            kind: item.0,
            expr: item.1,
            pos: x.pos(),
        });
    }
    for item in &mut items {
        for (s, v) in defines.iter().rev() {
            item.expr = item.expr.map_coefficients(&|c| c.substitute(*s, v));
        }
    }
    Ok(ReferenceDoc {
        system,
        variant,
        items,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermStatus {
    Match,
    CoefficientMismatch,
    MissingInReference,
    MissingInGenerated,
}

impl TermStatus {
    pub fn name(self) -> &'static str {
        match self {
            TermStatus::Match => "match",
            TermStatus::CoefficientMismatch => "coefficient-mismatch",
            TermStatus::MissingInReference => "missing-in-reference",
            TermStatus::MissingInGenerated => "missing-in-generated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermDiff {
    pub status: TermStatus,
    /// Canonical text of the term with unit coefficient.
    pub term: String,
    pub generated: ScalarExpr,
    pub reference: ScalarExpr,
    /// `reference / generated` when both are present.
    pub ratio: Option<ScalarExpr>,
    /// `generated − reference`.
    pub residual: ScalarExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ItemStatus {
    Match,
    /// Reference equals the negated generated expression.
    SignFlip,
    Discrepancy,
}

impl ItemStatus {
    pub fn name(self) -> &'static str {
        match self {
            ItemStatus::Match => "match",
            ItemStatus::SignFlip => "sign-flip",
            ItemStatus::Discrepancy => "discrepancy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemReport {
    pub kind: ItemKind,
    pub status: ItemStatus,
    pub terms: Vec<TermDiff>,
    pub generated: Expr,
    pub reference: Expr,
    /// `generated − reference`.
    pub residual: Expr,
}

impl ItemReport {
    pub fn term(&self, text: &str) -> Option<&TermDiff> {
        self.terms.iter().find(|t| t.term == text)
    }

    /// Statuses of all terms other than `match`.
    pub fn problems(&self) -> impl Iterator<Item = &TermDiff> {
        self.terms.iter().filter(|t| t.status != TermStatus::Match)
    }
}

/// Compares one generated expression with its reference.
pub fn diff(kind: ItemKind, generated: &Expr, reference: &Expr) -> ItemReport {
    let g = generated.by_term();
    let r = reference.by_term();
    let keys: BTreeSet<&String> = g.keys().chain(r.keys()).collect();
    let mut terms = Vec::new();
    for k in keys {
        let cg = g.get(k).cloned().unwrap_or_else(ScalarExpr::zero);
        let cr = r.get(k).cloned().unwrap_or_else(ScalarExpr::zero);
        let status = match (g.contains_key(k), r.contains_key(k)) {
            (true, false) => TermStatus::MissingInReference,
            (false, true) => TermStatus::MissingInGenerated,
            _ if cg == cr => TermStatus::Match,
            _ => TermStatus::CoefficientMismatch,
        };
        let ratio = if cg.is_zero() || cr.is_zero() {
            None
        } else {
            cr.div(&cg)
        };
        terms.push(TermDiff {
            status,
            term: k.clone(),
            residual: cg.sub(&cr),
            generated: cg,
            reference: cr,
            ratio,
        });
    }
    let residual = generated.sub(reference);
    let status = if residual.is_zero() {
        ItemStatus::Match
    } else if generated.neg().sub(reference).is_zero() {
        ItemStatus::SignFlip
    } else {
        ItemStatus::Discrepancy
    };
    ItemReport {
        kind,
        status,
        terms,
        generated: generated.clone(),
        reference: reference.clone(),
        residual,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyReport {
    pub system: String,
    pub variant: Variant,
    pub items: Vec<ItemReport>,
}

impl DiscrepancyReport {
    pub fn item(&self, kind: ItemKind) -> Option<&ItemReport> {
        self.items.iter().find(|i| i.kind == kind)
    }

    pub fn is_clean(&self) -> bool {
        self.items.iter().all(|i| i.status == ItemStatus::Match)
    }

    /// 0 on a full match, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_clean() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for DiscrepancyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify {} ({})", self.system, self.variant.name())?;
        let mut counts = [0usize; 3];
        for item in &self.items {
            counts[item.status as usize] += 1;
            writeln!(f, "  {}: {}", item.kind, item.status.name())?;
            if item.status == ItemStatus::Match {
                continue;
            }
            for t in &item.terms {
                write!(f, "    {:<22} {}", t.status.name(), t.term)?;
                match t.status {
                    TermStatus::Match => {}
                    TermStatus::CoefficientMismatch => {
                        write!(
                            f,
                            "\n      generated {}  reference {}",
                            canonical::scalar(&t.generated),
                            canonical::scalar(&t.reference)
                        )?;
                        if let Some(r) = &t.ratio {
                            write!(f, "  ratio {}", canonical::scalar(r))?;
                        }
                        write!(f, "  residual {}", canonical::scalar(&t.residual))?;
                    }
                    TermStatus::MissingInReference => {
                        write!(f, "\n      generated {}", canonical::scalar(&t.generated))?
                    }
                    TermStatus::MissingInGenerated => {
                        write!(f, "\n      reference {}", canonical::scalar(&t.reference))?
                    }
                }
                writeln!(f)?;
            }
            if item.status == ItemStatus::Discrepancy {
                writeln!(f, "    residual {}", item.residual.canonical())?;
            }
        }
        write!(
            f,
            "summary: {} item(s), {} match, {} sign-flip, {} discrepancy",
            self.items.len(),
            counts[0],
            counts[1],
            counts[2]
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("reference: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Reference(String),
}

fn units(e: &Expr, on: bool) -> Expr {
    if !on {
        return e.clone();
    }
    e.map_coefficients(&|c| {
        c.substitute(Symbol::new("hbar"), &RatFunc::one())
            .substitute(Symbol::new("c"), &RatFunc::one())
    })
}

/// Expands the configured system far enough to cover every reference item
/// and diffs each one.
pub fn run_verify(cfg: &RunConfig, doc: &ReferenceDoc) -> Result<DiscrepancyReport, VerifyError> {
    if doc.system != cfg.spec.system.name {
        return Err(VerifyError::Reference(format!(
            "reference is for system `{}` but the config describes `{}`",
            doc.system, cfg.spec.system.name
        )));
    }
    let mut spec = cfg.spec.clone();
    spec.order = spec.order.max(doc.max_grade() as u32);
    let exp = expand(&spec)?;
    let n = spec.system.n();
    let mut items = Vec::new();
    for item in &doc.items {
        let generated = match item.kind {
            ItemKind::Grade(g) => Expr::Op(exp.hierarchy.block(g).shift_grade(-g)),
            ItemKind::H0 => Expr::Op(exp.h0.clone()),
            ItemKind::Kinetic => Expr::Op(exp.scaled.group(Group::Kinetic)),
            ItemKind::PositionRow(a) | ItemKind::MomentumRow(a) => {
                let jac = exp.jacobi.as_ref().ok_or_else(|| {
                    VerifyError::Reference(format!(
                        "{}: `{}` needs a partition",
                        item.pos.line, item.kind
                    ))
                })?;
                if a > n {
                    return Err(VerifyError::Reference(format!(
                        "{}: particle {a} out of range 1..={n}",
                        item.pos.line
                    )));
                }
                Expr::Vec(match item.kind {
                    ItemKind::PositionRow(_) => jac.position_row(a),
                    _ => jac.momentum_row(a),
                })
            }
        };
        let generated = units(&generated, cfg.hbar_c_units);
        let reference = units(&item.expr, cfg.hbar_c_units);
        items.push(diff(item.kind, &generated, &reference));
    }
    Ok(DiscrepancyReport {
        system: doc.system.clone(),
        variant: doc.variant,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::parse_op;

    fn table() -> SymbolTable {
        let mut t = SymbolTable::standard();
        t.insert("m1", SymbolKind::Mass);
        t.insert("m2", SymbolKind::Mass);
        t
    }

    #[test]
    fn header_and_defines() {
        let doc = parse_reference(
            "(reference (system hydrogen) (variant as-printed))\n(define M1 (+ m1 m2))\n(grade 2 (* (/ 1 M1) (dot (P 1) (P 1))))",
            &table(),
        )
        .unwrap();
        assert_eq!(doc.variant, Variant::AsPrinted);
        let want = parse_op("(* (/ 1 (+ m1 m2)) (dot (P 1) (P 1)))", &table()).unwrap();
        assert_eq!(doc.items[0].expr, Expr::Op(want));
    }

    #[test]
    fn errors_carry_positions() {
        let e =
            parse_reference("(reference (system h))\n(grade 1 (dot (P 1)", &table()).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_reference("(reference (system h))\n(bogus 1)", &table()).unwrap_err();
        assert_eq!((e.line, e.col), (2, 1));
    }

    #[test]
    fn statuses() {
        let t = table();
        let a = Expr::Op(parse_op("(+ (dot (P 1) (P 1)) (* 2 (dot (P 2) (P 2))))", &t).unwrap());
        assert_eq!(diff(ItemKind::H0, &a, &a).status, ItemStatus::Match);
        assert_eq!(
            diff(ItemKind::H0, &a, &a.neg()).status,
            ItemStatus::SignFlip
        );
        let b = Expr::Op(
            parse_op(
                "(+ (dot (P 1) (P 1)) (* 3 (dot (P 2) (P 2))) (dot (R 1) (R 1)))",
                &t,
            )
            .unwrap(),
        );
        let r = diff(ItemKind::H0, &a, &b);
        assert_eq!(r.status, ItemStatus::Discrepancy);
        let statuses: Vec<TermStatus> = r.terms.iter().map(|t| t.status).collect();
        assert!(statuses.contains(&TermStatus::CoefficientMismatch));
        assert!(statuses.contains(&TermStatus::MissingInGenerated));
        let m = r
            .problems()
            .find(|t| t.status == TermStatus::CoefficientMismatch)
            .unwrap();
        assert_eq!(m.ratio, Some(ScalarExpr::ratio(3, 2)));
        assert_eq!(m.residual, ScalarExpr::int(-1));
    }
}
