//! LaTeX rendering of operators. Output only; the canonical form is the
//! interchange format.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::fields::{FieldAtom, FREE_FIELD_ATOM, SELF_ENERGY_ATOM};
use crate::symkernel::{
    Frame, Monomial, OpExpr, OpFactor, OpTerm, Poly, RatFunc, Rational, ScalarExpr, Symbol,
    VecAtom, VecExpr, VecTerm,
};

#[derive(Clone, Debug, Default)]
pub struct LatexOptions {
    /// Prints `μ` as `Zα` with this `Z`; `None` keeps `\mu`.
    pub z: Option<u32>,
    /// Sets `ħ = c = 1` in coefficients.
    pub hbar_c_units: bool,
    /// Named mass combinations, tried in order when factoring coefficients.
    pub abbreviations: Vec<(String, ScalarExpr)>,
}

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda", "mu",
    "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega",
];

pub fn symbol(name: &str) -> String {
    match name {
        "hbar" => return r"\hbar".into(),
        "eps0" => return r"\varepsilon_0".into(),
        "lambdap" => return r"\lambda'".into(),
        _ => {}
    }
    let split = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (stem, digits) = name.split_at(split);
    let stem = if GREEK.contains(&stem) {
        format!(r"\{stem}")
    } else if stem.chars().count() > 1 {
        format!(r"\mathrm{{{stem}}}")
    } else {
        stem.to_owned()
    };
    if digits.is_empty() {
        stem
    } else {
        format!("{stem}_{{{digits}}}")
    }
}

fn mu_power(k: i32, opts: &LatexOptions) -> String {
    let base = match opts.z {
        None => r"\mu".to_owned(),
        Some(1) => r"\alpha".to_owned(),
        Some(z) => format!(r"{z}\alpha"),
    };
    match (k, opts.z) {
        (0, _) => String::new(),
        (1, _) => base,
        (_, Some(z)) if z > 1 => format!("({base})^{{{k}}}"),
        _ => format!("{base}^{{{k}}}"),
    }
}

fn int_gcd_lcm(p: &Poly) -> Rational {
    let mut g = BigInt::zero();
    let mut l = BigInt::one();
    for (_, c) in p.terms() {
        g = g.gcd(c.numer());
        l = l.lcm(c.denom());
    }
    if g.is_zero() {
        return Rational::one();
    }
    let q = Rational::new(g, l);
    if p.leading_is_negative() {
        -q
    } else {
        q
    }
}

fn monomial(m: &Monomial) -> String {
    let parts: Vec<String> = m
        .factors()
        .iter()
        .map(|(s, k)| {
            if *k == 1 {
                symbol(s.name())
            } else {
                format!("{}^{{{k}}}", symbol(s.name()))
            }
        })
        .collect();
    parts.join(" ")
}

/// Integer-coefficient polynomial, highest terms first.
fn poly(p: &Poly) -> String {
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&number(&a));
        } else {
            if !a.is_one() {
                out.push_str(&number(&a));
                out.push(' ');
            }
            out.push_str(&monomial(m));
        }
    }
    out
}

fn number(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!(r"\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

struct Factored {
    negative: bool,
    num: Vec<String>,
    den: Vec<String>,
    /// Numerator is a single bracketed-worthy sum.
    num_is_sum: bool,
}

fn split_abbreviations(r: &RatFunc, opts: &LatexOptions) -> (Poly, Poly, Vec<String>, Vec<String>) {
    let mut num = r.num().clone();
    let mut den = r.den().clone();
    let mut up = Vec::new();
    let mut down = Vec::new();
    // Ratios such as reduced masses go first; otherwise a plain sum would
    // consume their numerators.
    let mut ordered: Vec<&(String, ScalarExpr)> = opts.abbreviations.iter().collect();
    ordered.sort_by_key(|(_, v)| v.grade_part(0).den().is_one());
    for (name, value) in ordered {
        let Some(0) = value.homogeneous_grade() else {
            continue;
        };
        let v = value.grade_part(0);
        if v.as_constant().is_some() {
            continue;
        }
        let (p, q) = (v.num(), v.den());
        // 1/A = q/p
        while let (Some(d), Some(n)) = (den.div_exact(p), num.div_exact(q)) {
            den = d;
            num = n;
            down.push(symbol(name));
        }
        while let (Some(n), Some(d)) = (num.div_exact(p), den.div_exact(q)) {
            num = n;
            den = d;
            up.push(symbol(name));
        }
    }
    (num, den, powers(up), powers(down))
}

/// Collapses adjacent repeats into `X^{k}`.
fn powers(names: Vec<String>) -> Vec<String> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for n in names {
        match out.last_mut() {
            Some((last, k)) if *last == n => *k += 1,
            _ => out.push((n, 1)),
        }
    }
    out.into_iter()
        .map(|(n, k)| if k == 1 { n } else { format!("{n}^{{{k}}}") })
        .collect()
}

/// Largest monomial dividing every term.
fn monomial_content(p: &Poly) -> Monomial {
    let mut terms = p.terms();
    let Some((first, _)) = terms.next() else {
        return Monomial::one();
    };
    let mut exps: Vec<(Symbol, u32)> = first.factors().to_vec();
    for (m, _) in terms {
        for (s, k) in exps.iter_mut() {
            *k = (*k).min(m.exponent(*s));
        }
    }
    exps.into_iter()
        .filter(|(_, k)| *k > 0)
        .fold(Monomial::one(), |acc, (s, k)| acc.mul(&Monomial::var(s, k)))
}

fn factor_ratfunc(r: &RatFunc, extra_den: &[String], opts: &LatexOptions) -> Factored {
    let (num, den, up, down) = split_abbreviations(r, opts);
    let kn = int_gcd_lcm(&num);
    let kd = int_gcd_lcm(&den);
    let num = num.scale(&kn.recip());
    let den = den.scale(&kd.recip());
    let k = kn / kd;
    let negative = k.is_negative();
    let k = k.abs();
    let mut n = Vec::new();
    let mut d = Vec::new();
    if !k.numer().is_one() {
        n.push(k.numer().to_string());
    }
    if !k.denom().is_one() {
        d.push(k.denom().to_string());
    }
    let mut num_is_sum = false;
    if !num.is_one() {
        let mut num = num;
        if num.len() > 1 {
            num_is_sum = true;
            let g = monomial_content(&num);
            if !g.is_one() {
                num = num
                    .div_exact(&Poly::term(Rational::one(), g.clone()))
                    .expect("monomial content divides");
                n.push(monomial(&g));
            }
        }
        n.push(poly(&num));
    }
    n.extend(up);
    if !den.is_one() {
        let s = poly(&den);
        d.push(
            if den.len() > 1 && (d.len() + down.len() + extra_den.len()) > 0 {
                format!("({s})")
            } else {
                s
            },
        );
    }
    d.extend(down);
    d.extend(extra_den.iter().cloned());
    Factored {
        negative,
        num: n,
        den: d,
        num_is_sum,
    }
}

impl Factored {
    /// Coefficient text, empty for a unit coefficient. `alone` is true when
    /// nothing multiplies it.
    fn render(&self, alone: bool) -> String {
        if self.den.is_empty() {
            if self.num.is_empty() {
                return if alone { "1".into() } else { String::new() };
            }
            let parts: Vec<String> = if self.num_is_sum && (self.num.len() > 1 || !alone) {
                self.num
                    .iter()
                    .map(|s| {
                        if s.contains(" + ") || s.contains(" - ") {
                            format!("({s})")
                        } else {
                            s.clone()
                        }
                    })
                    .collect()
            } else {
                self.num.clone()
            };
            return parts.join(" ");
        }
        let top = if self.num.is_empty() {
            "1".to_owned()
        } else if self.num.len() > 1 && self.num_is_sum {
            self.num
                .iter()
                .map(|s| {
                    if s.contains(" + ") || s.contains(" - ") {
                        format!("({s})")
                    } else {
                        s.clone()
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            self.num.join(" ")
        };
        format!(r"\frac{{{top}}}{{{}}}", self.den.join(" "))
    }
}

fn prepare(s: &ScalarExpr, opts: &LatexOptions) -> ScalarExpr {
    if !opts.hbar_c_units {
        return s.clone();
    }
    s.substitute(Symbol::new("hbar"), &RatFunc::one())
        .substitute(Symbol::new("c"), &RatFunc::one())
}

/// Signed pieces `(negative, text)` of a coefficient times `rest`, with
/// `extra_den` joining the coefficient's denominator.
fn signed_terms(
    coeff: &ScalarExpr,
    rest: &str,
    extra_den: &[String],
    opts: &LatexOptions,
) -> Vec<(bool, String)> {
    let coeff = prepare(coeff, opts);
    let mut out = Vec::new();
    for (g, r) in coeff.grades() {
        let f = factor_ratfunc(r, extra_den, opts);
        let mu = mu_power(g, opts);
        let c = f.render(rest.is_empty() && mu.is_empty());
        let text = [mu.as_str(), c.as_str(), rest]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(" ");
        out.push((f.negative, text));
    }
    out
}

fn join_signed(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, text)) in parts.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&text);
    }
    out
}

pub fn scalar(s: &ScalarExpr, opts: &LatexOptions) -> String {
    join_signed(signed_terms(s, "", &[], opts))
}

fn atom(a: &VecAtom, opts: &LatexOptions) -> String {
    match a {
        VecAtom::Position(Frame::Lab, i) => format!("r_{{{i}}}"),
        VecAtom::Position(Frame::Jacobi, i) => format!("R_{{{i}}}"),
        VecAtom::Momentum(Frame::Lab, i) => format!("p_{{{i}}}"),
        VecAtom::Momentum(Frame::Jacobi, i) => format!("P_{{{i}}}"),
        VecAtom::Spin(i) => format!("S_{{{i}}}"),
        VecAtom::MagneticMoment(i) => format!(r"\mathcal{{M}}_{{{i}}}"),
        VecAtom::Field(f) => field(f, opts),
    }
}

fn field(f: &FieldAtom, opts: &LatexOptions) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < f.dirs.len() {
        let mut j = i;
        while j < f.dirs.len() && f.dirs[j] == f.dirs[i] {
            j += 1;
        }
        let d = vec_term(&f.dirs[i], opts, true);
        if j - i == 1 {
            out.push_str(&format!(r"({d}\cdot\nabla)"));
        } else {
            out.push_str(&format!(r"({d}\cdot\nabla)^{{{}}}", j - i));
        }
        i = j;
    }
    let point = vector(&f.point, opts);
    let mu = mu_power(f.scale as i32, opts);
    let arg = if mu.is_empty() {
        point
    } else if f.point.len() > 1 {
        format!("{mu}({point})")
    } else if let Some(rest) = point.strip_prefix('-') {
        format!("-{mu} {rest}")
    } else {
        format!("{mu} {point}")
    };
    out.push_str(&format!("{}({arg})", f.kind.name()));
    out
}

/// `nested` requests parentheses around a cross product.
fn vec_term(t: &VecTerm, opts: &LatexOptions, nested: bool) -> String {
    match t {
        VecTerm::Atom(a) => atom(a, opts),
        VecTerm::Cross(a, b) => {
            let s = format!(
                r"{}\wedge {}",
                vec_term(a, opts, true),
                vec_term(b, opts, true)
            );
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

pub fn vector(v: &VecExpr, opts: &LatexOptions) -> String {
    let mut parts = Vec::new();
    for (t, c) in v.terms() {
        parts.extend(signed_terms(c, &vec_term(t, opts, true), &[], opts));
    }
    join_signed(parts)
}

fn is_compound(t: &VecTerm) -> bool {
    match t {
        VecTerm::Cross(..) => true,
        VecTerm::Atom(VecAtom::Field(f)) => !f.dirs.is_empty(),
        VecTerm::Atom(_) => false,
    }
}

pub fn factor(f: &OpFactor, opts: &LatexOptions) -> String {
    match f {
        OpFactor::Dot(a, b) if a == b => {
            let s = vec_term(a, opts, false);
            if is_compound(a) || matches!(a, VecTerm::Atom(VecAtom::Field(_))) {
                format!(r"\left({s}\right)^{{2}}")
            } else {
                format!("{s}^{{2}}")
            }
        }
        OpFactor::Dot(a, b) => {
            format!(
                r"{}\cdot {}",
                vec_term(a, opts, true),
                vec_term(b, opts, true)
            )
        }
        OpFactor::InverseNorm(v) => format!(r"\frac{{1}}{{|{}|}}", vector(v, opts)),
        OpFactor::Named(n) if n == FREE_FIELD_ATOM => "H_{f}".into(),
        OpFactor::Named(n) if n == SELF_ENERGY_ATOM => r"H_{\mathrm{self}}".into(),
        OpFactor::Named(n) => format!(r"\mathrm{{{}}}", n.replace('_', r"\_")),
    }
}

fn term_parts(t: &OpTerm, opts: &LatexOptions) -> Vec<(bool, String)> {
    let mut ops = Vec::new();
    let mut norms = Vec::new();
    for f in &t.factors {
        match f {
            // Coulomb factors join the coefficient's denominator unless
            // they sit inside an h.c. bracket.
            OpFactor::InverseNorm(v) if !t.hc => norms.push(format!("|{}|", vector(v, opts))),
            f => ops.push(factor(f, opts)),
        }
    }
    let ops = ops.join(" ");
    let rest = if t.hc {
        format!(r"\left[{ops} + \mathrm{{h.c.}}\right]")
    } else {
        ops
    };
    signed_terms(&t.coeff, &rest, &norms, opts)
}

pub fn op(e: &OpExpr, opts: &LatexOptions) -> String {
    join_signed(
        e.to_terms()
            .iter()
            .flat_map(|t| term_parts(t, opts))
            .collect(),
    )
}

/// One term per line, continuation lines starting with the sign.
pub fn op_multiline(e: &OpExpr, opts: &LatexOptions) -> String {
    let parts: Vec<(bool, String)> = e
        .to_terms()
        .iter()
        .flat_map(|t| term_parts(t, opts))
        .collect();
    if parts.is_empty() {
        return "0".into();
    }
    let mut lines = Vec::new();
    for (i, (neg, text)) in parts.into_iter().enumerate() {
        lines.push(match (i, neg) {
            (0, true) => format!("-{text}"),
            (0, false) => text,
            (_, true) => format!("  - {text}"),
            (_, false) => format!("  + {text}"),
        });
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::parse_op;
    use crate::symkernel::SymbolTable;

    fn table() -> SymbolTable {
        let mut t = SymbolTable::standard();
        for m in ["m1", "m2"] {
            t.insert(m, crate::symkernel::SymbolKind::Mass);
        }
        t
    }

    fn hydrogen() -> LatexOptions {
        LatexOptions {
            z: Some(1),
            hbar_c_units: true,
            abbreviations: Vec::new(),
        }
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(op(&OpExpr::zero(), &hydrogen()), "0");
    }

    #[test]
    fn electric_dipole() {
        let e = parse_op("(* (neg e) (dot (R 2) (field E 1 (R 1))))", &table()).unwrap();
        assert_eq!(op(&e, &hydrogen()), r"-e R_{2}\cdot E(\alpha R_{1})");
    }

    #[test]
    fn marked_term_is_bracketed() {
        let e = parse_op(
            "(hc (* (/ e (* 2 (+ m1 m2))) (dot (P 1) (cross (R 2) (field B 1 (R 1))))))",
            &table(),
        )
        .unwrap();
        let mut o = hydrogen();
        o.abbreviations.push((
            "M1".into(),
            ScalarExpr::symbol("m1").add(&ScalarExpr::symbol("m2")),
        ));
        assert_eq!(
            op(&e, &o),
            r"\frac{e}{2 M_{1}} \left[P_{1}\cdot (R_{2}\wedge B(\alpha R_{1})) + \mathrm{h.c.}\right]"
        );
    }

    #[test]
    fn reduced_mass_abbreviation() {
        let e = parse_op("(* (/ (+ m1 m2) (* 2 m1 m2)) (dot (P 2) (P 2)))", &table()).unwrap();
        let mut o = hydrogen();
        let m1 = ScalarExpr::symbol("m1");
        let m2 = ScalarExpr::symbol("m2");
        o.abbreviations
            .push(("mu12".into(), m1.mul(&m2).div(&m1.add(&m2)).unwrap()));
        assert_eq!(op(&e, &o), r"\frac{1}{2 \mu_{12}} P_{2}^{2}");
    }

    #[test]
    fn coulomb_factor_joins_the_fraction() {
        let e = parse_op("(* -1/2 hbar c (invnorm (R 2)))", &table()).unwrap();
        assert_eq!(op(&e, &hydrogen()), r"-\frac{1}{2 |R_{2}|}");
        let o = LatexOptions {
            hbar_c_units: false,
            ..hydrogen()
        };
        assert_eq!(op(&e, &o), r"-\frac{c \hbar}{2 |R_{2}|}");
    }

    #[test]
    fn monomial_content_is_pulled_out() {
        let e = parse_op("(* (+ (* 3 e m1) (* -1 e m2)) (dot (P 1) (P 1)))", &table()).unwrap();
        assert_eq!(op(&e, &hydrogen()), r"e (3 m_{1} - m_{2}) P_{1}^{2}");
    }

    #[test]
    fn symbols() {
        assert_eq!(symbol("m12"), "m_{12}");
        assert_eq!(symbol("eps0"), r"\varepsilon_0");
        assert_eq!(symbol("mu"), r"\mu");
        assert_eq!(symbol("mp"), r"\mathrm{mp}");
    }
}
