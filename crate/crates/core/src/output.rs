//! Text rendering of pipeline results for the command-line tool.
//!
//! Canonical output is itself a reference document: `;` lines are comments
//! and the remaining forms can be fed back to `verify`.

use std::fmt::Write;

use crate::canonical;
use crate::config::{OutputFormat, RunConfig};
use crate::jacobi::{check_invariants, InvariantCheck, JacobiError, JacobiScheme};
use crate::latex::{self, LatexOptions};
use crate::pipeline::Expansion;
use crate::pzw::Hamiltonian;
use crate::scaling::{leading_grades, ScalingSolution};
use crate::symkernel::ScalarExpr;

pub fn latex_options(cfg: &RunConfig) -> LatexOptions {
    LatexOptions {
        z: Some(cfg.spec.system.z),
        hbar_c_units: cfg.hbar_c_units,
        abbreviations: cfg.abbreviations.clone(),
    }
}

fn indent(text: &str, by: &str) -> String {
    text.lines().collect::<Vec<_>>().join(&format!("\n{by}"))
}

fn commented(text: &str) -> String {
    text.lines().map(|l| format!("; {l}\n")).collect()
}

/// Two-line comment block naming the run and its scaling constants.
pub fn header(cfg: &RunConfig, command: &str, solution: &ScalingSolution) -> String {
    let s = &cfg.spec;
    format!(
        "; mpqed {command}: system {}, scheme {}, order {}\n; scaling: {solution}, Z = {}\n",
        s.system.name, s.scheme, s.order, s.system.z
    )
}

fn tags(exp: &Expansion, g: i32) -> String {
    exp.hierarchy
        .tags(g)
        .iter()
        .map(|(f, n)| format!("{f}{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn expansion_canonical(cfg: &RunConfig, exp: &Expansion) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "(reference (system {}) (variant oracle))",
        cfg.spec.system.name
    )
    .unwrap();
    writeln!(
        out,
        "(h0 {})",
        indent(&canonical::op_multiline(&exp.h0), "  ")
    )
    .unwrap();
    for &g in exp.hierarchy.blocks.keys() {
        let block = exp.hierarchy.block(g).shift_grade(-g);
        writeln!(out, "; families: {}", tags(exp, g)).unwrap();
        writeln!(
            out,
            "(grade {g} {})",
            indent(&canonical::op_multiline(&block), "  ")
        )
        .unwrap();
    }
    out
}

fn expansion_latex(cfg: &RunConfig, exp: &Expansion) -> String {
    let o = latex_options(cfg);
    let mut out = String::new();
    writeln!(out, "H_0 = {}", latex::op_multiline(&exp.h0, &o)).unwrap();
    for &g in exp.hierarchy.blocks.keys() {
        let block = exp.hierarchy.block(g).shift_grade(-g);
        writeln!(out, "W^{{{g}}} = {}", latex::op_multiline(&block, &o)).unwrap();
    }
    out
}

fn with_format(format: OutputFormat, canonical: String, latex: String) -> String {
    match format {
        OutputFormat::Canonical => canonical,
        OutputFormat::Latex => latex,
        OutputFormat::Both => format!("{canonical};\n; LaTeX\n{}", commented(&latex)),
    }
}

pub fn expansion(cfg: &RunConfig, exp: &Expansion, format: OutputFormat) -> String {
    let body = with_format(
        format,
        expansion_canonical(cfg, exp),
        expansion_latex(cfg, exp),
    );
    format!("{}{body}", header(cfg, "expand", &exp.solution))
}

/// Jacobi table, effective masses and invariant checks. The boolean is
/// false when an invariant fails.
pub fn jacobi(
    cfg: &RunConfig,
    scheme: &JacobiScheme,
    solution: &ScalingSolution,
    format: OutputFormat,
) -> Result<(String, bool), JacobiError> {
    let o = latex_options(cfg);
    let n = scheme.n();
    let mut can = String::new();
    let mut tex = String::new();
    writeln!(can, "; partition {}", scheme.tree).unwrap();
    for a in 1..=n {
        writeln!(
            can,
            "(position-row {a} {})",
            canonical::vector(&scheme.position_row(a))
        )
        .unwrap();
        writeln!(
            tex,
            "r_{{{a}}} = {}",
            latex::vector(&scheme.position_row(a), &o)
        )
        .unwrap();
    }
    for a in 1..=n {
        writeln!(
            can,
            "(momentum-row {a} {})",
            canonical::vector(&scheme.momentum_row(a))
        )
        .unwrap();
        writeln!(
            tex,
            "p_{{{a}}} = {}",
            latex::vector(&scheme.momentum_row(a), &o)
        )
        .unwrap();
    }
    for (i, m) in scheme.masses.iter().enumerate() {
        writeln!(can, "; mass {} = {}", i + 1, canonical::scalar(m)).unwrap();
        writeln!(
            tex,
            r"\mathcal{{M}}^{{\mathrm{{eff}}}}_{{{}}} = {}",
            i + 1,
            latex::scalar(m, &o)
        )
        .unwrap();
    }
    let checks = check_invariants(scheme)?;
    let ok = checks.iter().all(|c| c.passed);
    let mut inv = String::new();
    for InvariantCheck {
        name,
        passed,
        residual,
    } in &checks
    {
        match residual {
            _ if *passed => writeln!(inv, "; invariant {name}: ok").unwrap(),
            Some(r) => writeln!(inv, "; invariant {name}: FAILED, residual {r}").unwrap(),
            None => writeln!(inv, "; invariant {name}: FAILED").unwrap(),
        }
    }
    let body = with_format(format, can, tex);
    Ok((
        format!("{}{body}{inv}", header(cfg, "jacobi", solution)),
        ok,
    ))
}

/// Scaling constants, the leading grade of every coupling group and the
/// zero-order Hamiltonian.
pub fn scaling(
    cfg: &RunConfig,
    solution: &ScalingSolution,
    h: &Hamiltonian,
    format: OutputFormat,
) -> String {
    let o = latex_options(cfg);
    let mut can = String::new();
    let mut tex = String::new();
    writeln!(can, "; mu exponent of Z alpha: {}", solution.mu).unwrap();
    writeln!(can, "; eta exponent of Z alpha: {}", solution.eta).unwrap();
    writeln!(
        can,
        "; eta/mu exponent of Z alpha: {}",
        &solution.eta - &solution.mu
    )
    .unwrap();
    for (g, grade) in leading_grades(h) {
        writeln!(can, "; group {} enters at grade {grade}", g.name()).unwrap();
    }
    let h0 = h
        .groups
        .iter()
        .filter(|(g, _)| g.is_zero_order())
        .fold(crate::symkernel::OpExpr::zero(), |acc, (_, e)| acc.add(e));
    writeln!(can, "(h0 {})", indent(&canonical::op_multiline(&h0), "  ")).unwrap();
    writeln!(
        tex,
        r"\mu = Z\alpha, \quad \eta = \mu^{{{}}}",
        solution.eta.clone() / solution.mu.clone()
    )
    .unwrap();
    writeln!(tex, "H_0 = {}", latex::op_multiline(&h0, &o)).unwrap();
    format!(
        "{}{}",
        header(cfg, "scale", solution),
        with_format(format, can, tex)
    )
}

/// Renders a standalone scalar with the run's LaTeX options.
pub fn scalar_latex(cfg: &RunConfig, s: &ScalarExpr) -> String {
    latex::scalar(s, &latex_options(cfg))
}
