//! Textual polynomial, pair and group-element specifications.
//!
//! Polynomials:
//! - `disc:<d>`, `res:<d>`: rational normal curve hyperdiscriminant / resultant
//! - `det:<n>`: the `n x n` determinant
//! - `zpow:<cols>:<d>`: `z_0^d` on `1 x cols`
//! - `const:<cols>`: the constant `1` on `1 x cols`
//! - `monomial:[[e00,e01,..],[e10,..]]`: a single monomial with coefficient 1
//! - `{...}`: inline polynomial JSON; anything else is a path to a JSON file
//!
//! A trailing `^k` makes a formal tensor power. Pairs are `v=<poly>,w=<poly>`.
//! Group elements are `id:<n>`, `diag:<x0>,<x1>,..`, `matrix:[[..],..]` (real),
//! or `ray:<l0>,<l1>,..@<t>` for `λ(t)`.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pairstab::PairSpec;
use crate::polyrep::{
    builtins, CMatrix, FormalPower, GroupElement, MatrixShape, OnePSG, Poly, PolynomialJson, SparsePolynomial,
};
use crate::varieties::{rnc_hyperdiscriminant, rnc_resultant};

fn parse_num<T: std::str::FromStr>(s: &str, location: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(location, format!("expected a number, found '{s}'")))
}

/// Splits a trailing `^k`, ignoring carets inside brackets or braces.
fn split_power(spec: &str) -> (&str, Option<&str>) {
    let mut depth = 0i32;
    let mut caret = None;
    for (i, ch) in spec.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            '^' if depth == 0 => caret = Some(i),
            _ => {}
        }
    }
    match caret {
        Some(i) => (&spec[..i], Some(&spec[i + 1..])),
        None => (spec, None),
    }
}

pub fn parse_poly_json(text: &str, location: &str) -> Result<SparsePolynomial> {
    let j: PolynomialJson =
        serde_json::from_str(text).map_err(|e| Error::parse(location, format!("invalid polynomial JSON: {e}")))?;
    SparsePolynomial::from_json(&j).map_err(|e| match e {
        Error::Parse {
            location: inner,
            message,
        } => Error::parse(format!("{location}: {inner}"), message),
        other => other,
    })
}

/// Parses a polynomial specification; `location` prefixes error locations.
pub fn parse_poly_at(spec: &str, location: &str) -> Result<FormalPower> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::parse(location, "empty polynomial specification"));
    }
    let (body, power) = split_power(spec);
    let k: u32 = match power {
        Some(p) => parse_num(p, &format!("{location}: exponent"))?,
        None => 1,
    };
    let base: Poly = if body.starts_with('{') {
        parse_poly_json(body, location)?.into()
    } else if let Some((kind, arg)) = body.split_once(':') {
        let here = format!("{location}: {kind}");
        match kind {
            "disc" => rnc_hyperdiscriminant(parse_num(arg, &here)?)?,
            "res" => rnc_resultant(parse_num(arg, &here)?)?,
            "det" => builtins::determinant(parse_num(arg, &here)?)?.into(),
            "const" => {
                let cols: usize = parse_num(arg, &here)?;
                SparsePolynomial::constant(MatrixShape::new(1, cols)?, Complex64::new(1.0, 0.0)).into()
            }
            "zpow" => {
                let (cols, d) = arg
                    .split_once(':')
                    .ok_or_else(|| Error::parse(&here, "expected zpow:<cols>:<d>"))?;
                builtins::coordinate_power(parse_num(cols, &here)?, parse_num(d, &here)?)?.into()
            }
            "monomial" => {
                let rows: Vec<Vec<u32>> = serde_json::from_str(arg)
                    .map_err(|e| Error::parse(&here, format!("expected an exponent matrix: {e}")))?;
                let cols = rows.first().map_or(0, Vec::len);
                if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
                    return Err(Error::parse(&here, "exponent matrix must be rectangular and nonempty"));
                }
                let shape = MatrixShape::new(rows.len(), cols)?;
                SparsePolynomial::monomial(shape, rows.concat(), Complex64::new(1.0, 0.0))?.into()
            }
            other if other.len() > 1 => {
                return Err(Error::parse(location, format!("unknown polynomial kind '{other}'")));
            }
            // A one-letter prefix is a Windows drive, not a kind.
            _ => read_json_file(body, location)?.into(),
        }
    } else {
        read_json_file(body, location)?.into()
    };
    FormalPower::new(base, k)
}

fn read_json_file(path: &str, location: &str) -> Result<SparsePolynomial> {
    let p = Path::new(path);
    let text = std::fs::read_to_string(p).map_err(|e| Error::parse(location, format!("cannot read '{path}': {e}")))?;
    parse_poly_json(&text, &format!("{location}: {path}"))
}

pub fn parse_poly(spec: &str) -> Result<FormalPower> {
    parse_poly_at(spec, "poly")
}

/// `v=<poly>,w=<poly>`; the split is at the first top-level `,w=`.
pub fn parse_pair(spec: &str) -> Result<PairSpec> {
    let spec = spec.trim();
    let rest = spec
        .strip_prefix("v=")
        .ok_or_else(|| Error::parse("pair", "expected 'v=<poly>,w=<poly>'"))?;
    let mut depth = 0i32;
    let mut split = None;
    for (i, ch) in rest.char_indices() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 && rest[i + 1..].starts_with("w=") => {
                split = Some(i);
                break;
            }
            _ => {}
        }
    }
    let i = split.ok_or_else(|| Error::parse("pair", "missing ',w=<poly>'"))?;
    let v = parse_poly_at(&rest[..i], "pair.v")?;
    let w = parse_poly_at(&rest[i + 3..], "pair.w")?;
    PairSpec::new(v, w)
}

/// A group element, or a point on a diagonal one-parameter subgroup.
#[derive(Clone, Debug)]
pub enum SigmaSpec {
    Element(GroupElement),
    Ray { lambda: OnePSG, t: f64 },
}

impl SigmaSpec {
    pub fn element(&self) -> GroupElement {
        match self {
            SigmaSpec::Element(g) => g.clone(),
            SigmaSpec::Ray { lambda, t } => lambda.at(Complex64::new(*t, 0.0)),
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, location: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| parse_num(x, location)).collect()
}

pub fn parse_sigma(spec: &str) -> Result<SigmaSpec> {
    let spec = spec.trim();
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::parse("sigma", "expected id:, diag:, matrix: or ray:"))?;
    let here = format!("sigma: {kind}");
    match kind {
        "id" => Ok(SigmaSpec::Element(GroupElement::identity(parse_num(arg, &here)?))),
        "diag" => {
            let xs: Vec<f64> = parse_list(arg, &here)?;
            let zs: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            Ok(SigmaSpec::Element(GroupElement::diagonal(&zs)?))
        }
        "matrix" => {
            let rows: Vec<Vec<f64>> =
                serde_json::from_str(arg).map_err(|e| Error::parse(&here, format!("expected a real matrix: {e}")))?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(Error::parse(&here, "matrix must be square and nonempty"));
            }
            Ok(SigmaSpec::Element(GroupElement::new(CMatrix::from_fn(
                n,
                n,
                |i, j| Complex64::new(rows[i][j], 0.0),
            ))?))
        }
        "ray" => {
            let (lam, t) = arg
                .split_once('@')
                .ok_or_else(|| Error::parse(&here, "expected ray:<l0>,<l1>,..@<t>"))?;
            let t: f64 = parse_num(t, &here)?;
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::parse(&here, "t must be a positive real"));
            }
            Ok(SigmaSpec::Ray {
                lambda: OnePSG::new(parse_list(lam, &here)?)?,
                t,
            })
        }
        other => Err(Error::parse("sigma", format!("unknown group element kind '{other}'"))),
    }
}
