//! Line-oriented system files:
//!
//! ```text
//! # Korteweg-de Vries
//! [system]
//! name = kdv
//! independent = x, t
//! dependent = u
//! leading = t
//! [equations]
//! u_t = 6*u*u_x + u_xxx
//! ```

use super::system::{EquationSystem, RawSystem};
use crate::error::{Error, Result};
use crate::expr::{parse_ast, parse_expression, Ast, Context, Mode};

#[derive(PartialEq)]
enum Section {
    None,
    System,
    Equations,
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn parse_system(text: &str) -> Result<RawSystem> {
    let mut section = Section::None;
    let mut name = String::from("unnamed");
    let mut independent: Option<Vec<String>> = None;
    let mut dependent: Option<Vec<String>> = None;
    let mut leading: Option<(usize, String)> = None;
    let mut raw_equations: Vec<(usize, String, String)> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[system]" => {
                section = Section::System;
                continue;
            }
            "[equations]" => {
                section = Section::Equations;
                continue;
            }
            _ if line.starts_with('[') => {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("unknown section {line}"),
                })
            }
            _ => {}
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Format {
                line: lineno,
                msg: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::None => {
                return Err(Error::Format {
                    line: lineno,
                    msg: "entry outside of a section".into(),
                })
            }
            Section::System => match key {
                "name" => name = value.to_string(),
                "independent" => independent = Some(list(value)),
                "dependent" => dependent = Some(list(value)),
                "leading" => leading = Some((lineno, value.to_string())),
                _ => {
                    return Err(Error::Format {
                        line: lineno,
                        msg: format!("unknown key `{key}`"),
                    })
                }
            },
            Section::Equations => raw_equations.push((lineno, key.to_string(), value.to_string())),
        }
    }

    let independent = independent.ok_or(Error::Format {
        line: 0,
        msg: "missing `independent`".into(),
    })?;
    let dependent = dependent.ok_or(Error::Format {
        line: 0,
        msg: "missing `dependent`".into(),
    })?;
    let context = Context::new(&independent, &dependent)?;
    if context.n() == 0 {
        return Err(Error::Format {
            line: 0,
            msg: "no independent variables".into(),
        });
    }
    let leading = match leading {
        None => context.n() - 1,
        Some((line, v)) => context.indep_index(&v).ok_or(Error::Format {
            line,
            msg: format!("leading variable `{v}` is not independent"),
        })?,
    };
    let mut equations = Vec::new();
    for (line, lhs, rhs) in raw_equations {
        let wrap = |e: Error| Error::Format {
            line,
            msg: e.to_string(),
        };
        let lhs = match parse_ast(&lhs, &context, Mode::Scalar).map_err(wrap)? {
            Ast::Coord(c) => c,
            _ => {
                return Err(Error::Format {
                    line,
                    msg: "left-hand side must be a single jet coordinate".into(),
                })
            }
        };
        let rhs = parse_expression(&rhs, &context).map_err(wrap)?;
        equations.push((lhs, rhs));
    }
    Ok(RawSystem {
        name,
        context,
        leading,
        equations,
    })
}

pub fn write_system(system: &EquationSystem) -> String {
    let ctx = system.context();
    let mut out = String::new();
    out.push_str("[system]\n");
    out.push_str(&format!("name = {}\n", system.name()));
    out.push_str(&format!("independent = {}\n", ctx.independent().join(", ")));
    out.push_str(&format!("dependent = {}\n", ctx.dependent().join(", ")));
    out.push_str(&format!(
        "leading = {}\n",
        ctx.independent()[system.leading()]
    ));
    out.push_str("[equations]\n");
    for (j, f) in system.rhs().iter().enumerate() {
        out.push_str(&format!(
            "{}_{} = {}\n",
            ctx.dependent()[j],
            ctx.independent()[system.leading()],
            f.to_string_in(ctx)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_default_leading() {
        let raw = parse_system("# heat\n[system]\nname = heat # trailing\nindependent = x, t\ndependent = u\n\n[equations]\nu_t = u_xx\n").unwrap();
        assert_eq!(raw.leading, 1);
        assert_eq!(raw.name, "heat");
        let sys = EquationSystem::from_raw(raw).unwrap();
        let again = EquationSystem::from_raw(parse_system(&write_system(&sys)).unwrap()).unwrap();
        assert_eq!(again.rhs(), sys.rhs());
    }

    #[test]
    fn leading_override() {
        let raw = parse_system(
            "[system]\nindependent = t, x\ndependent = u\nleading = t\n[equations]\nu_t = u_xx\n",
        )
        .unwrap();
        assert_eq!(raw.leading, 0);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_system("u_t = u"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(
            parse_system("[system]\nindependent = x\n"),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            parse_system("[system]\nindependent = x, t\ndependent = u\n[equations]\nu_t = w\n"),
            Err(Error::Format { line: 5, .. })
        ));
        assert!(matches!(
            parse_system("[bogus]\n"),
            Err(Error::Format { line: 1, .. })
        ));
    }
}
