//! Native line format and DOT emission.
//!
//! ```text
//! # comment
//! role causal-dag            # causal-dag | ipg | mdg | pearl
//! obs A B C
//! lat L                      # causal-dag only
//! edge L -> A                # -> <- <-> o-> <-o o-o -o o-
//! hidden A -> B              # hidden edge of an expansion
//! noncollider A B C          # mdg only, B is the center
//! ```
//!
//! `role` must be the first directive. Several graphs may share one stream;
//! each starts at its own `role` line (see [`parse_graphs`]).

use std::fmt::Write as _;

use super::{GraphBuilder, Kind, Mark, MixedGraph, Role};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Dot,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (k, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token { text: &body[s..k], column: body[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    tokens
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '\''))
}

/// Connector text to (mark at left, mark at right).
fn connector(text: &str) -> Option<(Mark, Mark)> {
    use Mark::*;
    Some(match text {
        "->" => (Tail, Arrow),
        "<-" => (Arrow, Tail),
        "<->" => (Arrow, Arrow),
        "o->" => (Circle, Arrow),
        "<-o" => (Arrow, Circle),
        "o-o" => (Circle, Circle),
        "-o" => (Tail, Circle),
        "o-" => (Circle, Tail),
        _ => return None,
    })
}

/// Parses one graph in the native format.
pub fn parse_graph(text: &str) -> Result<MixedGraph> {
    let mut graphs = parse_graphs(text)?;
    match graphs.len() {
        1 => Ok(graphs.pop().unwrap()),
        0 => Err(syntax(1, 1, "missing `role` line")),
        _ => {
            let second = text
                .lines()
                .enumerate()
                .filter(|(_, l)| tokenize(l).first().map(|t| t.text) == Some("role"))
                .nth(1)
                .map(|(k, _)| k + 1)
                .unwrap_or(1);
            Err(syntax(second, 1, "more than one graph in input"))
        }
    }
}

/// Parses a stream of graphs, each introduced by its own `role` line.
pub fn parse_graphs(text: &str) -> Result<Vec<MixedGraph>> {
    let mut graphs = Vec::new();
    let mut current: Option<(GraphBuilder, Role)> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let tokens = tokenize(raw);
        let Some(head) = tokens.first() else { continue };
        let args = &tokens[1..];
        if head.text == "role" {
            if args.len() != 1 {
                return Err(syntax(line, head.column, "`role` takes exactly one argument"));
            }
            let role = Role::from_keyword(args[0].text).ok_or_else(|| {
                syntax(line, args[0].column, format!("unknown role `{}`", args[0].text))
            })?;
            if let Some((b, _)) = current.take() {
                graphs.push(b.build()?);
            }
            current = Some((GraphBuilder::new(role), role));
            continue;
        }
        let Some((builder, role)) = current.take() else {
            return Err(syntax(line, head.column, "expected `role` before other directives"));
        };
        let name_at = |t: &Token| -> Result<String> {
            if valid_name(t.text) {
                Ok(t.text.to_string())
            } else {
                Err(syntax(line, t.column, format!("invalid vertex name `{}`", t.text)))
            }
        };
        let builder = match head.text {
            "obs" | "lat" => {
                if args.is_empty() {
                    return Err(syntax(line, head.column, format!("`{}` needs names", head.text)));
                }
                let kind = if head.text == "obs" { Kind::Observable } else { Kind::Latent };
                let mut b = builder;
                for t in args {
                    b = b.vertex(&name_at(t)?, kind);
                }
                b
            }
            "edge" | "hidden" => {
                if args.len() != 3 {
                    return Err(syntax(
                        line,
                        head.column,
                        format!("`{}` expects: NAME CONNECTOR NAME", head.text),
                    ));
                }
                let x = name_at(&args[0])?;
                let y = name_at(&args[2])?;
                if args[1].text == "--" {
                    return Err(syntax(line, args[1].column, "tail-tail edges are not allowed"));
                }
                let (mx, my) = connector(args[1].text).ok_or_else(|| {
                    syntax(line, args[1].column, format!("unknown connector `{}`", args[1].text))
                })?;
                if head.text == "hidden" {
                    match args[1].text {
                        "->" => builder.hidden(&x, &y),
                        "<-" => builder.hidden(&y, &x),
                        _ => {
                            return Err(syntax(
                                line,
                                args[1].column,
                                "hidden edges must be directed",
                            ))
                        }
                    }
                } else {
                    builder.edge(&x, mx, my, &y)
                }
            }
            "noncollider" => {
                if args.len() != 3 {
                    return Err(syntax(line, head.column, "`noncollider` expects three names"));
                }
                builder.noncollider(&name_at(&args[0])?, &name_at(&args[1])?, &name_at(&args[2])?)
            }
            other => {
                return Err(syntax(line, head.column, format!("unknown directive `{other}`")))
            }
        };
        current = Some((builder, role));
    }
    if let Some((b, _)) = current {
        graphs.push(b.build()?);
    }
    Ok(graphs)
}

/// Writes `g` in the requested format. Native output parses back to `g`.
pub fn serialize_graph(g: &MixedGraph, format: Format) -> String {
    match format {
        Format::Native => native(g),
        Format::Dot => dot(g),
    }
}

fn edge_text(g: &MixedGraph, u: usize, mu: Mark, mv: Mark, v: usize) -> String {
    use Mark::*;
    let (x, conn, y) = match (mu, mv) {
        (Tail, Arrow) => (u, "->", v),
        (Arrow, Tail) => (v, "->", u),
        (Arrow, Arrow) => (u, "<->", v),
        (Circle, Arrow) => (u, "o->", v),
        (Arrow, Circle) => (v, "o->", u),
        (Circle, Circle) => (u, "o-o", v),
        (Tail, Circle) => (u, "-o", v),
        (Circle, Tail) => (v, "-o", u),
        (Tail, Tail) => (u, "--", v),
    };
    format!("{} {} {}", g.name(x), conn, g.name(y))
}

fn native(g: &MixedGraph) -> String {
    let mut out = format!("role {}\n", g.role());
    let obs: Vec<&str> = g.observables().map(|i| g.name(i)).collect();
    if !obs.is_empty() {
        let _ = writeln!(out, "obs {}", obs.join(" "));
    }
    let lat: Vec<&str> = g.latents().map(|i| g.name(i)).collect();
    if !lat.is_empty() {
        let _ = writeln!(out, "lat {}", lat.join(" "));
    }
    for e in g.edges() {
        let keyword = if e.hidden { "hidden" } else { "edge" };
        let _ = writeln!(out, "{keyword} {}", edge_text(g, e.u, e.mark_u, e.mark_v, e.v));
    }
    for t in g.noncolliders() {
        let _ = writeln!(
            out,
            "noncollider {} {} {}",
            g.name(t[0]),
            g.name(t[1]),
            g.name(t[2])
        );
    }
    out
}

fn dot_mark(m: Mark) -> &'static str {
    match m {
        Mark::Tail => "none",
        Mark::Arrow => "normal",
        Mark::Circle => "odot",
    }
}

fn dot(g: &MixedGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        let shape = match v.kind {
            Kind::Observable => "box",
            Kind::Latent => "circle",
        };
        let _ = writeln!(out, "  \"{}\" [shape={shape}];", v.name);
    }
    for e in g.edges() {
        let style = if e.hidden { ", style=dashed" } else { "" };
        let (u, mu, mv, v) = if e.mark_v == Mark::Tail && e.mark_u != Mark::Tail {
            (e.v, e.mark_v, e.mark_u, e.u)
        } else {
            (e.u, e.mark_u, e.mark_v, e.v)
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [dir=both, arrowtail={}, arrowhead={}{style}];",
            g.name(u),
            g.name(v),
            dot_mark(mu),
            dot_mark(mv)
        );
    }
    for t in g.noncolliders() {
        let _ = writeln!(
            out,
            "  // noncollider {} {} {}",
            g.name(t[0]),
            g.name(t[1]),
            g.name(t[2])
        );
    }
    out.push_str("}\n");
    out
}
