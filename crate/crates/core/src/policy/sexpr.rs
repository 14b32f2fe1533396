use std::fs;
use std::path::Path;

use super::features::Feature;
use super::tree::{Func, Node, PolicyTree};
use crate::error::{Error, Result};

/// Prefix notation, e.g. `(+ RP (max EMO RMP))`. Constants use the shortest decimal
/// that round-trips.
pub fn to_sexpr(node: &Node) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

fn write_node(node: &Node, out: &mut String) {
    match node {
        Node::Const(c) => out.push_str(&format!("{c:?}")),
        Node::Feature(f) => out.push_str(f.symbol()),
        Node::Func(op, ch) => {
            out.push('(');
            out.push_str(op.symbol());
            for c in ch {
                out.push(' ');
                write_node(c, out);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Token<'_>)> {
    let mut tokens = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some(&(pos, ch)) = iter.peek() {
        match ch {
            '(' => {
                tokens.push((pos, Token::Open));
                iter.next();
            }
            ')' => {
                tokens.push((pos, Token::Close));
                iter.next();
            }
            c if c.is_whitespace() => {
                iter.next();
            }
            _ => {
                let mut end = pos;
                while let Some(&(p, c)) = iter.peek() {
                    if c == '(' || c == ')' || c.is_whitespace() {
                        break;
                    }
                    end = p + c.len_utf8();
                    iter.next();
                }
                tokens.push((pos, Token::Atom(&text[pos..end])));
            }
        }
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    at: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<(usize, Token<'a>)> {
        let t = self.tokens.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn node(&mut self) -> Result<Node> {
        match self.next() {
            None => self.err(self.len, "unexpected end of input"),
            Some((pos, Token::Close)) => self.err(pos, "unexpected ')'"),
            Some((pos, Token::Atom(a))) => atom(a).map_or_else(|| self.err(pos, format!("unknown terminal '{a}'")), Ok),
            Some((open, Token::Open)) => {
                let (pos, name) = match self.next() {
                    Some((p, Token::Atom(a))) => (p, a),
                    Some((p, _)) => return self.err(p, "expected a function name"),
                    None => return self.err(self.len, "unbalanced parenthesis"),
                };
                let Some(op) = Func::from_symbol(name) else {
                    return self.err(pos, format!("unknown function '{name}'"));
                };
                let mut children = Vec::with_capacity(op.arity());
                loop {
                    match self.tokens.get(self.at) {
                        None => return self.err(self.len, format!("unbalanced parenthesis opened at {open}")),
                        Some((p, Token::Close)) => {
                            let p = *p;
                            self.at += 1;
                            if children.len() != op.arity() {
                                return self.err(
                                    p,
                                    format!("'{}' takes {} arguments, got {}", op.symbol(), op.arity(), children.len()),
                                );
                            }
                            return Ok(Node::Func(op, children));
                        }
                        Some(_) => children.push(self.node()?),
                    }
                }
            }
        }
    }
}

fn atom(a: &str) -> Option<Node> {
    if let Ok(f) = a.parse::<Feature>() {
        return Some(Node::Feature(f));
    }
    a.parse::<f64>().ok().filter(|c| c.is_finite()).map(Node::Const)
}

/// Parses one tree. Errors carry the byte offset of the offending token.
pub fn parse_tree(text: &str) -> Result<PolicyTree> {
    let mut p = Parser {
        tokens: tokenize(text),
        at: 0,
        len: text.len(),
    };
    let root = p.node()?;
    if let Some((pos, _)) = p.tokens.get(p.at) {
        return p.err(*pos, "trailing input after tree");
    }
    PolicyTree::new(root)
}

/// One tree per non-blank line; lines starting with `#` are comments.
pub fn parse_policy_file(text: &str) -> Result<Vec<PolicyTree>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            let tree = parse_tree(line.trim_end_matches(['\n', '\r'])).map_err(|e| match e {
                Error::Parse { position, message } => Error::Parse {
                    position: offset + position,
                    message,
                },
                other => other,
            })?;
            out.push(tree);
        }
        offset += line.len();
    }
    Ok(out)
}

pub fn read_policy_file(path: &Path) -> Result<Vec<PolicyTree>> {
    parse_policy_file(&fs::read_to_string(path)?)
}

/// Writes trees one per line, preceded by `#` comment lines.
pub fn write_policy_file(path: &Path, comments: &[String], trees: &[PolicyTree]) -> Result<()> {
    let mut text = String::new();
    for c in comments {
        for line in c.lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
    }
    for t in trees {
        text.push_str(&to_sexpr(t.root()));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}
