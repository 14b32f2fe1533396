use std::fmt;

use super::features::{compute_features, Feature, FeatureVector};
use crate::error::{Error, Result};
use crate::simulator::{select_max, DecisionView, Policy};

/// Function set. Every function is safeguarded: a non-finite result becomes 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Add,
    Sub,
    Mul,
    Div,
    Max,
    Min,
    Sin,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Add,
        Func::Sub,
        Func::Mul,
        Func::Div,
        Func::Max,
        Func::Min,
        Func::Sin,
    ];

    pub fn arity(self) -> usize {
        match self {
            Func::Sin => 1,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Func::Add => "+",
            Func::Sub => "-",
            Func::Mul => "*",
            Func::Div => "/",
            Func::Max => "max",
            Func::Min => "min",
            Func::Sin => "sin",
        }
    }

    pub(crate) fn from_symbol(s: &str) -> Option<Func> {
        Some(match s {
            "+" => Func::Add,
            "-" => Func::Sub,
            "*" | "×" => Func::Mul,
            "/" | "÷" => Func::Div,
            "max" => Func::Max,
            "min" => Func::Min,
            "sin" => Func::Sin,
            _ => return None,
        })
    }

    #[inline]
    fn apply(self, args: &[f64]) -> f64 {
        let v = match self {
            Func::Add => args[0] + args[1],
            Func::Sub => args[0] - args[1],
            Func::Mul => args[0] * args[1],
            Func::Div => args[0] / args[1],
            Func::Max => args[0].max(args[1]),
            Func::Min => args[0].min(args[1]),
            Func::Sin => args[0].sin(),
        };
        if v.is_finite() {
            v
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Func(Func, Vec<Node>),
    Feature(Feature),
    /// Ephemeral constant, fixed once created.
    Const(f64),
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        !matches!(self, Node::Func(..))
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Func(_, ch) => 1 + ch.iter().map(Node::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Edges on the longest root-to-leaf path; a lone terminal has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Node::Func(_, ch) => 1 + ch.iter().map(Node::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn eval(&self, features: &FeatureVector) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Feature(f) => features[*f],
            Node::Func(op, ch) => match ch.as_slice() {
                [a] => op.apply(&[a.eval(features)]),
                [a, b] => op.apply(&[a.eval(features), b.eval(features)]),
                _ => 1.0,
            },
        }
    }

    /// Node at preorder position `idx`.
    pub fn get(&self, idx: usize) -> Option<&Node> {
        fn walk<'a>(node: &'a Node, idx: &mut usize) -> Option<&'a Node> {
            if *idx == 0 {
                return Some(node);
            }
            *idx -= 1;
            if let Node::Func(_, ch) = node {
                for c in ch {
                    if let Some(found) = walk(c, idx) {
                        return Some(found);
                    }
                }
            }
            None
        }
        let mut i = idx;
        walk(self, &mut i)
    }

    pub fn get_mut(&mut self, idx: usize) -> Option<&mut Node> {
        fn walk<'a>(node: &'a mut Node, idx: &mut usize) -> Option<&'a mut Node> {
            if *idx == 0 {
                return Some(node);
            }
            *idx -= 1;
            if let Node::Func(_, ch) = node {
                for c in ch {
                    if let Some(found) = walk(c, idx) {
                        return Some(found);
                    }
                }
            }
            None
        }
        let mut i = idx;
        walk(self, &mut i)
    }

    /// Preorder positions of function nodes.
    pub fn non_leaf_positions(&self) -> Vec<usize> {
        fn walk(node: &Node, next: &mut usize, out: &mut Vec<usize>) {
            let here = *next;
            *next += 1;
            if let Node::Func(_, ch) = node {
                out.push(here);
                for c in ch {
                    walk(c, next, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut 0, &mut out);
        out
    }

    fn check(&self) -> Result<()> {
        match self {
            Node::Const(c) if !c.is_finite() => Err(Error::Config(format!("constant {c} is not finite"))),
            Node::Func(op, ch) => {
                if ch.len() != op.arity() {
                    return Err(Error::Config(format!(
                        "{} expects {} arguments, got {}",
                        op.symbol(),
                        op.arity(),
                        ch.len()
                    )));
                }
                ch.iter().try_for_each(Node::check)
            }
            _ => Ok(()),
        }
    }
}

/// A scheduling policy: an expression tree scoring each candidate; the maximum wins.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTree {
    root: Node,
}

impl PolicyTree {
    /// Validates arities and constants.
    pub fn new(root: Node) -> Result<Self> {
        root.check()?;
        Ok(Self { root })
    }

    /// For operators that preserve validity by construction.
    pub(crate) fn from_valid(root: Node) -> Self {
        debug_assert!(root.check().is_ok());
        Self { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Safeguarded evaluation; always finite for finite features.
    pub fn evaluate(&self, features: &FeatureVector) -> f64 {
        self.root.eval(features)
    }

    pub fn is_valid(&self) -> bool {
        self.root.check().is_ok()
    }
}

impl fmt::Display for PolicyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::sexpr::to_sexpr(&self.root))
    }
}

impl Policy for PolicyTree {
    fn select(&self, view: &DecisionView<'_>) -> usize {
        let features = compute_features(view);
        select_max(view, |i| self.evaluate(&features[i]))
    }
}
