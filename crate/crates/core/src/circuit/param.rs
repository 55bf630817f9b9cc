use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol name to value assignment.
pub type Binding = BTreeMap<String, f64>;

/// Gate angle expression: constants, named symbols, n-ary sums and products.
///
/// Binding substitutes values and folds only subtrees whose children are all
/// constant, so a staged binding evaluates in the same order as a single one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamExpr {
    Const(f64),
    Symbol(String),
    Sum(Vec<ParamExpr>),
    Product(Vec<ParamExpr>),
}

impl ParamExpr {
    pub fn symbol(name: impl Into<String>) -> Self {
        Self::Symbol(name.into())
    }

    /// `k * e`.
    pub fn scaled(k: f64, e: ParamExpr) -> Self {
        Self::Product(alloc::vec![Self::Const(k), e])
    }

    /// `c - e`, written as `c + (-1) * e`.
    pub fn minus_from(c: f64, e: ParamExpr) -> Self {
        Self::Sum(alloc::vec![Self::Const(c), Self::scaled(-1.0, e)])
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Self::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Self::Const(_))
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Self::Const(_) => {}
            Self::Symbol(s) => {
                out.insert(s.clone());
            }
            Self::Sum(xs) | Self::Product(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
        }
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub fn contains(&self, name: &str) -> bool {
        match self {
            Self::Const(_) => false,
            Self::Symbol(s) => s == name,
            Self::Sum(xs) | Self::Product(xs) => xs.iter().any(|x| x.contains(name)),
        }
    }

    /// Full evaluation; every symbol must be bound.
    pub fn eval(&self, binding: &Binding) -> Result<f64> {
        let v = match self {
            Self::Const(v) => *v,
            Self::Symbol(s) => *binding.get(s).ok_or_else(|| Error::UnboundSymbol(s.clone()))?,
            Self::Sum(xs) => xs.iter().try_fold(0.0, |acc, x| Ok::<_, Error>(acc + x.eval(binding)?))?,
            Self::Product(xs) => xs.iter().try_fold(1.0, |acc, x| Ok::<_, Error>(acc * x.eval(binding)?))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Partial binding; unbound symbols stay symbolic.
    pub fn bind(&self, binding: &Binding) -> ParamExpr {
        match self {
            Self::Const(v) => Self::Const(*v),
            Self::Symbol(s) => match binding.get(s) {
                Some(v) => Self::Const(*v),
                None => Self::Symbol(s.clone()),
            },
            Self::Sum(xs) | Self::Product(xs) => {
                let children: Vec<ParamExpr> = xs.iter().map(|x| x.bind(binding)).collect();
                let is_sum = matches!(self, Self::Sum(_));
                if children.iter().all(ParamExpr::is_const) {
                    let vals = children.iter().filter_map(ParamExpr::as_const);
                    Self::Const(if is_sum { vals.fold(0.0, |a, v| a + v) } else { vals.fold(1.0, |a, v| a * v) })
                } else if is_sum {
                    Self::Sum(children)
                } else {
                    Self::Product(children)
                }
            }
        }
    }

    /// Symbolic derivative with respect to `name`.
    pub fn derivative(&self, name: &str) -> ParamExpr {
        match self {
            Self::Const(_) => Self::Const(0.0),
            Self::Symbol(s) => Self::Const(if s == name { 1.0 } else { 0.0 }),
            Self::Sum(xs) => Self::Sum(xs.iter().filter(|x| x.contains(name)).map(|x| x.derivative(name)).collect()),
            Self::Product(xs) => {
                let mut terms = Vec::new();
                for (k, x) in xs.iter().enumerate() {
                    if !x.contains(name) {
                        continue;
                    }
                    let mut factors: Vec<ParamExpr> = xs.clone();
                    factors[k] = x.derivative(name);
                    terms.push(Self::Product(factors));
                }
                Self::Sum(terms)
            }
        }
    }

    /// `-e`; constants are negated in place.
    pub fn negated(&self) -> ParamExpr {
        match self {
            Self::Const(v) => Self::Const(-v),
            e => Self::scaled(-1.0, e.clone()),
        }
    }
}

impl From<f64> for ParamExpr {
    fn from(v: f64) -> Self {
        Self::Const(v)
    }
}

impl From<&str> for ParamExpr {
    fn from(s: &str) -> Self {
        Self::Symbol(s.to_string())
    }
}

/// Parenthesized prefix notation: `(+ a b)`, `(* 2 x0)`. Constants use the
/// shortest representation that parses back to the same `f64`.
impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(v) => write!(f, "{v:?}"),
            Self::Symbol(s) => f.write_str(s),
            Self::Sum(xs) | Self::Product(xs) => {
                f.write_str(if matches!(self, Self::Sum(_)) { "(+" } else { "(*" })?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl core::str::FromStr for ParamExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let e = parse_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::InvalidArgument(alloc::format!("trailing input in expression `{s}`")));
        }
        Ok(e)
    }
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(&s[st..i]);
            }
            if !ch.is_whitespace() {
                out.push(&s[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

fn parse_tokens(tokens: &[&str], pos: &mut usize) -> Result<ParamExpr> {
    let bad = |m: &str| Error::InvalidArgument(alloc::format!("malformed expression: {m}"));
    let tok = *tokens.get(*pos).ok_or_else(|| bad("unexpected end"))?;
    *pos += 1;
    match tok {
        "(" => {
            let op = *tokens.get(*pos).ok_or_else(|| bad("missing operator"))?;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(&")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_tokens(tokens, pos)?),
                    None => return Err(bad("unclosed parenthesis")),
                }
            }
            match op {
                "+" => Ok(ParamExpr::Sum(children)),
                "*" => Ok(ParamExpr::Product(children)),
                other => Err(bad(other)),
            }
        }
        ")" => Err(bad("unexpected `)`")),
        t => {
            let first = t.chars().next().unwrap_or(' ');
            if first.is_ascii_digit() || first == '-' || first == '+' || first == '.' {
                t.parse::<f64>().map(ParamExpr::Const).map_err(|_| bad(t))
            } else {
                Ok(ParamExpr::Symbol(t.to_string()))
            }
        }
    }
}
