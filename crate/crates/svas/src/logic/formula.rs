//! The two-variable first-order formula language and its evaluator.
//!
//! Variables range over all nodes of a leaf-data forest. Predicates: one
//! unary letter test per alphabet letter, `child` and `next-sibling`
//! (consecutive roots count as siblings), document order and data equality
//! (both false unless both arguments are leaves), and node identity.
//!
//! The export format is a prefix s-expression with atoms written in
//! applied form:
//!
//! ```text
//! (forall x (implies letter_c0(x) (exists y (and child(x,y) prec(x,y)))))
//! ```
//!
//! Evaluation is the naive quantifier loop over nodes, quadratic per
//! quantifier pair — exactness as a test oracle over speed.

use std::fmt;

use thiserror::Error;

use crate::logic::{LeafDataForest, Letter};

/// The two variables of the logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Y => write!(f, "y"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    Letter(Letter, Var),
    /// `Child(x, y)`: y is a child of x.
    Child(Var, Var),
    /// `NextSibling(x, y)`: y is the next sibling of x; consecutive roots are
    /// siblings.
    NextSibling(Var, Var),
    /// Both are leaves and the first strictly precedes the second in document
    /// order.
    DocPrec(Var, Var),
    /// Both are leaves and their data values are equal.
    DataEq(Var, Var),
    /// Node identity.
    Equal(Var, Var),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, f: Formula) -> Formula {
        Formula::Exists(v, Box::new(f))
    }

    pub fn forall(v: Var, f: Formula) -> Formula {
        Formula::Forall(v, Box::new(f))
    }

    /// N-ary conjunction, collapsing the trivial cases.
    pub fn conj(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::True);
        if fs.contains(&Formula::False) {
            return Formula::False;
        }
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// N-ary disjunction, collapsing the trivial cases.
    pub fn disj(mut fs: Vec<Formula>) -> Formula {
        fs.retain(|f| *f != Formula::False);
        if fs.contains(&Formula::True) {
            return Formula::True;
        }
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    /// True when every atom's variables are bound by an enclosing quantifier.
    pub fn is_sentence(&self) -> bool {
        fn walk(f: &Formula, bound: [bool; 2]) -> bool {
            match f {
                Formula::True | Formula::False => true,
                Formula::Atom(a) => {
                    let check = |v: Var| bound[v.index()];
                    match *a {
                        Atom::Letter(_, v) => check(v),
                        Atom::Child(v, w)
                        | Atom::NextSibling(v, w)
                        | Atom::DocPrec(v, w)
                        | Atom::DataEq(v, w)
                        | Atom::Equal(v, w) => check(v) && check(w),
                    }
                }
                Formula::Not(g) => walk(g, bound),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| walk(g, bound)),
                Formula::Implies(a, b) => walk(a, bound) && walk(b, bound),
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    let mut b = bound;
                    b[v.index()] = true;
                    walk(g, b)
                }
            }
        }
        walk(self, [false, false])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("formula is not a sentence: a variable occurs free")]
    FreeVariable,
}

/// Flattened view of a forest for evaluation.
struct Flat {
    letters: Vec<Letter>,
    data: Vec<Option<u64>>,
    parent: Vec<Option<usize>>,
    next_sibling: Vec<Option<usize>>,
    is_leaf: Vec<bool>,
    leaf_rank: Vec<Option<usize>>,
    count: usize,
}

impl Flat {
    fn build(forest: &LeafDataForest) -> Flat {
        let mut flat = Flat {
            letters: Vec::new(),
            data: Vec::new(),
            parent: Vec::new(),
            next_sibling: Vec::new(),
            is_leaf: Vec::new(),
            leaf_rank: Vec::new(),
            count: 0,
        };
        fn walk(
            n: &crate::logic::ForestNode,
            parent: Option<usize>,
            flat: &mut Flat,
            ranks: &mut usize,
        ) -> usize {
            let id = flat.count;
            flat.count += 1;
            flat.letters.push(n.letter);
            flat.data.push(n.data);
            flat.parent.push(parent);
            flat.next_sibling.push(None);
            flat.is_leaf.push(n.is_leaf());
            if n.is_leaf() {
                flat.leaf_rank.push(Some(*ranks));
                *ranks += 1;
            } else {
                flat.leaf_rank.push(None);
            }
            let mut prev: Option<usize> = None;
            for c in &n.children {
                let cid = walk(c, Some(id), flat, ranks);
                if let Some(p) = prev {
                    flat.next_sibling[p] = Some(cid);
                }
                prev = Some(cid);
            }
            id
        }
        let mut ranks = 0usize;
        let mut prev_root: Option<usize> = None;
        for r in &forest.roots {
            let rid = walk(r, None, &mut flat, &mut ranks);
            if let Some(p) = prev_root {
                flat.next_sibling[p] = Some(rid);
            }
            prev_root = Some(rid);
        }
        flat
    }

    fn eval(&self, f: &Formula, env: [Option<usize>; 2]) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.eval_atom(a, env),
            Formula::Not(g) => !self.eval(g, env),
            Formula::And(gs) => gs.iter().all(|g| self.eval(g, env)),
            Formula::Or(gs) => gs.iter().any(|g| self.eval(g, env)),
            Formula::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Formula::Exists(v, g) => (0..self.count).any(|n| {
                let mut e = env;
                e[v.index()] = Some(n);
                self.eval(g, e)
            }),
            Formula::Forall(v, g) => (0..self.count).all(|n| {
                let mut e = env;
                e[v.index()] = Some(n);
                self.eval(g, e)
            }),
        }
    }

    fn eval_atom(&self, a: &Atom, env: [Option<usize>; 2]) -> bool {
        let node = |v: Var| env[v.index()].expect("unbound variable in checked sentence");
        match *a {
            Atom::Letter(l, v) => self.letters[node(v)] == l,
            Atom::Child(v, w) => self.parent[node(w)] == Some(node(v)),
            Atom::NextSibling(v, w) => self.next_sibling[node(v)] == Some(node(w)),
            Atom::DocPrec(v, w) => match (self.leaf_rank[node(v)], self.leaf_rank[node(w)]) {
                (Some(a), Some(b)) => a < b,
                _ => false,
            },
            Atom::DataEq(v, w) => {
                let (a, b) = (node(v), node(w));
                self.is_leaf[a] && self.is_leaf[b] && self.data[a] == self.data[b]
            }
            Atom::Equal(v, w) => node(v) == node(w),
        }
    }
}

/// Evaluates a sentence on a forest under standard first-order satisfaction.
pub fn evaluate(f: &Formula, forest: &LeafDataForest) -> Result<bool, EvalError> {
    if !f.is_sentence() {
        return Err(EvalError::FreeVariable);
    }
    let flat = Flat::build(forest);
    Ok(flat.eval(f, [None, None]))
}

/// Brute-force view of a binary atom as a relation over the forest's nodes in
/// preorder (roots first, each followed by its subtree): all pairs `(i, j)`
/// such that the atom holds with `x` bound to node `i` and `y` to node `j`.
/// Supports property checks inexpressible inside the two-variable logic, such
/// as transitivity.
pub fn atom_pairs(forest: &LeafDataForest, atom: &Atom) -> Vec<(usize, usize)> {
    let flat = Flat::build(forest);
    let mut out = Vec::new();
    for i in 0..flat.count {
        for j in 0..flat.count {
            if flat.eval_atom(atom, [Some(i), Some(j)]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Whether the preorder-indexed node is a leaf; companion to [`atom_pairs`].
pub fn leaf_flags(forest: &LeafDataForest) -> Vec<bool> {
    Flat::build(forest).is_leaf
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Letter(l, v) => write!(f, "letter_{l}({v})"),
            Atom::Child(v, w) => write!(f, "child({v},{w})"),
            Atom::NextSibling(v, w) => write!(f, "next({v},{w})"),
            Atom::DocPrec(v, w) => write!(f, "prec({v},{w})"),
            Atom::DataEq(v, w) => write!(f, "dataeq({v},{w})"),
            Atom::Equal(v, w) => write!(f, "eq({v},{w})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) => {
                write!(f, "(and")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Or(gs) => {
                write!(f, "(or")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaParseError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("trailing input after formula")]
    Trailing,
}

#[derive(Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Word(String),
}

fn tokenize(text: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut rest = word;
        while let Some(r) = rest.strip_prefix('(') {
            out.push(Tok::LParen);
            rest = r;
        }
        // Split the head (possibly an applied atom with balanced parens)
        // from trailing closers.
        let bytes = rest.as_bytes();
        let mut depth = 0i32;
        let mut split = bytes.len();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => {
                    if depth == 0 {
                        split = i;
                        break;
                    }
                    depth -= 1;
                }
                _ => {}
            }
        }
        let (head, closers) = rest.split_at(split);
        if !head.is_empty() {
            out.push(Tok::Word(head.to_string()));
        }
        for _ in closers.chars() {
            out.push(Tok::RParen);
        }
    }
    out
}

fn parse_var(s: &str) -> Result<Var, FormulaParseError> {
    match s {
        "x" => Ok(Var::X),
        "y" => Ok(Var::Y),
        other => Err(FormulaParseError::UnexpectedToken(other.to_string())),
    }
}

fn parse_atom_word(word: &str) -> Result<Formula, FormulaParseError> {
    match word {
        "true" => return Ok(Formula::True),
        "false" => return Ok(Formula::False),
        _ => {}
    }
    let bad = || FormulaParseError::UnexpectedToken(word.to_string());
    let (name, args) = word
        .strip_suffix(')')
        .and_then(|w| w.split_once('('))
        .ok_or_else(bad)?;
    let args: Vec<&str> = args.split(',').collect();
    let atom = if let Some(letter_name) = name.strip_prefix("letter_") {
        let [v] = args.as_slice() else { return Err(bad()) };
        let letter = Letter::parse(letter_name).ok_or_else(bad)?;
        Atom::Letter(letter, parse_var(v)?)
    } else {
        let [v, w] = args.as_slice() else { return Err(bad()) };
        let (v, w) = (parse_var(v)?, parse_var(w)?);
        match name {
            "child" => Atom::Child(v, w),
            "next" => Atom::NextSibling(v, w),
            "prec" => Atom::DocPrec(v, w),
            "dataeq" => Atom::DataEq(v, w),
            "eq" => Atom::Equal(v, w),
            _ => return Err(bad()),
        }
    };
    Ok(Formula::Atom(atom))
}

fn parse_expr(toks: &[Tok], at: &mut usize) -> Result<Formula, FormulaParseError> {
    match toks.get(*at) {
        None => Err(FormulaParseError::UnexpectedEnd),
        Some(Tok::RParen) => Err(FormulaParseError::UnexpectedToken(")".to_string())),
        Some(Tok::Word(w)) => {
            *at += 1;
            parse_atom_word(w)
        }
        Some(Tok::LParen) => {
            *at += 1;
            let Some(Tok::Word(head)) = toks.get(*at) else {
                return Err(FormulaParseError::UnexpectedEnd);
            };
            let head = head.clone();
            *at += 1;
            let mut args = Vec::new();
            while !matches!(toks.get(*at), Some(Tok::RParen)) {
                if *at >= toks.len() {
                    return Err(FormulaParseError::UnexpectedEnd);
                }
                // Quantifier variables appear as bare words.
                if args.is_empty() && matches!(head.as_str(), "exists" | "forall") {
                    let Some(Tok::Word(v)) = toks.get(*at) else {
                        return Err(FormulaParseError::UnexpectedEnd);
                    };
                    let var = parse_var(v)?;
                    *at += 1;
                    let body = parse_expr(toks, at)?;
                    if !matches!(toks.get(*at), Some(Tok::RParen)) {
                        return Err(FormulaParseError::UnexpectedEnd);
                    }
                    *at += 1;
                    return Ok(match head.as_str() {
                        "exists" => Formula::exists(var, body),
                        _ => Formula::forall(var, body),
                    });
                }
                args.push(parse_expr(toks, at)?);
            }
            *at += 1; // consume RParen
            match head.as_str() {
                "not" => {
                    let [f] = <[Formula; 1]>::try_from(args)
                        .map_err(|_| FormulaParseError::UnexpectedToken("not".to_string()))?;
                    Ok(Formula::not(f))
                }
                "and" => Ok(Formula::And(args)),
                "or" => Ok(Formula::Or(args)),
                "implies" => {
                    let [a, b] = <[Formula; 2]>::try_from(args)
                        .map_err(|_| FormulaParseError::UnexpectedToken("implies".to_string()))?;
                    Ok(Formula::implies(a, b))
                }
                other => Err(FormulaParseError::UnexpectedToken(other.to_string())),
            }
        }
    }
}

/// Parses the s-expression formula format.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaParseError> {
    let toks = tokenize(text);
    let mut at = 0usize;
    let f = parse_expr(&toks, &mut at)?;
    if at != toks.len() {
        return Err(FormulaParseError::Trailing);
    }
    Ok(f)
}
