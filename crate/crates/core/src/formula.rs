//! The object language over a signature: formulas built from falsum,
//! edge-homed propositions, implication, and the edge-indexed knowledge
//! modality, plus the derived connectives `~`, `&`, `|`, `true` as
//! parser/printer sugar.
//!
//! `[e] phi` reads "any observer eavesdropping on channel `e` knows phi".

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{EdgeId, GraphError, Multigraph};

/// Name of an atomic proposition; every proposition is homed at one edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropositionId(pub String);

impl fmt::Display for PropositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<T: Into<String>> From<T> for PropositionId {
    fn from(s: T) -> Self {
        PropositionId(s.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("signature graph must be connected")]
    Disconnected,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("proposition `{0}` is declared under more than one edge")]
    PropositionReused(PropositionId),
}

/// A connected multigraph together with pairwise disjoint proposition sets,
/// one per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    graph: Multigraph,
    props: BTreeMap<EdgeId, BTreeSet<PropositionId>>,
    home: BTreeMap<PropositionId, EdgeId>,
}

impl Signature {
    pub fn new<P, E, I, Q>(graph: Multigraph, props: P) -> Result<Signature, SignatureError>
    where
        P: IntoIterator<Item = (E, I)>,
        E: Into<EdgeId>,
        I: IntoIterator<Item = Q>,
        Q: Into<PropositionId>,
    {
        if !graph.is_connected() {
            return Err(SignatureError::Disconnected);
        }
        let mut by_edge: BTreeMap<EdgeId, BTreeSet<PropositionId>> = graph
            .edge_ids()
            .map(|e| (e.clone(), BTreeSet::new()))
            .collect();
        let mut home = BTreeMap::new();
        for (e, ps) in props {
            let e: EdgeId = e.into();
            if !graph.has_edge(&e) {
                return Err(GraphError::UnknownEdge(e).into());
            }
            for p in ps {
                let p: PropositionId = p.into();
                if home.insert(p.clone(), e.clone()).is_some() {
                    return Err(SignatureError::PropositionReused(p));
                }
                by_edge.get_mut(&e).unwrap().insert(p);
            }
        }
        Ok(Signature {
            graph,
            props: by_edge,
            home,
        })
    }

    /// A signature with no propositions at all.
    pub fn bare(graph: Multigraph) -> Result<Signature, SignatureError> {
        Signature::new(graph, std::iter::empty::<(EdgeId, Vec<PropositionId>)>())
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn props_of(&self, e: &EdgeId) -> Option<&BTreeSet<PropositionId>> {
        self.props.get(e)
    }

    pub fn propositions(&self) -> impl Iterator<Item = (&PropositionId, &EdgeId)> {
        self.home.iter()
    }

    /// The edge a proposition is homed at.
    pub fn home_of(&self, p: &PropositionId) -> Option<&EdgeId> {
        self.home.get(p)
    }
}

/// A formula of the language. `~`, `&`, `|` and `true` are not constructors;
/// they desugar into `Falsum` and `Implies` at parse time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Falsum,
    Prop(PropositionId),
    Implies(Box<Formula>, Box<Formula>),
    /// `[e] phi`: every run indistinguishable on `e` satisfies phi.
    Knows(EdgeId, Box<Formula>),
}

impl Formula {
    pub fn prop(p: impl Into<PropositionId>) -> Formula {
        Formula::Prop(p.into())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn knows(e: impl Into<EdgeId>, a: Formula) -> Formula {
        Formula::Knows(e.into(), Box::new(a))
    }

    /// `~a`, desugared as `a -> false`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, Formula::Falsum)
    }

    /// `true`, the tautology `false -> false`.
    pub fn top() -> Formula {
        Formula::implies(Formula::Falsum, Formula::Falsum)
    }

    /// `a | b`, desugared as `~a -> b`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    /// `a & b`, desugared as `~(a -> ~b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    /// `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// Left-associated disjunction of a nonempty list; an empty list is
    /// falsum (the identity of `|`).
    pub fn any(mut items: Vec<Formula>) -> Formula {
        if items.is_empty() {
            return Formula::Falsum;
        }
        let first = items.remove(0);
        items.into_iter().fold(first, Formula::or)
    }

    /// Left-associated conjunction of a nonempty list; an empty list is
    /// `true` (the identity of `&`).
    pub fn all(mut items: Vec<Formula>) -> Formula {
        if items.is_empty() {
            return Formula::top();
        }
        let first = items.remove(0);
        items.into_iter().fold(first, Formula::and)
    }
}

// Printing: only the core connectives plus `true` and `~` are emitted, with
// minimal parentheses. Parsing the printed text reproduces the AST exactly.
const LEVEL_IMPLIES: u8 = 1;
const LEVEL_UNARY: u8 = 2;
const LEVEL_ATOM: u8 = 3;

fn print_level(f: &Formula) -> u8 {
    match f {
        Formula::Falsum | Formula::Prop(_) => LEVEL_ATOM,
        Formula::Implies(a, b) => {
            if **b == Formula::Falsum {
                if **a == Formula::Falsum {
                    LEVEL_ATOM // printed as `true`
                } else {
                    LEVEL_UNARY // printed as `~a`
                }
            } else {
                LEVEL_IMPLIES
            }
        }
        Formula::Knows(..) => LEVEL_UNARY,
    }
}

fn print_into(f: &Formula, min_level: u8, out: &mut String) {
    let level = print_level(f);
    if level < min_level {
        out.push('(');
        print_into(f, 0, out);
        out.push(')');
        return;
    }
    match f {
        Formula::Falsum => out.push_str("false"),
        Formula::Prop(p) => out.push_str(&p.0),
        Formula::Implies(a, b) => {
            if **b == Formula::Falsum {
                if **a == Formula::Falsum {
                    out.push_str("true");
                } else {
                    out.push('~');
                    print_into(a, LEVEL_UNARY, out);
                }
            } else {
                print_into(a, LEVEL_UNARY, out);
                out.push_str(" -> ");
                print_into(b, LEVEL_IMPLIES, out);
            }
        }
        Formula::Knows(e, a) => {
            out.push('[');
            out.push_str(&e.0);
            out.push_str("] ");
            print_into(a, LEVEL_UNARY, out);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_into(self, 0, &mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown proposition `{0}`")]
    UnknownProposition(PropositionId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("formula has {count} modal atoms; truth-table checking is capped at {MAX_ATOMS}")]
    TooManyAtoms { count: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Cap on distinct modal atoms for truth-table reasoning.
pub const MAX_ATOMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    False,
    True,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token<'_>)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '~' => {
                tokens.push((i, Token::Tilde));
                i += 1;
            }
            '&' => {
                tokens.push((i, Token::Amp));
                i += 1;
            }
            '|' => {
                tokens.push((i, Token::Pipe));
                i += 1;
            }
            '(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            '[' => {
                tokens.push((i, Token::LBracket));
                i += 1;
            }
            ']' => {
                tokens.push((i, Token::RBracket));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    tokens.push((i, Token::Arrow));
                    i += 2;
                } else {
                    return Err(FormulaError::Syntax {
                        position: i,
                        message: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &text[start..i];
                tokens.push((
                    start,
                    match word {
                        "false" => Token::False,
                        "true" => Token::True,
                        _ => Token::Ident(word),
                    },
                ));
            }
            other => {
                return Err(FormulaError::Syntax {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    sig: &'a Signature,
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Token<'a>)> {
        self.tokens.get(self.pos)
    }

    fn error_here(&self, message: impl Into<String>) -> FormulaError {
        let position = self.peek().map(|(p, _)| *p).unwrap_or(self.len);
        FormulaError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn eat(&mut self, expected: Token<'_>, what: &str) -> Result<usize, FormulaError> {
        match self.peek() {
            Some((p, t)) if *t == expected => {
                let p = *p;
                self.pos += 1;
                Ok(p)
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    // formula := or_chain ("->" formula)?     right-associative
    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let left = self.or_chain()?;
        if matches!(self.peek(), Some((_, Token::Arrow))) {
            self.pos += 1;
            let right = self.formula()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn or_chain(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.and_chain()?;
        while matches!(self.peek(), Some((_, Token::Pipe))) {
            self.pos += 1;
            let rhs = self.and_chain()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_chain(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some((_, Token::Amp))) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().copied() {
            Some((_, Token::Tilde)) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some((_, Token::LBracket)) => {
                self.pos += 1;
                let edge = match self.peek().copied() {
                    Some((_, Token::Ident(name))) => {
                        self.pos += 1;
                        EdgeId::from(name)
                    }
                    _ => return Err(self.error_here("expected edge name after `[`")),
                };
                self.eat(Token::RBracket, "`]`")?;
                if !self.sig.graph().has_edge(&edge) {
                    return Err(FormulaError::UnknownEdge(edge));
                }
                Ok(Formula::knows(edge, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().copied() {
            Some((_, Token::False)) => {
                self.pos += 1;
                Ok(Formula::Falsum)
            }
            Some((_, Token::True)) => {
                self.pos += 1;
                Ok(Formula::top())
            }
            Some((_, Token::Ident(name))) => {
                self.pos += 1;
                let p = PropositionId::from(name);
                if self.sig.home_of(&p).is_none() {
                    return Err(FormulaError::UnknownProposition(p));
                }
                Ok(Formula::Prop(p))
            }
            Some((_, Token::LParen)) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.eat(Token::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error_here("expected a formula")),
        }
    }
}

/// Parses concrete syntax into a [`Formula`], resolving propositions and
/// modality edges against the signature.
pub fn parse(sig: &Signature, text: &str) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        sig,
        tokens,
        pos: 0,
        len: text.len(),
    };
    let formula = parser.formula()?;
    if parser.peek().is_some() {
        return Err(parser.error_here("trailing input"));
    }
    Ok(formula)
}

/// Membership in the fragment `Phi(Sigma, T)`: all outermost modalities are
/// labeled by edges of `T` and all propositions outside every modality are
/// homed at edges of `T`. The body of a box is unrestricted.
pub fn in_fragment(sig: &Signature, formula: &Formula, t: &BTreeSet<EdgeId>) -> bool {
    match formula {
        Formula::Falsum => true,
        Formula::Prop(p) => sig.home_of(p).is_some_and(|e| t.contains(e)),
        Formula::Implies(a, b) => in_fragment(sig, a, t) && in_fragment(sig, b, t),
        Formula::Knows(e, _) => t.contains(e),
    }
}

/// The maximal subformulas that are propositions or boxes, viewed as opaque
/// atoms, each tagged with the unique edge `e` with atom in `Phi(Sigma,{e})`.
/// Deduplicated, in order of first occurrence.
pub fn modal_atoms(sig: &Signature, formula: &Formula) -> Vec<(Formula, EdgeId)> {
    fn walk(sig: &Signature, f: &Formula, out: &mut Vec<(Formula, EdgeId)>) {
        match f {
            Formula::Falsum => {}
            Formula::Prop(p) => {
                let home = sig
                    .home_of(p)
                    .expect("proposition resolved at parse time")
                    .clone();
                if !out.iter().any(|(a, _)| a == f) {
                    out.push((f.clone(), home));
                }
            }
            Formula::Implies(a, b) => {
                walk(sig, a, out);
                walk(sig, b, out);
            }
            Formula::Knows(e, _) => {
                if !out.iter().any(|(a, _)| a == f) {
                    out.push((f.clone(), e.clone()));
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(sig, formula, &mut out);
    out
}

fn eval_skeleton(f: &Formula, index: &HashMap<&Formula, usize>, assignment: u32) -> bool {
    if let Some(&i) = index.get(f) {
        return assignment & (1 << i) != 0;
    }
    match f {
        Formula::Falsum => false,
        Formula::Implies(a, b) => {
            !eval_skeleton(a, index, assignment) || eval_skeleton(b, index, assignment)
        }
        // Props and boxes are always atoms, caught by the index above.
        Formula::Prop(_) | Formula::Knows(..) => unreachable!("atom missing from index"),
    }
}

/// Truth-table tautology check over the formula's modal atoms.
pub fn is_tautology(sig: &Signature, formula: &Formula) -> Result<bool, FormulaError> {
    let atoms = modal_atoms(sig, formula);
    if atoms.len() > MAX_ATOMS {
        return Err(FormulaError::TooManyAtoms { count: atoms.len() });
    }
    let index: HashMap<&Formula, usize> =
        atoms.iter().enumerate().map(|(i, (a, _))| (a, i)).collect();
    for assignment in 0..(1u32 << atoms.len()) {
        if !eval_skeleton(formula, &index, assignment) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A conjunction of clauses; each clause is a disjunction with at most one
/// edge-local disjunct per edge (absent edges contribute falsum). Every
/// disjunct lies in `Phi(Sigma,{h})` for its edge `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClausalForm {
    pub clauses: Vec<BTreeMap<EdgeId, Formula>>,
}

impl EdgeClausalForm {
    /// The formula this form denotes: the conjunction over clauses of the
    /// disjunction of each clause's entries in edge order.
    pub fn to_formula(&self) -> Formula {
        Formula::all(
            self.clauses
                .iter()
                .map(|clause| Formula::any(clause.values().cloned().collect()))
                .collect(),
        )
    }
}

/// Rewrites a formula into edge-clausal shape: conjunctive normal form over
/// its modal atoms, with each clause's literals grouped by home edge. The
/// result is propositionally equivalent to the input, which is verified
/// internally on the biconditional.
pub fn to_edge_clausal(
    sig: &Signature,
    formula: &Formula,
) -> Result<EdgeClausalForm, FormulaError> {
    let atoms = modal_atoms(sig, formula);
    if atoms.len() > MAX_ATOMS {
        return Err(FormulaError::TooManyAtoms { count: atoms.len() });
    }
    let index: HashMap<&Formula, usize> =
        atoms.iter().enumerate().map(|(i, (a, _))| (a, i)).collect();

    // Clause sets over atom indices: None = constant true (no clauses),
    // a clause maps atom index -> polarity. `None` polarity conflicts drop
    // the clause as tautological.
    type Clause = BTreeMap<usize, bool>;
    fn cnf(f: &Formula, positive: bool, index: &HashMap<&Formula, usize>) -> Vec<Clause> {
        if let Some(&i) = index.get(f) {
            return vec![BTreeMap::from([(i, positive)])];
        }
        match f {
            Formula::Falsum => {
                if positive {
                    vec![BTreeMap::new()] // the empty clause: constant false
                } else {
                    vec![] // no clauses: constant true
                }
            }
            Formula::Implies(a, b) => {
                if positive {
                    // a -> b  ==  ~a | b
                    let left = cnf(a, false, index);
                    let right = cnf(b, true, index);
                    let mut out = Vec::new();
                    for lc in &left {
                        'pair: for rc in &right {
                            let mut merged = lc.clone();
                            for (&atom, &pol) in rc {
                                match merged.insert(atom, pol) {
                                    Some(prev) if prev != pol => continue 'pair,
                                    _ => {}
                                }
                            }
                            if !out.contains(&merged) {
                                out.push(merged);
                            }
                        }
                    }
                    out
                } else {
                    // ~(a -> b)  ==  a & ~b
                    let mut out = cnf(a, true, index);
                    for clause in cnf(b, false, index) {
                        if !out.contains(&clause) {
                            out.push(clause);
                        }
                    }
                    out
                }
            }
            Formula::Prop(_) | Formula::Knows(..) => unreachable!("atom missing from index"),
        }
    }

    let clauses = cnf(formula, true, &index);
    let mut grouped = Vec::new();
    for clause in clauses {
        let mut by_edge: BTreeMap<EdgeId, Vec<Formula>> = BTreeMap::new();
        for (atom_idx, polarity) in clause {
            let (atom, home) = &atoms[atom_idx];
            let literal = if polarity {
                atom.clone()
            } else {
                Formula::not(atom.clone())
            };
            by_edge.entry(home.clone()).or_default().push(literal);
        }
        let entry: BTreeMap<EdgeId, Formula> = by_edge
            .into_iter()
            .map(|(e, lits)| (e, Formula::any(lits)))
            .collect();
        grouped.push(entry);
    }
    let form = EdgeClausalForm { clauses: grouped };

    let check = Formula::iff(formula.clone(), form.to_formula());
    if !is_tautology(sig, &check)? {
        return Err(FormulaError::Internal(
            "edge-clausal form is not equivalent to its input".into(),
        ));
    }
    Ok(form)
}
