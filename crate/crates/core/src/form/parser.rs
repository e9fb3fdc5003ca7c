//! Parser for `.form` files.
//!
//! ```text
//! file      = { line } ;
//! line      = [ stmt ] [ "#" comment ] NEWLINE ;
//! stmt      = NAME "=" expr
//!           | "def" NAME "(" [ NAME { "," NAME } ] ")" ":" NEWLINE "return" expr ;
//! expr      = term { ("+" | "-") term } ;
//! term      = unary { ("*" | "/") unary } ;
//! unary     = ("-" | "+") unary | postfix ;
//! postfix   = atom { "(" [ expr { "," expr } ] ")" | "[" expr { "," expr } "]" } ;
//! atom      = NUMBER | STRING | NAME | "(" expr ")" ;
//! ```
//!
//! Newlines inside parentheses or brackets are ignored. Predefined names:
//! `dx`, the indices `i j k l m n`, element constructors `FiniteElement`
//! and `VectorElement`, function declarations `BasisFunction`,
//! `TestFunction`, `TrialFunction`, `Function`, `Index`, and the operators
//! `grad div dot inner transp mult trace D Identity len abs`.
//! The bilinear form is bound to `a` and the linear form to `L`.

use std::collections::HashMap;
use std::rc::Rc;

use super::expr::{self, Expr, Form, Index, IndexTerm, DX};
use crate::fiat::{CellShape, ElementFamily, ElementSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Name(String),
    Sym(char),
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut depth = 0i32;
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, column: tc });
        match c {
            '\n' => {
                if depth == 0 {
                    push(&mut out, Tok::Newline);
                }
                line += 1;
                col = 1;
                k += 1;
                continue;
            }
            '#' => {
                while k < chars.len() && chars[k] != '\n' {
                    k += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {}
            '"' | '\'' => {
                let mut s = String::new();
                let mut j = k + 1;
                while j < chars.len() && chars[j] != c {
                    if chars[j] == '\n' {
                        break;
                    }
                    s.push(chars[j]);
                    j += 1;
                }
                if j >= chars.len() || chars[j] != c {
                    return Err(Error::Syntax {
                        line,
                        column: col,
                        message: "unterminated string".into(),
                    });
                }
                push(&mut out, Tok::Str(s));
                col += j + 1 - k;
                k = j + 1;
                continue;
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = k;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut e = j + 1;
                    if e < chars.len() && (chars[e] == '+' || chars[e] == '-') {
                        e += 1;
                    }
                    if e < chars.len() && chars[e].is_ascii_digit() {
                        j = e;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[k..j].iter().collect();
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    line,
                    column: col,
                    message: format!("bad number '{text}'"),
                })?;
                push(&mut out, Tok::Num(v));
                col += j - k;
                k = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = k;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                push(&mut out, Tok::Name(chars[k..j].iter().collect()));
                col += j - k;
                k = j;
                continue;
            }
            '(' | '[' => {
                depth += 1;
                push(&mut out, Tok::Sym(c));
            }
            ')' | ']' => {
                depth -= 1;
                push(&mut out, Tok::Sym(c));
            }
            '+' | '-' | '*' | '/' | '=' | ',' | ':' => push(&mut out, Tok::Sym(c)),
            _ => {
                return Err(Error::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
        col += 1;
        k += 1;
    }
    out.push(Token {
        tok: Tok::Newline,
        line,
        column: col,
    });
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

#[derive(Clone, Debug)]
enum Ast {
    Num(f64),
    Str(String),
    Name(String),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Box<Node>, Vec<Node>),
    Subscript(Box<Node>, Vec<Node>),
}

#[derive(Clone, Debug)]
struct Node {
    ast: Ast,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek().tok.clone() {
            Tok::Name(n) => {
                self.next();
                Ok(n)
            }
            _ => self.error("expected a name"),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(c @ ('+' | '-')) => c,
                _ => return Ok(lhs),
            };
            let t = self.next();
            let rhs = self.term()?;
            lhs = Node {
                ast: Ast::Bin(op, Box::new(lhs), Box::new(rhs)),
                line: t.line,
                column: t.column,
            };
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(c @ ('*' | '/')) => c,
                _ => return Ok(lhs),
            };
            let t = self.next();
            let rhs = self.unary()?;
            lhs = Node {
                ast: Ast::Bin(op, Box::new(lhs), Box::new(rhs)),
                line: t.line,
                column: t.column,
            };
        }
    }

    fn unary(&mut self) -> Result<Node> {
        let t = self.peek().clone();
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Node {
                ast: Ast::Neg(Box::new(inner)),
                line: t.line,
                column: t.column,
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.postfix()
    }

    fn list(&mut self, close: char) -> Result<Vec<Node>> {
        let mut args = Vec::new();
        if self.eat(close) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(close) {
                return Ok(args);
            }
            self.expect(',')?;
        }
    }

    fn postfix(&mut self) -> Result<Node> {
        let mut node = self.atom()?;
        loop {
            let t = self.peek().clone();
            if self.eat('(') {
                let args = self.list(')')?;
                node = Node {
                    ast: Ast::Call(Box::new(node), args),
                    line: t.line,
                    column: t.column,
                };
            } else if self.eat('[') {
                let args = self.list(']')?;
                if args.is_empty() {
                    return self.error("empty subscript");
                }
                node = Node {
                    ast: Ast::Subscript(Box::new(node), args),
                    line: t.line,
                    column: t.column,
                };
            } else {
                return Ok(node);
            }
        }
    }

    fn atom(&mut self) -> Result<Node> {
        let t = self.peek().clone();
        let ast = match t.tok {
            Tok::Num(v) => Ast::Num(v),
            Tok::Str(ref s) => Ast::Str(s.clone()),
            Tok::Name(ref n) => Ast::Name(n.clone()),
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect(')')?;
                return Ok(e);
            }
            _ => return self.error("expected an expression"),
        };
        self.next();
        Ok(Node {
            ast,
            line: t.line,
            column: t.column,
        })
    }
}

enum Stmt {
    Assign { target: String, value: Node },
    Def(Rc<Macro>),
}

#[derive(Debug)]
struct Macro {
    name: String,
    params: Vec<String>,
    body: Node,
}

impl Parser {
    fn statements(&mut self) -> Result<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            while self.peek().tok == Tok::Newline {
                self.next();
            }
            if self.peek().tok == Tok::Eof {
                return Ok(out);
            }
            let name = self.name()?;
            if name == "def" {
                let fname = self.name()?;
                self.expect('(')?;
                let mut params = Vec::new();
                if !self.eat(')') {
                    loop {
                        params.push(self.name()?);
                        if self.eat(')') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                self.expect(':')?;
                while self.peek().tok == Tok::Newline {
                    self.next();
                }
                if self.name()? != "return" {
                    return self.error("a definition body must be a single 'return' statement");
                }
                let body = self.expr()?;
                out.push(Stmt::Def(Rc::new(Macro {
                    name: fname,
                    params,
                    body,
                })));
            } else {
                self.expect('=')?;
                let value = self.expr()?;
                out.push(Stmt::Assign { target: name, value });
            }
            if self.peek().tok != Tok::Newline {
                return self.error("expected end of line");
            }
        }
    }
}

#[derive(Clone)]
enum Value {
    Num(f64),
    Str(String),
    Element(ElementSpec),
    Expr(Expr),
    Index(IndexTerm),
    Measure,
    Form(Form),
    Macro(Rc<Macro>),
    Builtin(&'static str),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::Element(_) => "element",
            Value::Expr(_) => "expression",
            Value::Index(_) => "index",
            Value::Measure => "measure",
            Value::Form(_) => "form",
            Value::Macro(_) | Value::Builtin(_) => "function",
        }
    }
}

const BUILTINS: &[&str] = &[
    "FiniteElement",
    "VectorElement",
    "BasisFunction",
    "TestFunction",
    "TrialFunction",
    "Function",
    "Index",
    "grad",
    "div",
    "dot",
    "inner",
    "transp",
    "mult",
    "trace",
    "D",
    "Identity",
    "len",
    "abs",
];

/// Bilinear and linear forms defined by a form file.
#[derive(Clone, Debug)]
pub struct FormFile {
    pub a: Option<Form>,
    pub l: Option<Form>,
}

struct Evaluator {
    env: HashMap<String, Value>,
    basis_count: usize,
    coefficient_count: usize,
    target: String,
}

fn at<T>(node: &Node, message: impl Into<String>) -> Result<T> {
    Err(Error::Syntax {
        line: node.line,
        column: node.column,
        message: message.into(),
    })
}

impl Evaluator {
    fn new() -> Self {
        let mut env = HashMap::new();
        env.insert("dx".to_string(), Value::Measure);
        for name in ["i", "j", "k", "l", "m", "n"] {
            env.insert(name.to_string(), Value::Index(Index::new().into()));
        }
        for &b in BUILTINS {
            env.insert(b.to_string(), Value::Builtin(b));
        }
        Evaluator {
            env,
            basis_count: 0,
            coefficient_count: 0,
            target: String::new(),
        }
    }

    fn eval(&mut self, node: &Node) -> Result<Value> {
        match &node.ast {
            Ast::Num(v) => Ok(Value::Num(*v)),
            Ast::Str(s) => Ok(Value::Str(s.clone())),
            Ast::Name(n) => self.env.get(n).cloned().ok_or_else(|| Error::Undeclared {
                name: n.clone(),
                line: node.line,
                column: node.column,
            }),
            Ast::Neg(e) => match self.eval(e)? {
                Value::Num(v) => Ok(Value::Num(-v)),
                Value::Expr(x) => Ok(Value::Expr(-x)),
                Value::Form(f) => Ok(Value::Form(-1.0 * f)),
                v => at(node, format!("cannot negate a {}", v.kind())),
            },
            Ast::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                binary(node, *op, x, y)
            }
            Ast::Subscript(e, idx) => {
                let base = self.eval(e)?;
                let Value::Expr(mut x) = base else {
                    return at(node, format!("cannot index a {}", base.kind()));
                };
                for i in idx {
                    let t = self.index_term(i)?;
                    x = x.comp(t);
                }
                Ok(Value::Expr(x))
            }
            Ast::Call(f, args) => {
                let callee = self.eval(f)?;
                match callee {
                    Value::Builtin(name) => {
                        let vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>>>()?;
                        self.builtin(node, name, args, vals)
                    }
                    Value::Macro(m) => {
                        if m.params.len() != args.len() {
                            return at(
                                node,
                                format!("{} takes {} arguments, {} given", m.name, m.params.len(), args.len()),
                            );
                        }
                        let vals = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>>>()?;
                        let saved: Vec<(String, Option<Value>)> = m
                            .params
                            .iter()
                            .map(|p| (p.clone(), self.env.get(p).cloned()))
                            .collect();
                        for (p, v) in m.params.iter().zip(vals) {
                            self.env.insert(p.clone(), v);
                        }
                        let result = self.eval(&m.body);
                        for (p, v) in saved {
                            match v {
                                Some(v) => self.env.insert(p, v),
                                None => self.env.remove(&p),
                            };
                        }
                        result
                    }
                    v => at(node, format!("a {} is not callable", v.kind())),
                }
            }
        }
    }

    fn index_term(&mut self, node: &Node) -> Result<IndexTerm> {
        match self.eval(node)? {
            Value::Index(t) => Ok(t),
            Value::Num(v) if v >= 0.0 && v.fract() == 0.0 => Ok(IndexTerm::Fixed(v as usize)),
            v => at(node, format!("expected an index, found a {}", v.kind())),
        }
    }

    fn builtin(&mut self, node: &Node, name: &str, args: &[Node], vals: Vec<Value>) -> Result<Value> {
        let arity = |n: usize| -> Result<()> {
            if vals.len() == n {
                Ok(())
            } else {
                at(node, format!("{name} takes {n} argument(s), {} given", vals.len()))
            }
        };
        let expr = |k: usize| -> Result<Expr> {
            match &vals[k] {
                Value::Expr(e) => Ok(e.clone()),
                Value::Num(v) => Ok(Expr::constant(*v)),
                v => at(&args[k], format!("expected an expression, found a {}", v.kind())),
            }
        };
        let element = |k: usize| -> Result<ElementSpec> {
            match &vals[k] {
                Value::Element(e) => Ok(*e),
                v => at(&args[k], format!("expected an element, found a {}", v.kind())),
            }
        };
        Ok(match name {
            "FiniteElement" | "VectorElement" => {
                if vals.len() < 3 {
                    return at(node, format!("{name} takes (family, cell, degree)"));
                }
                let (Value::Str(fam), Value::Str(cell), Value::Num(q)) = (&vals[0], &vals[1], &vals[2]) else {
                    return at(node, format!("{name} takes (family, cell, degree)"));
                };
                let mut family = ElementFamily::from_name(fam)
                    .ok_or_else(|| Error::Syntax {
                        line: args[0].line,
                        column: args[0].column,
                        message: format!("unknown element family '{fam}'"),
                    })?;
                if name == "VectorElement" {
                    if family != ElementFamily::Lagrange && family != ElementFamily::VectorLagrange {
                        return at(&args[0], "vector elements are Lagrange only");
                    }
                    family = ElementFamily::VectorLagrange;
                }
                let cell = CellShape::from_name(cell).map_err(|_| Error::Syntax {
                    line: args[1].line,
                    column: args[1].column,
                    message: format!("unknown cell '{cell}'"),
                })?;
                if *q < 0.0 || q.fract() != 0.0 {
                    return at(&args[2], "degree must be a non-negative integer");
                }
                Value::Element(ElementSpec::new(family, cell, *q as usize))
            }
            "BasisFunction" | "TestFunction" | "TrialFunction" => {
                arity(1)?;
                let e = element(0)?;
                let slot = match name {
                    "TestFunction" => 0,
                    "TrialFunction" => 1,
                    _ => {
                        self.basis_count += 1;
                        self.basis_count - 1
                    }
                };
                Value::Expr(Expr::argument(slot, e, &self.target))
            }
            "Function" => {
                arity(1)?;
                let e = element(0)?;
                self.coefficient_count += 1;
                Value::Expr(Expr::coefficient(self.coefficient_count - 1, e, &self.target))
            }
            "Index" => {
                arity(0)?;
                Value::Index(Index::new().into())
            }
            "grad" => {
                arity(1)?;
                Value::Expr(expr::grad(&expr(0)?))
            }
            "div" => {
                arity(1)?;
                Value::Expr(expr::div(&expr(0)?))
            }
            "transp" => {
                arity(1)?;
                Value::Expr(expr::transp(&expr(0)?))
            }
            "trace" => {
                arity(1)?;
                Value::Expr(expr::trace(&expr(0)?))
            }
            "abs" => {
                arity(1)?;
                Value::Expr(expr::abs(&expr(0)?))
            }
            "dot" | "inner" => {
                arity(2)?;
                Value::Expr(expr::dot(&expr(0)?, &expr(1)?))
            }
            "mult" => {
                arity(2)?;
                Value::Expr(expr::mult(&expr(0)?, &expr(1)?))
            }
            "D" => {
                arity(2)?;
                let e = expr(0)?;
                let i = match &vals[1] {
                    Value::Index(t) => *t,
                    Value::Num(v) if *v >= 0.0 && v.fract() == 0.0 => IndexTerm::Fixed(*v as usize),
                    v => return at(&args[1], format!("expected an index, found a {}", v.kind())),
                };
                Value::Expr(expr::deriv(&e, i))
            }
            "Identity" => {
                arity(1)?;
                match vals[0] {
                    Value::Num(v) if v >= 1.0 && v.fract() == 0.0 => Value::Expr(Expr::identity(v as usize)),
                    _ => return at(&args[0], "Identity takes a positive integer"),
                }
            }
            "len" => {
                arity(1)?;
                let e = expr(0)?;
                match e.shape() {
                    Some([n, ..]) => Value::Num(*n as f64),
                    Some(_) => return at(&args[0], "len of a scalar"),
                    None => return Err(e.error().expect("poisoned")),
                }
            }
            _ => unreachable!("builtin table"),
        })
    }
}

fn binary(node: &Node, op: char, x: Value, y: Value) -> Result<Value> {
    use Value::*;
    Ok(match (op, x, y) {
        ('+', Num(a), Num(b)) => Num(a + b),
        ('-', Num(a), Num(b)) => Num(a - b),
        ('*', Num(a), Num(b)) => Num(a * b),
        ('/', Num(a), Num(b)) => Num(a / b),
        ('+', Form(a), Form(b)) => Form(a + b),
        ('-', Form(a), Form(b)) => Form(a - b),
        ('*', Num(c), Form(f)) | ('*', Form(f), Num(c)) => Form(c * f),
        ('*', Expr(e), Measure) => Form(e * DX),
        ('*', Num(c), Measure) => Form(expr::Expr::constant(c) * DX),
        (op, Expr(a), Expr(b)) => Expr(expr_op(op, a, b)),
        (op, Num(a), Expr(b)) => Expr(expr_op(op, expr::Expr::constant(a), b)),
        (op, Expr(a), Num(b)) => Expr(expr_op(op, a, expr::Expr::constant(b))),
        (op, x, y) => return at(node, format!("unsupported operands for '{op}': {} and {}", x.kind(), y.kind())),
    })
}

fn expr_op(op: char, a: Expr, b: Expr) -> Expr {
    match op {
        '+' => a + b,
        '-' => a - b,
        '*' => a * b,
        _ => a / b,
    }
}

/// Parse form-file text into its bilinear (`a`) and linear (`L`) forms.
pub fn parse_form_file(text: &str) -> Result<FormFile> {
    let toks = tokenize(text)?;
    let stmts = Parser { toks, pos: 0 }.statements()?;
    let mut ev = Evaluator::new();
    let (mut a, mut l) = (None, None);
    for s in stmts {
        match s {
            Stmt::Def(m) => {
                ev.env.insert(m.name.clone(), Value::Macro(m));
            }
            Stmt::Assign { target, value } => {
                ev.target = target.clone();
                let v = ev.eval(&value)?;
                if target == "a" || target == "L" {
                    let Value::Form(f) = v.clone() else {
                        return at(&value, format!("'{target}' must be an integral (expression * dx)"));
                    };
                    if target == "a" {
                        a = Some(f);
                    } else {
                        l = Some(f);
                    }
                }
                ev.env.insert(target, v);
            }
        }
    }
    if a.is_none() && l.is_none() {
        return Err(Error::NoFormDefined);
    }
    Ok(FormFile { a, l })
}
