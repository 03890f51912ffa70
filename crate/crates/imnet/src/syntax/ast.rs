//! Abstract syntax for programs: queries, event transformers, statements,
//! and the small first-order expression language used in lambda bodies.

use crate::model::{Value, ValueSet};

/// Comparison operators usable in lambda bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        }
    }
}

/// Builtin functions available in lambda bodies. `Switch` takes the value
/// under inspection plus the name of a variable holding an event of switch
/// ids; the rest are unary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Port,
    Switch,
    SrcIp,
    DstIp,
    SrcPort,
    DstPort,
    InPort,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Port => "port",
            Builtin::Switch => "switch",
            Builtin::SrcIp => "srcip",
            Builtin::DstIp => "dstip",
            Builtin::SrcPort => "srcport",
            Builtin::DstPort => "dstport",
            Builtin::InPort => "inport",
        }
    }
}

/// First-order expressions; the bodies of lambdas and filter predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Const(Value),
    /// Tuple former. A pair whose evaluation yields one tuple and one scalar
    /// flattens into an (n+1)-tuple with the scalar first.
    Tuple(Vec<Expr>),
    /// Zero-based component projection, written `e.0`.
    Proj(usize, Box<Expr>),
    /// Builtin application; for `Switch` the second argument names a variable.
    Builtin(Builtin, Vec<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

/// A single-parameter lambda, written `\t -> body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lambda {
    pub param: String,
    pub body: Expr,
}

impl Lambda {
    pub fn new(param: impl Into<String>, body: Expr) -> Self {
        Lambda { param: param.into(), body }
    }

    /// The identity lambda `\t -> t`.
    pub fn identity() -> Self {
        Lambda::new("t", Expr::Var("t".into()))
    }
}

/// Event transformers; each maps variable-state contents to a new event or
/// rule structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventTransformer {
    Lift(String, Lambda),
    ApplyLft(String, Lambda),
    ApplyRit(String, Lambda),
    Merge(String, String),
    MixFst(ValueSet, String, String),
    MixSnd(ValueSet, String, String),
    Filter(String, Lambda),
    Once(String, u64),
    MakForwRule(String),
    MakeRule(String),
}

/// Statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign(String, EventTransformer),
    Seq(Box<Stmt>, Box<Stmt>),
    AddRules(String),
    Register,
    Send(String),
}

impl Stmt {
    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    /// Folds a statement list into the parser's canonical left-nested shape.
    /// Panics on an empty list; a program body has at least one statement.
    pub fn seq_all(stmts: Vec<Stmt>) -> Stmt {
        let mut iter = stmts.into_iter();
        let first = iter.next().expect("a program body has at least one statement");
        iter.fold(first, Stmt::seq)
    }

    /// The atomic statements of this tree in execution order.
    pub fn atoms(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Stmt>) {
        match self {
            Stmt::Seq(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            leaf => out.push(leaf),
        }
    }
}

/// Queries named in the definitions section. Unknown names parse as `Custom`
/// and fail at run time unless the fabric registered a handler for them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryName {
    SwitchIds,
    SourceIps,
    ArrivedPackets,
    Custom(String),
}

impl QueryName {
    pub fn from_name(name: &str) -> QueryName {
        match name {
            "SwitchIds" => QueryName::SwitchIds,
            "SourceIps" => QueryName::SourceIps,
            "ArrivedPackets" => QueryName::ArrivedPackets,
            other => QueryName::Custom(other.to_string()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            QueryName::SwitchIds => "SwitchIds",
            QueryName::SourceIps => "SourceIps",
            QueryName::ArrivedPackets => "ArrivedPackets",
            QueryName::Custom(name) => name,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, QueryName::Custom(_))
    }
}

/// A whole program: query definitions followed by a statement body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<(String, QueryName)>,
    pub body: Stmt,
}
