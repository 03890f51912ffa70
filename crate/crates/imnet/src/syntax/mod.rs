//! Concrete syntax: lexer, program parser, value parser, pretty-printer, and
//! expression evaluation.

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod values;
