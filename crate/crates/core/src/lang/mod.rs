//! Front end for the probabilistic programming notation: lexer, parser,
//! syntax tree, pretty-printer and name resolution helpers.

mod assemble;
pub mod ast;
mod diagnostic;
pub mod lexer;
mod names;
mod parser;
mod printer;
mod span;

pub use assemble::assemble_model;
pub use ast::{
    BinaryOp, Else, Expr, ExprKind, Field, Function, Origin, Param, Params, Program, SourceProgram,
    Stmt, UnaryOp,
};
pub use diagnostic::{DiagnosticKind, ParseDiagnostic};
pub use names::{free_functions, free_functions_in_program, is_stdlib, STDLIB_NAMES};
pub use parser::{parse_expression, parse_program, parse_source};
pub use printer::{is_identifier, print_expr, print_program};
pub use span::Span;
