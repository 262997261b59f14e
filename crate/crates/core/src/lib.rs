//! A workbench for many-sorted coherent logic: syntax, a bounded coherent
//! prover with finite-model search, theory translations and t-maps, Morita
//! extensions, and finite coherent categories with their internal logic.

pub mod catlogic;
pub mod enumerate;
pub mod model;
pub mod morita;
pub mod parse;
pub mod print;
pub mod prover;
pub mod report;
pub mod translation;
pub mod workspace;
pub mod syntax;

pub use model::{check_model, find_countermodel, FiniteModel};
pub use prover::{decide_propositional, prove_sequent, Budget, ProofResult};
pub use parse::{parse_formula, parse_sequent, parse_theory, ParseError};
pub use syntax::{alpha_equal, substitute, unfold_function_graphs, Formula, Sequent, Signature, Term, Theory, Var};
