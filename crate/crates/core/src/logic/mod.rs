//! First-order formulas over (Z, +, |) and ring languages: parsing,
//! printing, quantifier profiles, evaluation, and formula transforms.

mod ast;
mod eval;
mod mult;
mod parse;
mod profile;
mod reduce;
mod structure;
mod vertical;
mod weierstrass;

pub use ast::{fresh_name, Atom, Formula, Sort, Term};
pub use eval::{eval_formula, EvalError, EvalMode, Evaluator, Truth};
pub use mult::{mult_formula, mult_formula_missing_pin, product_oracle, validate_defining_formula, Disagreement, ValidationReport};
pub use parse::{parse, parse_term_text, ParseError};
pub use profile::{profile, QuantifierProfile};
pub use structure::{IntegerLike, IntegerStructure, QuadRing, RationalRing, Structure};
pub use weierstrass::{weierstrass_quantifier_rewrite, weierstrass_rewrite_with_body, RewriteError};
pub use reduce::{reduce_quantifiers, truncated_rings, AlphaData, Gamma, ReduceError, Reduced};
pub use vertical::{rankonedown_check, subfield_check, LevelWitness, RejectionCertificate, SearchSummary, SquareCertificate, VerticalConfig, VerticalError, VerticalForm, VerticalReport, VerticalVerdict};
