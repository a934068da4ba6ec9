//! The policy specification language: parsing, validation, pretty-printing
//! and the builtin catalog.
//!
//! Source files use `//` line comments, newline- or semicolon-terminated
//! statements, and five statement forms: `const` bindings, comparator /
//! predicate / action definitions, object declarations, and property
//! bindings. See [`ArchSpec::parse`].

pub mod ast;
pub mod builtins;
mod lexer;
mod parser;
mod printer;
pub mod validate;

use std::collections::BTreeMap;

pub use ast::{
    ActionDef, ActionStmt, ArchSpec, AssignOp, BinOp, BindingValue, ComparatorDef, Expr,
    LambdaBody, ObjectDecl, ObjectKind, PredicateDef, PropertyBinding, Signal, UnaryOp,
};
pub use builtins::{Builtin, BuiltinKind, BUILTINS};

use crate::diag::Diagnostic;

impl ArchSpec {
    /// Parse and statically check a program. Constants without a `const`
    /// binding are allowed here — they may be supplied at instantiation —
    /// so run [`ArchSpec::validate`] with the final constant set before
    /// building a runtime.
    pub fn parse(src: &str) -> Result<ArchSpec, Vec<Diagnostic>> {
        let spec = parser::parse_program(src)?;
        let diags = validate::check(&spec, validate::ConstMode::Lenient);
        if diags.is_empty() {
            Ok(spec)
        } else {
            Err(diags)
        }
    }

    /// Full validation against the externally supplied constants. An empty
    /// result means the program can be instantiated.
    pub fn validate(&self, consts: &BTreeMap<String, i64>) -> Vec<Diagnostic> {
        validate::check(self, validate::ConstMode::Strict(consts))
    }

    /// Canonical one-statement-per-line source form. Reparsing the result
    /// yields a structurally equal spec.
    pub fn to_source(&self) -> String {
        printer::print_spec(self)
    }

    /// Constants visible to this program: declared ones overlaid with the
    /// provided overrides (overrides win).
    pub fn resolved_constants(&self, overrides: &BTreeMap<String, i64>) -> BTreeMap<String, i64> {
        let mut all = self.constants.clone();
        for (k, v) in overrides {
            all.insert(k.clone(), *v);
        }
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_win_over_declared_constants() {
        let spec = ArchSpec::parse("const k = 2\nq1 = Queue(k)").unwrap();
        let overrides: BTreeMap<String, i64> = [("k".to_string(), 5i64)].into();
        let resolved = spec.resolved_constants(&overrides);
        assert_eq!(resolved["k"], 5);

        let world = crate::World::instantiate(&spec, &overrides).unwrap();
        assert_eq!(world.queue(0).capacity, 5);
        let plain = crate::World::instantiate(&spec, &BTreeMap::new()).unwrap();
        assert_eq!(plain.queue(0).capacity, 2);
    }
}
