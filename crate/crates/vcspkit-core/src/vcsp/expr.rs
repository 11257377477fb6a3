use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{RelRef, ValuedStructure, VcspError};
use crate::cost::{Cost, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExprAtom {
    pub rel: RelRef,
    pub args: Vec<usize>,
}

/// A formal sum of atoms over variables `0..n`. Repeated atoms count repeatedly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TauExpression {
    variables: Vec<String>,
    atoms: Vec<ExprAtom>,
}

impl TauExpression {
    pub fn new(variables: Vec<String>) -> TauExpression {
        TauExpression {
            variables,
            atoms: Vec::new(),
        }
    }

    /// `n` variables named `x0 .. x{n-1}`.
    pub fn with_vars(n: usize) -> TauExpression {
        TauExpression::new((0..n).map(|i| alloc::format!("x{i}")).collect())
    }

    pub fn push(&mut self, rel: RelRef, args: Vec<usize>) {
        self.atoms.push(ExprAtom { rel, args });
    }

    pub fn with(mut self, rel: RelRef, args: &[usize]) -> TauExpression {
        self.push(rel, args.to_vec());
        self
    }

    pub fn add_variable(&mut self, name: String) -> usize {
        self.variables.push(name);
        self.variables.len() - 1
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn atoms(&self) -> &[ExprAtom] {
        &self.atoms
    }

    pub fn atoms_mut(&mut self) -> &mut Vec<ExprAtom> {
        &mut self.atoms
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Checks arities and variable ranges against a structure.
    pub fn validate(&self, gamma: &ValuedStructure) -> Result<(), VcspError> {
        for a in &self.atoms {
            if let RelRef::Symbol(i) = a.rel {
                if i >= gamma.signature().len() {
                    return Err(VcspError::UnknownSymbol(alloc::format!("#{i}")));
                }
            }
            let arity = gamma.arity_of(a.rel);
            if a.args.len() != arity {
                return Err(VcspError::ArityMismatch {
                    symbol: gamma.name_of(a.rel).to_string(),
                    expected: arity,
                    found: a.args.len(),
                });
            }
            if let Some(&v) = a.args.iter().find(|&&v| v >= self.variables.len()) {
                return Err(VcspError::VariableOutOfRange(v));
            }
        }
        Ok(())
    }

    /// Parses `R(x,y) + S(y,z) + =(x,z)`; variables in first-occurrence order.
    /// Relation names are resolved in `gamma` (`=` and `empty` are built in).
    pub fn parse(text: &str, gamma: &ValuedStructure) -> Result<TauExpression, VcspError> {
        let mut expr = TauExpression::default();
        let text = text.trim();
        if text.is_empty() || text == "0" {
            return Ok(expr);
        }
        let mut depth = 0i32;
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, c) in text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' if depth == 0 => {
                    pieces.push(&text[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&text[start..]);
        for piece in pieces {
            let piece = piece.trim();
            let bad = || VcspError::Syntax(piece.to_string());
            let open = piece.find('(').ok_or_else(bad)?;
            if !piece.ends_with(')') {
                return Err(bad());
            }
            let name = piece[..open].trim();
            let rel = gamma
                .symbol(name)
                .ok_or_else(|| VcspError::UnknownSymbol(name.to_string()))?;
            let inner = &piece[open + 1..piece.len() - 1];
            let mut args = Vec::new();
            for v in inner.split(',') {
                let v = v.trim();
                if v.is_empty() {
                    return Err(bad());
                }
                let idx = match expr.var_index(v) {
                    Some(i) => i,
                    None => expr.add_variable(v.to_string()),
                };
                args.push(idx);
            }
            expr.push(rel, args);
        }
        expr.validate(gamma)?;
        Ok(expr)
    }
}

/// Sum of the summand costs at `a`; the empty sum is 0.
pub fn evaluate(expr: &TauExpression, gamma: &ValuedStructure, a: &[usize]) -> Cost {
    let mut buf = Vec::new();
    expr.atoms()
        .iter()
        .map(|atom| {
            buf.clear();
            buf.extend(atom.args.iter().map(|&v| a[v]));
            gamma.cost(atom.rel, &buf)
        })
        .sum()
}

/// A decision instance: is there an assignment of cost at most `threshold`?
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub expr: TauExpression,
    pub threshold: Rational,
}

impl Instance {
    pub fn new(expr: TauExpression, threshold: Rational) -> Instance {
        Instance { expr, threshold }
    }

    pub fn has_solution(&self, gamma: &ValuedStructure) -> bool {
        crate::solve::solve_exact(&self.expr, gamma).cost <= Cost::Finite(self.threshold.clone())
    }
}
