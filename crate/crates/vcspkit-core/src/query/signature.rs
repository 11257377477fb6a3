use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::QueryError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Relational signature: an ordered list of uniquely named symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn from_symbols<'a, I>(symbols: I) -> Result<Signature, QueryError>
    where
        I: IntoIterator<Item = (&'a str, usize)>,
    {
        let mut sig = Signature::new();
        for (name, arity) in symbols {
            sig.add(name, arity)?;
        }
        Ok(sig)
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<usize, QueryError> {
        if arity == 0 {
            return Err(QueryError::ZeroArity(name.to_string()));
        }
        if self.index_of(name).is_some() {
            return Err(QueryError::DuplicateRelation(name.to_string()));
        }
        self.symbols.push(Symbol {
            name: name.to_string(),
            arity,
        });
        Ok(self.symbols.len() - 1)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.symbols[rel].arity
    }

    pub fn name(&self, rel: usize) -> &str {
        &self.symbols[rel].name
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}
