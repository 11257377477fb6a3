use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{RelRef, ValuedRelation, VcspError, EMPTY_NAME, EQUALITY_NAME};
use crate::cost::Cost;
use crate::query::Signature;

/// A finite-domain valued structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValuedStructure {
    elements: Vec<String>,
    signature: Signature,
    relations: Vec<ValuedRelation>,
}

impl ValuedStructure {
    pub fn new(
        elements: Vec<String>,
        signature: Signature,
        relations: Vec<ValuedRelation>,
    ) -> Result<ValuedStructure, VcspError> {
        if relations.len() != signature.len() {
            return Err(VcspError::RelationCount {
                expected: signature.len(),
                found: relations.len(),
            });
        }
        for (i, r) in relations.iter().enumerate() {
            let name = signature.name(i);
            if name == EQUALITY_NAME || name == EMPTY_NAME {
                return Err(VcspError::ReservedName(name.to_string()));
            }
            if r.arity() != signature.arity(i) {
                return Err(VcspError::ArityMismatch {
                    symbol: name.to_string(),
                    expected: signature.arity(i),
                    found: r.arity(),
                });
            }
            if r.domain_size() != elements.len() {
                return Err(VcspError::DomainMismatch {
                    symbol: name.to_string(),
                    expected: elements.len(),
                    found: r.domain_size(),
                });
            }
        }
        Ok(ValuedStructure {
            elements,
            signature,
            relations,
        })
    }

    /// Builds from `(name, relation)` pairs with elements named `0..n`.
    pub fn from_relations<'a, I>(domain_size: usize, relations: I) -> Result<ValuedStructure, VcspError>
    where
        I: IntoIterator<Item = (&'a str, ValuedRelation)>,
    {
        let mut sig = Signature::new();
        let mut rels = Vec::new();
        for (name, r) in relations {
            sig.add(name, r.arity()).map_err(|_| VcspError::DuplicateSymbol(name.to_string()))?;
            rels.push(r);
        }
        ValuedStructure::new((0..domain_size).map(|i| i.to_string()).collect(), sig, rels)
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn domain_size(&self) -> usize {
        self.elements.len()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn relations(&self) -> &[ValuedRelation] {
        &self.relations
    }

    pub fn relation(&self, i: usize) -> &ValuedRelation {
        &self.relations[i]
    }

    pub fn symbol(&self, name: &str) -> Option<RelRef> {
        match name {
            EQUALITY_NAME => Some(RelRef::Equality),
            EMPTY_NAME => Some(RelRef::Empty),
            _ => self.signature.index_of(name).map(RelRef::Symbol),
        }
    }

    pub fn arity_of(&self, r: RelRef) -> usize {
        match r {
            RelRef::Symbol(i) => self.signature.arity(i),
            RelRef::Equality => 2,
            RelRef::Empty => 1,
        }
    }

    pub fn name_of(&self, r: RelRef) -> &str {
        match r {
            RelRef::Symbol(i) => self.signature.name(i),
            RelRef::Equality => EQUALITY_NAME,
            RelRef::Empty => EMPTY_NAME,
        }
    }

    pub fn cost(&self, r: RelRef, tuple: &[usize]) -> Cost {
        match r {
            RelRef::Symbol(i) => self.relations[i].get(tuple).clone(),
            RelRef::Equality if tuple[0] == tuple[1] => Cost::zero(),
            RelRef::Equality | RelRef::Empty => Cost::Infinite,
        }
    }

    /// Full table of a relation, built-ins included.
    pub fn table_of(&self, r: RelRef) -> ValuedRelation {
        match r {
            RelRef::Symbol(i) => self.relations[i].clone(),
            _ => ValuedRelation::from_fn(self.arity_of(r), self.domain_size(), |t| self.cost(r, t)),
        }
    }

    /// Adds (or replaces) a relation.
    pub fn with_relation(mut self, name: &str, rel: ValuedRelation) -> Result<ValuedStructure, VcspError> {
        if rel.domain_size() != self.domain_size() {
            return Err(VcspError::DomainMismatch {
                symbol: name.to_string(),
                expected: self.domain_size(),
                found: rel.domain_size(),
            });
        }
        match self.signature.index_of(name) {
            Some(i) if self.signature.arity(i) == rel.arity() => {
                self.relations[i] = rel;
                Ok(self)
            }
            Some(i) => Err(VcspError::ArityMismatch {
                symbol: name.to_string(),
                expected: self.signature.arity(i),
                found: rel.arity(),
            }),
            None => {
                if name == EQUALITY_NAME || name == EMPTY_NAME {
                    return Err(VcspError::ReservedName(name.to_string()));
                }
                self.signature
                    .add(name, rel.arity())
                    .map_err(|_| VcspError::DuplicateSymbol(name.to_string()))?;
                self.relations.push(rel);
                Ok(self)
            }
        }
    }

    /// The structure restricted to the kept elements (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> ValuedStructure {
        ValuedStructure {
            elements: keep.iter().map(|&i| self.elements[i].clone()).collect(),
            signature: self.signature.clone(),
            relations: self.relations.iter().map(|r| r.restrict(keep)).collect(),
        }
    }
}
