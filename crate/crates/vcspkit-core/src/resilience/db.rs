use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ResilienceError;
use crate::query::{QueryError, RelationalStructure, Signature};

/// One stored tuple identity of a bag database.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub rel: usize,
    pub tuple: Vec<usize>,
    pub mult: u64,
    /// Relation-level or tuple-level exogeneity.
    pub exogenous: bool,
}

/// A database whose tuples carry positive multiplicities. Exogenous data may
/// not be removed: whole relations can be exogenous, and so can single tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BagDatabase {
    signature: Signature,
    elements: Vec<String>,
    relations: Vec<BTreeMap<Vec<usize>, u64>>,
    exogenous: Vec<bool>,
    exogenous_tuples: Vec<BTreeSet<Vec<usize>>>,
}

impl BagDatabase {
    pub fn new(signature: Signature, elements: Vec<String>) -> BagDatabase {
        let k = signature.len();
        BagDatabase {
            signature,
            elements,
            relations: alloc::vec![BTreeMap::new(); k],
            exogenous: alloc::vec![false; k],
            exogenous_tuples: alloc::vec![BTreeSet::new(); k],
        }
    }

    /// Elements named `0..n`.
    pub fn with_size(signature: Signature, n: usize) -> BagDatabase {
        BagDatabase::new(signature, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn ensure_element(&mut self, name: &str) -> usize {
        self.element_index(name).unwrap_or_else(|| {
            self.elements.push(name.to_string());
            self.elements.len() - 1
        })
    }

    fn check(&self, rel: usize, tuple: &[usize]) -> Result<(), ResilienceError> {
        let arity = self.signature.arity(rel);
        if tuple.len() != arity {
            return Err(QueryError::TupleArity {
                relation: self.signature.name(rel).to_string(),
                expected: arity,
                found: tuple.len(),
            }
            .into());
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.elements.len()) {
            return Err(QueryError::ElementOutOfRange(e).into());
        }
        Ok(())
    }

    /// Adds `mult` copies; repeated tuples accumulate.
    pub fn add(&mut self, rel: usize, tuple: Vec<usize>, mult: u64) -> Result<(), ResilienceError> {
        if mult == 0 {
            return Err(ResilienceError::NonPositiveMultiplicity);
        }
        self.check(rel, &tuple)?;
        *self.relations[rel].entry(tuple).or_insert(0) += mult;
        Ok(())
    }

    /// Adds by relation and element names, creating elements as needed.
    pub fn add_named(&mut self, rel: &str, tuple: &[&str], mult: u64) -> Result<(), ResilienceError> {
        let r = self
            .signature
            .index_of(rel)
            .ok_or_else(|| QueryError::UnknownSymbol(rel.to_string()))?;
        let t = tuple.iter().map(|e| self.ensure_element(e)).collect();
        self.add(r, t, mult)
    }

    /// Sets the multiplicity exactly; zero deletes the tuple.
    pub fn set_multiplicity(&mut self, rel: usize, tuple: Vec<usize>, mult: u64) -> Result<(), ResilienceError> {
        self.check(rel, &tuple)?;
        if mult == 0 {
            self.relations[rel].remove(&tuple);
            self.exogenous_tuples[rel].remove(&tuple);
        } else {
            self.relations[rel].insert(tuple, mult);
        }
        Ok(())
    }

    pub fn set_exogenous(&mut self, rel: usize, exogenous: bool) {
        self.exogenous[rel] = exogenous;
    }

    /// Marks a single tuple exogenous, adding one copy when it is absent.
    pub fn mark_exogenous_tuple(&mut self, rel: usize, tuple: Vec<usize>) -> Result<(), ResilienceError> {
        self.check(rel, &tuple)?;
        self.relations[rel].entry(tuple.clone()).or_insert(1);
        self.exogenous_tuples[rel].insert(tuple);
        Ok(())
    }

    pub fn is_exogenous_relation(&self, rel: usize) -> bool {
        self.exogenous[rel]
    }

    /// Indices of exogenous relations.
    pub fn exogenous_relations(&self) -> Vec<usize> {
        (0..self.exogenous.len()).filter(|&r| self.exogenous[r]).collect()
    }

    pub fn has_exogenous_tuples(&self) -> bool {
        self.exogenous_tuples.iter().any(|s| !s.is_empty())
    }

    pub fn is_exogenous(&self, rel: usize, tuple: &[usize]) -> bool {
        self.exogenous[rel] || self.exogenous_tuples[rel].contains(tuple)
    }

    pub fn multiplicity(&self, rel: usize, tuple: &[usize]) -> u64 {
        self.relations[rel].get(tuple).copied().unwrap_or(0)
    }

    pub fn tuples(&self, rel: usize) -> &BTreeMap<Vec<usize>, u64> {
        &self.relations[rel]
    }

    /// All tuple identities, ordered by relation and then tuple.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for (rel, map) in self.relations.iter().enumerate() {
            for (tuple, &mult) in map {
                out.push(Fact {
                    rel,
                    tuple: tuple.clone(),
                    mult,
                    exogenous: self.is_exogenous(rel, tuple),
                });
            }
        }
        out
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.relations.iter().flat_map(|m| m.values()).sum()
    }

    /// Sum of multiplicities over removable tuples.
    pub fn endogenous_weight(&self) -> u64 {
        self.facts().iter().filter(|f| !f.exogenous).map(|f| f.mult).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.iter().all(|m| m.is_empty())
    }

    /// The underlying set database.
    pub fn to_structure(&self) -> RelationalStructure {
        let mut s = RelationalStructure::new(self.signature.clone(), self.elements.clone());
        for (rel, map) in self.relations.iter().enumerate() {
            for tuple in map.keys() {
                s.add_tuple(rel, tuple.clone()).expect("tuples were checked on insertion");
            }
        }
        s
    }

    /// A copy with the given tuple identities deleted entirely.
    pub fn without(&self, removed: &[(usize, Vec<usize>)]) -> BagDatabase {
        let mut out = self.clone();
        for (rel, tuple) in removed {
            out.relations[*rel].remove(tuple);
            out.exogenous_tuples[*rel].remove(tuple);
        }
        out
    }
}
