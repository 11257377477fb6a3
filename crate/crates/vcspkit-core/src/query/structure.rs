use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{QueryError, Signature};

/// A finite relational structure. Elements are indices into `elements`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelationalStructure {
    signature: Signature,
    elements: Vec<String>,
    relations: Vec<BTreeSet<Vec<usize>>>,
}

impl RelationalStructure {
    pub fn new(signature: Signature, elements: Vec<String>) -> RelationalStructure {
        let relations = (0..signature.len()).map(|_| BTreeSet::new()).collect();
        RelationalStructure {
            signature,
            elements,
            relations,
        }
    }

    /// Elements named `0..n`.
    pub fn with_size(signature: Signature, n: usize) -> RelationalStructure {
        RelationalStructure::new(signature, (0..n).map(|i| i.to_string()).collect())
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

    /// Returns the index of `name`, appending it when new.
    pub fn ensure_element(&mut self, name: &str) -> usize {
        match self.element_index(name) {
            Some(i) => i,
            None => {
                self.elements.push(name.to_string());
                self.elements.len() - 1
            }
        }
    }

    pub fn add_tuple(&mut self, rel: usize, tuple: Vec<usize>) -> Result<bool, QueryError> {
        let arity = self.signature.arity(rel);
        if tuple.len() != arity {
            return Err(QueryError::TupleArity {
                relation: self.signature.name(rel).to_string(),
                expected: arity,
                found: tuple.len(),
            });
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.elements.len()) {
            return Err(QueryError::ElementOutOfRange(e));
        }
        Ok(self.relations[rel].insert(tuple))
    }

    /// Adds a tuple by relation and element names, creating elements on demand.
    pub fn add_named(&mut self, rel: &str, tuple: &[&str]) -> Result<bool, QueryError> {
        let r = self
            .signature
            .index_of(rel)
            .ok_or_else(|| QueryError::UnknownSymbol(rel.to_string()))?;
        let t = tuple.iter().map(|e| self.ensure_element(e)).collect();
        self.add_tuple(r, t)
    }

    pub fn remove_tuple(&mut self, rel: usize, tuple: &[usize]) -> bool {
        self.relations[rel].remove(tuple)
    }

    pub fn contains(&self, rel: usize, tuple: &[usize]) -> bool {
        self.relations[rel].contains(tuple)
    }

    pub fn tuples(&self, rel: usize) -> &BTreeSet<Vec<usize>> {
        &self.relations[rel]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.signature.index_of(name).map(|r| &self.relations[r])
    }

    pub fn fact_count(&self) -> usize {
        self.relations.iter().map(|r| r.len()).sum()
    }

    /// All facts as `(relation, tuple)` in relation order.
    pub fn facts(&self) -> impl Iterator<Item = (usize, &Vec<usize>)> + '_ {
        self.relations
            .iter()
            .enumerate()
            .flat_map(|(r, ts)| ts.iter().map(move |t| (r, t)))
    }

    /// Substructure induced on `subset` (kept in the given order).
    pub fn induced(&self, subset: &[usize]) -> RelationalStructure {
        let mut position = alloc::vec![usize::MAX; self.size()];
        for (i, &e) in subset.iter().enumerate() {
            position[e] = i;
        }
        let elements = subset.iter().map(|&e| self.elements[e].clone()).collect();
        let mut out = RelationalStructure::new(self.signature.clone(), elements);
        for (r, t) in self.facts() {
            if t.iter().all(|&e| position[e] != usize::MAX) {
                out.relations[r].insert(t.iter().map(|&e| position[e]).collect());
            }
        }
        out
    }

    /// Image of the structure under an element map into `n` elements.
    pub fn map_elements(&self, map: &[usize], elements: Vec<String>) -> RelationalStructure {
        let mut out = RelationalStructure::new(self.signature.clone(), elements);
        for (r, t) in self.facts() {
            out.relations[r].insert(t.iter().map(|&e| map[e]).collect());
        }
        out
    }

    /// Disjoint union; element names of `other` get `suffix` appended.
    pub fn disjoint_union(&self, other: &RelationalStructure, suffix: &str) -> RelationalStructure {
        let offset = self.size();
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().map(|e| alloc::format!("{e}{suffix}")));
        let mut out = RelationalStructure::new(self.signature.clone(), elements);
        out.relations = self.relations.clone();
        for (r, t) in other.facts() {
            let name = other.signature.name(r);
            if let Some(rr) = self.signature.index_of(name) {
                out.relations[rr].insert(t.iter().map(|&e| e + offset).collect());
            }
        }
        out
    }
}
