use alloc::vec::Vec;

use crate::cost::Cost;

/// A total cost table on `domain_size^arity` tuples, indexed lexicographically
/// with the first coordinate most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValuedRelation {
    arity: usize,
    domain_size: usize,
    table: Vec<Cost>,
}

impl ValuedRelation {
    pub fn constant(arity: usize, domain_size: usize, value: Cost) -> ValuedRelation {
        ValuedRelation {
            arity,
            domain_size,
            table: alloc::vec![value; tuple_count(arity, domain_size)],
        }
    }

    pub fn from_fn(arity: usize, domain_size: usize, mut f: impl FnMut(&[usize]) -> Cost) -> ValuedRelation {
        let count = tuple_count(arity, domain_size);
        let mut table = Vec::with_capacity(count);
        let mut t = alloc::vec![0; arity];
        for idx in 0..count {
            decode_into(idx, domain_size, &mut t);
            table.push(f(&t));
        }
        ValuedRelation {
            arity,
            domain_size,
            table,
        }
    }

    /// Table given in lexicographic tuple order; `None` if its length is wrong.
    pub fn from_table(arity: usize, domain_size: usize, table: Vec<Cost>) -> Option<ValuedRelation> {
        (table.len() == tuple_count(arity, domain_size)).then_some(ValuedRelation {
            arity,
            domain_size,
            table,
        })
    }

    /// 0 on the listed tuples, ∞ elsewhere.
    pub fn crisp<'a, I: IntoIterator<Item = &'a [usize]>>(arity: usize, domain_size: usize, tuples: I) -> ValuedRelation {
        let mut r = ValuedRelation::constant(arity, domain_size, Cost::Infinite);
        for t in tuples {
            r.set(t, Cost::zero());
        }
        r
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn table(&self) -> &[Cost] {
        &self.table
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        encode(tuple, self.domain_size)
    }

    pub fn get(&self, tuple: &[usize]) -> &Cost {
        &self.table[self.index(tuple)]
    }

    pub fn at(&self, index: usize) -> &Cost {
        &self.table[index]
    }

    pub fn set(&mut self, tuple: &[usize], value: Cost) {
        let i = self.index(tuple);
        self.table[i] = value;
    }

    pub fn tuple(&self, index: usize) -> Vec<usize> {
        let mut t = alloc::vec![0; self.arity];
        decode_into(index, self.domain_size, &mut t);
        t
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Smallest value; ∞ if every tuple is infeasible.
    pub fn min_value(&self) -> Cost {
        self.table.iter().min().cloned().unwrap_or(Cost::Infinite)
    }

    /// Largest finite value, if any.
    pub fn max_finite(&self) -> Option<Cost> {
        self.table.iter().filter(|c| c.is_finite()).max().cloned()
    }

    pub fn is_crisp(&self) -> bool {
        self.table.iter().all(|c| c.is_zero() || c.is_infinite())
    }

    /// Tuples of finite cost.
    pub fn feasible_tuples(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .filter(|&i| self.table[i].is_finite())
            .map(|i| self.tuple(i))
            .collect()
    }

    pub fn map_values(&self, mut f: impl FnMut(&Cost) -> Cost) -> ValuedRelation {
        ValuedRelation {
            arity: self.arity,
            domain_size: self.domain_size,
            table: self.table.iter().map(&mut f).collect(),
        }
    }

    /// The relation on a sub-domain, given as a list of kept elements.
    pub fn restrict(&self, keep: &[usize]) -> ValuedRelation {
        ValuedRelation::from_fn(self.arity, keep.len(), |t| {
            let orig: Vec<usize> = t.iter().map(|&i| keep[i]).collect();
            self.get(&orig).clone()
        })
    }
}

pub fn tuple_count(arity: usize, domain_size: usize) -> usize {
    domain_size.pow(arity as u32)
}

pub fn encode(tuple: &[usize], base: usize) -> usize {
    tuple.iter().fold(0, |acc, &v| acc * base + v)
}

pub fn decode_into(mut index: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}

pub fn decode(index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut t = alloc::vec![0; len];
    decode_into(index, base, &mut t);
    t
}
