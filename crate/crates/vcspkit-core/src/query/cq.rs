use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{QueryError, RelationalStructure, Signature};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: usize,
    pub args: Vec<usize>,
}

/// A Boolean conjunctive query: an existentially quantified conjunction of atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    signature: Signature,
    variables: Vec<String>,
    atoms: Vec<Atom>,
}

impl ConjunctiveQuery {
    pub fn new(
        signature: Signature,
        variables: Vec<String>,
        atoms: Vec<Atom>,
    ) -> Result<ConjunctiveQuery, QueryError> {
        if atoms.is_empty() {
            return Err(QueryError::NoAtoms);
        }
        let mut used = alloc::vec![false; variables.len()];
        for a in &atoms {
            if a.relation >= signature.len() {
                return Err(QueryError::UnknownSymbol(alloc::format!("#{}", a.relation)));
            }
            let arity = signature.arity(a.relation);
            if a.args.len() != arity {
                return Err(QueryError::TupleArity {
                    relation: signature.name(a.relation).to_string(),
                    expected: arity,
                    found: a.args.len(),
                });
            }
            for &v in &a.args {
                if v >= variables.len() {
                    return Err(QueryError::ElementOutOfRange(v));
                }
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(QueryError::UnusedVariable(variables[v].clone()));
        }
        Ok(ConjunctiveQuery {
            signature,
            variables,
            atoms,
        })
    }

    /// Parses a rule body such as `R(x,y), S(y,z)` (a full rule is accepted too).
    pub fn parse(text: &str, sig: &Signature) -> Result<ConjunctiveQuery, QueryError> {
        let text = text.trim();
        let rule = if text.contains(":-") {
            alloc::string::String::from(text)
        } else {
            alloc::format!("q() :- {}.", text.trim_end_matches('.'))
        };
        let u = super::parse_union_query(&rule, sig)?;
        if u.disjuncts().len() != 1 {
            return Err(QueryError::NotConjunctive);
        }
        Ok(u.disjuncts()[0].clone())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Structure whose elements are the variables and whose tuples are the atoms.
    pub fn canonical_database(&self) -> RelationalStructure {
        let mut s = RelationalStructure::new(self.signature.clone(), self.variables.clone());
        for a in &self.atoms {
            s.add_tuple(a.relation, a.args.clone())
                .expect("atoms are validated on construction");
        }
        s
    }

    /// The canonical query of a structure: one variable per element, one atom per
    /// tuple. Elements occurring in no tuple are dropped.
    pub fn from_structure(s: &RelationalStructure) -> Result<ConjunctiveQuery, QueryError> {
        let mut renumber = alloc::vec![usize::MAX; s.size()];
        let mut variables = Vec::new();
        let mut atoms = Vec::new();
        for (r, t) in s.facts() {
            let args = t
                .iter()
                .map(|&e| {
                    if renumber[e] == usize::MAX {
                        renumber[e] = variables.len();
                        variables.push(s.elements()[e].clone());
                    }
                    renumber[e]
                })
                .collect();
            atoms.push(Atom { relation: r, args });
        }
        ConjunctiveQuery::new(s.signature().clone(), variables, atoms)
    }

    /// True iff every database satisfying `self` satisfies `other`.
    pub fn implies(&self, other: &ConjunctiveQuery) -> bool {
        super::has_homomorphism(&other.canonical_database(), &self.canonical_database())
    }

    /// Splits the query into its connected components (in order of first variable).
    pub fn components(&self) -> Vec<ConjunctiveQuery> {
        let mut uf = UnionFind::new(self.num_vars());
        for a in &self.atoms {
            for w in a.args.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        for v in 0..self.num_vars() {
            let r = uf.find(v);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        roots
            .iter()
            .map(|&root| {
                let mut renumber = alloc::vec![usize::MAX; self.num_vars()];
                let mut vars = Vec::new();
                for v in 0..self.num_vars() {
                    if uf.find(v) == root {
                        renumber[v] = vars.len();
                        vars.push(self.variables[v].clone());
                    }
                }
                let atoms = self
                    .atoms
                    .iter()
                    .filter(|a| uf.find(a.args[0]) == root)
                    .map(|a| Atom {
                        relation: a.relation,
                        args: a.args.iter().map(|&v| renumber[v]).collect(),
                    })
                    .collect();
                ConjunctiveQuery::new(self.signature.clone(), vars, atoms)
                    .expect("components of a valid query are valid")
            })
            .collect()
    }
}

/// A finite disjunction of conjunctive queries over one signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnionQuery {
    signature: Signature,
    disjuncts: Vec<ConjunctiveQuery>,
}

impl UnionQuery {
    pub fn new(disjuncts: Vec<ConjunctiveQuery>) -> Result<UnionQuery, QueryError> {
        let first = disjuncts.first().ok_or(QueryError::EmptyUnion)?;
        let signature = first.signature().clone();
        if disjuncts.iter().any(|d| d.signature() != &signature) {
            return Err(QueryError::SignatureMismatch);
        }
        Ok(UnionQuery {
            signature,
            disjuncts,
        })
    }

    pub fn parse(text: &str, sig: &Signature) -> Result<UnionQuery, QueryError> {
        super::parse_union_query(text, sig)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn disjuncts(&self) -> &[ConjunctiveQuery] {
        &self.disjuncts
    }

    /// True iff `s` satisfies some disjunct.
    pub fn holds_in(&self, s: &RelationalStructure) -> bool {
        self.disjuncts
            .iter()
            .any(|d| super::has_homomorphism(&d.canonical_database(), s))
    }

    pub fn max_atom_arity(&self) -> usize {
        self.disjuncts
            .iter()
            .flat_map(|d| d.atoms().iter().map(|a| a.args.len()))
            .max()
            .unwrap_or(0)
    }
}

impl From<ConjunctiveQuery> for UnionQuery {
    fn from(cq: ConjunctiveQuery) -> UnionQuery {
        UnionQuery {
            signature: cq.signature().clone(),
            disjuncts: alloc::vec![cq],
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
