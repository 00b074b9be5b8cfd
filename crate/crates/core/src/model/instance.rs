use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::graph::ConstraintGraph;
use super::{ModelError, Value, Var};

/// Allowed value pairs of one constraint, oriented from the smaller variable
/// index to the larger one.
pub type Relation = BTreeSet<(Value, Value)>;

/// A binary CSP instance.
///
/// Every pair of variables is constrained. Pairs without a stored relation
/// carry the trivial constraint, i.e. the full product of the current domains.
/// Stored relations are kept normalized: they are subsets of the current
/// domain product and are never the full product (such a relation is dropped,
/// which keeps equality semantic).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Instance {
    domains: Vec<BTreeSet<Value>>,
    relations: BTreeMap<(Var, Var), Relation>,
}

fn key(x: Var, y: Var) -> (Var, Var) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

impl Instance {
    /// An instance over the given domains with every constraint trivial.
    pub fn new<D, I>(domains: D) -> Self
    where
        D: IntoIterator<Item = I>,
        I: IntoIterator<Item = Value>,
    {
        Instance {
            domains: domains
                .into_iter()
                .map(|d| d.into_iter().collect())
                .collect(),
            relations: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn vars(&self) -> std::ops::Range<Var> {
        0..self.domains.len()
    }

    pub fn domain(&self, x: Var) -> &BTreeSet<Value> {
        &self.domains[x]
    }

    pub fn domains(&self) -> &[BTreeSet<Value>] {
        &self.domains
    }

    pub fn has_empty_domain(&self) -> bool {
        self.domains.iter().any(|d| d.is_empty())
    }

    /// Number of (variable, value) points.
    pub fn num_points(&self) -> usize {
        self.domains.iter().map(|d| d.len()).sum()
    }

    pub(crate) fn check_var(&self, x: Var) -> Result<(), ModelError> {
        if x < self.num_vars() {
            Ok(())
        } else {
            Err(ModelError::UnknownVariable(x))
        }
    }

    /// True iff `(x,a)` and `(y,b)` are compatible. Values are assumed to be
    /// in the respective domains.
    pub fn allowed(&self, x: Var, a: Value, y: Var, b: Value) -> bool {
        if x < y {
            self.relations
                .get(&(x, y))
                .is_none_or(|r| r.contains(&(a, b)))
        } else {
            self.relations
                .get(&(y, x))
                .is_none_or(|r| r.contains(&(b, a)))
        }
    }

    /// The stored relation of `{x,y}` oriented as `(value of x, value of y)`,
    /// or `None` when the constraint is trivial.
    pub fn relation(&self, x: Var, y: Var) -> Option<Relation> {
        let r = self.relations.get(&key(x, y))?;
        Some(if x < y {
            r.clone()
        } else {
            r.iter().map(|&(a, b)| (b, a)).collect()
        })
    }

    /// Allowed pairs of `{x,y}` oriented as `(value of x, value of y)`,
    /// materializing trivial constraints.
    pub fn allowed_pairs(&self, x: Var, y: Var) -> Relation {
        match self.relation(x, y) {
            Some(r) => r,
            None => self.domains[x]
                .iter()
                .flat_map(|&a| self.domains[y].iter().map(move |&b| (a, b)))
                .collect(),
        }
    }

    /// Unordered pairs `(x,y)`, `x < y`, whose constraint is non-trivial, in
    /// lexicographic order.
    pub fn constrained_pairs(&self) -> impl Iterator<Item = (Var, Var)> + '_ {
        self.relations.keys().copied()
    }

    pub fn num_constraints(&self) -> usize {
        self.relations.len()
    }

    /// Variables sharing a non-trivial constraint with `x`, ascending.
    pub fn neighbours(&self, x: Var) -> Vec<Var> {
        let mut out: Vec<Var> = self
            .relations
            .keys()
            .filter_map(|&(a, b)| {
                if a == x {
                    Some(b)
                } else if b == x {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Values of `y` compatible with `(x,a)`.
    pub fn supports(&self, x: Var, a: Value, y: Var) -> impl Iterator<Item = Value> + '_ {
        self.domains[y]
            .iter()
            .copied()
            .filter(move |&b| self.allowed(x, a, y, b))
    }

    pub fn has_support(&self, x: Var, a: Value, y: Var) -> bool {
        self.supports(x, a, y).next().is_some()
    }

    /// True iff `R(x,y)` contains the full product of the current domains.
    pub fn is_trivial(&self, x: Var, y: Var) -> Result<bool, ModelError> {
        self.check_var(x)?;
        self.check_var(y)?;
        if x == y {
            return Err(ModelError::SelfLoop(x));
        }
        Ok(!self.relations.contains_key(&key(x, y)))
    }

    pub(crate) fn trivial(&self, x: Var, y: Var) -> bool {
        !self.relations.contains_key(&key(x, y))
    }

    pub fn constraint_graph(&self) -> ConstraintGraph {
        ConstraintGraph::from_edges(self.num_vars(), self.constrained_pairs())
    }

    /// Intersect `R(x,y)` with `allowed`, given as `(value of x, value of y)`.
    pub fn restrict<I>(&mut self, x: Var, y: Var, allowed: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (Value, Value)>,
    {
        self.check_var(x)?;
        self.check_var(y)?;
        if x == y {
            return Err(ModelError::SelfLoop(x));
        }
        let mut keep = Relation::new();
        for (a, b) in allowed {
            self.check_value(x, a)?;
            self.check_value(y, b)?;
            keep.insert(if x < y { (a, b) } else { (b, a) });
        }
        let k = key(x, y);
        let current = self.allowed_pairs(k.0, k.1);
        let next: Relation = current.intersection(&keep).copied().collect();
        self.relations.insert(k, next);
        self.normalize_pair(k);
        Ok(())
    }

    /// Remove the given pairs from `R(x,y)`.
    pub fn forbid<I>(&mut self, x: Var, y: Var, forbidden: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = (Value, Value)>,
    {
        self.check_var(x)?;
        self.check_var(y)?;
        if x == y {
            return Err(ModelError::SelfLoop(x));
        }
        let k = key(x, y);
        let mut rel = self.allowed_pairs(k.0, k.1);
        for (a, b) in forbidden {
            self.check_value(x, a)?;
            self.check_value(y, b)?;
            rel.remove(&if x < y { (a, b) } else { (b, a) });
        }
        self.relations.insert(k, rel);
        self.normalize_pair(k);
        Ok(())
    }

    /// Replace `R(x,y)` by the trivial constraint.
    pub fn clear_constraint(&mut self, x: Var, y: Var) {
        self.relations.remove(&key(x, y));
    }

    fn check_value(&self, x: Var, v: Value) -> Result<(), ModelError> {
        if self.domains[x].contains(&v) {
            Ok(())
        } else {
            Err(ModelError::ValueNotInDomain { var: x, value: v })
        }
    }

    fn normalize_pair(&mut self, k: (Var, Var)) {
        let Some(rel) = self.relations.get(&k) else {
            return;
        };
        let full = self.domains[k.0].len() * self.domains[k.1].len();
        if rel.len() == full {
            self.relations.remove(&k);
        }
    }

    /// Functional value removal: returns a new instance without `(x,v)`.
    pub fn remove_value(&self, x: Var, v: Value) -> Result<Instance, ModelError> {
        let mut out = self.clone();
        out.remove_value_mut(x, v)?;
        Ok(out)
    }

    /// Remove `(x,v)` in place, dropping every pair that mentions it.
    pub fn remove_value_mut(&mut self, x: Var, v: Value) -> Result<(), ModelError> {
        self.check_var(x)?;
        if !self.domains[x].remove(&v) {
            return Err(ModelError::ValueNotInDomain { var: x, value: v });
        }
        let keys: Vec<(Var, Var)> = self
            .relations
            .keys()
            .copied()
            .filter(|&(a, b)| a == x || b == x)
            .collect();
        for k in keys {
            if let Some(rel) = self.relations.get_mut(&k) {
                if k.0 == x {
                    rel.retain(|&(a, _)| a != v);
                } else {
                    rel.retain(|&(_, b)| b != v);
                }
            }
            self.normalize_pair(k);
        }
        debug_assert!(self.invariants_hold());
        Ok(())
    }

    /// Restrict `D(x)` to `{v}`.
    pub fn assign_mut(&mut self, x: Var, v: Value) -> Result<(), ModelError> {
        self.check_var(x)?;
        self.check_value(x, v)?;
        let others: Vec<Value> = self.domains[x].iter().copied().filter(|&w| w != v).collect();
        for w in others {
            self.remove_value_mut(x, w)?;
        }
        Ok(())
    }

    /// Empty every domain. Used as the canonical representation of a wipeout.
    pub fn wipe_out(&mut self) {
        for d in &mut self.domains {
            d.clear();
        }
        self.relations.clear();
    }

    /// Add a fresh value to `D(x)` whose compatibilities are given by
    /// `compatible(y, b)` for every other point `(y,b)`.
    pub(crate) fn add_value_with<F>(&mut self, x: Var, v: Value, mut compatible: F)
    where
        F: FnMut(Var, Value) -> bool,
    {
        // a trivial constraint stays trivial only if the new value is
        // compatible with the whole other domain
        for y in self.vars().filter(|&y| y != x) {
            let k = key(x, y);
            if self.relations.contains_key(&k) {
                continue;
            }
            if !self.domains[y].iter().all(|&b| compatible(y, b)) {
                let rel = self.allowed_pairs(k.0, k.1);
                self.relations.insert(k, rel);
            }
        }
        self.domains[x].insert(v);
        let keys: Vec<(Var, Var)> = self
            .relations
            .keys()
            .copied()
            .filter(|&(a, b)| a == x || b == x)
            .collect();
        for k in keys {
            let y = if k.0 == x { k.1 } else { k.0 };
            let ys: Vec<Value> = self.domains[y].iter().copied().collect();
            let rel = self.relations.get_mut(&k).expect("present");
            for b in ys {
                if compatible(y, b) {
                    rel.insert(if k.0 == x { (v, b) } else { (b, v) });
                }
            }
            self.normalize_pair(k);
        }
        debug_assert!(self.invariants_hold());
    }

    /// Append a variable with trivial constraints; returns its index.
    pub fn add_var<I: IntoIterator<Item = Value>>(&mut self, domain: I) -> Var {
        self.domains.push(domain.into_iter().collect());
        self.domains.len() - 1
    }

    /// The projection onto `vars`. Variables are renumbered in ascending
    /// order of their original index.
    pub fn project(&self, vars: &BTreeSet<Var>) -> Result<Instance, ModelError> {
        for &x in vars {
            self.check_var(x)?;
        }
        let order: Vec<Var> = vars.iter().copied().collect();
        let mut index = vec![usize::MAX; self.num_vars()];
        for (i, &x) in order.iter().enumerate() {
            index[x] = i;
        }
        let domains = order.iter().map(|&x| self.domains[x].clone()).collect();
        let relations = self
            .relations
            .iter()
            .filter(|((a, b), _)| index[*a] != usize::MAX && index[*b] != usize::MAX)
            .map(|(&(a, b), r)| ((index[a], index[b]), r.clone()))
            .collect();
        Ok(Instance { domains, relations })
    }

    /// Domain product size, saturating.
    pub fn search_space(&self) -> u128 {
        self.domains
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    /// Symmetry and normalization invariants.
    pub fn invariants_hold(&self) -> bool {
        self.relations.iter().all(|(&(x, y), r)| {
            x < y
                && y < self.num_vars()
                && r.len() < self.domains[x].len() * self.domains[y].len()
                && r
                    .iter()
                    .all(|(a, b)| self.domains[x].contains(a) && self.domains[y].contains(b))
        })
    }

    /// True iff `s` is total, within domains and satisfies every constraint.
    pub fn verify_solution(&self, s: &Assignment) -> Result<bool, ModelError> {
        for x in self.vars() {
            if s.get(x).is_none() {
                return Err(ModelError::PartialAssignment(x));
            }
        }
        Ok(self.is_consistent(s))
    }

    /// True iff every bound value is in its domain and every constraint
    /// between two bound variables is satisfied.
    pub fn is_consistent(&self, s: &Assignment) -> bool {
        for (x, v) in s.iter() {
            if x >= self.num_vars() || !self.domains[x].contains(&v) {
                return false;
            }
        }
        self.relations.iter().all(|(&(x, y), r)| {
            match (s.get(x), s.get(y)) {
                (Some(a), Some(b)) => r.contains(&(a, b)),
                _ => true,
            }
        })
    }
}

/// A partial or total map from variables to values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<Var, Value>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn get(&self, x: Var) -> Option<Value> {
        self.0.get(&x).copied()
    }

    pub fn set(&mut self, x: Var, v: Value) {
        self.0.insert(x, v);
    }

    pub fn unset(&mut self, x: Var) -> Option<Value> {
        self.0.remove(&x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Value)> + '_ {
        self.0.iter().map(|(&x, &v)| (x, v))
    }

    /// Copy bindings of `other` whose variables are renamed through `map`.
    pub fn extend_mapped(&mut self, other: &Assignment, map: &[Var]) {
        for (x, v) in other.iter() {
            self.set(map[x], v);
        }
    }
}

impl FromIterator<(Var, Value)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Var, Value)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, v) in self.iter() {
            writeln!(f, "x{x}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neq(n: usize, q: i64) -> Instance {
        let mut inst = Instance::new((0..n).map(|_| 1..=q));
        for x in 0..n {
            for y in x + 1..n {
                inst.forbid(x, y, (1..=q).map(|j| (j, j))).unwrap();
            }
        }
        inst
    }

    #[test]
    fn forbid_stores_complement() {
        let mut inst = Instance::new([vec![1, 2], vec![1, 2]]);
        inst.forbid(0, 1, [(1, 1)]).unwrap();
        let r = inst.relation(0, 1).unwrap();
        assert_eq!(r, [(1, 2), (2, 1), (2, 2)].into_iter().collect());
        assert!(!inst.allowed(1, 1, 0, 1));
        assert!(inst.allowed(1, 2, 0, 1));
    }

    #[test]
    fn triviality_is_dynamic() {
        let inst = Instance::new([vec![1, 2], vec![1, 2]]);
        assert!(inst.is_trivial(0, 1).unwrap());
        let mut inst = neq(2, 2);
        assert!(!inst.is_trivial(0, 1).unwrap());
        inst.remove_value_mut(0, 2).unwrap();
        inst.remove_value_mut(1, 1).unwrap();
        assert!(inst.is_trivial(0, 1).unwrap());
        assert!(matches!(inst.is_trivial(0, 0), Err(ModelError::SelfLoop(0))));
        assert!(matches!(inst.is_trivial(0, 5), Err(ModelError::UnknownVariable(5))));
    }

    #[test]
    fn removing_last_value_empties_relations() {
        let mut inst = neq(3, 1);
        inst.remove_value_mut(0, 1).unwrap();
        assert!(inst.domain(0).is_empty());
        assert!(inst.relation(0, 1).is_none());
        assert!(inst.allowed_pairs(0, 2).is_empty());
        assert!(inst.remove_value_mut(0, 1).is_err());
    }

    #[test]
    fn verify_solution_cases() {
        let empty = Instance::default();
        assert!(empty.verify_solution(&Assignment::new()).unwrap());
        let k3 = neq(3, 3);
        let s: Assignment = [(0, 1), (1, 2), (2, 3)].into_iter().collect();
        assert!(k3.verify_solution(&s).unwrap());
        let partial: Assignment = [(0, 1)].into_iter().collect();
        assert!(matches!(
            k3.verify_solution(&partial),
            Err(ModelError::PartialAssignment(1))
        ));
        let k4 = neq(4, 3);
        for code in 0..81 {
            let s: Assignment = (0..4).map(|i| (i, (code / 3i64.pow(i as u32)) % 3 + 1)).collect();
            assert!(!k4.verify_solution(&s).unwrap());
        }
    }

    #[test]
    fn projection_composes() {
        let k4 = neq(4, 3);
        let s: BTreeSet<Var> = [1, 2, 3].into_iter().collect();
        let t: BTreeSet<Var> = [1, 3].into_iter().collect();
        let p = k4.project(&s).unwrap();
        let local_t: BTreeSet<Var> = [0, 2].into_iter().collect();
        assert_eq!(p.project(&local_t).unwrap(), k4.project(&t).unwrap());
        assert_eq!(k4.project(&(0..4).collect()).unwrap(), k4);
        let pair = k4.project(&t).unwrap();
        assert_eq!(pair.num_constraints(), 1);
        assert!(k4.project(&[9].into_iter().collect()).is_err());
    }

    #[test]
    fn add_value_materializes_trivial_constraints() {
        let mut inst = Instance::new([vec![1], vec![1, 2]]);
        inst.add_value_with(0, 7, |_, b| b == 1);
        assert!(inst.allowed(0, 7, 1, 1));
        assert!(!inst.allowed(0, 7, 1, 2));
        assert!(inst.allowed(0, 1, 1, 2));
        assert!(inst.invariants_hold());
    }
}
