use std::collections::BTreeSet;

use super::Var;

/// Undirected simple graph over variables `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    adj: Vec<BTreeSet<Var>>,
}

impl ConstraintGraph {
    pub fn from_edges<I: IntoIterator<Item = (Var, Var)>>(n: usize, edges: I) -> Self {
        let mut adj = vec![BTreeSet::new(); n];
        for (x, y) in edges {
            if x != y {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        ConstraintGraph { adj }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, x: Var) -> usize {
        self.adj[x].len()
    }

    pub fn has_edge(&self, x: Var, y: Var) -> bool {
        self.adj[x].contains(&y)
    }

    pub fn neighbours(&self, x: Var) -> &BTreeSet<Var> {
        &self.adj[x]
    }

    /// Edges `(x,y)` with `x < y`, lexicographic.
    pub fn edges(&self) -> Vec<(Var, Var)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(x, ns)| ns.iter().filter(move |&&y| y > x).map(move |&y| (x, y)))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<BTreeSet<Var>> {
        self.components_within(&(0..self.adj.len()).collect())
    }

    /// Connected components of the subgraph induced by `within`.
    pub fn components_within(&self, within: &BTreeSet<Var>) -> Vec<BTreeSet<Var>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &s in within {
            if !seen.insert(s) {
                continue;
            }
            let mut comp = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &y in &self.adj[x] {
                    if within.contains(&y) && seen.insert(y) {
                        comp.insert(y);
                        stack.push(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// True iff the subgraph induced by `within` has no cycle.
    pub fn is_forest_within(&self, within: &BTreeSet<Var>) -> bool {
        let edges = within
            .iter()
            .map(|&x| self.adj[x].iter().filter(|&&y| y > x && within.contains(&y)).count())
            .sum::<usize>();
        edges + self.components_within(within).len() == within.len()
    }

    pub fn is_forest(&self) -> bool {
        self.is_forest_within(&(0..self.adj.len()).collect())
    }
}
