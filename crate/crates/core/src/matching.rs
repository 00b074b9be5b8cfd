//! Pattern occurrence search and pattern algebra.

use std::collections::BTreeSet;
use std::fmt::Debug;

use thiserror::Error;

use crate::model::{Instance, Pattern, PointRef, Sign, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("anchor point {var}.{point} is not in the pattern", var = .0.var, point = .0.point)]
    BadAnchor(PointRef),
    #[error("target point ({var},{value}) is not in the instance")]
    BadTarget { var: Var, value: Value },
}

/// Something a pattern can be mapped into: an instance (total labelling) or
/// another pattern (partial labelling).
pub trait Target {
    type Point: Copy + Ord + Debug;
    fn target_vars(&self) -> usize;
    fn target_points(&self, x: Var) -> Vec<Self::Point>;
    fn sign(&self, x: Var, a: Self::Point, y: Var, b: Self::Point) -> Option<Sign>;
    /// Whether an edge of sign `s` can only land on a pair of variables for
    /// which `linked` holds.
    fn needs_link(&self, s: Sign) -> bool;
    fn linked(&self, x: Var, y: Var) -> bool;
}

impl Target for Instance {
    type Point = Value;
    fn target_vars(&self) -> usize {
        self.num_vars()
    }
    fn target_points(&self, x: Var) -> Vec<Value> {
        self.domain(x).iter().copied().collect()
    }
    fn sign(&self, x: Var, a: Value, y: Var, b: Value) -> Option<Sign> {
        Some(if self.allowed(x, a, y, b) {
            Sign::Positive
        } else {
            Sign::Negative
        })
    }
    fn needs_link(&self, s: Sign) -> bool {
        s == Sign::Negative
    }
    fn linked(&self, x: Var, y: Var) -> bool {
        !self.trivial(x, y)
    }
}

impl Target for Pattern {
    type Point = usize;
    fn target_vars(&self) -> usize {
        self.num_vars()
    }
    fn target_points(&self, x: Var) -> Vec<usize> {
        (0..self.num_points(x)).collect()
    }
    fn sign(&self, x: Var, a: usize, y: Var, b: usize) -> Option<Sign> {
        self.edge(PointRef::new(x, a), PointRef::new(y, b))
    }
    fn needs_link(&self, _: Sign) -> bool {
        true
    }
    fn linked(&self, x: Var, y: Var) -> bool {
        (0..self.num_points(x)).any(|a| {
            (0..self.num_points(y)).any(|b| self.edge(PointRef::new(x, a), PointRef::new(y, b)).is_some())
        })
    }
}

/// A sign-preserving map of a pattern into a target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccurrenceWitness<T> {
    /// Target variable of each pattern variable.
    pub var_map: Vec<Var>,
    /// Target point of each pattern point, indexed `[var][point]`.
    pub point_map: Vec<Vec<T>>,
}

impl<T: Copy> OccurrenceWitness<T> {
    pub fn image(&self, p: PointRef) -> (Var, T) {
        (self.var_map[p.var], self.point_map[p.var][p.point])
    }
}

/// Re-check a witness edge by edge.
pub fn verify_witness<G: Target>(
    pat: &Pattern,
    target: &G,
    w: &OccurrenceWitness<G::Point>,
    strict_points: bool,
) -> bool {
    let n = pat.num_vars();
    if w.var_map.len() != n || w.point_map.len() != n {
        return false;
    }
    let vars: BTreeSet<Var> = w.var_map.iter().copied().collect();
    if vars.len() != n || vars.iter().any(|&x| x >= target.target_vars()) {
        return false;
    }
    for v in 0..n {
        if w.point_map[v].len() != pat.num_points(v) {
            return false;
        }
        let pts = target.target_points(w.var_map[v]);
        if w.point_map[v].iter().any(|p| !pts.contains(p)) {
            return false;
        }
        if strict_points {
            let distinct: BTreeSet<_> = w.point_map[v].iter().collect();
            if distinct.len() != w.point_map[v].len() {
                return false;
            }
        }
    }
    pat.edges().all(|(p, q, s)| {
        let (x, a) = w.image(p);
        let (y, b) = w.image(q);
        target.sign(x, a, y, b) == Some(s)
    })
}

struct Search<'a, G: Target> {
    pat: &'a Pattern,
    target: &'a G,
    strict: bool,
    order: Vec<usize>,
    pin: Option<(PointRef, Var, G::Point)>,
    var_map: Vec<Option<Var>>,
    point_map: Vec<Vec<Option<G::Point>>>,
    used: Vec<bool>,
    points: Vec<Vec<G::Point>>,
}

impl<'a, G: Target> Search<'a, G> {
    fn new(pat: &'a Pattern, target: &'a G, strict: bool, pin: Option<(PointRef, Var, G::Point)>) -> Self {
        let mut order: Vec<usize> = (0..pat.num_vars()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(pat.num_points(v)));
        Search {
            pat,
            target,
            strict,
            order,
            pin,
            var_map: vec![None; pat.num_vars()],
            point_map: (0..pat.num_vars()).map(|v| vec![None; pat.num_points(v)]).collect(),
            used: vec![false; target.target_vars()],
            points: (0..target.target_vars()).map(|x| target.target_points(x)).collect(),
        }
    }

    fn run(mut self) -> Option<OccurrenceWitness<G::Point>> {
        if self.pat.num_vars() > self.target.target_vars() {
            return None;
        }
        if self.place_var(0) {
            Some(OccurrenceWitness {
                var_map: self.var_map.iter().map(|x| x.expect("placed")).collect(),
                point_map: self
                    .point_map
                    .iter()
                    .map(|ps| ps.iter().map(|p| p.expect("placed")).collect())
                    .collect(),
            })
        } else {
            None
        }
    }

    fn candidate_ok(&self, pv: usize, tx: Var) -> bool {
        if self.used[tx] {
            return false;
        }
        if let Some((anchor, x, _)) = self.pin {
            if (anchor.var == pv) != (x == tx) {
                return false;
            }
        }
        // every edge to an already placed variable needs a link where the
        // target demands one
        for p in 0..self.pat.num_points(pv) {
            for (q, s) in self.pat.incident(PointRef::new(pv, p)) {
                if let Some(ty) = self.var_map[q.var] {
                    if self.target.needs_link(s) && !self.target.linked(tx, ty) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn place_var(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        let pv = self.order[k];
        for tx in 0..self.target.target_vars() {
            if !self.candidate_ok(pv, tx) {
                continue;
            }
            self.used[tx] = true;
            self.var_map[pv] = Some(tx);
            if self.place_point(k, pv, tx, 0) {
                return true;
            }
            self.var_map[pv] = None;
            self.used[tx] = false;
        }
        false
    }

    fn place_point(&mut self, k: usize, pv: usize, tx: Var, p: usize) -> bool {
        if p == self.pat.num_points(pv) {
            return self.place_var(k + 1);
        }
        let here = PointRef::new(pv, p);
        let edges = self.pat.incident(here);
        for i in 0..self.points[tx].len() {
            let a = self.points[tx][i];
            if let Some((anchor, _, v)) = self.pin {
                if anchor == here && a != v {
                    continue;
                }
            }
            if self.strict && self.point_map[pv][..p].contains(&Some(a)) {
                continue;
            }
            let fits = edges.iter().all(|&(q, s)| match (self.var_map[q.var], self.point_map[q.var][q.point]) {
                (Some(ty), Some(b)) => self.target.sign(tx, a, ty, b) == Some(s),
                _ => true,
            });
            if !fits {
                continue;
            }
            self.point_map[pv][p] = Some(a);
            if self.place_point(k, pv, tx, p + 1) {
                return true;
            }
            self.point_map[pv][p] = None;
        }
        false
    }
}

/// First occurrence of `pat` in `inst` in canonical search order.
pub fn occurs(pat: &Pattern, inst: &Instance, strict_points: bool) -> Option<OccurrenceWitness<Value>> {
    Search::new(pat, inst, strict_points, None).run()
}

/// First occurrence with `anchor` mapped to `(x, v)`.
pub fn occurs_at(
    pat: &Pattern,
    anchor: PointRef,
    x: Var,
    v: Value,
    inst: &Instance,
    strict_points: bool,
) -> Result<Option<OccurrenceWitness<Value>>, MatchError> {
    if anchor.var >= pat.num_vars() || anchor.point >= pat.num_points(anchor.var) {
        return Err(MatchError::BadAnchor(anchor));
    }
    if x >= inst.num_vars() || !inst.domain(x).contains(&v) {
        return Err(MatchError::BadTarget { var: x, value: v });
    }
    Ok(Search::new(pat, inst, strict_points, Some((anchor, x, v))).run())
}

/// First map of `pat` into `host` sending positive edges to positive edges
/// and negative edges to negative edges.
pub fn occurs_in_pattern(pat: &Pattern, host: &Pattern, strict_points: bool) -> Option<OccurrenceWitness<usize>> {
    Search::new(pat, host, strict_points, None).run()
}

/// Same-variable point pairs `(p,q)`, `p < q`, with no third point joined to
/// them by edges of opposite signs.
pub fn mergeable_pairs(pat: &Pattern) -> Vec<(PointRef, PointRef)> {
    let mut out = Vec::new();
    for v in 0..pat.num_vars() {
        for a in 0..pat.num_points(v) {
            for b in a + 1..pat.num_points(v) {
                let p = PointRef::new(v, a);
                let q = PointRef::new(v, b);
                let conflict = pat
                    .incident(p)
                    .into_iter()
                    .any(|(c, s)| pat.edge(q, c) == Some(s.opposite()));
                if !conflict {
                    out.push((p, q));
                }
            }
        }
    }
    out
}

/// Points with at most one positive edge and no negative edge.
pub fn dangling_points(pat: &Pattern) -> Vec<PointRef> {
    pat.points()
        .filter(|&p| {
            let inc = pat.incident(p);
            inc.iter().all(|&(_, s)| s == Sign::Positive) && inc.len() <= 1
        })
        .collect()
}

/// Remove dangling points until none remain, without merging.
pub fn drop_dangling(pat: &Pattern) -> Pattern {
    let mut cur = pat.clone();
    loop {
        let d = dangling_points(&cur);
        match d.first() {
            Some(&p) => cur = cur.remove_point(p),
            None => return cur,
        }
    }
}

/// Merge the first mergeable pair, if any. The smaller point survives.
pub fn merge_first(pat: &Pattern) -> Option<Pattern> {
    let (p, q) = *mergeable_pairs(pat).first()?;
    Some(pat.merge_points(p, q).expect("mergeable points have no sign conflict"))
}

/// Delete dangling points and merge mergeable pairs until irreducible.
pub fn reduce(pat: &Pattern) -> Pattern {
    let mut cur = pat.clone();
    loop {
        if let Some(&p) = dangling_points(&cur).first() {
            cur = cur.remove_point(p);
        } else if let Some(next) = merge_first(&cur) {
            cur = next;
        } else {
            return cur;
        }
    }
}

/// Every pair of variables carrying a positive edge also carries a negative one.
pub fn is_monotone(pat: &Pattern) -> bool {
    let signs_between = |x: usize, y: usize, s: Sign| {
        pat.edges()
            .any(|(p, q, t)| t == s && ((p.var, q.var) == (x, y) || (p.var, q.var) == (y, x)))
    };
    pat.edges()
        .filter(|&(_, _, s)| s == Sign::Positive)
        .all(|(p, q, _)| signs_between(p.var, q.var, Sign::Negative))
}

pub fn is_irreducible(pat: &Pattern) -> bool {
    dangling_points(pat).is_empty() && mergeable_pairs(pat).is_empty()
}
