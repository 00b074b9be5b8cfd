use std::collections::BTreeMap;
use std::fmt;

use super::ModelError;

/// Label of a specified edge in a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn opposite(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A point of a pattern: index of its variable and its index within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointRef {
    pub var: usize,
    pub point: usize,
}

impl PointRef {
    pub fn new(var: usize, point: usize) -> Self {
        PointRef { var, point }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternVar {
    pub name: String,
    pub points: Vec<String>,
}

/// A partial binary CSP: points grouped by variable with a partial,
/// symmetric labelling of cross-variable point pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Pattern {
    vars: Vec<PatternVar>,
    // keyed with the smaller point first
    edges: BTreeMap<(PointRef, PointRef), Sign>,
}

fn ordered(p: PointRef, q: PointRef) -> (PointRef, PointRef) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

impl Pattern {
    pub fn new() -> Self {
        Pattern::default()
    }

    pub fn add_var<S: Into<String>>(
        &mut self,
        name: S,
        points: impl IntoIterator<Item = S>,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.vars.iter().any(|v| v.name == name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(ModelError::DuplicatePoint(format!("{name}.{p}")));
            }
        }
        self.vars.push(PatternVar { name, points });
        Ok(self.vars.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, i: usize) -> &PatternVar {
        &self.vars[i]
    }

    pub fn vars(&self) -> &[PatternVar] {
        &self.vars
    }

    pub fn num_points(&self, var: usize) -> usize {
        self.vars[var].points.len()
    }

    pub fn total_points(&self) -> usize {
        self.vars.iter().map(|v| v.points.len()).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = PointRef> + '_ {
        self.vars
            .iter()
            .enumerate()
            .flat_map(|(v, pv)| (0..pv.points.len()).map(move |p| PointRef::new(v, p)))
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Resolve `var.point` notation.
    pub fn point(&self, spec: &str) -> Option<PointRef> {
        let (v, p) = spec.split_once('.')?;
        let var = self.var_index(v)?;
        let point = self.vars[var].points.iter().position(|q| q == p)?;
        Some(PointRef { var, point })
    }

    pub fn point_name(&self, p: PointRef) -> String {
        format!("{}.{}", self.vars[p.var].name, self.vars[p.var].points[p.point])
    }

    fn check_point(&self, p: PointRef) -> Result<(), ModelError> {
        if p.var < self.vars.len() && p.point < self.vars[p.var].points.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownPoint(format!("{}.{}", p.var, p.point)))
        }
    }

    /// Label the pair `{p,q}`. Relabelling with the same sign is a no-op;
    /// a conflicting sign is an error.
    pub fn set_edge(&mut self, p: PointRef, q: PointRef, sign: Sign) -> Result<(), ModelError> {
        self.check_point(p)?;
        self.check_point(q)?;
        if p.var == q.var {
            return Err(ModelError::EdgeWithinVariable(self.point_name(p), self.point_name(q)));
        }
        match self.edges.insert(ordered(p, q), sign) {
            Some(old) if old != sign => {
                self.edges.insert(ordered(p, q), old);
                Err(ModelError::ConflictingEdge(self.point_name(p), self.point_name(q)))
            }
            _ => Ok(()),
        }
    }

    pub fn edge(&self, p: PointRef, q: PointRef) -> Option<Sign> {
        self.edges.get(&ordered(p, q)).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (PointRef, PointRef, Sign)> + '_ {
        self.edges.iter().map(|(&(p, q), &s)| (p, q, s))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges incident to `p` as `(other point, sign)`.
    pub fn incident(&self, p: PointRef) -> Vec<(PointRef, Sign)> {
        self.edges
            .iter()
            .filter_map(|(&(a, b), &s)| {
                if a == p {
                    Some((b, s))
                } else if b == p {
                    Some((a, s))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Keep only the points accepted by `keep`, dropping variables left
    /// without points.
    pub fn retain_points<F: Fn(PointRef) -> bool>(&self, keep: F) -> Pattern {
        let mut map: BTreeMap<PointRef, PointRef> = BTreeMap::new();
        let mut vars = Vec::new();
        for (v, pv) in self.vars.iter().enumerate() {
            let kept: Vec<usize> = (0..pv.points.len())
                .filter(|&p| keep(PointRef::new(v, p)))
                .collect();
            if kept.is_empty() {
                continue;
            }
            let nv = vars.len();
            for (np, &p) in kept.iter().enumerate() {
                map.insert(PointRef::new(v, p), PointRef::new(nv, np));
            }
            vars.push(PatternVar {
                name: pv.name.clone(),
                points: kept.iter().map(|&p| pv.points[p].clone()).collect(),
            });
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|(&(p, q), &s)| Some((ordered(*map.get(&p)?, *map.get(&q)?), s)))
            .collect();
        Pattern { vars, edges }
    }

    pub fn remove_point(&self, p: PointRef) -> Pattern {
        self.retain_points(|q| q != p)
    }

    /// Merge `q` into `p` (same variable): `p` keeps its name and receives
    /// the union of both edge sets. Fails on a sign conflict.
    pub fn merge_points(&self, p: PointRef, q: PointRef) -> Result<Pattern, ModelError> {
        self.check_point(p)?;
        self.check_point(q)?;
        if p.var != q.var || p == q {
            return Err(ModelError::UnknownPoint(format!(
                "cannot merge {} and {}",
                self.point_name(p),
                self.point_name(q)
            )));
        }
        let mut out = self.clone();
        for (other, s) in self.incident(q) {
            out.set_edge(p, other, s)?;
        }
        Ok(out.remove_point(q))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::serialize_pattern(self))
    }
}
