//! Instance generators: colouring encodings, padding and gadget
//! constructions, seeded random instances and rejection-sampled
//! pattern-free instances.
//!
//! Random instances use the SplitMix64 generator seeded directly with the
//! 64-bit seed. Each variable pair `x < y`, in lexicographic order, draws a
//! uniform `f64` and is constrained if it is below `density`; a constrained
//! pair then draws one `f64` per value pair `(a, b)` in lexicographic order
//! and forbids it if the draw is below `tightness`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::matching::occurs;
use crate::model::{Instance, ModelError, Pattern, Value, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{name} must lie in [0,1], got {value}")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("padding needs k >= 1")]
    ZeroPadding,
    #[error("constraint between {0} and {1} is trivial")]
    TrivialConstraint(Var, Var),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n_vars: usize,
    pub domain_size: usize,
    pub constraint_density: f64,
    pub tightness: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        for (name, value) in [("density", self.constraint_density), ("tightness", self.tightness)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::FractionOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// `n` variables with domain `{1..q}`, pairwise different.
pub fn gen_kcoloring(n: usize, q: usize) -> Instance {
    let q = q as Value;
    let mut inst = Instance::new(vec![1..=q; n]);
    for x in 0..n {
        for y in x + 1..n {
            inst.forbid(x, y, (1..=q).map(|j| (j, j))).expect("valid");
        }
    }
    inst
}

/// 3-colouring of K4 encoded with `x1..x4 ∈ {1,2,3}` (variables 0..3) and
/// `y1..y3 ∈ {1,2,3,4}` (variables 4..6): `x_i = j` implies `y_j = i`.
pub fn gen_i34() -> Instance {
    let mut inst = Instance::new((0..4).map(|_| 1..=3).chain((0..3).map(|_| 1..=4)));
    for i in 1..=4 {
        for j in 1..=3 {
            let forbidden = (1..=4).filter(|&b| b != i).map(|b| (j, b));
            inst.forbid((i - 1) as Var, (3 + j) as Var, forbidden).expect("valid");
        }
    }
    inst
}

/// Five variables over `{1,2,3,4}` with `x_i = j-1` iff `x_j = i` for `i < j`.
pub fn gen_i5() -> Instance {
    let mut inst = Instance::new(vec![1..=4; 5]);
    for i in 1..=5 {
        for j in i + 1..=5 {
            let head = j - 1;
            let forbidden: Vec<(Value, Value)> = (1..=4)
                .filter(|&b| b != i)
                .map(|b| (head, b))
                .chain((1..=4).filter(|&a| a != head).map(|a| (a, i)))
                .collect();
            inst.forbid((i - 1) as Var, (j - 1) as Var, forbidden).expect("valid");
        }
    }
    inst
}

/// The three small unsatisfiable SAC instances, with display names.
pub fn counterexamples() -> [(&'static str, Instance); 3] {
    [("kcol(4,3)", gen_kcoloring(4, 3)), ("i34", gen_i34()), ("i5", gen_i5())]
}

/// Replace `R(x,y)` by a path `x - u1 - ... - uk - y` of equalities with the
/// original relation on `(uk, y)`. Fresh variables take `D(x)` and are
/// appended in order.
pub fn gen_pad_equality(inst: &Instance, x: Var, y: Var, k: usize) -> Result<Instance, GenError> {
    if k == 0 {
        return Err(GenError::ZeroPadding);
    }
    if inst.is_trivial(x, y)? {
        return Err(GenError::TrivialConstraint(x, y));
    }
    let rel = inst.allowed_pairs(x, y);
    let dom: Vec<Value> = inst.domain(x).iter().copied().collect();
    let mut out = inst.clone();
    out.clear_constraint(x, y);
    let mut prev = x;
    for _ in 0..k {
        let u = out.add_var(dom.iter().copied());
        out.restrict(prev, u, dom.iter().map(|&a| (a, a)))?;
        prev = u;
    }
    out.restrict(prev, y, rel)?;
    Ok(out)
}

/// Pad every non-trivial constraint, in lexicographic order.
pub fn gen_pad_all(inst: &Instance, k: usize) -> Result<Instance, GenError> {
    let pairs: Vec<(Var, Var)> = inst.constrained_pairs().collect();
    let mut out = inst.clone();
    for (x, y) in pairs {
        out = gen_pad_equality(&out, x, y, k)?;
    }
    Ok(out)
}

/// 3-colouring of K4 rewritten with Boolean implication chains so that every
/// constraint has a single forbidden pair.
///
/// Variables: `x1..x4` (0..3, domain `{1,2,3}`), then `x_{ia}^r` for
/// `i ∈ 1..4, a ∈ 1..3, r ∈ 0..20`, then `y_{ija}^s` for `i < j`,
/// `a ∈ 1..3`, `s ∈ 1..3`, each in lexicographic order. Booleans are `{0,1}`.
pub fn gen_implication_gadget(biconditional: bool) -> Instance {
    const CHAIN: usize = 21;
    let mut inst = Instance::new((0..4).map(|_| vec![1, 2, 3]));
    let mut chain = [[[0 as Var; CHAIN]; 3]; 4];
    for (i, per_i) in chain.iter_mut().enumerate() {
        for (a, per_a) in per_i.iter_mut().enumerate() {
            for slot in per_a.iter_mut() {
                *slot = inst.add_var([0, 1]);
            }
            let a_val = a as Value + 1;
            let head = per_a[0];
            inst.forbid(i, head, [(a_val, 0)]).expect("valid");
            if biconditional {
                let others = (1..=3).filter(|&b| b != a_val).map(|b| (b, 1));
                inst.forbid(i, head, others).expect("valid");
            }
            for r in 0..CHAIN - 1 {
                inst.forbid(per_a[r], per_a[r + 1], [(1, 0)]).expect("valid");
            }
        }
    }
    for i in 1..=4usize {
        for j in i + 1..=4 {
            for (from, to) in chain[i - 1].iter().zip(&chain[j - 1]) {
                let ys: Vec<Var> = (0..3).map(|_| inst.add_var([0, 1])).collect();
                inst.forbid(from[4 * j], ys[0], [(1, 0)]).expect("valid");
                inst.forbid(ys[0], ys[1], [(1, 0)]).expect("valid");
                inst.forbid(ys[1], ys[2], [(1, 0)]).expect("valid");
                inst.forbid(ys[2], to[4 * i], [(1, 1)]).expect("valid");
            }
        }
    }
    inst
}

fn random_with(rng: &mut SplitMix64, n: usize, d: usize, density: f64, tightness: f64) -> Instance {
    let d = d as Value;
    let mut inst = Instance::new(vec![1..=d; n]);
    for x in 0..n {
        for y in x + 1..n {
            if rng.random::<f64>() >= density {
                continue;
            }
            let mut forbidden = Vec::new();
            for a in 1..=d {
                for b in 1..=d {
                    if rng.random::<f64>() < tightness {
                        forbidden.push((a, b));
                    }
                }
            }
            inst.forbid(x, y, forbidden).expect("valid");
        }
    }
    inst
}

/// Seeded random instance with domains `{1..domain_size}`.
pub fn gen_random(p: &GenParams) -> Result<Instance, GenError> {
    p.validate()?;
    let mut rng = SplitMix64::seed_from_u64(p.seed);
    Ok(random_with(&mut rng, p.n_vars, p.domain_size, p.constraint_density, p.tightness))
}

/// Rejection-sample random instances from one generator stream until one
/// avoids `pat`. Returns the instance and the number of draws used.
pub fn gen_pattern_free_counted(
    pat: &Pattern,
    p: &GenParams,
    max_tries: usize,
    strict_points: bool,
) -> Result<(Option<Instance>, usize), GenError> {
    p.validate()?;
    let mut rng = SplitMix64::seed_from_u64(p.seed);
    for t in 1..=max_tries {
        let inst = random_with(&mut rng, p.n_vars, p.domain_size, p.constraint_density, p.tightness);
        if occurs(pat, &inst, strict_points).is_none() {
            return Ok((Some(inst), t));
        }
    }
    Ok((None, max_tries))
}

pub fn gen_pattern_free(pat: &Pattern, p: &GenParams, max_tries: usize) -> Result<Option<Instance>, GenError> {
    Ok(gen_pattern_free_counted(pat, p, max_tries, false)?.0)
}
