use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::{EntrySpace, SCProtograph};

use super::activeness::{compile_lift, compile_partition, compile_uts, CompiledObject, LinearForm, Modulus, ObjectClass};
use super::CandidateList;

/// Compiled objects of one optimization problem, over a fixed entry space.
///
/// Objects with identical conditions (translates of one protograph candidate
/// across replicas) are stored once with a multiplicity; all counts include it.
#[derive(Debug, Clone)]
pub struct ObjectSet {
    objects: Vec<CompiledObject>,
    mult: Vec<u32>,
    modulus: Modulus,
    n_entries: usize,
}

impl ObjectSet {
    pub fn new(objects: Vec<CompiledObject>, modulus: Modulus, n_entries: usize) -> Self {
        let mult = vec![1; objects.len()];
        ObjectSet {
            objects,
            mult,
            modulus,
            n_entries,
        }
    }

    /// Merges objects with identical class, symmetry and conditions. The first
    /// occurrence is kept as representative.
    pub fn merged(self) -> Self {
        let mut seen: HashMap<(ObjectClass, u8, LinearForm, Vec<LinearForm>), usize> = HashMap::new();
        let mut objects = Vec::new();
        let mut mult: Vec<u32> = Vec::new();
        for (o, m) in self.objects.into_iter().zip(self.mult) {
            let mut distinct = o.distinct.clone();
            distinct.sort_by(|a, b| a.terms().cmp(b.terms()));
            let key = (o.class, o.symmetry, o.balance.clone(), distinct);
            match seen.get(&key) {
                Some(&k) => mult[k] += m,
                None => {
                    seen.insert(key, objects.len());
                    objects.push(o);
                    mult.push(m);
                }
            }
        }
        ObjectSet {
            objects,
            mult,
            modulus: self.modulus,
            n_entries: self.n_entries,
        }
    }

    /// Base-matrix candidates for partitioning.
    pub fn partition(lists: &[&CandidateList], space: &EntrySpace) -> Result<Self> {
        let mut objects = Vec::new();
        for list in lists {
            for (id, c) in list.iter().enumerate() {
                objects.push(compile_partition(c, id as u32, space)?);
            }
        }
        Ok(ObjectSet::new(objects, Modulus::Integer, space.len()))
    }

    /// Protograph candidates for lifting. When `uts_from_cycle8` is set, each
    /// cycle-8 candidate additionally yields a trapping-set object.
    pub fn lift(
        lists: &[&CandidateList],
        proto: &SCProtograph,
        space: &EntrySpace,
        z: usize,
        uts_from_cycle8: bool,
    ) -> Result<Self> {
        let mut objects = Vec::new();
        for list in lists {
            for (id, c) in list.iter().enumerate() {
                let obj = compile_lift(c, id as u32, proto, space)?;
                // traversals that can never be simple in the lifted graph are dropped
                if !obj.never_active() {
                    objects.push(obj);
                }
                if uts_from_cycle8 && list.g() == 4 {
                    let uts = compile_uts(c, id as u32, proto, space)?;
                    if !uts.never_active() {
                        objects.push(uts);
                    }
                }
            }
        }
        Ok(ObjectSet::new(objects, Modulus::Mod(z as u32), space.len()).merged())
    }

    /// Number of stored (merged) objects.
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[CompiledObject] {
        &self.objects
    }

    pub fn get(&self, id: usize) -> &CompiledObject {
        &self.objects[id]
    }

    /// Number of candidates represented by object `id`.
    pub fn multiplicity(&self, id: usize) -> u32 {
        self.mult[id]
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn n_entries(&self) -> usize {
        self.n_entries
    }

    /// Keeps only objects of the given classes.
    pub fn restricted(&self, classes: &[ObjectClass]) -> ObjectSet {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| classes.contains(&self.objects[k].class)).collect();
        ObjectSet {
            objects: keep.iter().map(|&k| self.objects[k].clone()).collect(),
            mult: keep.iter().map(|&k| self.mult[k]).collect(),
            modulus: self.modulus,
            n_entries: self.n_entries,
        }
    }

    /// Candidates per class.
    pub fn class_totals(&self) -> [u64; 4] {
        let mut t = [0u64; 4];
        for (o, &m) in self.objects.iter().zip(&self.mult) {
            t[o.class.index()] += m as u64;
        }
        t
    }

    /// Active candidates per class under `x`.
    pub fn active_counts(&self, x: &[u32]) -> [u64; 4] {
        let mut t = [0u64; 4];
        for (o, &m) in self.objects.iter().zip(&self.mult) {
            if o.is_active(x, self.modulus) {
                t[o.class.index()] += m as u64;
            }
        }
        t
    }

    /// Number of lifted cycles represented by the active candidates of `class`:
    /// `z / symmetry` per active candidate.
    pub fn lifted_cycle_count(&self, x: &[u32], class: ObjectClass, z: usize) -> u64 {
        self.objects
            .iter()
            .zip(&self.mult)
            .filter(|(o, _)| o.class == class && o.is_active(x, self.modulus))
            .map(|(o, &m)| m as u64 * (z / o.symmetry as usize) as u64)
            .sum()
    }
}

/// What the optimizer minimizes and which objects must stay inactive.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    /// Weight per [`ObjectClass`] (`w4, w6, w8, w_uts`).
    pub weights: [f64; 4],
    /// Classes whose objects form the hard-constraint list.
    pub constraints: Vec<ObjectClass>,
}

impl ObjectiveSpec {
    pub fn weighted(w4: f64, w6: f64, w8: f64) -> Self {
        ObjectiveSpec {
            weights: [w4, w6, w8, 0.0],
            constraints: Vec::new(),
        }
    }

    /// Counts only `class`, keeping `constraints` inactive.
    pub fn single(class: ObjectClass, constraints: Vec<ObjectClass>) -> Self {
        let mut weights = [0.0; 4];
        weights[class.index()] = 1.0;
        ObjectiveSpec { weights, constraints }
    }

    pub fn weight(&self, class: ObjectClass) -> f64 {
        self.weights[class.index()]
    }

    pub fn is_constraint(&self, class: ObjectClass) -> bool {
        self.constraints.contains(&class)
    }

    /// Maximum attainable weighted count: every listed objective object active.
    pub fn alpha(&self, set: &ObjectSet) -> f64 {
        let totals = set.class_totals();
        ObjectClass::ALL
            .iter()
            .filter(|c| !self.is_constraint(**c))
            .map(|c| self.weight(*c) * totals[c.index()] as f64)
            .sum()
    }

    /// Weighted count from per-class active counts.
    pub fn weighted_count(&self, counts: &[u64; 4]) -> f64 {
        ObjectClass::ALL
            .iter()
            .filter(|c| !self.is_constraint(**c))
            .map(|c| self.weight(*c) * counts[c.index()] as f64)
            .sum()
    }
}

/// Weighted and normalized objective of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub counts: [u64; 4],
    pub weighted: f64,
    pub normalized: f64,
}

pub fn count_active(set: &ObjectSet, x: &[u32], spec: &ObjectiveSpec) -> Result<ObjectiveValue> {
    if x.len() != set.n_entries() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} entries", set.n_entries()),
            found: x.len().to_string(),
        });
    }
    let alpha = spec.alpha(set);
    if alpha <= 0.0 {
        return Err(Error::EmptyObjective);
    }
    let counts = set.active_counts(x);
    let weighted = spec.weighted_count(&counts);
    Ok(ObjectiveValue {
        counts,
        weighted,
        normalized: weighted / alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::activeness::LinearForm;

    fn dummy(class: ObjectClass, entry: u32) -> CompiledObject {
        // active iff x[entry] == 0
        CompiledObject {
            class,
            candidate: 0,
            balance: LinearForm::from_terms(vec![(entry, 1)]),
            distinct: Vec::new(),
            deps: vec![entry],
            symmetry: 1,
        }
    }

    fn synthetic() -> ObjectSet {
        let mut objs = Vec::new();
        for e in 0..10 {
            objs.push(dummy(ObjectClass::Cycle6, e));
        }
        for e in 10..15 {
            objs.push(dummy(ObjectClass::Cycle8, e));
        }
        ObjectSet::new(objs, Modulus::Integer, 15)
    }

    #[test]
    fn weighted_sum_example() {
        let set = synthetic();
        let spec = ObjectiveSpec::weighted(0.0, 1.0, 0.2);
        let v = count_active(&set, &[0; 15], &spec).unwrap();
        assert!((v.weighted - 11.0).abs() < 1e-12);
        assert!((v.normalized - 1.0).abs() < 1e-12);
        let none = count_active(&set, &[1; 15], &spec).unwrap();
        assert_eq!(none.normalized, 0.0);
    }

    #[test]
    fn empty_objective_is_an_error() {
        let set = ObjectSet::new(Vec::new(), Modulus::Integer, 3);
        assert_eq!(
            count_active(&set, &[0; 3], &ObjectiveSpec::weighted(0.0, 1.0, 0.2)),
            Err(Error::EmptyObjective)
        );
    }

    #[test]
    fn constraints_are_excluded_from_alpha() {
        let set = synthetic();
        let spec = ObjectiveSpec::single(ObjectClass::Cycle8, vec![ObjectClass::Cycle6]);
        assert_eq!(spec.alpha(&set), 5.0);
    }
}
