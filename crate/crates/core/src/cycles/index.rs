use crate::error::{Error, Result};

use super::{ObjectSet, ObjectiveSpec};

/// For every entry, the objects whose activeness depends on it, plus pairwise
/// co-occurrence counts between entries.
#[derive(Debug, Clone)]
pub struct EntryIndex {
    by_entry: Vec<Vec<u32>>,
    n_entries: usize,
    n_objects: usize,
    // dense n x n, row-major
    pair_counts: Vec<u32>,
    pair_weights: Vec<f64>,
}

impl EntryIndex {
    pub fn build(set: &ObjectSet, spec: &ObjectiveSpec) -> Self {
        let n = set.n_entries();
        let mut by_entry = vec![Vec::new(); n];
        let mut pair_counts = vec![0u32; n * n];
        let mut pair_weights = vec![0.0f64; n * n];
        for (id, obj) in set.objects().iter().enumerate() {
            let m = set.multiplicity(id);
            let w = if spec.is_constraint(obj.class) {
                0.0
            } else {
                spec.weight(obj.class) * m as f64
            };
            for (a, &e) in obj.deps.iter().enumerate() {
                by_entry[e as usize].push(id as u32);
                for &f in &obj.deps[a + 1..] {
                    let (e, f) = (e as usize, f as usize);
                    pair_counts[e * n + f] += m;
                    pair_counts[f * n + e] += m;
                    pair_weights[e * n + f] += w;
                    pair_weights[f * n + e] += w;
                }
            }
        }
        EntryIndex {
            by_entry,
            n_entries: n,
            n_objects: set.len(),
            pair_counts,
            pair_weights,
        }
    }

    pub fn n_entries(&self) -> usize {
        self.n_entries
    }

    pub fn objects_of(&self, entry: usize) -> &[u32] {
        &self.by_entry[entry]
    }

    /// Number of candidates containing both entries.
    pub fn co_occurrence(&self, a: usize, b: usize) -> u32 {
        self.pair_counts[a * self.n_entries + b]
    }

    /// Objective-weighted co-occurrence.
    pub fn weighted_co_occurrence(&self, a: usize, b: usize) -> f64 {
        self.pair_weights[a * self.n_entries + b]
    }

    pub fn check_fresh(&self, set: &ObjectSet) -> Result<()> {
        if set.len() != self.n_objects || set.n_entries() != self.n_entries {
            return Err(Error::StaleIndex {
                built: self.n_objects,
                actual: set.len(),
            });
        }
        Ok(())
    }

    /// Sorted union of the objects touching any of `entries`.
    pub fn affected(&self, entries: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = entries
            .iter()
            .flat_map(|&e| self.by_entry[e as usize].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Per-object activeness and per-class counts of a vector, maintained under
/// entry changes by re-testing only the affected objects.
#[derive(Debug, Clone)]
pub struct ActiveCounter<'a> {
    set: &'a ObjectSet,
    index: &'a EntryIndex,
    x: Vec<u32>,
    active: Vec<bool>,
    counts: [u64; 4],
}

impl<'a> ActiveCounter<'a> {
    pub fn new(set: &'a ObjectSet, index: &'a EntryIndex, x: Vec<u32>) -> Result<Self> {
        index.check_fresh(set)?;
        if x.len() != set.n_entries() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", set.n_entries()),
                found: x.len().to_string(),
            });
        }
        let m = set.modulus();
        let active: Vec<bool> = set.objects().iter().map(|o| o.is_active(&x, m)).collect();
        let mut counts = [0u64; 4];
        for (id, (o, &a)) in set.objects().iter().zip(&active).enumerate() {
            if a {
                counts[o.class.index()] += set.multiplicity(id) as u64;
            }
        }
        Ok(ActiveCounter {
            set,
            index,
            x,
            active,
            counts,
        })
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn is_active(&self, id: usize) -> bool {
        self.active[id]
    }

    /// Applies `(entry, value)` changes, updating counts incrementally.
    pub fn apply(&mut self, changes: &[(u32, u32)]) {
        if changes.is_empty() {
            return;
        }
        for &(e, v) in changes {
            self.x[e as usize] = v;
        }
        let entries: Vec<u32> = changes.iter().map(|c| c.0).collect();
        let m = self.set.modulus();
        for id in self.index.affected(&entries) {
            let id = id as usize;
            let obj = self.set.get(id);
            let now = obj.is_active(&self.x, m);
            if now != self.active[id] {
                let k = obj.class.index();
                let m = self.set.multiplicity(id) as u64;
                if now {
                    self.counts[k] += m;
                } else {
                    self.counts[k] -= m;
                }
                self.active[id] = now;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{enumerate_candidates, ObjectClass};
    use crate::matrix::{BinaryMatrix, EntrySpace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_change_keeps_counts() {
        let base = BinaryMatrix::ones(3, 4);
        let space = EntrySpace::new(&base);
        let l = enumerate_candidates(&base, 2).unwrap();
        let set = ObjectSet::partition(&[&l], &space).unwrap();
        let spec = ObjectiveSpec::single(ObjectClass::Cycle4, vec![]);
        let idx = EntryIndex::build(&set, &spec);
        let mut c = ActiveCounter::new(&set, &idx, vec![0; 12]).unwrap();
        let before = c.counts();
        c.apply(&[]);
        assert_eq!(c.counts(), before);
    }

    #[test]
    fn delta_equals_full_recount() {
        let base = BinaryMatrix::ones(3, 5);
        let space = EntrySpace::new(&base);
        let l3 = enumerate_candidates(&base, 3).unwrap();
        let l4 = enumerate_candidates(&base, 4).unwrap();
        let set = ObjectSet::partition(&[&l3, &l4], &space).unwrap();
        let spec = ObjectiveSpec::weighted(0.0, 1.0, 0.2);
        let idx = EntryIndex::build(&set, &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<u32> = (0..15).map(|_| rng.gen_range(0..3)).collect();
        let mut c = ActiveCounter::new(&set, &idx, x).unwrap();
        for _ in 0..200 {
            let e = rng.gen_range(0..15u32);
            let v = rng.gen_range(0..3u32);
            c.apply(&[(e, v)]);
            assert_eq!(c.counts(), set.active_counts(c.x()));
        }
    }

    #[test]
    fn co_occurrence_in_k33() {
        // 4-cycles of K3,3 are the 9 choices of 2 rows x 2 columns; entries (0,0) and
        // (1,1) share the single rectangle on rows {0,1} and columns {0,1}, while
        // (0,0) and (0,1) share the 2 rectangles pairing rows {0,1} and {0,2}.
        let base = BinaryMatrix::ones(3, 3);
        let space = EntrySpace::new(&base);
        let l = enumerate_candidates(&base, 2).unwrap();
        assert_eq!(l.len(), 9);
        let set = ObjectSet::partition(&[&l], &space).unwrap();
        let idx = EntryIndex::build(&set, &ObjectiveSpec::single(ObjectClass::Cycle4, vec![]));
        assert_eq!(idx.co_occurrence(0, 4), 1);
        assert_eq!(idx.co_occurrence(0, 1), 2);
        assert_eq!(idx.objects_of(0).len(), 4);
        // a 6-cycle of K3,3 is the complement of a perfect matching; avoiding both
        // (0,0) and (0,1) forces (0,2) into the matching, leaving 2 choices
        let l6 = enumerate_candidates(&base, 3).unwrap();
        let set6 = ObjectSet::partition(&[&l6], &space).unwrap();
        let idx6 = EntryIndex::build(&set6, &ObjectiveSpec::single(ObjectClass::Cycle6, vec![]));
        let brute = l6
            .iter()
            .filter(|c| {
                let ents: Vec<(usize, usize)> = (0..3).flat_map(|k| [c.plus_entry(k), c.minus_entry(k)]).collect();
                ents.contains(&(0, 0)) && ents.contains(&(0, 1))
            })
            .count() as u32;
        assert_eq!(idx6.co_occurrence(0, 1), brute);
        assert_eq!(brute, 2);
    }

    #[test]
    fn stale_index_detected() {
        let base = BinaryMatrix::ones(2, 3);
        let space = EntrySpace::new(&base);
        let l = enumerate_candidates(&base, 2).unwrap();
        let set = ObjectSet::partition(&[&l], &space).unwrap();
        let spec = ObjectiveSpec::single(ObjectClass::Cycle4, vec![]);
        let idx = EntryIndex::build(&set.restricted(&[]), &spec);
        assert!(ActiveCounter::new(&set, &idx, vec![0; 6]).is_err());
    }
}
