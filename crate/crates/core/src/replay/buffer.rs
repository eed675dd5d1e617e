use rand::Rng;

use super::SumTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayConfig {
    pub capacity: usize,
    /// Priority exponent.
    pub alpha: f64,
    /// Initial importance-sampling exponent, annealed to 1 by the learner.
    pub beta0: f64,
    /// Added to `|td error|` so no transition becomes unsampleable.
    pub eps: f64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            capacity: 50_000,
            alpha: 0.6,
            beta0: 0.4,
            eps: 1e-3,
        }
    }
}

/// Sampled transitions with their slots and normalized importance weights.
#[derive(Debug, Clone)]
pub struct SampleBatch<T> {
    pub items: Vec<T>,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Ring buffer with proportional prioritized sampling.
#[derive(Debug, Clone)]
pub struct PrioritizedReplay<T> {
    cfg: ReplayConfig,
    items: Vec<T>,
    cursor: usize,
    tree: SumTree,
    max_priority: f64,
}

impl<T: Clone> PrioritizedReplay<T> {
    pub fn new(cfg: ReplayConfig) -> Self {
        assert!(cfg.capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(cfg.capacity.min(1 << 16)),
            cursor: 0,
            tree: SumTree::new(cfg.capacity),
            max_priority: 1.0,
            cfg,
        }
    }

    pub fn config(&self) -> &ReplayConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn tree(&self) -> &SumTree {
        &self.tree
    }

    /// Stored (already exponentiated) priority of a slot.
    pub fn priority(&self, index: usize) -> f64 {
        self.tree.get(index)
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }

    /// Stores `item` with priority `priority^alpha`, overwriting the oldest
    /// slot once full. Returns the slot.
    pub fn push(&mut self, item: T, priority: f64) -> Result<usize> {
        if !(priority >= 0.0) || !priority.is_finite() {
            return Err(Error::NegativePriority(priority));
        }
        let slot = self.cursor;
        if self.items.len() < self.cfg.capacity {
            self.items.push(item);
        } else {
            self.items[slot] = item;
        }
        self.tree.set(slot, priority.powf(self.cfg.alpha));
        self.max_priority = self.max_priority.max(priority);
        self.cursor = (self.cursor + 1) % self.cfg.capacity;
        Ok(slot)
    }

    /// Stores `item` with the largest priority seen so far.
    pub fn push_max(&mut self, item: T) -> usize {
        self.push(item, self.max_priority).expect("max priority is valid")
    }

    /// Stratified proportional sampling: the total mass is split into
    /// `batch_size` equal segments and one point is drawn uniformly from each.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, beta: f64, rng: &mut R) -> Result<SampleBatch<T>> {
        let size = self.items.len();
        if batch_size == 0 || size < batch_size {
            return Err(Error::Underfilled {
                size,
                requested: batch_size,
            });
        }
        let total = self.tree.total();
        let segment = total / batch_size as f64;
        let mut indices = Vec::with_capacity(batch_size);
        let mut weights = Vec::with_capacity(batch_size);
        for i in 0..batch_size {
            let mass = (i as f64 + rng.gen::<f64>()) * segment;
            let mut index = self.tree.find_prefix(mass);
            if index >= size {
                index = size - 1;
            }
            let p = self.tree.get(index) / total;
            indices.push(index);
            weights.push((size as f64 * p).powf(-beta));
        }
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= max_w);
        let items = indices.iter().map(|&i| self.items[i].clone()).collect();
        Ok(SampleBatch {
            items,
            indices,
            weights,
        })
    }

    /// Sets each slot's priority to `(|td| + eps)^alpha`.
    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::ShapeMismatch {
                what: "td errors",
                expected: indices.len(),
                got: td_errors.len(),
            });
        }
        for (&index, &td) in indices.iter().zip(td_errors) {
            if index >= self.items.len() {
                return Err(Error::StaleIndex(index));
            }
            if !td.is_finite() {
                return Err(Error::NonFinite("td errors"));
            }
            let raw = td.abs() + self.cfg.eps;
            self.tree.set(index, raw.powf(self.cfg.alpha));
            self.max_priority = self.max_priority.max(raw);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn buffer(capacity: usize, alpha: f64) -> PrioritizedReplay<usize> {
        PrioritizedReplay::new(ReplayConfig {
            capacity,
            alpha,
            ..ReplayConfig::default()
        })
    }

    #[test]
    fn first_push() {
        let mut b = buffer(8, 0.6);
        b.push(0, 2.0).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.tree().total() - 2f64.powf(0.6)).abs() < 1e-15);
    }

    #[test]
    fn ring_overwrites_oldest() {
        let mut b = buffer(4, 1.0);
        for i in 0..5 {
            b.push(i, 1.0).unwrap();
        }
        assert_eq!(b.len(), 4);
        assert_eq!(b.get(0), Some(&4));
        assert_eq!(b.get(1), Some(&1));
    }

    #[test]
    fn root_sum() {
        let mut b = buffer(4, 1.0);
        for (i, p) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
            b.push(i, p).unwrap();
        }
        assert_eq!(b.tree().total(), 10.0);
    }

    #[test]
    fn rejects_negative_priority() {
        let mut b = buffer(4, 1.0);
        assert!(matches!(b.push(0, -1.0), Err(Error::NegativePriority(_))));
        assert!(b.push(0, f64::NAN).is_err());
    }

    #[test]
    fn equal_priorities_give_unit_weights() {
        let mut b = buffer(16, 0.6);
        for i in 0..16 {
            b.push(i, 3.0).unwrap();
        }
        let batch = b.sample(8, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(batch.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn weights_in_unit_interval() {
        let mut b = buffer(8, 1.0);
        for (i, p) in [1.0, 2.0, 3.0, 4.0, 0.5, 7.0].into_iter().enumerate() {
            b.push(i, p).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let batch = b.sample(4, 0.4, &mut rng).unwrap();
            assert!(batch.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
            assert!(batch.weights.iter().any(|&w| w == 1.0));
            assert!(batch.indices.iter().all(|&i| i < 6));
        }
    }

    #[test]
    fn underfilled() {
        let mut b = buffer(8, 1.0);
        b.push(0, 1.0).unwrap();
        assert!(matches!(
            b.sample(2, 1.0, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Underfilled { size: 1, requested: 2 })
        ));
    }

    #[test]
    fn zero_td_keeps_slot_sampleable() {
        let mut b = buffer(4, 0.6);
        b.push(0, 1.0).unwrap();
        b.update_priorities(&[0], &[0.0]).unwrap();
        assert!((b.priority(0) - 1e-3f64.powf(0.6)).abs() < 1e-18);
        assert!(b.priority(0) > 0.0);
    }

    #[test]
    fn update_changes_root_by_difference() {
        let mut b = PrioritizedReplay::new(ReplayConfig {
            capacity: 4,
            alpha: 1.0,
            eps: 0.0,
            ..ReplayConfig::default()
        });
        for (i, p) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
            b.push(i, p).unwrap();
        }
        b.update_priorities(&[0], &[9.0]).unwrap();
        assert_eq!(b.tree().total(), 18.0);
        assert!(matches!(b.update_priorities(&[7], &[1.0]), Err(Error::StaleIndex(7))));
    }

    #[test]
    fn push_max_uses_largest_seen() {
        let mut b = buffer(8, 1.0);
        b.push(0, 5.0).unwrap();
        let slot = b.push_max(1);
        assert_eq!(b.priority(slot), 5.0);
    }
}
