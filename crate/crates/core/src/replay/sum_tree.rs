/// Binary tree over a power-of-two number of leaves where every internal
/// node holds the sum of its children. Node 1 is the root; leaf `i` lives
/// at node `leaves + i`.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    /// Creates a tree with at least `min_leaves` leaves, rounded up to a power of two.
    pub fn new(min_leaves: usize) -> Self {
        let leaves = min_leaves.max(1).next_power_of_two();
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.nodes[self.leaves + leaf]
    }

    /// Sets a leaf and recomputes its ancestors from their children.
    pub fn set(&mut self, leaf: usize, value: f64) {
        assert!(leaf < self.leaves, "leaf {leaf} out of range");
        assert!(value >= 0.0, "sum-tree values must be non-negative");
        let mut i = self.leaves + leaf;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// First leaf whose inclusive prefix sum exceeds `mass`, for `mass` in
    /// `[0, total)`. Subtrees with zero mass are never entered.
    pub fn find_prefix(&self, mass: f64) -> usize {
        let mut mass = mass.max(0.0);
        let mut i = 1;
        while i < self.leaves {
            let left = 2 * i;
            if mass < self.nodes[left] || self.nodes[left + 1] <= 0.0 {
                i = left;
            } else {
                mass -= self.nodes[left];
                i = left + 1;
            }
        }
        i - self.leaves
    }

    /// Largest deviation between an internal node and the sum of its children.
    pub fn max_inconsistency(&self) -> f64 {
        (1..self.leaves)
            .map(|i| (self.nodes[i] - (self.nodes[2 * i] + self.nodes[2 * i + 1])).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_capacity_up() {
        assert_eq!(SumTree::new(5).leaves(), 8);
        assert_eq!(SumTree::new(4).leaves(), 4);
        assert_eq!(SumTree::new(0).leaves(), 1);
    }

    #[test]
    fn prefix_walk() {
        let mut t = SumTree::new(4);
        for (i, p) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
            t.set(i, p);
        }
        assert_eq!(t.total(), 10.0);
        assert_eq!(t.find_prefix(6.5), 3);
        assert_eq!(t.find_prefix(0.0), 0);
        assert_eq!(t.find_prefix(0.999), 0);
        assert_eq!(t.find_prefix(1.0), 1);
        assert_eq!(t.find_prefix(5.999), 2);
        assert_eq!(t.find_prefix(9.999), 3);
    }

    #[test]
    fn never_lands_on_empty_leaves() {
        let mut t = SumTree::new(8);
        t.set(0, 0.1);
        t.set(1, 0.2);
        t.set(2, 0.3);
        // mass beyond the total (float drift) must still land on a live leaf
        assert_eq!(t.find_prefix(0.6 + 1e-9), 2);
        assert_eq!(t.find_prefix(100.0), 2);
    }

    #[test]
    fn update_repairs_sums() {
        let mut t = SumTree::new(4);
        for (i, p) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
            t.set(i, p);
        }
        let before = t.total();
        t.set(0, 9.0);
        assert_eq!(t.total() - before, 8.0);
        assert_eq!(t.max_inconsistency(), 0.0);
    }
}
