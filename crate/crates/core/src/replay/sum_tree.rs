/// Binary sum tree over a power-of-two number of leaves. Node 1 is the
/// root; leaf `i` lives at `capacity + i`.
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    /// Leaf count is `min_leaves` rounded up to a power of two.
    pub fn new(min_leaves: usize) -> Self {
        let capacity = min_leaves.max(1).next_power_of_two();
        Self {
            capacity,
            nodes: vec![0.0; 2 * capacity],
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn leaf(&self, i: usize) -> f64 {
        self.nodes[self.capacity + i]
    }

    /// Sets leaf `i` and recomputes every ancestor from its children.
    pub fn set(&mut self, i: usize, value: f64) {
        assert!(i < self.capacity, "leaf {i} out of range");
        debug_assert!(value >= 0.0 && value.is_finite());
        let mut node = self.capacity + i;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, never a zero-weight
    /// leaf while the total is positive.
    pub fn find(&self, mass: f64) -> usize {
        let mut node = 1;
        let mut mass = mass.max(0.0);
        while node < self.capacity {
            let left = 2 * node;
            let right = left + 1;
            if mass < self.nodes[left] || self.nodes[right] <= 0.0 {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = right;
            }
        }
        let mut leaf = node - self.capacity;
        // Rounding at the far right edge can land on an empty leaf.
        while self.leaf(leaf) <= 0.0 && leaf > 0 {
            leaf -= 1;
        }
        leaf
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}
