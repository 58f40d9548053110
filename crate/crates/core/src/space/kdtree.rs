//! Minimal kd-tree for "is any indexed point within radius r" queries.

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

pub(crate) struct KdTree {
    dim: usize,
    points: Vec<f64>,
    root: Node,
}

impl KdTree {
    /// Builds a tree over `count` points stored row-major in `coords`.
    pub(crate) fn build(dim: usize, coords: Vec<f64>) -> Self {
        let count = if dim == 0 { 0 } else { coords.len() / dim };
        let mut order: Vec<usize> = (0..count).collect();
        let root = Self::split(dim, &coords, &mut order, 0, count, 0);
        let mut points = Vec::with_capacity(coords.len());
        for &i in &order {
            points.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        KdTree { dim, points, root }
    }

    fn split(
        dim: usize,
        coords: &[f64],
        order: &mut [usize],
        start: usize,
        end: usize,
        depth: usize,
    ) -> Node {
        if end - start <= LEAF_SIZE {
            return Node::Leaf { start, end };
        }
        // widest spread axis
        let slice = &mut order[start..end];
        let mut axis = depth % dim;
        let mut best_spread = -1.0;
        for a in 0..dim {
            let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = coords[i * dim + a];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                axis = a;
            }
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&x, &y| {
            coords[x * dim + axis].total_cmp(&coords[y * dim + axis])
        });
        let value = coords[slice[mid] * dim + axis];
        let left = Self::split(dim, coords, order, start, start + mid, depth + 1);
        let right = Self::split(dim, coords, order, start + mid, end, depth + 1);
        Node::Split {
            axis,
            value,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// True iff some indexed point lies within Euclidean distance `radius` of `query`.
    pub(crate) fn any_within(&self, query: &[f64], radius: f64) -> bool {
        let r2 = radius * radius;
        self.search(&self.root, query, r2)
    }

    fn search(&self, node: &Node, query: &[f64], r2: f64) -> bool {
        match node {
            Node::Leaf { start, end } => (*start..*end).any(|k| {
                let p = &self.points[k * self.dim..(k + 1) * self.dim];
                p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2
            }),
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                if self.search(near, query, r2) {
                    return true;
                }
                delta * delta <= r2 && self.search(far, query, r2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dim = 3;
        let pts: Vec<f64> = (0..600 * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let tree = KdTree::build(dim, pts.clone());
        for _ in 0..300 {
            let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.2..1.2)).collect();
            let r = rng.random_range(0.0..0.2);
            let brute = pts.chunks(dim).any(|p| {
                p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r * r
            });
            assert_eq!(tree.any_within(&q, r), brute);
        }
    }
}
