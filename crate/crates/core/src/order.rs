//! Strict partial orders over small index sets, stored as successor bitsets.

use std::fmt;

/// Maximum number of elements an [`Order`] can relate.
pub const MAX_ELEMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderError {
    OutOfRange { pair: (usize, usize), size: usize },
    Cycle { elem: usize },
    TooLarge(usize),
}

impl fmt::Display for OrderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderError::OutOfRange { pair, size } => {
                write!(
                    f,
                    "constraint {} < {} out of range for {size} elements",
                    pair.0, pair.1
                )
            }
            OrderError::Cycle { elem } => write!(f, "ordering is not irreflexive at {elem}"),
            OrderError::TooLarge(n) => write!(f, "{n} elements exceed the limit of {MAX_ELEMS}"),
        }
    }
}

impl std::error::Error for OrderError {}

/// A transitively closed strict partial order on `0..len`.
///
/// `succ[i]` has bit `j` set iff `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Order {
    succ: Vec<u64>,
}

impl Order {
    pub fn empty(len: usize) -> Self {
        Order { succ: vec![0; len] }
    }

    /// The transitive closure of `pairs`, rejecting out-of-range indices and cycles.
    pub fn from_pairs(len: usize, pairs: &[(usize, usize)]) -> Result<Self, OrderError> {
        if len > MAX_ELEMS {
            return Err(OrderError::TooLarge(len));
        }
        let mut succ = vec![0u64; len];
        for &(i, j) in pairs {
            if i >= len || j >= len {
                return Err(OrderError::OutOfRange {
                    pair: (i, j),
                    size: len,
                });
            }
            succ[i] |= 1 << j;
        }
        // Warshall over bitsets.
        for k in 0..len {
            let via = succ[k];
            for s in succ.iter_mut() {
                if *s & (1 << k) != 0 {
                    *s |= via;
                }
            }
        }
        if let Some(elem) = (0..len).find(|&i| succ[i] & (1 << i) != 0) {
            return Err(OrderError::Cycle { elem });
        }
        Ok(Order { succ })
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        self.succ[i] & (1 << j) != 0
    }

    /// Neither `i < j` nor `j < i`.
    pub fn unordered(&self, i: usize, j: usize) -> bool {
        i != j && !self.lt(i, j) && !self.lt(j, i)
    }

    pub fn successors(&self, i: usize) -> u64 {
        self.succ[i]
    }

    /// Predecessor bitsets, `pred[j]` has bit `i` set iff `i < j`.
    pub fn predecessors(&self) -> Vec<u64> {
        let mut pred = vec![0u64; self.len()];
        for (i, &s) in self.succ.iter().enumerate() {
            for (j, p) in pred.iter_mut().enumerate() {
                if s & (1 << j) != 0 {
                    *p |= 1 << i;
                }
            }
        }
        pred
    }

    /// All related pairs, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| self.lt(i, j)).map(move |j| (i, j)))
            .collect()
    }

    /// Covering pairs only (the Hasse diagram), sorted.
    pub fn reduction(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .into_iter()
            .filter(|&(i, j)| !(0..self.len()).any(|k| self.lt(i, k) && self.lt(k, j)))
            .collect()
    }

    /// The order obtained by renaming element `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Order {
        let mut succ = vec![0u64; self.len()];
        for (i, j) in self.pairs() {
            succ[perm[i]] |= 1 << perm[j];
        }
        Order { succ }
    }

    /// Whether every pair of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Order) -> bool {
        self.len() == other.len() && self.succ.iter().zip(&other.succ).all(|(a, b)| a & !b == 0)
    }

    /// Whether every two distinct elements are related.
    pub fn is_total(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || !self.unordered(i, j)))
    }
}

/// Every strict partial order on `n` labeled elements, as closed orders.
///
/// Intended for tiny `n` (the search is over all subsets of the `n(n-1)`
/// ordered pairs).
pub fn all_strict_orders(n: usize) -> Vec<Order> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    assert!(
        pairs.len() < 32,
        "too many elements for exhaustive order enumeration"
    );
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let chosen: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &p)| p)
            .collect();
        if let Ok(order) = Order::from_pairs(n, &chosen) {
            // keep only masks that are already transitively closed so each order appears once
            if order.pairs().len() == chosen.len() {
                out.push(order);
            }
        }
    }
    out
}

/// Orders expressible as three layers (initial, parallel, final): every
/// element of an earlier layer precedes every element of a later one.
pub fn layered_orders(n: usize) -> Vec<Order> {
    let mut out: Vec<Order> = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut layer = vec![0usize; n];
        let mut c = code;
        for l in layer.iter_mut() {
            *l = c % 3;
            c /= 3;
        }
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| layer[i] < layer[j])
            .collect();
        let order = Order::from_pairs(n, &pairs).expect("layers are acyclic");
        if !out.contains(&order) {
            out.push(order);
        }
    }
    out
}

/// Linear extensions of a DAG given as predecessor bitsets.
///
/// Yields each extension exactly once, as a sequence of element indices.
pub struct LinearExtensions {
    pred: Vec<u64>,
    full: u64,
    // (placed mask, next candidate to try) per depth
    stack: Vec<(u64, usize)>,
    path: Vec<usize>,
    done: bool,
}

impl LinearExtensions {
    pub fn new(pred: Vec<u64>) -> Self {
        let n = pred.len();
        assert!(n <= MAX_ELEMS);
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        LinearExtensions {
            pred,
            full,
            stack: vec![(0, 0)],
            path: Vec::with_capacity(n),
            done: false,
        }
    }
}

impl Iterator for LinearExtensions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.pred.is_empty() {
            self.done = true;
            return Some(Vec::new());
        }
        while let Some(&mut (placed, ref mut next)) = self.stack.last_mut() {
            let n = self.pred.len();
            let cand = (*next..n).find(|&i| placed & (1 << i) == 0 && self.pred[i] & !placed == 0);
            match cand {
                Some(i) => {
                    *next = i + 1;
                    self.path.push(i);
                    let placed = placed | (1 << i);
                    if placed == self.full {
                        let out = self.path.clone();
                        self.path.pop();
                        return Some(out);
                    }
                    self.stack.push((placed, 0));
                }
                None => {
                    self.stack.pop();
                    self.path.pop();
                }
            }
        }
        self.done = true;
        None
    }
}

/// Number of linear extensions, by memoized counting over placed-sets.
pub fn count_linear_extensions(pred: &[u64]) -> u128 {
    use std::collections::HashMap;
    fn go(pred: &[u64], placed: u64, full: u64, memo: &mut HashMap<u64, u128>) -> u128 {
        if placed == full {
            return 1;
        }
        if let Some(&c) = memo.get(&placed) {
            return c;
        }
        let total = (0..pred.len())
            .filter(|&i| placed & (1 << i) == 0 && pred[i] & !placed == 0)
            .map(|i| go(pred, placed | (1 << i), full, memo))
            .sum();
        memo.insert(placed, total);
        total
    }
    let n = pred.len();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(pred, 0, full, &mut HashMap::new())
}
