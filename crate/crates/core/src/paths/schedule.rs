use crate::error::{Error, Result};

/// Visiting order of monitoring dates `1..=h` (date 0 is the start).
///
/// The bridge order visits the terminal date first and then midpoints level
/// by level: `h, h/2, h/4, 3h/4, h/8, ...`. Each date is generated
/// conditionally on its `left` and `right` neighbours, which are already
/// known when it is visited. The naive order is `1, 2, ..., h` with
/// neighbours `k - 1` and none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeSchedule {
    order: Vec<usize>,
    left: Vec<usize>,
    right: Vec<Option<usize>>,
    position: Vec<usize>,
}

impl BridgeSchedule {
    /// Bridge order for `h = 2^m` dates.
    pub fn bridge(h: usize) -> Result<Self> {
        if h == 0 || !h.is_power_of_two() {
            return Err(Error::Config(format!(
                "bridge construction needs a power-of-two date count, got {h}"
            )));
        }
        let mut order = vec![h];
        let mut left = vec![0];
        let mut right = vec![None];
        let mut step = h / 2;
        while step >= 1 {
            let mut i = step;
            while i < h {
                order.push(i);
                left.push(i - step);
                right.push(Some(i + step));
                i += 2 * step;
            }
            step /= 2;
        }
        Ok(Self::finish(order, left, right))
    }

    /// Sequential order for any positive date count.
    pub fn naive(h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::Config("need at least one monitoring date".into()));
        }
        let order: Vec<usize> = (1..=h).collect();
        let left = (0..h).collect();
        Ok(Self::finish(order, left, vec![None; h]))
    }

    fn finish(order: Vec<usize>, left: Vec<usize>, right: Vec<Option<usize>>) -> Self {
        let mut position = vec![0; order.len() + 1];
        for (p, &k) in order.iter().enumerate() {
            position[k] = p;
        }
        Self {
            order,
            left,
            right,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Dates in visiting order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Date visited at position `p`.
    pub fn date(&self, p: usize) -> usize {
        self.order[p]
    }

    /// `(left, right)` conditioning dates for position `p`; `right` is `None`
    /// when the date is generated forward from `left` alone.
    pub fn neighbours(&self, p: usize) -> (usize, Option<usize>) {
        (self.left[p], self.right[p])
    }

    /// Position at which date `k` (1-based) is visited.
    pub fn position(&self, k: usize) -> usize {
        self.position[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_order() {
        let s = BridgeSchedule::bridge(8).unwrap();
        assert_eq!(s.order(), &[8, 4, 2, 6, 1, 3, 5, 7]);
        assert_eq!(s.neighbours(0), (0, None));
        assert_eq!(s.neighbours(1), (0, Some(8)));
        assert_eq!(s.neighbours(3), (4, Some(8)));
        assert_eq!(s.neighbours(7), (6, Some(8)));
        for k in 1..=8 {
            assert_eq!(s.date(s.position(k)), k);
        }
    }

    #[test]
    fn visits_every_date_once_after_neighbours() {
        for m in 0..8 {
            let h = 1 << m;
            let s = BridgeSchedule::bridge(h).unwrap();
            let mut seen = vec![false; h + 1];
            seen[0] = true;
            for p in 0..h {
                let (l, r) = s.neighbours(p);
                assert!(seen[l]);
                if let Some(r) = r {
                    assert!(seen[r]);
                }
                assert!(!seen[s.date(p)]);
                seen[s.date(p)] = true;
            }
            assert!(seen.iter().all(|&b| b));
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(BridgeSchedule::bridge(6).is_err());
        assert!(BridgeSchedule::naive(6).is_ok());
    }
}
