use super::DpSpec;

/// Binary multi-row knapsack `A x ≤ b` with a linear objective.
///
/// The state is the vector of row loads. Negative coefficients are allowed:
/// a partial assignment is kept only if some completion can still satisfy
/// every row. Variables listed in `fixed_zero` only admit the value `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSpec {
    pub rows: Vec<Vec<i64>>,
    pub rhs: Vec<i64>,
    pub profits: Vec<f64>,
    pub fixed_zero: Vec<bool>,
    // min_future[i][j] = sum over k >= j of min(a_ik, 0)
    min_future: Vec<Vec<i64>>,
}

impl KnapsackSpec {
    pub fn new(rows: Vec<Vec<i64>>, rhs: Vec<i64>, profits: Vec<f64>) -> Self {
        let n = profits.len();
        assert_eq!(rows.len(), rhs.len(), "row/rhs count mismatch");
        assert!(rows.iter().all(|r| r.len() == n), "row length mismatch");
        let min_future = rows
            .iter()
            .map(|r| {
                let mut acc = vec![0i64; n + 1];
                for j in (0..n).rev() {
                    acc[j] = acc[j + 1] + r[j].min(0);
                }
                acc
            })
            .collect();
        KnapsackSpec { rows, rhs, profits, fixed_zero: vec![false; n], min_future }
    }

    pub fn single(weights: Vec<i64>, capacity: i64, profits: Vec<f64>) -> Self {
        Self::new(vec![weights], vec![capacity], profits)
    }

    pub fn with_fixed_zero(mut self, fixed_zero: Vec<bool>) -> Self {
        assert_eq!(fixed_zero.len(), self.profits.len());
        self.fixed_zero = fixed_zero;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.profits.len()
    }
}

impl DpSpec for KnapsackSpec {
    type State = Vec<i64>;

    fn initial_state(&self) -> Vec<i64> {
        vec![0; self.rows.len()]
    }

    fn domain(&self, _: &Vec<i64>, layer: usize) -> Vec<i64> {
        if self.fixed_zero[layer] {
            vec![0]
        } else {
            vec![0, 1]
        }
    }

    fn transition(&self, state: &Vec<i64>, layer: usize, value: i64) -> Option<Vec<i64>> {
        let mut next = state.clone();
        for (i, row) in self.rows.iter().enumerate() {
            next[i] += row[layer] * value;
            if next[i] + self.min_future[i][layer + 1] > self.rhs[i] {
                return None;
            }
        }
        Some(next)
    }

    fn stage_cost(&self, _: &Vec<i64>, layer: usize, value: i64) -> f64 {
        self.profits[layer] * value as f64
    }
}
