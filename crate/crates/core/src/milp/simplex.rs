//! Bounded-variable simplex on a dense tableau.
//!
//! Every row `i` gets a slack `s_i` with `A_i x + s_i = b_i`; the row sense is
//! encoded in the slack bounds (`≤`: `s ≥ 0`, `≥`: `s ≤ 0`, `=`: `s = 0`).
//! Rows whose slack starts out of bounds receive an artificial column and
//! phase 1 drives those to zero. The tableau stores `B⁻¹[A | I | art]` in full
//! but pivots only touch the nonzeros of the pivot row and column.
//!
//! The internal problem is always a minimization of `sign · c`.

use super::{LpModel, LpStatus, RowSense, SolverOptions};
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_STREAK: usize = 50;
const NONE: usize = usize::MAX;
const REFACTOR_EVERY: usize = 400;
// share of the feasibility tolerance the primal ratio test may spend
const HARRIS: f64 = 0.1;

/// Largest dense tableau the simplex will allocate (1 GiB of `f64`).
pub const MAX_TABLEAU_ENTRIES: usize = 1 << 27;

pub(crate) struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    // artificial column k sits in row art[k].0 with coefficient art[k].1
    art: Vec<(usize, f64)>,
    // sign applied to each row when the initial tableau was built
    row_sign: Vec<f64>,
    since_refactor: usize,
    // permanently fixed columns (equality slacks, retired artificials); the
    // pivot leaves them stale and only a refactorization restores them
    frozen: Vec<bool>,
    pub(crate) lb: Vec<f64>,
    pub(crate) ub: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    cost: Vec<f64>,
    obj: Vec<f64>,
    d: Vec<f64>,
    t: Vec<f64>,
    sign: f64,
    opts: SolverOptions,
    bland: bool,
    streak: usize,
    nz: Vec<usize>,
    // the basis is dual feasible for the phase-2 costs
    warm: bool,
    pub(crate) iterations: usize,
}

enum Step {
    Done,
    Unbounded,
    Continue,
}

impl Tableau {
    pub(crate) fn new(model: &LpModel, opts: &SolverOptions) -> Self {
        let m = model.num_cons();
        let n = model.num_vars();
        let mut lb: Vec<f64> = model.vars.iter().map(|v| v.lb).collect();
        let mut ub: Vec<f64> = model.vars.iter().map(|v| v.ub).collect();
        for c in &model.cons {
            let (l, u) = match c.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lb.push(l);
            ub.push(u);
        }
        let sign = model.sense.sign();
        let mut obj = vec![0.0; n + m];
        for &(j, c) in &model.objective {
            obj[j] = sign * c;
        }
        Tableau {
            m,
            n,
            ncols: n + m,
            rows: model.cons.iter().map(|c| c.terms.clone()).collect(),
            b: model.cons.iter().map(|c| c.rhs).collect(),
            art: Vec::new(),
            row_sign: Vec::new(),
            since_refactor: 0,
            frozen: Vec::new(),
            lb,
            ub,
            x: Vec::new(),
            basis: Vec::new(),
            pos: Vec::new(),
            cost: Vec::new(),
            obj,
            d: Vec::new(),
            t: Vec::new(),
            sign,
            opts: *opts,
            bland: false,
            streak: 0,
            nz: Vec::new(),
            warm: false,
            iterations: 0,
        }
    }

    pub(crate) fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lb[j] = lb;
        self.ub[j] = ub;
    }

    /// Cold start from the slack basis, phases 1 and 2.
    pub(crate) fn solve_from_scratch(&mut self) -> Result<LpStatus> {
        let (m, n) = (self.m, self.n);
        self.lb.truncate(n + m);
        self.ub.truncate(n + m);
        self.obj.truncate(n + m);
        self.art.clear();
        self.warm = false;

        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = if self.lb[j].is_finite() {
                self.lb[j]
            } else if self.ub[j].is_finite() {
                self.ub[j]
            } else {
                0.0
            };
        }
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            let act: f64 = self.rows[i].iter().map(|&(j, a)| a * x[j]).sum();
            let s = self.b[i] - act;
            let (l, u) = (self.lb[n + i], self.ub[n + i]);
            let clamped = s.clamp(l, u);
            x[n + i] = clamped;
            let r = s - clamped;
            if r.abs() > self.opts.feas_tol {
                let sigma = if r > 0.0 { 1.0 } else { -1.0 };
                self.art.push((i, sigma));
                row_sign[i] = sigma;
            } else {
                x[n + i] = s;
            }
        }
        let k = self.art.len();
        self.ncols = n + m + k;
        let w = self.ncols;
        match m.checked_mul(w) {
            Some(size) if size <= MAX_TABLEAU_ENTRIES => {}
            _ => {
                return Err(Error::CapExceeded(format!(
                    "a {m} x {w} dense tableau exceeds the cap of {MAX_TABLEAU_ENTRIES} entries"
                )))
            }
        }
        self.t = vec![0.0; m * w];
        self.basis = (0..m).map(|i| n + i).collect();
        for (a, &(i, sigma)) in self.art.iter().enumerate() {
            self.basis[i] = n + m + a;
            let act: f64 = self.rows[i].iter().map(|&(j, c)| c * x[j]).sum();
            x.push((self.b[i] - act - x[n + i]) * sigma);
            self.lb.push(0.0);
            self.ub.push(f64::INFINITY);
            self.obj.push(0.0);
            self.t[i * w + n + m + a] = 1.0;
        }
        for i in 0..m {
            let s = row_sign[i];
            for &(j, a) in &self.rows[i] {
                self.t[i * w + j] = s * a;
            }
            self.t[i * w + n + i] = s;
        }
        self.pos = vec![NONE; w];
        for (i, &bj) in self.basis.iter().enumerate() {
            self.pos[bj] = i;
        }
        self.x = x;
        self.frozen = vec![false; w];
        for i in 0..m {
            self.frozen[n + i] = self.lb[n + i] == self.ub[n + i];
        }
        self.row_sign = row_sign;
        self.since_refactor = 0;
        self.bland = false;
        self.streak = 0;

        if k > 0 {
            self.cost = vec![0.0; w];
            for a in 0..k {
                self.cost[n + m + a] = 1.0;
            }
            self.price();
            match self.run_primal()? {
                LpStatus::Optimal => {}
                // Phase 1 is bounded below by zero.
                other => return Ok(other),
            }
            let infeas = (n + m..w).map(|j| self.x[j].abs()).fold(0.0, f64::max);
            if infeas > self.opts.feas_tol {
                return Ok(LpStatus::Infeasible);
            }
            for j in n + m..w {
                self.lb[j] = 0.0;
                self.ub[j] = 0.0;
                self.frozen[j] = true;
                if self.pos[j] == NONE {
                    self.x[j] = 0.0;
                }
            }
            self.drive_out_artificials();
        }
        self.cost = self.obj.clone();
        self.price();
        let status = self.run_primal()?;
        self.warm = status == LpStatus::Optimal;
        Ok(status)
    }

    /// Re-optimizes after bound changes, starting from the current basis.
    /// Returns `None` if the basis cannot be reused and a cold start is needed.
    pub(crate) fn warm_resolve(&mut self) -> Result<Option<LpStatus>> {
        if !self.warm || self.t.is_empty() {
            return Ok(None);
        }
        for j in 0..self.ncols {
            if self.pos[j] != NONE {
                continue;
            }
            let (l, u) = (self.lb[j], self.ub[j]);
            let target = if l == u {
                l
            } else if self.d[j] > OPT_TOL {
                l
            } else if self.d[j] < -OPT_TOL {
                u
            } else if self.x[j] < l || self.x[j] > u {
                if self.x[j] < l { l } else { u }
            } else {
                self.x[j]
            };
            if !target.is_finite() {
                return Ok(None);
            }
            let delta = target - self.x[j];
            if delta != 0.0 {
                self.shift_nonbasic(j, delta);
            }
        }
        self.perturb();
        let status = self.dual()?;
        self.cost.copy_from_slice(&self.obj);
        self.price();
        if status != LpStatus::Optimal {
            self.warm = status == LpStatus::Infeasible;
            return Ok(Some(status));
        }
        let status = self.run_primal()?;
        if status != LpStatus::Optimal {
            self.warm = false;
            return Ok(Some(status));
        }
        if self.residual() > 1e-6 {
            self.warm = false;
            return Ok(None);
        }
        Ok(Some(status))
    }

    /// Shifts the costs of nonbasic columns away from zero reduced cost, in
    /// the dual-feasible direction, to break dual degeneracy.
    fn perturb(&mut self) {
        let scale = self.obj.iter().fold(1.0f64, |a, c| a.max(c.abs())) * 1e-6;
        for j in 0..self.ncols {
            if self.pos[j] != NONE || self.lb[j] == self.ub[j] {
                continue;
            }
            let eps = scale * (1.0 + ((j * 7919) % 1009) as f64 / 1009.0);
            let at_upper = self.x[j] >= self.ub[j];
            let at_lower = self.x[j] <= self.lb[j];
            let e = if at_lower && !at_upper {
                eps
            } else if at_upper && !at_lower {
                -eps
            } else {
                continue;
            };
            self.cost[j] += e;
            self.d[j] += e;
        }
    }

    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        let w = self.ncols;
        for i in 0..self.m {
            let a = self.t[i * w + j];
            if a != 0.0 {
                self.x[self.basis[i]] -= a * delta;
            }
        }
        self.x[j] += delta;
    }

    fn price(&mut self) {
        let w = self.ncols;
        self.d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * w..(i + 1) * w];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                if a != 0.0 {
                    *dj -= cb * a;
                }
            }
        }
        for &bj in &self.basis {
            self.d[bj] = 0.0;
        }
    }

    fn tick(&mut self) -> Result<bool> {
        if self.iterations >= self.opts.max_iters {
            return Ok(false);
        }
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
        if self.iterations % 64 == 0 {
            self.opts.deadline.check()?;
        }
        Ok(true)
    }

    fn run_primal(&mut self) -> Result<LpStatus> {
        loop {
            if !self.tick()? {
                return Ok(LpStatus::CapExceeded);
            }
            match self.primal_step() {
                Step::Done => return Ok(LpStatus::Optimal),
                Step::Unbounded => return Ok(LpStatus::Unbounded),
                Step::Continue => {}
            }
        }
    }

    fn primal_step(&mut self) -> Step {
        let w = self.ncols;
        let mut enter = NONE;
        let mut dir = 0.0;
        let mut best = 0.0;
        for j in 0..w {
            if self.pos[j] != NONE || self.lb[j] == self.ub[j] {
                continue;
            }
            let dj = self.d[j];
            let cand = if dj < -OPT_TOL && self.x[j] < self.ub[j] {
                1.0
            } else if dj > OPT_TOL && self.x[j] > self.lb[j] {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                enter = j;
                dir = cand;
                break;
            }
            if dj.abs() > best {
                best = dj.abs();
                enter = j;
                dir = cand;
            }
        }
        if enter == NONE {
            return Step::Done;
        }
        let q = enter;

        // Harris two-pass ratio test: find the largest step that keeps every
        // basic variable within its bounds relaxed by `feas_tol`, then among
        // the rows that block within it take the largest pivot.
        let tol = HARRIS * self.opts.feas_tol;
        let limit = |this: &Self, i: usize, slack: f64| -> Option<f64> {
            let alpha = this.t[i * w + q];
            if alpha.abs() < PIVOT_TOL {
                return None;
            }
            let bi = this.basis[i];
            let rate = -dir * alpha;
            if rate < 0.0 {
                this.lb[bi].is_finite().then(|| (this.x[bi] - this.lb[bi] + slack) / -rate)
            } else {
                this.ub[bi].is_finite().then(|| (this.ub[bi] - this.x[bi] + slack) / rate)
            }
        };
        let own = if dir > 0.0 { self.ub[q] - self.x[q] } else { self.x[q] - self.lb[q] };
        let mut relaxed = own.max(0.0);
        for i in 0..self.m {
            if let Some(l) = limit(self, i, tol) {
                relaxed = relaxed.min(l);
            }
        }
        if !relaxed.is_finite() {
            return Step::Unbounded;
        }
        let mut leave = NONE;
        let mut leave_alpha = 0.0;
        let mut theta = own.max(0.0);
        // a bound flip within the relaxed step needs no pivot
        let flip = own <= relaxed;
        for i in (0..self.m).filter(|_| !flip) {
            let Some(l) = limit(self, i, 0.0) else { continue };
            if l > relaxed {
                continue;
            }
            let alpha = self.t[i * w + q].abs();
            let better = if self.bland {
                leave == NONE || self.basis[i] < self.basis[leave]
            } else {
                alpha > leave_alpha
            };
            if better {
                leave = i;
                leave_alpha = alpha;
                theta = l.max(0.0);
            }
        }
        if theta < 1e-11 {
            self.streak += 1;
            if self.streak > DEGENERATE_STREAK {
                self.bland = true;
            }
        } else {
            self.streak = 0;
            self.bland = false;
        }

        if leave == NONE {
            // bound flip
            self.shift_nonbasic(q, dir * own);
            self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
            self.iterations += 1;
            return Step::Continue;
        }
        if theta > 0.0 {
            self.shift_nonbasic(q, dir * theta);
        }
        self.pivot(leave, q);
        Step::Continue
    }

    fn dual(&mut self) -> Result<LpStatus> {
        let w = self.ncols;
        let tol = self.opts.feas_tol;
        loop {
            if !self.tick()? {
                return Ok(LpStatus::CapExceeded);
            }
            let mut r = NONE;
            let mut worst = tol;
            for i in 0..self.m {
                let bi = self.basis[i];
                let v = (self.lb[bi] - self.x[bi]).max(self.x[bi] - self.ub[bi]);
                if v > worst {
                    worst = v;
                    r = i;
                }
            }
            if r == NONE {
                return Ok(LpStatus::Optimal);
            }
            let br = self.basis[r];
            let going_up = self.x[br] < self.lb[br];
            let target = if going_up { self.lb[br] } else { self.ub[br] };

            // Entering candidates and the direction each would move in.
            let mut cands: Vec<(f64, usize, f64, f64)> = Vec::new();
            for j in 0..w {
                if self.pos[j] != NONE || self.lb[j] == self.ub[j] {
                    continue;
                }
                let alpha = self.t[r * w + j];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let dir = if going_up { -alpha.signum() } else { alpha.signum() };
                let room = if dir > 0.0 { self.ub[j] - self.x[j] } else { self.x[j] - self.lb[j] };
                if room > 0.0 {
                    cands.push((self.d[j].abs() / alpha.abs(), j, alpha, dir));
                }
            }
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));

            // Bound-flipping ratio test: pass breakpoints whose variable can
            // jump to its opposite bound while the leaving row stays
            // infeasible.
            let mut slope = (self.x[br] - target).abs();
            let mut k = 0;
            while k < cands.len() {
                let (_, j, alpha, dir) = cands[k];
                let room = if dir > 0.0 { self.ub[j] - self.x[j] } else { self.x[j] - self.lb[j] };
                let drop = alpha.abs() * room;
                // a breakpoint that closes the gap up to the tolerance pivots
                if !drop.is_finite() || drop >= slope - tol {
                    break;
                }
                slope -= drop;
                k += 1;
            }
            if k == cands.len() {
                // only trust the verdict on a freshly factored tableau
                if self.since_refactor > 0 && self.refactor() {
                    continue;
                }
                return Ok(LpStatus::Infeasible);
            }

            // Harris pass over the remaining breakpoints: the largest pivot
            // among those binding within the relaxed dual step.
            let rest = &cands[k..];
            let relaxed = rest
                .iter()
                .map(|&(_, j, alpha, _)| (self.d[j].abs() + OPT_TOL) / alpha.abs())
                .fold(f64::INFINITY, f64::min);
            let mut q = NONE;
            let mut best_alpha = 0.0;
            for &(ratio, j, alpha, _) in rest {
                if ratio > relaxed {
                    break;
                }
                if alpha.abs() > best_alpha {
                    best_alpha = alpha.abs();
                    q = j;
                }
            }
            for &(_, j, _, dir) in &cands[..k] {
                let bound = if dir > 0.0 { self.ub[j] } else { self.lb[j] };
                self.shift_nonbasic(j, bound - self.x[j]);
                self.x[j] = bound;
            }
            let delta = (self.x[br] - target) / self.t[r * w + q];
            self.shift_nonbasic(q, delta);
            self.x[br] = target;
            self.pivot(r, q);
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.ncols;
        let alpha = self.t[r * w + q];
        self.nz.clear();
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 && !self.frozen[j] {
                    *v /= alpha;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        self.nz.push(j);
                    }
                }
            }
            row[q] = 1.0;
        }

        let (head, rest) = self.t.split_at_mut(r * w);
        let (prow, tail) = rest.split_at_mut(w);
        let prow: &[f64] = prow;
        for chunk in head.chunks_exact_mut(w).chain(tail.chunks_exact_mut(w)) {
            let f = chunk[q];
            if f == 0.0 {
                continue;
            }
            for &j in &self.nz {
                let v = chunk[j] - f * prow[j];
                chunk[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            chunk[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &self.nz {
                self.d[j] -= f * prow[j];
            }
        }
        self.d[q] = 0.0;
        let old = self.basis[r];
        self.pos[old] = NONE;
        self.basis[r] = q;
        self.pos[q] = r;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds `B⁻¹[A | I | art]`, the basic values and the reduced costs
    /// from the original rows, discarding the error accumulated by pivoting.
    /// Leaves the tableau untouched if the basis is numerically singular.
    fn refactor(&mut self) -> bool {
        let (m, w) = (self.m, self.ncols);
        self.since_refactor = 0;
        let mut t = vec![0.0; m * w];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let s = self.row_sign[i];
            for &(j, a) in &self.rows[i] {
                t[i * w + j] = s * a;
            }
            t[i * w + self.n + i] = s;
            rhs[i] = s * self.b[i];
        }
        for (k, &(i, _)) in self.art.iter().enumerate() {
            t[i * w + self.n + self.m + k] = 1.0;
        }
        let mut row_of = vec![NONE; m];
        let mut used = vec![false; m];
        for &c in &self.basis {
            let mut p = NONE;
            let mut best = 1e-11;
            for i in (0..m).filter(|&i| !used[i]) {
                if t[i * w + c].abs() > best {
                    best = t[i * w + c].abs();
                    p = i;
                }
            }
            if p == NONE {
                return false;
            }
            used[p] = true;
            let inv = 1.0 / t[p * w + c];
            for v in &mut t[p * w..(p + 1) * w] {
                *v *= inv;
            }
            rhs[p] *= inv;
            let prow: Vec<(usize, f64)> =
                (0..w).filter_map(|j| (t[p * w + j] != 0.0).then(|| (j, t[p * w + j]))).collect();
            for i in (0..m).filter(|&i| i != p) {
                let f = t[i * w + c];
                if f == 0.0 {
                    continue;
                }
                for &(j, a) in &prow {
                    let v = t[i * w + j] - f * a;
                    t[i * w + j] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                t[i * w + c] = 0.0;
                rhs[i] -= f * rhs[p];
            }
            row_of[p] = c;
        }
        self.t = t;
        self.basis = row_of;
        self.pos = vec![NONE; w];
        for (i, &bj) in self.basis.iter().enumerate() {
            self.pos[bj] = i;
        }
        for i in 0..m {
            let mut v = rhs[i];
            for j in (0..w).filter(|&j| self.pos[j] == NONE) {
                let a = self.t[i * w + j];
                if a != 0.0 {
                    v -= a * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
        self.price();
        true
    }

    /// Swaps basic artificials (now fixed at zero) for real columns where a
    /// nonzero pivot exists. Values are unchanged because the artificial is 0.
    fn drive_out_artificials(&mut self) {
        let w = self.ncols;
        let first_art = self.n + self.m;
        for r in 0..self.m {
            if self.basis[r] < first_art {
                continue;
            }
            let mut q = NONE;
            let mut best = 1e-7;
            for j in 0..first_art {
                let a = self.t[r * w + j].abs();
                if self.pos[j] == NONE && !self.frozen[j] && a > best {
                    best = a;
                    q = j;
                }
            }
            if q != NONE {
                let br = self.basis[r];
                let delta = self.x[br] / self.t[r * w + q];
                self.shift_nonbasic(q, delta);
                self.x[br] = 0.0;
                self.pivot(r, q);
            }
        }
    }

    /// Largest violation of `A x + s (+ art) = b`.
    pub(crate) fn residual(&self) -> f64 {
        let mut lhs: Vec<f64> = (0..self.m).map(|i| self.x[self.n + i]).collect();
        for (i, row) in self.rows.iter().enumerate() {
            lhs[i] += row.iter().map(|&(j, a)| a * self.x[j]).sum::<f64>();
        }
        for (k, &(i, s)) in self.art.iter().enumerate() {
            lhs[i] += s * self.x[self.n + self.m + k];
        }
        lhs.iter().zip(&self.b).map(|(l, b)| (l - b).abs()).fold(0.0, f64::max)
    }

    pub(crate) fn primal(&self) -> Vec<f64> {
        self.x[..self.n].iter().map(|&v| if v == 0.0 { 0.0 } else { v }).collect()
    }

    pub(crate) fn internal_objective(&self) -> f64 {
        (0..self.n).map(|j| self.obj[j] * self.x[j]).sum()
    }

    /// Brings the frozen columns and reduced costs up to date.
    pub(crate) fn refresh(&mut self) {
        if !self.refactor() {
            self.price();
        }
    }

    pub(crate) fn duals(&self) -> Vec<f64> {
        (0..self.m).map(|i| -self.sign * self.d[self.n + i] + 0.0).collect()
    }

    pub(crate) fn reduced_costs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.sign * self.d[j] + 0.0).collect()
    }
}
