//! Two-phase tableau simplex over exact rationals with Bland's rule.

use super::farkas::FarkasWitness;
use super::model::{Direction, ExactLP, LpError, Relation};
use crate::ground::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LPOutcome {
    Optimal { assignment: Vec<Rational>, value: Rational },
    /// A feasible point of an LP without objective.
    Feasible { assignment: Vec<Rational> },
    Infeasible(FarkasWitness),
    /// `point + t * ray` is feasible for all `t >= 0` and improves without bound.
    Unbounded { point: Vec<Rational>, ray: Vec<Rational> },
}

impl LPOutcome {
    pub fn assignment(&self) -> Option<&[Rational]> {
        match self {
            LPOutcome::Optimal { assignment, .. } | LPOutcome::Feasible { assignment } => {
                Some(assignment)
            }
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LPOutcome::Infeasible(_))
    }
}

/// How an original variable is expressed through nonnegative columns.
enum VarMap {
    Shift { col: usize, lower: Rational },
    Reflect { col: usize, upper: Rational },
    Split { pos: usize, neg: usize },
}

impl VarMap {
    fn value(&self, cols: &[Rational]) -> Rational {
        match self {
            VarMap::Shift { col, lower } => lower + &cols[*col],
            VarMap::Reflect { col, upper } => upper - &cols[*col],
            VarMap::Split { pos, neg } => &cols[*pos] - &cols[*neg],
        }
    }

    fn direction(&self, cols: &[Rational]) -> Rational {
        match self {
            VarMap::Shift { col, .. } => cols[*col].clone(),
            VarMap::Reflect { col, .. } => -&cols[*col],
            VarMap::Split { pos, neg } => &cols[*pos] - &cols[*neg],
        }
    }
}

struct Row {
    coeffs: Vec<(usize, Rational)>,
    rel: Relation,
    rhs: Rational,
    /// Index of the source constraint and the factor `k` with
    /// `this row = k * (source row in <= form)`; `None` for bound rows.
    origin: Option<(usize, Rational)>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
    /// Negated objective value of the current basis.
    neg_value: Rational,
    artificial_from: usize,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.reduced.len()
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][q].clone();
        if p != Rational::one() {
            let inv = p.recip();
            for a in self.rows[r].iter_mut().filter(|a| !a.is_zero()) {
                *a *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let prow: Vec<(usize, Rational)> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| (j, a.clone()))
            .collect();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][q].is_zero() {
                continue;
            }
            let f = self.rows[i][q].clone();
            let row = &mut self.rows[i];
            for (j, a) in &prow {
                row[*j] -= &f * a;
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.reduced[q].is_zero() {
            let f = self.reduced[q].clone();
            for (j, a) in &prow {
                self.reduced[*j] -= &f * a;
            }
            self.neg_value -= &f * &prhs;
        }
        self.basis[r] = q;
    }

    fn price(&mut self, costs: &[Rational]) {
        self.reduced = costs.to_vec();
        self.neg_value = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_zero() {
                    self.reduced[j] -= cb * a;
                }
            }
            self.neg_value -= cb * &self.rhs[r];
        }
    }

    /// Runs Bland pivots until optimal; returns the entering column on unboundedness.
    fn optimize(&mut self) -> Option<usize> {
        loop {
            let entering = (0..self.artificial_from).find(|&j| self.reduced[j].is_negative());
            let q = entering?;
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, q),
                None => return Some(q),
            }
            if log::log_enabled!(log::Level::Trace) {
                log::trace!("{}", self.dump());
            }
        }
    }

    fn column_values(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.ncols()];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[r].clone();
        }
        x
    }

    fn dump(&self) -> String {
        let mut s = String::new();
        for (r, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|a| a.to_string()).collect();
            s.push_str(&format!("x{} | {} | {}\n", self.basis[r], cells.join(" "), self.rhs[r]));
        }
        let cells: Vec<String> = self.reduced.iter().map(|a| a.to_string()).collect();
        s.push_str(&format!("obj | {} | {}\n", cells.join(" "), self.neg_value));
        s
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &ExactLP) -> Result<LPOutcome, LpError> {
    lp.check_dimensions()?;

    let mut ncols = 0usize;
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut rows: Vec<Row> = Vec::new();
    for b in lp.bounds() {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                maps.push(VarMap::Shift { col: ncols, lower: l.clone() });
                if let Some(u) = u {
                    rows.push(Row {
                        coeffs: vec![(ncols, Rational::one())],
                        rel: Relation::Le,
                        rhs: u - l,
                        origin: None,
                    });
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Reflect { col: ncols, upper: u.clone() });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let nstruct = ncols;

    for (i, c) in lp.constraints().iter().enumerate() {
        let mut coeffs = Vec::with_capacity(c.coeffs.len() + 1);
        let mut rhs = c.rhs.clone();
        for (j, a) in &c.coeffs {
            match &maps[*j] {
                VarMap::Shift { col, lower } => {
                    rhs -= a * lower;
                    coeffs.push((*col, a.clone()));
                }
                VarMap::Reflect { col, upper } => {
                    rhs -= a * upper;
                    coeffs.push((*col, -a));
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((*pos, a.clone()));
                    coeffs.push((*neg, -a));
                }
            }
        }
        // Source row in <= form is `sign * (a.x - b) <= 0`.
        let sign = if c.rel == Relation::Ge { -Rational::one() } else { Rational::one() };
        rows.push(Row { coeffs, rel: c.rel, rhs, origin: Some((i, sign)) });
    }

    // Orient every row so that its right-hand side is nonnegative, preferring
    // `<=` form when the right-hand side is zero.
    for row in rows.iter_mut() {
        let flip = row.rhs.is_negative() || (row.rhs.is_zero() && row.rel == Relation::Ge);
        if flip {
            for (_, a) in row.coeffs.iter_mut() {
                *a = -&*a;
            }
            row.rhs = -&row.rhs;
            row.rel = match row.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            if let Some((_, k)) = row.origin.as_mut() {
                *k = -&*k;
            }
        }
    }

    let nrows = rows.len();
    let nslack = rows.iter().filter(|r| r.rel != Relation::Eq).count();
    let nart = rows.iter().filter(|r| r.rel != Relation::Le).count();
    let total = nstruct + nslack + nart;
    let artificial_from = nstruct + nslack;

    let mut t = Tableau {
        rows: Vec::with_capacity(nrows),
        rhs: Vec::with_capacity(nrows),
        basis: Vec::with_capacity(nrows),
        reduced: Vec::new(),
        neg_value: Rational::zero(),
        artificial_from,
    };
    let mut identity_col = Vec::with_capacity(nrows);
    let (mut next_slack, mut next_art) = (nstruct, artificial_from);
    for row in &rows {
        let mut dense = vec![Rational::zero(); total];
        for (j, a) in &row.coeffs {
            dense[*j] += a;
        }
        let basic = match row.rel {
            Relation::Le => {
                dense[next_slack] = Rational::one();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                dense[next_slack] = -Rational::one();
                next_slack += 1;
                dense[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
            Relation::Eq => {
                dense[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
        };
        t.rows.push(dense);
        t.rhs.push(row.rhs.clone());
        t.basis.push(basic);
        identity_col.push(basic);
    }

    // Phase I: minimize the sum of artificials.
    let mut phase1 = vec![Rational::zero(); total];
    for c in phase1.iter_mut().skip(artificial_from) {
        *c = Rational::one();
    }
    t.price(&phase1);
    let unbounded = t.optimize();
    debug_assert!(unbounded.is_none(), "phase I is bounded below");

    if t.neg_value.is_negative() {
        // Simplex multipliers pi_r = c_r - reduced_r on the initial identity
        // columns; y = -pi combines the oriented rows into 0 <= y.b < 0.
        let mut multipliers = vec![Rational::zero(); lp.num_constraints()];
        for (r, row) in rows.iter().enumerate() {
            if let Some((i, k)) = &row.origin {
                let col = identity_col[r];
                let y = &t.reduced[col] - &phase1[col];
                multipliers[*i] = y * k;
            }
        }
        return Ok(LPOutcome::Infeasible(FarkasWitness { multipliers }));
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= artificial_from {
            match (0..artificial_from).find(|&j| !t.rows[r][j].is_zero()) {
                Some(q) => t.pivot(r, q),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let to_original = |cols: &[Rational]| maps.iter().map(|m| m.value(cols)).collect::<Vec<_>>();

    let Some(obj) = lp.objective() else {
        let x = to_original(&t.column_values());
        return Ok(LPOutcome::Feasible { assignment: x });
    };

    let mut costs = vec![Rational::zero(); total];
    for (j, c) in &obj.coeffs {
        let c = if obj.direction == Direction::Maximize { -c } else { c.clone() };
        match &maps[*j] {
            VarMap::Shift { col, .. } => costs[*col] += &c,
            VarMap::Reflect { col, .. } => costs[*col] -= &c,
            VarMap::Split { pos, neg } => {
                costs[*pos] += &c;
                costs[*neg] -= &c;
            }
        }
    }
    t.price(&costs);
    match t.optimize() {
        None => {
            let x = to_original(&t.column_values());
            let value = lp.objective_value(&x);
            Ok(LPOutcome::Optimal { assignment: x, value })
        }
        Some(q) => {
            let point = to_original(&t.column_values());
            let mut dir = vec![Rational::zero(); total];
            dir[q] = Rational::one();
            for (r, &b) in t.basis.iter().enumerate() {
                if !t.rows[r][q].is_zero() {
                    dir[b] = -&t.rows[r][q];
                }
            }
            let ray = maps.iter().map(|m| m.direction(&dir)).collect();
            Ok(LPOutcome::Unbounded { point, ray })
        }
    }
}
