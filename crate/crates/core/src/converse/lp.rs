//! Optimality certificate for the MaxL lower-bound linear program.
//!
//! Variables `y_w` (`w = 2..=M`) collect the probability mass a mechanism
//! puts on retrieval sets of size `w`; `z1`, `z2` are slacks:
//!
//! ```text
//! minimize   M + sum_w c_w y_w,         c_w = -(1 - 1/w)
//! subject to sum_w y_w           + z1 = M
//!            sum_w (w - 1) y_w   + z2 = M (D - 1)
//!            y, z >= 0
//! ```
//!
//! The basis is the one the capacity-achieving scheme induces: `{y_2, z1}`
//! for `D in [1, 2]`, `{y_(w-1), y_w}` for `D in (w-1, w]`, `w >= 3`. A basic
//! solution is optimal when every relative cost `c_N - c_B A_B^-1 A_N` is
//! nonnegative; everything here is exact rational arithmetic.

use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::prob::{self, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LpVar {
    /// Mass on retrieval sets of this size.
    Y(u64),
    Z1,
    Z2,
}

impl fmt::Display for LpVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Y(w) => write!(f, "y{w}"),
            Self::Z1 => f.write_str("z1"),
            Self::Z2 => f.write_str("z2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// The program needs at least two files.
    FileCount(u64),
    Cost(Ratio),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FileCount(m) => write!(f, "LP needs at least 2 files, got {m}"),
            Self::Cost(d) => write!(f, "download cost {} outside [1, M]", prob::format_ratio(d)),
        }
    }
}

impl core::error::Error for LpError {}

/// Standard-form data in column order `y_2, ..., y_M, z1, z2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpTableau {
    pub num_files: u64,
    pub cost: Vec<Ratio>,
    pub a: [Vec<Ratio>; 2],
    pub b: [Ratio; 2],
    /// Column indices of the basic variables.
    pub basis: [usize; 2],
}

impl LpTableau {
    pub fn new(num_files: u64, d: &Ratio) -> Result<Self, LpError> {
        if num_files < 2 {
            return Err(LpError::FileCount(num_files));
        }
        let m = prob::int(num_files as i64);
        if d < &Ratio::one() || d > &m {
            return Err(LpError::Cost(d.clone()));
        }
        let mut cost = Vec::new();
        let mut ones = Vec::new();
        let mut excess = Vec::new();
        for w in 2..=num_files {
            cost.push(-(Ratio::one() - prob::ratio(1, w as i64)));
            ones.push(Ratio::one());
            excess.push(prob::int(w as i64 - 1));
        }
        cost.extend([Ratio::zero(), Ratio::zero()]);
        ones.extend([Ratio::one(), Ratio::zero()]);
        excess.extend([Ratio::zero(), Ratio::one()]);
        let b = [m.clone(), &m * (d - Ratio::one())];
        let mut tableau = Self { num_files, cost, a: [ones, excess], b, basis: [0, 0] };
        let w = crate::capacity::ceil_segment(num_files, d);
        tableau.basis = if w == 2 {
            [tableau.column(LpVar::Y(2)), tableau.column(LpVar::Z1)]
        } else {
            [tableau.column(LpVar::Y(w - 1)), tableau.column(LpVar::Y(w))]
        };
        Ok(tableau)
    }

    pub fn num_columns(&self) -> usize {
        self.cost.len()
    }

    pub fn column(&self, var: LpVar) -> usize {
        let m = self.num_files as usize;
        match var {
            LpVar::Y(w) => w as usize - 2,
            LpVar::Z1 => m - 1,
            LpVar::Z2 => m,
        }
    }

    pub fn var(&self, column: usize) -> LpVar {
        let m = self.num_files as usize;
        match column {
            c if c + 1 < m => LpVar::Y(c as u64 + 2),
            c if c + 1 == m => LpVar::Z1,
            _ => LpVar::Z2,
        }
    }

    /// `A_B^-1`, `None` if the basis is singular.
    fn basis_inverse(&self) -> Option<[[Ratio; 2]; 2]> {
        let [i, j] = self.basis;
        let (a, b) = (&self.a[0][i], &self.a[0][j]);
        let (c, d) = (&self.a[1][i], &self.a[1][j]);
        let det = a * d - b * c;
        if det.is_zero() {
            return None;
        }
        Some([[d / &det, -(b / &det)], [-(c / &det), a / &det]])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpVerdict {
    /// Relative costs nonnegative, basic solution nonnegative and equal to
    /// the closed form.
    pub ok: bool,
    pub basis: [LpVar; 2],
    pub basic_values: [Ratio; 2],
    /// Relative cost of every nonbasic variable, in column order.
    pub relative_costs: Vec<(LpVar, Ratio)>,
    /// `M + c . x` at the basic solution, i.e. `2^rho` of the bound.
    pub objective: Ratio,
    pub matches_closed_form: bool,
}

/// Builds the tableau for `(M, D)`, solves for the claimed basis and
/// certifies it.
pub fn lp_verify_optimality(num_files: u64, d: &Ratio) -> Result<LpVerdict, LpError> {
    let t = LpTableau::new(num_files, d)?;
    let inv = t.basis_inverse().expect("the claimed bases are nonsingular");
    let [bi, bj] = t.basis;
    let x = [
        &inv[0][0] * &t.b[0] + &inv[0][1] * &t.b[1],
        &inv[1][0] * &t.b[0] + &inv[1][1] * &t.b[1],
    ];
    // simplex multipliers c_B A_B^-1
    let cb = [&t.cost[bi], &t.cost[bj]];
    let pi = [
        cb[0] * &inv[0][0] + cb[1] * &inv[1][0],
        cb[0] * &inv[0][1] + cb[1] * &inv[1][1],
    ];
    let relative_costs: Vec<(LpVar, Ratio)> = (0..t.num_columns())
        .filter(|c| !t.basis.contains(c))
        .map(|c| {
            let r = &t.cost[c] - (&pi[0] * &t.a[0][c] + &pi[1] * &t.a[1][c]);
            (t.var(c), r)
        })
        .collect();
    let objective = prob::int(num_files as i64) + cb[0] * &x[0] + cb[1] * &x[1];

    let m = prob::int(num_files as i64);
    let basis = [t.var(bi), t.var(bj)];
    let expected = match basis {
        [LpVar::Y(2), LpVar::Z1] => [&m * (d - Ratio::one()), &m * (prob::int(2) - d)],
        [LpVar::Y(_), LpVar::Y(w)] => {
            let w = prob::int(w as i64);
            [&m * (&w - d), &m * (d - &w + Ratio::one())]
        }
        _ => unreachable!("bases are built by LpTableau::new"),
    };
    let matches_closed_form = x == expected;
    let ok = matches_closed_form
        && x.iter().all(|v| !v.is_negative())
        && relative_costs.iter().all(|(_, r)| !r.is_negative());
    Ok(LpVerdict { ok, basis, basic_values: x, relative_costs, objective, matches_closed_form })
}

/// Hand-derived relative cost of `var` for the basis of segment `w`.
///
/// `w = 2` (basis `{y_2, z1}`): `(w'-1)/2 - (w'-1)/w'` for `y_w'`, `1/2` for `z2`.
/// `w >= 3` (basis `{y_(w-1), y_w}`): `(w-w')(w-w'-1) / (w w' (w-1))` for
/// `y_w'`, `(w-2)/w` for `z1`, `1/(w-1) - 1/w` for `z2`.
pub fn closed_form_relative_cost(w: u64, var: LpVar) -> Ratio {
    let r = |n: i64, d: i64| prob::ratio(n, d);
    let w = w as i64;
    if w == 2 {
        return match var {
            LpVar::Y(v) => {
                let v = v as i64;
                r(v - 1, 2) - r(v - 1, v)
            }
            LpVar::Z2 => r(1, 2),
            LpVar::Z1 => Ratio::zero(),
        };
    }
    match var {
        LpVar::Y(v) => {
            let v = v as i64;
            r((w - v) * (w - v - 1), w * v * (w - 1))
        }
        LpVar::Z1 => r(w - 2, w),
        LpVar::Z2 => r(1, w - 1) - r(1, w),
    }
}
