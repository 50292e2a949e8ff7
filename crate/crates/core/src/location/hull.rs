use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, one, zero, Q};

/// Outcome of an exact phase-one feasibility search for `A λ = b, λ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Q>),
    /// `z` with `zᵀA ≥ 0` componentwise and `zᵀb < 0`.
    Infeasible(Vec<Q>),
}

/// Phase-one simplex with Bland's rule over exact rationals. `a` is row-major (m × n).
pub fn phase_one(a: &[Vec<Q>], b: &[Q]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    // Tableau columns: n originals, m artificials, then the right-hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut flip = vec![false; m];
    for r in 0..m {
        let mut row = vec![zero(); width];
        let neg = b[r].is_negative();
        flip[r] = neg;
        for j in 0..n {
            row[j] = if neg { -a[r][j].clone() } else { a[r][j].clone() };
        }
        row[n + r] = one();
        row[width - 1] = b[r].abs();
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        // Reduced cost of column j: c_j − Σ_r c_B(r) t[r][j], with cost 1 on artificials.
        let reduced = |t: &Vec<Vec<Q>>, basis: &Vec<usize>, j: usize| -> Q {
            let cj = if j >= n { one() } else { zero() };
            let mut s = cj;
            for r in 0..m {
                if basis[r] >= n {
                    s -= &t[r][j];
                }
            }
            s
        };
        let Some(enter) = (0..n + m).find(|&j| !basis.contains(&j) && reduced(&t, &basis, j).is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Q)> = None;
        for r in 0..m {
            if t[r][enter].is_positive() {
                let ratio = &t[r][width - 1] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (pr, _) = leave.expect("phase one is bounded");
        let piv = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v /= &piv;
        }
        let prow = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= &f * p;
                }
            }
        }
        basis[pr] = enter;
    }
    let objective: Q = (0..m).filter(|&r| basis[r] >= n).map(|r| t[r][width - 1].clone()).sum();
    if objective.is_zero() {
        let mut lambda = vec![zero(); n];
        for r in 0..m {
            if basis[r] < n {
                lambda[basis[r]] = t[r][width - 1].clone();
            }
        }
        Feasibility::Feasible(lambda)
    } else {
        // Simplex multipliers y = c_Bᵀ B⁻¹; B⁻¹ sits in the artificial columns.
        let z = (0..m)
            .map(|k| {
                let y: Q = (0..m).filter(|&r| basis[r] >= n).map(|r| t[r][n + k].clone()).sum();
                let y = if flip[k] { -y } else { y };
                -y
            })
            .collect();
        Feasibility::Infeasible(z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullCertificate {
    /// Convex coefficients reproducing the point.
    Inside { lambda: Vec<String> },
    /// Normal `u` with `⟨pᵢ − x, u⟩ > 0` for every observer point.
    Outside { u: Vec<String>, margins: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullMembership {
    pub inside: bool,
    pub lambda: Option<Vec<Q>>,
    pub normal: Option<Vec<Q>>,
}

impl HullMembership {
    pub fn certificate(&self, points: &[Vec<Q>], x: &[Q]) -> HullCertificate {
        match (&self.lambda, &self.normal) {
            (Some(l), _) => HullCertificate::Inside { lambda: l.iter().map(fmt_q).collect() },
            (None, Some(u)) => HullCertificate::Outside {
                u: u.iter().map(fmt_q).collect(),
                margins: points.iter().map(|p| fmt_q(&inner_diff(p, x, u))).collect(),
            },
            (None, None) => unreachable!("membership always carries a certificate"),
        }
    }
}

pub(crate) fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨p − x, u⟩`.
pub(crate) fn inner_diff(p: &[Q], x: &[Q], u: &[Q]) -> Q {
    p.iter().zip(x).zip(u).map(|((a, b), c)| (a - b) * c).sum()
}

/// Exact convex-hull membership with a checked certificate either way.
pub fn hull_contains(points: &[Vec<Q>], x: &[Q]) -> Result<HullMembership> {
    let d = x.len();
    if points.is_empty() || points.iter().any(|p| p.len() != d) {
        return Err(Error::Dimension { expected: d, got: points.first().map_or(0, |p| p.len()) });
    }
    let mut a: Vec<Vec<Q>> = (0..d).map(|k| points.iter().map(|p| p[k].clone()).collect()).collect();
    a.push(vec![one(); points.len()]);
    let mut b: Vec<Q> = x.to_vec();
    b.push(one());
    match phase_one(&a, &b) {
        Feasibility::Feasible(lambda) => {
            let ok = lambda.iter().all(|l| !l.is_negative())
                && lambda.iter().sum::<Q>() == one()
                && (0..d).all(|k| lambda.iter().zip(points).map(|(l, p)| l * &p[k]).sum::<Q>() == x[k]);
            if !ok {
                return Err(Error::InvalidConfig("hull coefficients failed verification".into()));
            }
            Ok(HullMembership { inside: true, lambda: Some(lambda), normal: None })
        }
        Feasibility::Infeasible(z) => {
            let u = z[..d].to_vec();
            if !points.iter().all(|p| inner_diff(p, x, &u).is_positive()) {
                return Err(Error::InvalidConfig("separating certificate failed verification".into()));
            }
            Ok(HullMembership { inside: false, lambda: None, normal: Some(u) })
        }
    }
}
