//! Parameter conditions for local and global well-posedness.
//!
//! Conditions are evaluated with the strict/non-strict inequalities as
//! stated: strict for (i) and for `p < 1 + n/(n−2s)`, non-strict for the
//! other bounds. Floating-point ties are resolved with a relative tolerance
//! of `1e−12`; [`check_lwp_exact`] re-evaluates everything in exact rational
//! arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{LabError, Result};

const TIE_TOLERANCE: f64 = 1e-12;

/// Outcome of one condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    fn from(b: bool) -> Self {
        if b {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(self) -> bool {
        self != Status::Fail
    }
}

/// One evaluated inequality with its slack (positive means satisfied with
/// room to spare).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub status: Status,
    pub inequality: String,
    pub margin: f64,
}

fn strict(lhs: f64, rhs: f64) -> (bool, f64) {
    // lhs < rhs
    let margin = rhs - lhs;
    let tol = TIE_TOLERANCE * 1f64.max(lhs.abs()).max(rhs.abs());
    (margin > tol, margin)
}

fn non_strict(lhs: f64, rhs: f64) -> (bool, f64) {
    // lhs ≤ rhs
    let margin = rhs - lhs;
    let tol = TIE_TOLERANCE * 1f64.max(lhs.abs()).max(rhs.abs());
    (margin >= -tol, margin)
}

/// Full verdict for a parameter tuple `(n, r, s, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub p: u32,
    pub condition_i: ConditionCheck,
    pub condition_ii: ConditionCheck,
    pub condition_iii: ConditionCheck,
    pub integer_p: ConditionCheck,
    pub gwp_threshold: ConditionCheck,
    pub beta: f64,
    pub fujita: f64,
    /// `true` when `2s ≥ n`.
    pub high_regularity: bool,
    /// Which alternative of (iii) held: `"first"`, `"second"` or `None`.
    pub iii_branch: Option<&'static str>,
    /// Set when `2s < n` and exactly one of the two upper bounds in (ii)
    /// holds.
    pub ii_bounds_disagree: bool,
}

impl AdmissibilityVerdict {
    pub fn lwp_passes(&self) -> bool {
        [&self.condition_i, &self.condition_ii, &self.condition_iii, &self.integer_p]
            .iter()
            .all(|c| c.status.passed())
    }

    pub fn gwp_passes(&self) -> bool {
        self.lwp_passes() && self.gwp_threshold.status.passed()
    }

    /// Names of the failed local conditions.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, c) in [
            ("(i)", &self.condition_i),
            ("(ii)", &self.condition_ii),
            ("(iii)", &self.condition_iii),
            ("integer p", &self.integer_p),
        ] {
            if !c.status.passed() {
                out.push(name);
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let f = self.failures();
        if f.is_empty() {
            format!("n={}, r={}, s={}, p={} satisfies (i)-(iii)", self.n, self.r, self.s, self.p)
        } else {
            format!(
                "n={}, r={}, s={}, p={} violates {}",
                self.n,
                self.r,
                self.s,
                self.p,
                f.join(", ")
            )
        }
    }
}

fn validate(n: usize, r: f64, p: f64) -> Result<u32> {
    if n == 0 {
        return Err(LabError::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(r > 2.0 && r.is_finite()) {
        return Err(LabError::InvalidParameter(format!("r must lie in (2, ∞) (got {r})")));
    }
    if !(p.is_finite() && p.fract() == 0.0 && p >= 2.0) {
        return Err(LabError::InvalidParameter(format!(
            "nonlinearity power must be an integer ≥ 2 (got {p})"
        )));
    }
    Ok(p as u32)
}

/// Evaluates (i)-(iii) and the integer constraint.
pub fn check_lwp(n: usize, r: f64, s: f64, p: f64) -> Result<AdmissibilityVerdict> {
    let pi = validate(n, r, p)?;
    if !s.is_finite() {
        return Err(LabError::InvalidParameter(format!("s must be finite (got {s})")));
    }
    let nf = n as f64;
    let beta = (nf - 1.0) * (0.5 - 1.0 / r);
    let high = 2.0 * s >= nf;

    let (ok, m) = strict(nf * (0.5 - 1.0 / r), s);
    let condition_i = ConditionCheck {
        status: Status::from(ok),
        inequality: format!("s = {s} > n(1/2 − 1/r) = {}", nf * (0.5 - 1.0 / r)),
        margin: m,
    };

    // (ii)
    let second = if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 + r / (2.0 * s) - 1.0 / s
    };
    let lower = (r / 2.0).min(second);
    let (lower_ok, lower_margin) = non_strict(lower, p);
    let (condition_ii, disagree) = if high {
        (
            ConditionCheck {
                status: Status::from(lower_ok),
                inequality: format!("min{{r/2, 1 + r/(2s) − 1/s}} = {lower} ≤ p = {p} < ∞ (2s ≥ n)"),
                margin: lower_margin,
            },
            false,
        )
    } else {
        let a_bound = 1.0 + nf / (nf - 2.0 * s);
        let b_bound = 1.0 + 2.0 / (nf - 2.0 * s);
        let (a_ok, a_margin) = strict(p, a_bound);
        let (b_ok, b_margin) = non_strict(p, b_bound);
        (
            ConditionCheck {
                status: Status::from(lower_ok && a_ok && b_ok),
                inequality: format!(
                    "p = {p} < 1 + n/(n−2s) = {a_bound}, and {lower} ≤ p ≤ 1 + 2/(n−2s) = {b_bound} (2s < n)"
                ),
                margin: lower_margin.min(a_margin).min(b_margin),
            },
            a_ok != b_ok,
        )
    };

    // (iii)
    let first_bound = (2.0 * nf - 1.0) * (0.5 - 1.0 / r);
    let (first_ok, first_margin) = non_strict(first_bound, s);
    let (beta_ok, beta_margin) = non_strict(beta, 1.0);
    let (upper_ok, upper_margin, upper_text) = if high {
        (true, f64::INFINITY, "p < ∞ (2s ≥ n)".to_string())
    } else {
        let bound = 2.0 * nf / (nf - 2.0 * s) * (1.0 / r + (1.0 - beta) / nf);
        let (ok, m) = non_strict(p, bound);
        (ok, m, format!("p = {p} ≤ (2n/(n−2s))(1/r + (1−β)/n) = {bound}"))
    };
    let second_ok = beta_ok && upper_ok;
    let second_margin = beta_margin.min(upper_margin);
    let iii_branch = if first_ok {
        Some("first")
    } else if second_ok {
        Some("second")
    } else {
        None
    };
    let condition_iii = ConditionCheck {
        status: Status::from(first_ok || second_ok),
        inequality: format!(
            "(2n−1)(1/2 − 1/r) = {first_bound} ≤ s = {s}, or β = {beta} ≤ 1 and {upper_text}"
        ),
        margin: first_margin.max(second_margin),
    };

    let fujita = 1.0 + 2.0 * r / nf;
    let (g_ok, g_margin) = non_strict(fujita, p);
    Ok(AdmissibilityVerdict {
        n,
        r,
        s,
        p: pi,
        condition_i,
        condition_ii,
        condition_iii,
        integer_p: ConditionCheck {
            status: Status::Pass,
            inequality: format!("p = {p} is an integer ≥ 2"),
            margin: 0.0,
        },
        gwp_threshold: ConditionCheck {
            status: Status::from(g_ok),
            inequality: format!("p = {p} ≥ 1 + 2r/n = {fujita}"),
            margin: g_margin,
        },
        beta,
        fujita,
        high_regularity: high,
        iii_branch,
        ii_bounds_disagree: disagree,
    })
}

/// Same as [`check_lwp`]; the global threshold `p ≥ 1 + 2r/n` is part of
/// every verdict, [`AdmissibilityVerdict::gwp_passes`] combines both.
pub fn check_gwp(n: usize, r: f64, s: f64, p: f64) -> Result<AdmissibilityVerdict> {
    check_lwp(n, r, s, p)
}

/// Just the global threshold `p ≥ 1 + 2r/n`.
pub fn gwp_threshold(n: usize, r: f64, p: f64) -> Result<ConditionCheck> {
    validate(n, r, p)?;
    let fujita = 1.0 + 2.0 * r / n as f64;
    let (ok, m) = non_strict(fujita, p);
    Ok(ConditionCheck {
        status: Status::from(ok),
        inequality: format!("p = {p} ≥ 1 + 2r/n = {fujita}"),
        margin: m,
    })
}

/// Result of a scan for the smallest admissible `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub s: Option<f64>,
    /// Condition that failed most often over the scan when nothing passed.
    pub binding: Option<String>,
}

/// Step of the `s` scan.
pub const SUGGEST_STEP: f64 = 0.01;
/// Largest `s` scanned.
pub const SUGGEST_MAX: f64 = 20.0;

/// Smallest `s` on the grid `{0.01, 0.02, …, 20}` for which (i)-(iii) hold.
pub fn suggest_s(n: usize, r: f64, p: f64) -> Result<Suggestion> {
    validate(n, r, p)?;
    let steps = (SUGGEST_MAX / SUGGEST_STEP).round() as usize;
    let mut counts = [0usize; 3];
    for k in 1..=steps {
        let s = k as f64 / (1.0 / SUGGEST_STEP);
        let v = check_lwp(n, r, s, p)?;
        if v.lwp_passes() {
            return Ok(Suggestion {
                s: Some(s),
                binding: None,
            });
        }
        for (i, c) in [&v.condition_i, &v.condition_ii, &v.condition_iii].iter().enumerate() {
            if !c.status.passed() {
                counts[i] += 1;
            }
        }
    }
    let names = ["(i)", "(ii)", "(iii)"];
    let worst = (0..3).max_by_key(|&i| counts[i]).unwrap();
    Ok(Suggestion {
        s: None,
        binding: Some(names[worst].to_string()),
    })
}

/// Pairs `s < s'` on the grid where `s` passes but `s'` fails although `s'`
/// meets the upper-bound branches of (ii) and (iii).
pub fn monotonicity_violations(n: usize, r: f64, p: f64, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let verdicts = s_grid
        .iter()
        .map(|&s| check_lwp(n, r, s, p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, a) in verdicts.iter().enumerate() {
        if !a.lwp_passes() {
            continue;
        }
        for b in &verdicts[i + 1..] {
            if b.s > a.s && !b.lwp_passes() && upper_branches_hold(b) {
                out.push((a.s, b.s));
            }
        }
    }
    Ok(out)
}

fn upper_branches_hold(v: &AdmissibilityVerdict) -> bool {
    if v.high_regularity {
        return true;
    }
    let nf = v.n as f64;
    let p = v.p as f64;
    strict(p, 1.0 + nf / (nf - 2.0 * v.s)).0
        && non_strict(p, 1.0 + 2.0 / (nf - 2.0 * v.s)).0
        && non_strict(p, 2.0 * nf / (nf - 2.0 * v.s) * (1.0 / v.r + (1.0 - v.beta) / nf)).0
}

/// Exact verdicts on rational inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactVerdict {
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii: bool,
    pub gwp_threshold: bool,
}

impl ExactVerdict {
    pub fn lwp_passes(&self) -> bool {
        self.condition_i && self.condition_ii && self.condition_iii
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact evaluation of (i)-(iii) and the global threshold for rational `r`,
/// `s` and integer `n`, `p`.
pub fn check_lwp_exact(n: i64, r: &BigRational, s: &BigRational, p: i64) -> Result<ExactVerdict> {
    if n < 1 || p < 2 || *r <= rat(2) {
        return Err(LabError::InvalidParameter(format!(
            "exact check needs n ≥ 1, p ≥ 2, r > 2 (got n={n}, p={p}, r={r})"
        )));
    }
    let one = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let nr = rat(n);
    let pr = rat(p);
    let inv_r = r.recip();
    let beta = (&nr - &one) * (&half - &inv_r);
    let two_s = s * rat(2);
    let high = two_s >= nr;

    let condition_i = *s > &nr * (&half - &inv_r);

    let lower_r = r / rat(2);
    let lower = if s.is_zero() {
        lower_r
    } else {
        let second = &one + r / &two_s - s.recip();
        if second < lower_r {
            second
        } else {
            lower_r
        }
    };
    let condition_ii = if high {
        lower <= pr
    } else {
        let gap = &nr - &two_s;
        let a = pr < &one + &nr / &gap;
        let b = pr <= &one + rat(2) / &gap;
        lower <= pr && a && b
    };

    let first = (rat(2) * &nr - &one) * (&half - &inv_r) <= *s;
    let second = beta <= one
        && (high || {
            let gap = &nr - &two_s;
            pr <= rat(2) * &nr / &gap * (&inv_r + (&one - &beta) / &nr)
        });
    let condition_iii = first || second;

    let gwp_threshold = pr >= &one + rat(2) * r / &nr;
    debug_assert!(!beta.is_negative());
    Ok(ExactVerdict {
        condition_i,
        condition_ii,
        condition_iii,
        gwp_threshold,
    })
}
