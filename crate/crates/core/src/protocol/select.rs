use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which decoded frames go on to stage 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionPolicy {
    /// The `ceil(K * afr)` frames with the highest `q`.
    ByAfr { afr: f64 },
    /// Every frame with `q >= q_c`.
    ByCutoff { q_c: f64 },
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionPolicy::ByAfr { afr } if !(afr > 0.0 && afr <= 1.0) => {
                Err(Error::param("afr", format!("{afr} is not in (0, 1]")))
            }
            SelectionPolicy::ByCutoff { q_c } if q_c.is_nan() => Err(Error::param("q_c", "is NaN")),
            _ => Ok(()),
        }
    }
}

/// `ceil(total * afr)`, ignoring representation error in `afr`
/// (`10^4 * 0.01` selects 100 frames, not 101).
pub fn accepted_count(total: usize, afr: f64) -> usize {
    let exact = total as f64 * afr;
    let nearest = exact.round();
    let n = if (exact - nearest).abs() <= 1e-9 * exact.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    (n as usize).min(total)
}

/// Positions `0..q.len()` chosen by `policy`, ascending. In `by_afr`
/// mode ties in `q` go to the lower position. `eligible`, when given,
/// removes frames from the ranking without changing `K`.
pub fn select_indices(q: &[f64], eligible: Option<&[bool]>, policy: &SelectionPolicy) -> Result<Vec<usize>> {
    policy.validate()?;
    if q.iter().any(|v| v.is_nan()) {
        return Err(Error::param("q", "NaN frame metric"));
    }
    if let Some(e) = eligible {
        crate::error::check_len("eligibility flags", q.len(), e.len())?;
    }
    let ok = |i: usize| eligible.is_none_or(|e| e[i]);
    let mut idx: Vec<usize> = match *policy {
        SelectionPolicy::ByAfr { afr } => {
            let mut order: Vec<usize> = (0..q.len()).filter(|&i| ok(i)).collect();
            order.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
            order.truncate(accepted_count(q.len(), afr));
            order
        }
        SelectionPolicy::ByCutoff { q_c } => (0..q.len()).filter(|&i| ok(i) && q[i] >= q_c).collect(),
    };
    idx.sort_unstable();
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn highest_q_wins() {
        let idx = select_indices(&[5.0, 1.0, 9.0], None, &SelectionPolicy::ByAfr { afr: 1.0 / 3.0 }).unwrap();
        assert_eq!(idx, vec![2]);
    }

    #[test]
    fn afr_one_selects_all() {
        let idx = select_indices(&[3.0, 1.0, 2.0], None, &SelectionPolicy::ByAfr { afr: 1.0 }).unwrap();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let idx = select_indices(&[1.0, 2.0, 2.0, 2.0], None, &SelectionPolicy::ByAfr { afr: 0.5 }).unwrap();
        assert_eq!(idx, vec![1, 2]);
    }

    #[test]
    fn cutoff_above_max_is_empty() {
        let q = [1.0, 4.0, 2.0];
        let idx = select_indices(&q, None, &SelectionPolicy::ByCutoff { q_c: 5.0 }).unwrap();
        assert!(idx.is_empty());
        let idx = select_indices(&q, None, &SelectionPolicy::ByCutoff { q_c: 2.0 }).unwrap();
        assert_eq!(idx, vec![1, 2]);
    }

    #[test]
    fn counts_avoid_float_overshoot() {
        assert_eq!(accepted_count(10_000, 0.01), 100);
        assert_eq!(accepted_count(1000, 0.003), 3);
        assert_eq!(accepted_count(7, 0.5), 4);
        assert_eq!(accepted_count(3, 1.0), 3);
    }

    #[test]
    fn rejects_bad_afr_and_nan() {
        assert!(select_indices(&[1.0], None, &SelectionPolicy::ByAfr { afr: 0.0 }).is_err());
        assert!(select_indices(&[1.0], None, &SelectionPolicy::ByAfr { afr: 1.5 }).is_err());
        assert!(select_indices(&[f64::NAN], None, &SelectionPolicy::ByAfr { afr: 1.0 }).is_err());
    }

    #[test]
    fn prefilter_keeps_k() {
        let q = [9.0, 8.0, 7.0, 6.0];
        let ok = [false, true, true, true];
        let idx = select_indices(&q, Some(&ok), &SelectionPolicy::ByAfr { afr: 0.5 }).unwrap();
        assert_eq!(idx, vec![1, 2]);
    }
}
