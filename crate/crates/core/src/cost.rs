//! Closed-form traversal costs for the two query paths, their ratio, and
//! parameter sweeps over the cell count.
//!
//! With `c` cells, `D` dimensions, `d` members per dimension and `a`
//! attributes per member:
//!
//! ```text
//! e_noindex = (c * D) * (D + d * a)
//! e_index   =  c * (D + a)
//! ```
//!
//! Both are exact integer counts of the element visits the instrumented
//! executor performs (see the executor's counting convention), evaluated
//! in 128-bit arithmetic with overflow detection.

use alloc::vec::Vec;
use core::fmt;

/// Uniform cost parameters: every dimension has `members_per_dim` members
/// with `attrs_per_dim` attributes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostParams {
    pub cells: u64,
    pub dimensions: u64,
    pub members_per_dim: u64,
    pub attrs_per_dim: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostError {
    Overflow,
    DivisionByZero,
    EmptySweep,
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::Overflow => write!(f, "cost exceeds 128-bit integer range"),
            CostError::DivisionByZero => write!(f, "gain undefined: index cost is zero"),
            CostError::EmptySweep => write!(f, "sweep needs at least one cell count"),
        }
    }
}

impl core::error::Error for CostError {}

fn mul(a: u128, b: u128) -> Result<u128, CostError> {
    a.checked_mul(b).ok_or(CostError::Overflow)
}

fn add(a: u128, b: u128) -> Result<u128, CostError> {
    a.checked_add(b).ok_or(CostError::Overflow)
}

/// Join-path cost: `(cells * dims) * (dims + members * attrs)`.
pub fn e_noindex(p: &CostParams) -> Result<u128, CostError> {
    let fact_side = mul(p.cells as u128, p.dimensions as u128)?;
    let dim_side = add(
        p.dimensions as u128,
        mul(p.members_per_dim as u128, p.attrs_per_dim as u128)?,
    )?;
    mul(fact_side, dim_side)
}

/// Index-path cost: `cells * (dims + attrs)`.
pub fn e_index(p: &CostParams) -> Result<u128, CostError> {
    mul(
        p.cells as u128,
        add(p.dimensions as u128, p.attrs_per_dim as u128)?,
    )
}

/// Join-path cost with per-dimension member and attribute counts:
/// `cells * (D^2 + sum_i members_i * attrs_i)` where `D = members.len()`.
///
/// Reduces to [`e_noindex`] when all dimensions share the same counts, and
/// matches the instrumented baseline on arbitrary warehouses. `attrs` must
/// be at least as long as `members`; extra entries are ignored.
pub fn e_noindex_per_dim(cells: u64, members: &[u64], attrs: &[u64]) -> Result<u128, CostError> {
    let dims = members.len() as u128;
    let mut dim_side = mul(dims, dims)?;
    for (d, a) in members.iter().zip(attrs) {
        dim_side = add(dim_side, mul(*d as u128, *a as u128)?)?;
    }
    mul(cells as u128, dim_side)
}

/// `e_noindex / e_index` as a double. Errors when the index cost is zero
/// (no cells, or no dimensions and no attributes).
pub fn gain(p: &CostParams) -> Result<f64, CostError> {
    let num = e_noindex(p)?;
    let den = e_index(p)?;
    if den == 0 {
        return Err(CostError::DivisionByZero);
    }
    Ok(num as f64 / den as f64)
}

/// One sweep entry; `gain` is reported as 0 when the index cost is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cells: u64,
    pub e_noindex: u128,
    pub e_index: u128,
    pub gain: f64,
}

/// Evaluates both formulas for each cell count with the other parameters
/// held fixed. Suitable for log-scale plotting of cost versus cells.
pub fn sweep(
    cell_counts: &[u64],
    dimensions: u64,
    members_per_dim: u64,
    attrs_per_dim: u64,
) -> Result<Vec<SweepRow>, CostError> {
    if cell_counts.is_empty() {
        return Err(CostError::EmptySweep);
    }
    let mut rows = Vec::with_capacity(cell_counts.len());
    for &cells in cell_counts {
        let p = CostParams {
            cells,
            dimensions,
            members_per_dim,
            attrs_per_dim,
        };
        let e_no = e_noindex(&p)?;
        let e_ix = e_index(&p)?;
        rows.push(SweepRow {
            cells,
            e_noindex: e_no,
            e_index: e_ix,
            gain: if e_ix == 0 { 0.0 } else { e_no as f64 / e_ix as f64 },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(cells: u64, dims: u64, d: u64, a: u64) -> CostParams {
        CostParams {
            cells,
            dimensions: dims,
            members_per_dim: d,
            attrs_per_dim: a,
        }
    }

    #[test]
    fn noindex_examples() {
        assert_eq!(e_noindex(&p(1, 1, 1, 1)).unwrap(), 2);
        assert_eq!(e_noindex(&p(10, 5, 100, 4)).unwrap(), 20_250);
        assert_eq!(e_noindex(&p(0, 5, 100, 4)).unwrap(), 0);
    }

    #[test]
    fn index_examples() {
        assert_eq!(e_index(&p(1, 1, 0, 1)).unwrap(), 2);
        assert_eq!(e_index(&p(10, 5, 0, 4)).unwrap(), 90);
        // Full-scale cell count: 16_260_336 * (5 + 4).
        assert_eq!(e_index(&p(16_260_336, 5, 0, 4)).unwrap(), 146_343_024);
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain(&p(10, 5, 100, 4)).unwrap(), 225.0);
        for a in [0u64, 1, 3, 9] {
            assert_eq!(gain(&p(7, 1, 1, a)).unwrap(), 1.0);
        }
        assert_eq!(gain(&p(0, 5, 100, 4)).unwrap_err(), CostError::DivisionByZero);
    }

    #[test]
    fn per_dim_matches_uniform_and_generalizes() {
        assert_eq!(
            e_noindex_per_dim(10, &[100; 5], &[4; 5]).unwrap(),
            e_noindex(&p(10, 5, 100, 4)).unwrap()
        );
        // 3 cells, dims [2 members x 2 attrs, 1 member x 1 attr]:
        // 3 * (4 + (4 + 1)) = 27.
        assert_eq!(e_noindex_per_dim(3, &[2, 1], &[2, 1]).unwrap(), 27);
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep(&[0], 5, 100, 4).unwrap();
        assert_eq!(
            rows,
            vec![SweepRow {
                cells: 0,
                e_noindex: 0,
                e_index: 0,
                gain: 0.0
            }]
        );

        let rows = sweep(&[10, 100], 5, 100, 4).unwrap();
        assert_eq!(rows[0].gain, 225.0);
        assert_eq!(rows[1].gain, 225.0);

        assert_eq!(sweep(&[], 5, 100, 4).unwrap_err(), CostError::EmptySweep);
    }

    #[test]
    fn both_formulas_are_linear_in_cells() {
        let base = p(137, 5, 100, 4);
        for k in [2u64, 10, 1000] {
            let scaledup = p(137 * k, 5, 100, 4);
            assert_eq!(
                e_noindex(&scaledup).unwrap(),
                k as u128 * e_noindex(&base).unwrap()
            );
            assert_eq!(e_index(&scaledup).unwrap(), k as u128 * e_index(&base).unwrap());
        }
    }

    #[test]
    fn overflow_is_detected() {
        assert_eq!(
            e_noindex(&p(u64::MAX, u64::MAX, u64::MAX, u64::MAX)).unwrap_err(),
            CostError::Overflow
        );
        // Table 1 scale must not overflow.
        assert!(e_noindex(&p(16_260_336, 5, 12_393, 4)).is_ok());
    }
}
