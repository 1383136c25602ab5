//! Dense matrix of `H_V = H_0 + V` on a grid.

use super::{apply_free_operator, FieldOnGrid, GridError, GridSpec, OperatorKind};
use crate::linalg::{CMat, ONE};
use crate::par;
use crate::potential::PotentialSpec;

/// Largest `M^n N` assembled by default.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Builds `H_0` column by column from unit vectors and adds `V(x_p)` on the
/// diagonal blocks.
pub fn assemble_perturbed(
    kind: OperatorKind,
    m: f64,
    v: Option<&PotentialSpec>,
    grid: &GridSpec,
    limit: usize,
) -> Result<CMat, GridError> {
    let dim = grid.dof();
    if dim > limit {
        return Err(GridError::TooLarge { dim, limit });
    }
    if let Some(v) = v {
        if v.size() != grid.spin() {
            return Err(GridError::SpinMismatch { expected: grid.spin(), got: v.size() });
        }
        if v.n() != grid.n() {
            return Err(GridError::Invalid(format!("potential is {}-dimensional, grid is {}", v.n(), grid.n())));
        }
    }
    let columns: Vec<Result<Vec<_>, GridError>> = par::map_range(dim, |c| {
        let mut e = FieldOnGrid::zeros(grid);
        e.values[c] = ONE;
        Ok(apply_free_operator(kind, m, &e)?.values)
    });
    let mut h = CMat::zeros(dim, dim);
    for (c, col) in columns.into_iter().enumerate() {
        h.set_column(c, &col?);
    }
    if let Some(v) = v {
        let spin = grid.spin();
        for p in 0..grid.points() {
            let vx = v.eval(&grid.coord(p))?;
            for i in 0..spin {
                for j in 0..spin {
                    h[(p * spin + i, p * spin + j)] += vx[(i, j)];
                }
            }
        }
    }
    Ok(h)
}

/// Eigenvalues of the free operator on the grid with multiplicity, sorted.
pub fn free_spectrum(kind: OperatorKind, m: f64, grid: &GridSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.dof());
    let spin = grid.spin();
    for p in 0..grid.points() {
        let k2 = grid.xi_sq(p);
        let e = (m * m + k2).sqrt();
        match kind {
            OperatorKind::Schrodinger => out.extend(std::iter::repeat_n(k2, spin)),
            OperatorKind::KleinGordon => out.extend(std::iter::repeat_n(e, spin)),
            OperatorKind::Dirac => {
                out.extend(std::iter::repeat_n(e, spin / 2));
                out.extend(std::iter::repeat_n(-e, spin / 2));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
