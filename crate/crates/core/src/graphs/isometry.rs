use super::point::MODIFIED_BASE;
use super::{CarpetGraph, PointGraph, PointKind};
use crate::carpet::{pow3, LatticePoint, Word};
use crate::error::{CarpetError, Result};

/// The map `V(𝔾_n) -> W_n` sending the copy of base vertex `k` in cell `v`
/// to the child word `v·k` (symbol 8 for the left midpoint). A midpoint
/// shared by two cells goes to the lexicographically first one.
pub fn rough_isometry_points_to_cells(g: &PointGraph) -> Result<Vec<Word>> {
    if g.kind() != PointKind::Modified {
        return Err(CarpetError::InvalidArgument(
            "the rough isometry is defined on the modified point graph".into(),
        ));
    }
    let n = g.level();
    let half = 2 * pow3(n as u32);
    let mut image: Vec<Option<Word>> = vec![None; g.graph().vertex_count()];
    for v in Word::all(n - 1)? {
        let (gx, gy) = v.grid_position();
        let (x0, y0) = (12 * gx as i64 - half, 12 * gy as i64 - half);
        for (k, &(dx, dy)) in MODIFIED_BASE.iter().enumerate() {
            let p = LatticePoint::new(x0 + dx, y0 + dy, n as u32);
            let idx = g.index_of(&p).expect("base points are vertices") as usize;
            if image[idx].is_none() {
                let symbol = if k == 0 { 8 } else { k as u8 };
                image[idx] = Some(v.push(symbol)?);
            }
        }
    }
    Ok(image.into_iter().map(|w| w.expect("every vertex lies in a cell")).collect())
}
