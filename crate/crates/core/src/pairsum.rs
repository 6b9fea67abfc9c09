//! Tiled pairwise reductions with a fixed accumulation order.
//!
//! The index range is cut into blocks of [`TILE`] indices. Each upper
//! triangular tile `(bi, bj)`, `bi <= bj`, is evaluated independently (and in
//! parallel); its partial results are then folded into the output in tile
//! order. Every sum is therefore formed in the same order regardless of how
//! many worker threads took part, so reruns are bit-identical.

use rayon::prelude::*;

use crate::error::Result;

pub(crate) const TILE: usize = 64;

fn tiles(n: usize) -> Vec<(usize, usize)> {
    let nb = n.div_ceil(TILE);
    (0..nb)
        .flat_map(|bi| (bi..nb).map(move |bj| (bi, bj)))
        .collect()
}

fn block(b: usize, n: usize) -> std::ops::Range<usize> {
    b * TILE..((b + 1) * TILE).min(n)
}

struct ScatterTile<const K: usize> {
    rows_i: Vec<[f64; K]>,
    rows_j: Vec<[f64; K]>,
}

/// Per-index accumulation of a symmetric interaction.
///
/// `pair(i, j)` is called once for every `i < j` and returns the
/// contributions to `i` and to `j`; `diag(i)` is called once per index.
pub(crate) fn scatter_pairs<const K: usize, P, D>(
    n: usize,
    pair: P,
    diag: D,
) -> Result<Vec<[f64; K]>>
where
    P: Fn(usize, usize) -> Result<([f64; K], [f64; K])> + Sync,
    D: Fn(usize) -> Result<[f64; K]> + Sync,
{
    let tiles = tiles(n);
    let parts = tiles
        .par_iter()
        .map(|&(bi, bj)| -> Result<ScatterTile<K>> {
            let ri = block(bi, n);
            let rj = block(bj, n);
            let mut rows_i = vec![[0.0; K]; ri.len()];
            let mut rows_j = vec![[0.0; K]; rj.len()];
            for i in ri.clone() {
                let li = i - ri.start;
                if bi == bj {
                    let d = diag(i)?;
                    for k in 0..K {
                        rows_i[li][k] += d[k];
                    }
                }
                let j0 = if bi == bj { i + 1 } else { rj.start };
                for j in j0..rj.end {
                    let (ci, cj) = pair(i, j)?;
                    let lj = j - rj.start;
                    for k in 0..K {
                        rows_i[li][k] += ci[k];
                        rows_j[lj][k] += cj[k];
                    }
                }
            }
            Ok(ScatterTile { rows_i, rows_j })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = vec![[0.0; K]; n];
    for (part, &(bi, bj)) in parts.iter().zip(&tiles) {
        for (o, v) in out[block(bi, n)].iter_mut().zip(&part.rows_i) {
            for k in 0..K {
                o[k] += v[k];
            }
        }
        for (o, v) in out[block(bj, n)].iter_mut().zip(&part.rows_j) {
            for k in 0..K {
                o[k] += v[k];
            }
        }
    }
    Ok(out)
}

/// Totals of a pairwise quantity: `(Σ_{i<j} pair(i, j), Σ_i diag(i))`.
pub(crate) fn sum_pairs<const K: usize, P, D>(
    n: usize,
    pair: P,
    diag: D,
) -> Result<([f64; K], [f64; K])>
where
    P: Fn(usize, usize) -> Result<[f64; K]> + Sync,
    D: Fn(usize) -> Result<[f64; K]> + Sync,
{
    let tiles = tiles(n);
    let parts = tiles
        .par_iter()
        .map(|&(bi, bj)| -> Result<([f64; K], [f64; K])> {
            let ri = block(bi, n);
            let rj = block(bj, n);
            let mut off = [0.0; K];
            let mut on = [0.0; K];
            for i in ri {
                if bi == bj {
                    let d = diag(i)?;
                    for k in 0..K {
                        on[k] += d[k];
                    }
                }
                let j0 = if bi == bj { i + 1 } else { rj.start };
                for j in j0..rj.end {
                    let c = pair(i, j)?;
                    for k in 0..K {
                        off[k] += c[k];
                    }
                }
            }
            Ok((off, on))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut off = [0.0; K];
    let mut on = [0.0; K];
    for (o, d) in parts {
        for k in 0..K {
            off[k] += o[k];
            on[k] += d[k];
        }
    }
    Ok((off, on))
}

/// Row-wise map over targets; each row is reduced sequentially.
pub(crate) fn map_rows<T, F>(n: usize, row: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    (0..n).into_par_iter().map(&row).collect()
}
