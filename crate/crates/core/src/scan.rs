//! Scan schedules: the visit orders that turn a 2-D feature map into a 1-D
//! sequence for the SSM (encoder side) and back (decoder side).
//!
//! A schedule is a permutation of row-major cell indices. `order[t]` is the
//! cell visited at step `t`, `inverse[cell]` is the step at which `cell` is
//! visited.
//!
//! Conventions for the five base methods:
//!
//! * `Sweep`: raster, every row left to right.
//! * `Scan`: boustrophedon, odd rows right to left.
//! * `Zorder`: Morton order with the row bit above the column bit; power-of-two
//!   extents only.
//! * `Zigzag`: anti-diagonals `r + c = d` in ascending `d`; odd diagonals run
//!   from top-right to bottom-left, even ones back up (JPEG order).
//! * `Hilbert`: visit order given by the ranks of the Hilbert matrix; square
//!   power-of-two grids only.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAX_HILBERT_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMethod {
    Sweep,
    Scan,
    Zorder,
    Zigzag,
    Hilbert,
}

impl ScanMethod {
    pub const ALL: [ScanMethod; 5] = [
        ScanMethod::Sweep,
        ScanMethod::Scan,
        ScanMethod::Zorder,
        ScanMethod::Zigzag,
        ScanMethod::Hilbert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanMethod::Sweep => "sweep",
            ScanMethod::Scan => "scan",
            ScanMethod::Zorder => "zorder",
            ScanMethod::Zigzag => "zigzag",
            ScanMethod::Hilbert => "hilbert",
        }
    }

    /// Whether `h x w` is a geometry this method can cover.
    pub fn supports(self, h: usize, w: usize) -> bool {
        match self {
            ScanMethod::Hilbert => h == w && h.is_power_of_two() && h <= 1 << MAX_HILBERT_ORDER,
            ScanMethod::Zorder => h.is_power_of_two() && w.is_power_of_two(),
            _ => h > 0 && w > 0,
        }
    }
}

impl fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScanMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace(['-', '_'], ""))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scan method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDirection {
    Forward,
    Reverse,
    WhForward,
    WhReverse,
    Rot90Forward,
    Rot90Reverse,
    WhRot90Forward,
    WhRot90Reverse,
}

impl ScanDirection {
    pub const ALL: [ScanDirection; 8] = [
        ScanDirection::Forward,
        ScanDirection::Reverse,
        ScanDirection::WhForward,
        ScanDirection::WhReverse,
        ScanDirection::Rot90Forward,
        ScanDirection::Rot90Reverse,
        ScanDirection::WhRot90Forward,
        ScanDirection::WhRot90Reverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanDirection::Forward => "forward",
            ScanDirection::Reverse => "reverse",
            ScanDirection::WhForward => "wh_forward",
            ScanDirection::WhReverse => "wh_reverse",
            ScanDirection::Rot90Forward => "rot90_forward",
            ScanDirection::Rot90Reverse => "rot90_reverse",
            ScanDirection::WhRot90Forward => "wh_rot90_forward",
            ScanDirection::WhRot90Reverse => "wh_rot90_reverse",
        }
    }

    pub fn transposes(self) -> bool {
        matches!(
            self,
            ScanDirection::WhForward
                | ScanDirection::WhReverse
                | ScanDirection::WhRot90Forward
                | ScanDirection::WhRot90Reverse
        )
    }

    pub fn rotates(self) -> bool {
        matches!(
            self,
            ScanDirection::Rot90Forward
                | ScanDirection::Rot90Reverse
                | ScanDirection::WhRot90Forward
                | ScanDirection::WhRot90Reverse
        )
    }

    pub fn reverses(self) -> bool {
        matches!(
            self,
            ScanDirection::Reverse
                | ScanDirection::WhReverse
                | ScanDirection::Rot90Reverse
                | ScanDirection::WhRot90Reverse
        )
    }
}

impl fmt::Display for ScanDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        ScanDirection::ALL
            .into_iter()
            .find(|d| d.name() == key || d.name().replace('_', "") == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scan direction {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanSchedule {
    height: usize,
    width: usize,
    order: Vec<usize>,
    inverse: Vec<usize>,
}

impl ScanSchedule {
    /// Builds a schedule from a visit order, rejecting anything that is not a
    /// permutation of the grid's cells.
    pub fn from_order(height: usize, width: usize, order: Vec<usize>) -> Result<Self> {
        let n = height * width;
        if n == 0 {
            return Err(Error::ZeroExtent);
        }
        if order.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "order has {} entries for a {height}x{width} grid",
                order.len()
            )));
        }
        let mut inverse = vec![usize::MAX; n];
        for (t, &cell) in order.iter().enumerate() {
            if cell >= n || inverse[cell] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "order is not a permutation (cell {cell} at step {t})"
                )));
            }
            inverse[cell] = t;
        }
        Ok(Self {
            height,
            width,
            order,
            inverse,
        })
    }

    pub fn identity(height: usize, width: usize) -> Result<Self> {
        Self::from_order(height, width, (0..height * width).collect())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// (row, col) visited at each step.
    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.iter().map(|&i| (i / self.width, i % self.width))
    }

    fn from_coords(height: usize, width: usize, coords: impl Iterator<Item = (usize, usize)>) -> Self {
        let order = coords.map(|(r, c)| r * width + c).collect();
        Self::from_order(height, width, order).expect("coordinate map is a bijection")
    }
}

/// Ranks of the order-`n` Hilbert matrix on a `2^n x 2^n` grid, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertGrid {
    order: u32,
    side: usize,
    ranks: Vec<u32>,
}

impl HilbertGrid {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn rank(&self, r: usize, c: usize) -> u32 {
        self.ranks[r * self.side + c]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.ranks.chunks(self.side).map(<[u32]>::to_vec).collect()
    }
}

#[derive(Clone)]
struct SquareMat {
    side: usize,
    v: Vec<u32>,
}

impl SquareMat {
    fn at(&self, r: usize, c: usize) -> u32 {
        self.v[r * self.side + c]
    }

    fn map(&self, f: impl Fn(usize, usize) -> u32) -> SquareMat {
        let n = self.side;
        SquareMat {
            side: n,
            v: (0..n * n).map(|i| f(i / n, i % n)).collect(),
        }
    }

    fn transpose(&self) -> SquareMat {
        self.map(|r, c| self.at(c, r))
    }

    fn flip_lr(&self) -> SquareMat {
        self.map(|r, c| self.at(r, self.side - 1 - c))
    }

    fn flip_ud(&self) -> SquareMat {
        self.map(|r, c| self.at(self.side - 1 - r, c))
    }
}

/// Builds the order-`n` Hilbert matrix by the parity-split block recursion
/// starting from `H_1 = [[1, 2], [4, 3]]`:
///
/// ```text
/// n even: [ H            4^n E + H^T                ]
///         [ (4^{n+1}+1)E - H^ud   (3*4^n+1)E - (H^lr)^T ]
/// n odd:  [ H            (4^{n+1}+1)E - H^lr        ]
///         [ 4^n E + H^T  (3*4^n+1)E - (H^T)^lr      ]
/// ```
pub fn hilbert_matrix(n: u32) -> Result<HilbertGrid> {
    if !(1..=MAX_HILBERT_ORDER).contains(&n) {
        return Err(Error::HilbertOrder(n));
    }
    let mut h = SquareMat {
        side: 2,
        v: vec![1, 2, 4, 3],
    };
    for k in 1..n {
        let q = 4u32.pow(k);
        let ht = h.transpose();
        let (tr, bl, br) = if k % 2 == 0 {
            let lr_t = h.flip_lr().transpose();
            let ud = h.flip_ud();
            (
                ht.map(|r, c| q + ht.at(r, c)),
                ud.map(|r, c| (4 * q + 1) - ud.at(r, c)),
                lr_t.map(|r, c| (3 * q + 1) - lr_t.at(r, c)),
            )
        } else {
            let lr = h.flip_lr();
            let t_lr = ht.flip_lr();
            (
                lr.map(|r, c| (4 * q + 1) - lr.at(r, c)),
                ht.map(|r, c| q + ht.at(r, c)),
                t_lr.map(|r, c| (3 * q + 1) - t_lr.at(r, c)),
            )
        };
        let s = h.side;
        let next = SquareMat {
            side: 2 * s,
            v: (0..4 * s * s)
                .map(|i| {
                    let (r, c) = (i / (2 * s), i % (2 * s));
                    match (r < s, c < s) {
                        (true, true) => h.at(r, c),
                        (true, false) => tr.at(r, c - s),
                        (false, true) => bl.at(r - s, c),
                        (false, false) => br.at(r - s, c - s),
                    }
                })
                .collect(),
        };
        h = next;
    }
    Ok(HilbertGrid {
        order: n,
        side: h.side,
        ranks: h.v,
    })
}

pub fn base_schedule(method: ScanMethod, h: usize, w: usize) -> Result<ScanSchedule> {
    if h == 0 || w == 0 {
        return Err(Error::ZeroExtent);
    }
    if !method.supports(h, w) {
        return Err(Error::UnsupportedGeometry(match method {
            ScanMethod::Hilbert => format!(
                "Hilbert requires square power-of-two grid up to {0}x{0}, got {h}x{w}",
                1 << MAX_HILBERT_ORDER
            ),
            _ => format!("Z-order requires power-of-two extents, got {h}x{w}"),
        }));
    }
    let order = match method {
        ScanMethod::Sweep => (0..h * w).collect(),
        ScanMethod::Scan => (0..h)
            .flat_map(|r| {
                let row = r * w;
                (0..w).map(move |c| if r % 2 == 0 { row + c } else { row + w - 1 - c })
            })
            .collect(),
        ScanMethod::Zigzag => {
            let mut order = Vec::with_capacity(h * w);
            for d in 0..h + w - 1 {
                let r_lo = d.saturating_sub(w - 1);
                let r_hi = d.min(h - 1);
                if d % 2 == 1 {
                    order.extend((r_lo..=r_hi).map(|r| r * w + (d - r)));
                } else {
                    order.extend((r_lo..=r_hi).rev().map(|r| r * w + (d - r)));
                }
            }
            order
        }
        ScanMethod::Zorder => {
            let mut cells: Vec<(u64, usize)> = (0..h * w)
                .map(|i| (morton_key(i / w, i % w), i))
                .collect();
            cells.sort_unstable();
            cells.into_iter().map(|(_, i)| i).collect()
        }
        ScanMethod::Hilbert => {
            if h == 1 {
                vec![0]
            } else {
                let grid = hilbert_matrix(h.trailing_zeros())?;
                let mut order = vec![0; h * w];
                for (cell, &rank) in grid.ranks().iter().enumerate() {
                    order[rank as usize - 1] = cell;
                }
                order
            }
        }
    };
    ScanSchedule::from_order(h, w, order)
}

/// Interleaves row and column bits, row bit above column bit.
fn morton_key(r: usize, c: usize) -> u64 {
    let mut key = 0u64;
    for bit in 0..32 {
        key |= (((c >> bit) & 1) as u64) << (2 * bit);
        key |= (((r >> bit) & 1) as u64) << (2 * bit + 1);
    }
    key
}

/// Applies a direction to a schedule: transpose (wh), then clockwise
/// rotation, then reversal. Transposition swaps the grid extents.
pub fn apply_direction(s: &ScanSchedule, d: ScanDirection) -> Result<ScanSchedule> {
    let (mut h, mut w) = (s.height, s.width);
    if d.rotates() && h != w {
        return Err(Error::NonSquareRotation { h, w });
    }
    let mut out = s.clone();
    if d.transposes() {
        out = ScanSchedule::from_coords(w, h, out.coords().map(|(r, c)| (c, r)));
        std::mem::swap(&mut h, &mut w);
    }
    if d.rotates() {
        out = ScanSchedule::from_coords(w, h, out.coords().map(|(r, c)| (c, h - 1 - r)));
    }
    if d.reverses() {
        let mut order = out.order;
        order.reverse();
        out = ScanSchedule::from_order(out.height, out.width, order)?;
    }
    Ok(out)
}

/// The schedule for `method` in direction `d` covering an `h x w` map.
/// Transposing directions start from the base schedule of the `w x h` grid.
pub fn schedule(method: ScanMethod, d: ScanDirection, h: usize, w: usize) -> Result<ScanSchedule> {
    if d.rotates() && h != w {
        return Err(Error::NonSquareRotation { h, w });
    }
    let base = if d.transposes() {
        base_schedule(method, w, h)?
    } else {
        base_schedule(method, h, w)?
    };
    apply_direction(&base, d)
}

/// Swaps the roles of step and cell.
pub fn invert(s: &ScanSchedule) -> ScanSchedule {
    ScanSchedule {
        height: s.height,
        width: s.width,
        order: s.inverse.clone(),
        inverse: s.order.clone(),
    }
}

/// Encoder side: `out[c][k] = t[c][order[k]]`.
pub fn gather_sequence(t: &Tensor, s: &ScanSchedule) -> Result<Tensor> {
    let (c, h, w) = t.dims3()?;
    check_grid(h, w, s)?;
    let l = s.len();
    let mut out = vec![0.0f32; c * l];
    out.par_chunks_mut(l)
        .zip(t.data().par_chunks(l))
        .for_each(|(dst, src)| {
            for (d, &cell) in dst.iter_mut().zip(&s.order) {
                *d = src[cell];
            }
        });
    Tensor::new(vec![c, l], out)
}

/// Decoder side: `out[c][order[k]] = q[c][k]`.
pub fn scatter_sequence(q: &Tensor, s: &ScanSchedule) -> Result<Tensor> {
    let (c, l) = match q.shape() {
        &[c, l] => (c, l),
        other => {
            return Err(Error::ShapeMismatch(format!(
                "expected a C x L sequence, got {other:?}"
            )))
        }
    };
    if l != s.len() {
        return Err(Error::ShapeMismatch(format!(
            "sequence length {l} does not match schedule of {} cells",
            s.len()
        )));
    }
    let mut out = vec![0.0f32; c * l];
    out.par_chunks_mut(l)
        .zip(q.data().par_chunks(l))
        .for_each(|(dst, src)| {
            for (&v, &cell) in src.iter().zip(&s.order) {
                dst[cell] = v;
            }
        });
    Tensor::new(vec![c, s.height, s.width], out)
}

fn check_grid(h: usize, w: usize, s: &ScanSchedule) -> Result<()> {
    if (h, w) != (s.height, s.width) {
        return Err(Error::ShapeMismatch(format!(
            "feature map is {h}x{w} but schedule covers {}x{}",
            s.height, s.width
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every rank once, consecutive ranks 4-adjacent.
    fn hilbert_oracle(g: &HilbertGrid) -> bool {
        let n = g.side();
        let mut pos = vec![None; n * n];
        for r in 0..n {
            for c in 0..n {
                let k = g.rank(r, c) as usize;
                if k == 0 || k > n * n || pos[k - 1].is_some() {
                    return false;
                }
                pos[k - 1] = Some((r, c));
            }
        }
        pos.windows(2).all(|p| {
            let (a, b) = (p[0].unwrap(), p[1].unwrap());
            a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1
        })
    }

    #[test]
    fn hilbert_base_case() {
        assert_eq!(hilbert_matrix(1).unwrap().rows(), vec![vec![1, 2], vec![4, 3]]);
    }

    #[test]
    fn hilbert_order_two() {
        let g = hilbert_matrix(2).unwrap();
        assert_eq!(
            g.rows(),
            vec![
                vec![1, 2, 15, 16],
                vec![4, 3, 14, 13],
                vec![5, 8, 9, 12],
                vec![6, 7, 10, 11]
            ]
        );
        assert!(hilbert_oracle(&g));
    }

    #[test]
    fn hilbert_all_orders_valid() {
        for n in 1..=MAX_HILBERT_ORDER {
            assert!(hilbert_oracle(&hilbert_matrix(n).unwrap()), "order {n}");
        }
    }

    #[test]
    fn hilbert_order_range() {
        assert!(matches!(hilbert_matrix(0), Err(Error::HilbertOrder(0))));
        assert!(matches!(hilbert_matrix(9), Err(Error::HilbertOrder(9))));
    }

    #[test]
    fn base_examples() {
        let order = |m, h, w| base_schedule(m, h, w).unwrap().order().to_vec();
        assert_eq!(order(ScanMethod::Sweep, 2, 3), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(order(ScanMethod::Scan, 2, 3), vec![0, 1, 2, 5, 4, 3]);
        assert_eq!(order(ScanMethod::Hilbert, 2, 2), vec![0, 1, 3, 2]);
        assert_eq!(order(ScanMethod::Zigzag, 2, 2), vec![0, 1, 2, 3]);
        assert_eq!(order(ScanMethod::Zorder, 2, 2), vec![0, 1, 2, 3]);
    }

    #[test]
    fn zigzag_three_by_three_is_jpeg_order() {
        let s = base_schedule(ScanMethod::Zigzag, 3, 3).unwrap();
        let coords: Vec<_> = s.coords().collect();
        assert_eq!(
            coords,
            vec![(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (1, 2), (2, 1), (2, 2)]
        );
    }

    #[test]
    fn zorder_four_by_four() {
        let s = base_schedule(ScanMethod::Zorder, 4, 4).unwrap();
        assert_eq!(&s.order()[..8], &[0, 1, 4, 5, 2, 3, 6, 7]);
    }

    #[test]
    fn geometry_errors() {
        assert!(matches!(
            base_schedule(ScanMethod::Hilbert, 3, 3),
            Err(Error::UnsupportedGeometry(_))
        ));
        assert!(matches!(
            base_schedule(ScanMethod::Hilbert, 4, 8),
            Err(Error::UnsupportedGeometry(_))
        ));
        assert!(matches!(
            base_schedule(ScanMethod::Zorder, 4, 6),
            Err(Error::UnsupportedGeometry(_))
        ));
        assert!(base_schedule(ScanMethod::Zorder, 2, 8).is_ok());
        let s = base_schedule(ScanMethod::Sweep, 2, 3).unwrap();
        assert!(matches!(
            apply_direction(&s, ScanDirection::Rot90Forward),
            Err(Error::NonSquareRotation { h: 2, w: 3 })
        ));
    }

    #[test]
    fn direction_examples() {
        let sweep = base_schedule(ScanMethod::Sweep, 2, 2).unwrap();
        assert_eq!(apply_direction(&sweep, ScanDirection::Forward).unwrap(), sweep);
        assert_eq!(
            apply_direction(&sweep, ScanDirection::Reverse).unwrap().order(),
            &[3, 2, 1, 0]
        );
        assert_eq!(
            apply_direction(&sweep, ScanDirection::WhForward).unwrap().order(),
            &[0, 2, 1, 3]
        );
        // Clockwise: (0,0)->(0,1), (0,1)->(1,1), (1,0)->(0,0), (1,1)->(1,0).
        assert_eq!(
            apply_direction(&sweep, ScanDirection::Rot90Forward).unwrap().order(),
            &[1, 3, 0, 2]
        );
    }

    #[test]
    fn wh_on_rectangular_map() {
        let s = schedule(ScanMethod::Sweep, ScanDirection::WhForward, 2, 3).unwrap();
        assert_eq!((s.height(), s.width()), (2, 3));
        assert_eq!(s.order(), &[0, 3, 1, 4, 2, 5]);
    }

    #[test]
    fn invert_examples() {
        let id = ScanSchedule::identity(2, 2).unwrap();
        assert_eq!(invert(&id), id);
        let h = base_schedule(ScanMethod::Hilbert, 2, 2).unwrap();
        assert_eq!(invert(&h).order(), &[0, 1, 3, 2]);
        let rev = apply_direction(&id, ScanDirection::Reverse).unwrap();
        assert_eq!(invert(&rev).order(), &[3, 2, 1, 0]);
    }

    #[test]
    fn gather_reverse() {
        let t = Tensor::new(vec![1, 1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = schedule(ScanMethod::Sweep, ScanDirection::Reverse, 1, 4).unwrap();
        let q = gather_sequence(&t, &s).unwrap();
        assert_eq!(q.shape(), &[1, 4]);
        assert_eq!(q.data(), &[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(scatter_sequence(&q, &s).unwrap(), t);
    }

    #[test]
    fn gather_identity_is_flatten() {
        let t = Tensor::from_fn(&[2, 2, 3], |i| i as f32).unwrap();
        let s = ScanSchedule::identity(2, 3).unwrap();
        let q = gather_sequence(&t, &s).unwrap();
        assert_eq!(q.shape(), &[2, 6]);
        assert_eq!(q.data(), t.data());
    }

    #[test]
    fn scatter_zeros() {
        let q = Tensor::zeros(&[3, 16]).unwrap();
        let s = base_schedule(ScanMethod::Hilbert, 4, 4).unwrap();
        let t = scatter_sequence(&q, &s).unwrap();
        assert_eq!(t.shape(), &[3, 4, 4]);
        assert!(t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let t = Tensor::zeros(&[1, 2, 2]).unwrap();
        let s = ScanSchedule::identity(2, 3).unwrap();
        assert!(matches!(gather_sequence(&t, &s), Err(Error::ShapeMismatch(_))));
        let q = Tensor::zeros(&[1, 5]).unwrap();
        assert!(matches!(scatter_sequence(&q, &s), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn parse_names() {
        assert_eq!("hilbert".parse::<ScanMethod>().unwrap(), ScanMethod::Hilbert);
        assert_eq!("z-order".parse::<ScanMethod>().unwrap(), ScanMethod::Zorder);
        assert_eq!(
            "wh_rot90_reverse".parse::<ScanDirection>().unwrap(),
            ScanDirection::WhRot90Reverse
        );
        assert_eq!(
            "whforward".parse::<ScanDirection>().unwrap(),
            ScanDirection::WhForward
        );
        assert!("diagonal".parse::<ScanMethod>().is_err());
    }
}
