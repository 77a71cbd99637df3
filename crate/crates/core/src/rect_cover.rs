//! Greedy decomposition of a binary core into maximal axis-aligned rectangles.

use serde::{Deserialize, Serialize};

use crate::grid::BinaryGrid;

/// Default minimum rectangle area in pixels.
pub const DEFAULT_MIN_RECT_AREA: usize = 50;

/// Axis-aligned pixel rectangle; `(x0, y0)` is the inclusive top-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Self {
        Self { x0, y0, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// Exclusive right edge.
    pub fn x1(&self) -> usize {
        self.x0 + self.w
    }

    /// Exclusive bottom edge.
    pub fn y1(&self) -> usize {
        self.y0 + self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1() && y >= self.y0 && y < self.y1()
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 < o.x1() && o.x0 < self.x1() && self.y0 < o.y1() && o.y0 < self.y1()
    }

    /// Number of empty pixel rows/columns separating two rectangles along the
    /// worse axis (Chebyshev gap). Touching or overlapping rectangles give 0.
    pub fn gap(&self, o: &Rect) -> usize {
        let gx = o.x0.saturating_sub(self.x1()).max(self.x0.saturating_sub(o.x1()));
        let gy = o.y0.saturating_sub(self.y1()).max(self.y0.saturating_sub(o.y1()));
        gx.max(gy)
    }

    /// Tie-break key: larger area first, then smaller `y0`, smaller `x0`, larger `w`.
    pub(crate) fn rank_key(&self) -> (std::cmp::Reverse<usize>, usize, usize, std::cmp::Reverse<usize>) {
        use std::cmp::Reverse;
        (Reverse(self.area()), self.y0, self.x0, Reverse(self.w))
    }
}

/// Largest all-true rectangle, `None` for an empty grid.
///
/// Histogram-stack scan: for every row taken as a bottom edge, each column's
/// run height is extended left and right to the nearest strictly shorter
/// column. That enumerates every maximal rectangle, so ties can be resolved
/// by [`Rect::rank_key`] in O(rows * cols).
pub fn largest_rect(grid: &BinaryGrid) -> Option<Rect> {
    let (w, h) = grid.dims();
    if w == 0 || h == 0 {
        return None;
    }
    let mut heights = vec![0usize; w];
    let mut left = vec![0usize; w];
    let mut right = vec![0usize; w];
    let mut stack: Vec<usize> = Vec::with_capacity(w);
    let mut best: Option<Rect> = None;

    for y in 0..h {
        for (x, hx) in heights.iter_mut().enumerate() {
            *hx = if *grid.get(x, y) { *hx + 1 } else { 0 };
        }
        stack.clear();
        for x in 0..w {
            while stack.last().is_some_and(|&s| heights[s] >= heights[x]) {
                stack.pop();
            }
            left[x] = stack.last().map_or(0, |&s| s + 1);
            stack.push(x);
        }
        stack.clear();
        for x in (0..w).rev() {
            while stack.last().is_some_and(|&s| heights[s] >= heights[x]) {
                stack.pop();
            }
            right[x] = stack.last().copied().unwrap_or(w);
            stack.push(x);
        }
        for x in 0..w {
            let hx = heights[x];
            if hx == 0 {
                continue;
            }
            let cand = Rect::new(left[x], y + 1 - hx, right[x] - left[x], hx);
            if best.is_none_or(|b| cand.rank_key() < b.rank_key()) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Repeatedly extracts [`largest_rect`] from the residual grid until the best
/// remaining rectangle is smaller than `min_area`. Output order is extraction
/// order, so areas are non-increasing and rectangles are pairwise disjoint.
pub fn greedy_cover(grid: &BinaryGrid, min_area: usize) -> Vec<Rect> {
    assert!(min_area >= 1, "min_area must be at least 1");
    let mut residual = grid.clone();
    let mut out = Vec::new();
    while let Some(r) = largest_rect(&residual) {
        if r.area() < min_area {
            break;
        }
        for y in r.y0..r.y1() {
            for x in r.x0..r.x1() {
                residual.set(x, y, false);
            }
        }
        out.push(r);
    }
    out
}
