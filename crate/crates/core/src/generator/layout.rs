//! Corner-coordinate layout vectors, their rasterization into 4-channel
//! masks, and a procedural synthesizer for well-formed reference plans.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::ChannelCodeTable;
use crate::generator::condition::Condition;
use crate::grid::Grid;
use crate::mask_io::LayoutMask;

pub const DEFAULT_CANVAS: usize = 64;
pub const DOOR_LEN: usize = 3;

const WALL_CODE: u8 = 127;
const DOOR_CODE: u8 = 64;
const EXTERNAL_CODE: u8 = 13;
const INTERIOR_CODE: u8 = 255;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("layout has non-finite coordinates")]
    NonFinite,
    #[error("room slot {slot} has zero area")]
    DegeneratePolygon { slot: usize },
    #[error("no room has positive area")]
    NoRooms,
}

/// Flattened corner coordinates in `[-1, 1]`: two `(x, y)` corners per room
/// slot, so `coords[4j..4j+4] = [xa, ya, xb, yb]` for slot `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutVector {
    pub coords: Vec<f64>,
}

impl LayoutVector {
    pub fn zeros(max_rooms: usize) -> Self {
        Self {
            coords: vec![0.0; 4 * max_rooms],
        }
    }

    pub fn max_rooms(&self) -> usize {
        self.coords.len() / 4
    }

    /// Axis-aligned box `[x0, y0, x1, y1]` spanned by the slot's two corners.
    pub fn room_box(&self, slot: usize) -> [f64; 4] {
        let c = &self.coords[4 * slot..4 * slot + 4];
        [c[0].min(c[2]), c[1].min(c[3]), c[0].max(c[2]), c[1].max(c[3])]
    }

    pub fn set_room_box(&mut self, slot: usize, b: [f64; 4]) {
        self.coords[4 * slot..4 * slot + 4].copy_from_slice(&b);
    }

    pub fn from_boxes(boxes: &[[f64; 4]], max_rooms: usize) -> Self {
        assert!(boxes.len() <= max_rooms, "more boxes than slots");
        let mut v = Self::zeros(max_rooms);
        for (j, b) in boxes.iter().enumerate() {
            v.set_room_box(j, *b);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub canvas: usize,
    pub door_len: usize,
    /// Fail on a zero-area room instead of skipping it.
    pub strict: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            canvas: DEFAULT_CANVAS,
            door_len: DOOR_LEN,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderFlags {
    /// Some pixel was painted by more than one room.
    pub overlap: bool,
    /// Slots skipped for zero area.
    pub degenerate: Vec<usize>,
    /// Slots fully painted over by later rooms.
    pub vanished: Vec<usize>,
    /// Program adjacencies without a shared wall, so no door was placed.
    pub missing_doors: usize,
}

impl RenderFlags {
    pub fn is_clean(&self) -> bool {
        !self.overlap && self.degenerate.is_empty() && self.vanished.is_empty() && self.missing_doors == 0
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.overlap {
            v.push("render_overlap");
        }
        if !self.degenerate.is_empty() {
            v.push("render_degenerate");
        }
        if !self.vanished.is_empty() {
            v.push("render_vanished");
        }
        if self.missing_doors > 0 {
            v.push("render_missing_door");
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedPlan {
    pub mask: LayoutMask,
    pub flags: RenderFlags,
    /// Instance-id pairs that received a door.
    pub doors: Vec<(u8, u8)>,
}

fn to_px(c: f64, size: usize) -> usize {
    (((c + 1.0) / 2.0 * size as f64).round().max(0.0) as usize).min(size)
}

/// Rasterizes each active slot as a box clipped to the condition's boundary.
/// Later slots overwrite earlier ones. Room pixels touching another room or
/// the outside become wall; each program adjacency with a shared wall gets a
/// `door_len`-pixel door through both wall layers at the wall's middle.
pub fn render_layout(x: &LayoutVector, cond: &Condition, cfg: &RenderConfig) -> Result<RenderedPlan, RenderError> {
    if x.coords.iter().any(|c| !c.is_finite()) {
        return Err(RenderError::NonFinite);
    }
    let s = cfg.canvas;
    let [bx0, by0, bx1, by1] = cond.boundary;
    let (cx0, cy0, cx1, cy1) = (to_px(bx0, s), to_px(by0, s), to_px(bx1, s), to_px(by1, s));
    let mut flags = RenderFlags::default();
    let mut inst = Grid::filled(s, s, 0u8);
    let n = cond.room_count().min(x.max_rooms());
    let mut painted_any = false;
    for slot in 0..n {
        let [x0, y0, x1, y1] = x.room_box(slot);
        let (px0, py0) = (to_px(x0, s).max(cx0), to_px(y0, s).max(cy0));
        let (px1, py1) = (to_px(x1, s).min(cx1), to_px(y1, s).min(cy1));
        if px1 <= px0 || py1 <= py0 {
            if cfg.strict {
                return Err(RenderError::DegeneratePolygon { slot });
            }
            flags.degenerate.push(slot);
            continue;
        }
        painted_any = true;
        let id = slot as u8 + 1;
        for y in py0..py1 {
            for xx in px0..px1 {
                if *inst.get(xx, y) != 0 {
                    flags.overlap = true;
                }
                inst.set(xx, y, id);
            }
        }
    }
    if !painted_any {
        return Err(RenderError::NoRooms);
    }
    let mut present = vec![false; n];
    for &v in inst.as_slice() {
        if v > 0 {
            present[v as usize - 1] = true;
        }
    }
    for slot in 0..n {
        if !present[slot] && !flags.degenerate.contains(&slot) {
            flags.vanished.push(slot);
        }
    }

    let mut boundary = Grid::filled(s, s, 0u8);
    let nb = |xx: usize, y: usize| -> [Option<(usize, usize)>; 4] {
        [
            (xx > 0).then(|| (xx - 1, y)),
            (xx + 1 < s).then(|| (xx + 1, y)),
            (y > 0).then(|| (xx, y - 1)),
            (y + 1 < s).then(|| (xx, y + 1)),
        ]
    };
    for y in 0..s {
        for xx in 0..s {
            let v = *inst.get(xx, y);
            if v == 0 {
                continue;
            }
            let edge = nb(xx, y)
                .iter()
                .any(|p| p.is_none_or(|(qx, qy)| *inst.get(qx, qy) != v));
            if edge {
                boundary.set(xx, y, WALL_CODE);
            }
        }
    }

    let mut doors = Vec::new();
    for &[a, b] in &cond.adjacency {
        if a >= n || b >= n || !present[a] || !present[b] {
            continue;
        }
        let (ia, ib) = (a as u8 + 1, b as u8 + 1);
        // neighbor pairs across a vertical wall (dx) and a horizontal wall (dy)
        let mut across_x = Vec::new();
        let mut across_y = Vec::new();
        for y in 0..s {
            for xx in 0..s {
                if *inst.get(xx, y) != ia {
                    continue;
                }
                if xx + 1 < s && *inst.get(xx + 1, y) == ib {
                    across_x.push(((xx, y), (xx + 1, y)));
                }
                if xx > 0 && *inst.get(xx - 1, y) == ib {
                    across_x.push(((xx, y), (xx - 1, y)));
                }
                if y + 1 < s && *inst.get(xx, y + 1) == ib {
                    across_y.push(((xx, y), (xx, y + 1)));
                }
                if y > 0 && *inst.get(xx, y - 1) == ib {
                    across_y.push(((xx, y), (xx, y - 1)));
                }
            }
        }
        let pairs = if across_x.len() >= across_y.len() {
            across_x.sort_by_key(|&((x, y), _)| (y, x));
            across_x
        } else {
            across_y.sort_by_key(|&((x, y), _)| (x, y));
            across_y
        };
        if pairs.is_empty() {
            flags.missing_doors += 1;
            continue;
        }
        let len = cfg.door_len.min(pairs.len());
        let start = (pairs.len() - len) / 2;
        for &(p, q) in &pairs[start..start + len] {
            boundary.set(p.0, p.1, DOOR_CODE);
            boundary.set(q.0, q.1, DOOR_CODE);
        }
        doors.push((ia.min(ib), ia.max(ib)));
    }

    let semantic = inst.map(|&v| {
        if v == 0 {
            EXTERNAL_CODE
        } else {
            cond.rooms[v as usize - 1]
        }
    });
    let interior = inst.map(|&v| if v == 0 { 0 } else { INTERIOR_CODE });
    let mask = LayoutMask::from_channels(boundary, semantic, inst, interior, &ChannelCodeTable::default())
        .expect("rendered channels satisfy the mask invariants");
    Ok(RenderedPlan { mask, flags, doors })
}

/// A tidy plan for `cond`: the living room fills a middle column and the other
/// rooms are stacked in the left and right columns, each sharing a wall with it.
pub fn synthesize_plan<R: Rng + ?Sized>(cond: &Condition, max_rooms: usize, rng: &mut R) -> LayoutVector {
    let [bx0, by0, bx1, by1] = cond.boundary;
    let w = bx1 - bx0;
    let n = cond.room_count().min(max_rooms);
    let others = n.saturating_sub(1);
    let left_n = others.div_ceil(2);
    let right_n = others - left_n;
    let a = if left_n > 0 {
        bx0 + rng.random_range(0.3..0.4) * w
    } else {
        bx0
    };
    let b = if right_n > 0 {
        bx0 + rng.random_range(0.6..0.7) * w
    } else {
        bx1
    };
    let mut boxes = vec![[a, by0, b, by1]];
    let mut column = |count: usize, x0: f64, x1: f64, rng: &mut R| {
        let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.6..1.4)).collect();
        let total: f64 = weights.iter().sum();
        let mut y = by0;
        for (i, wt) in weights.iter().enumerate() {
            let y_next = if i + 1 == count {
                by1
            } else {
                y + (by1 - by0) * wt / total
            };
            boxes.push([x0, y, x1, y_next]);
            y = y_next;
        }
    };
    column(left_n, bx0, a, rng);
    column(right_n, b, bx1, rng);
    LayoutVector::from_boxes(&boxes, max_rooms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::condition::ConditionSampler;
    use crate::mask_io::parse_layout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cond(rooms: Vec<u8>, adjacency: Vec<[usize; 2]>) -> Condition {
        Condition {
            id: "t".into(),
            rooms,
            adjacency,
            boundary: [-1.0, -1.0, 1.0, 1.0],
        }
    }

    #[test]
    fn two_rooms_one_door() {
        let c = cond(vec![0, 3], vec![[0, 1]]);
        let x = LayoutVector::from_boxes(&[[-1.0, -1.0, 0.0, 1.0], [0.0, -1.0, 1.0, 1.0]], 2);
        let r = render_layout(&x, &c, &RenderConfig::default()).unwrap();
        assert_eq!(r.mask.instances().len(), 2);
        assert_eq!(r.doors, vec![(1, 2)]);
        assert!(r.flags.is_clean());
        let door_px = r.mask.boundary().as_slice().iter().filter(|&&v| v == DOOR_CODE).count();
        assert_eq!(door_px, 2 * DOOR_LEN);
        assert_eq!(r.mask.instances()[&1].pixels, 32 * 64);
    }

    #[test]
    fn overlap_is_flagged_and_later_slot_wins() {
        let c = cond(vec![0, 3], vec![]);
        let x = LayoutVector::from_boxes(&[[-1.0, -1.0, 0.5, 1.0], [0.0, -1.0, 1.0, 1.0]], 2);
        let r = render_layout(&x, &c, &RenderConfig::default()).unwrap();
        assert!(r.flags.overlap);
        assert_eq!(r.mask.instances()[&2].pixels, 32 * 64);
        assert_eq!(r.mask.instances()[&1].pixels, 32 * 64);
    }

    #[test]
    fn degenerate_room_lenient_and_strict() {
        let c = cond(vec![0, 3], vec![[0, 1]]);
        let x = LayoutVector::from_boxes(&[[-1.0, -1.0, 0.0, 1.0], [0.5, 0.5, 0.5, 0.9]], 2);
        let r = render_layout(&x, &c, &RenderConfig::default()).unwrap();
        assert_eq!(r.flags.degenerate, vec![1]);
        assert_eq!(r.mask.instances().len(), 1);
        let strict = RenderConfig {
            strict: true,
            ..RenderConfig::default()
        };
        assert_eq!(
            render_layout(&x, &c, &strict),
            Err(RenderError::DegeneratePolygon { slot: 1 })
        );
        let mut bad = x.clone();
        bad.coords[0] = f64::NAN;
        assert_eq!(render_layout(&bad, &c, &strict), Err(RenderError::NonFinite));
    }

    #[test]
    fn render_parse_round_trip_on_synthesized_plans() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sampler = ConditionSampler::train(8);
        for i in 0..20 {
            let c = sampler.sample(format!("c{i}"), &mut rng);
            let x = synthesize_plan(&c, 8, &mut rng);
            let r = render_layout(&x, &c, &RenderConfig::default()).unwrap();
            assert!(r.flags.is_clean(), "{:?}", r.flags);
            assert_eq!(r.doors.len(), c.room_count() - 1);
            let back = parse_layout(&r.mask.encode_png()).unwrap();
            assert_eq!(back.instances(), r.mask.instances());
            assert_eq!(back, r.mask);
        }
    }
}
