//! Decoding, validation and encoding of 4-channel layout masks, plus the
//! derived interior/wall/door grids and per-room walkable cores.
//!
//! Channel order is fixed: boundary/door cues, semantic label, instance id,
//! interior flag, stored as the R, G, B, A bytes of an 8-bit RGBA PNG.

use std::collections::BTreeMap;
use std::io::Cursor;

use image::{ColorType, ImageFormat, RgbaImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{BoundaryRole, ChannelCodeTable, SemanticRole, StructuralRole};
use crate::grid::{BinaryGrid, Grid};

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("expected 4 channels, image has {0}")]
    ChannelCount(u8),
    #[error("instance {instance} at ({x}, {y}) lies outside the interior")]
    Invariant { instance: u8, x: usize, y: usize },
    #[error("channel dimensions differ")]
    Dimensions,
    #[error("boundary code {code} at ({x}, {y}) is not in the code table")]
    UnknownCode { code: u8, x: usize, y: usize },
}

/// Per-instance summary computed at parse time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    /// Modal semantic label over the instance's pixels (ties: smaller code).
    pub label: u8,
    pub pixels: usize,
    /// More than one semantic label was seen on this instance.
    pub mixed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskFlags {
    /// Semantic codes absent from the code table (values are preserved).
    pub unknown_semantic: Vec<u8>,
    /// Instances carrying more than one semantic label.
    pub mixed_instances: Vec<u8>,
    /// Interior-channel pixels snapped to the nearest known code.
    pub snapped_interior: usize,
}

impl MaskFlags {
    pub fn is_clean(&self) -> bool {
        self.unknown_semantic.is_empty() && self.mixed_instances.is_empty() && self.snapped_interior == 0
    }
}

/// A decoded 4-channel layout raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutMask {
    boundary: Grid<u8>,
    semantic: Grid<u8>,
    instance: Grid<u8>,
    interior: Grid<u8>,
    instances: BTreeMap<u8, InstanceInfo>,
    flags: MaskFlags,
}

impl LayoutMask {
    /// Validates the four channels and computes per-instance labels.
    /// Interior values not in the table are snapped to the nearest code.
    pub fn from_channels(
        boundary: Grid<u8>,
        semantic: Grid<u8>,
        instance: Grid<u8>,
        mut interior: Grid<u8>,
        codes: &ChannelCodeTable,
    ) -> Result<Self, MaskError> {
        let dims = boundary.dims();
        if semantic.dims() != dims || instance.dims() != dims || interior.dims() != dims {
            return Err(MaskError::Dimensions);
        }
        let mut flags = MaskFlags::default();
        for v in interior.as_mut_slice() {
            if !codes.interior.contains_key(v) {
                *v = codes.snap_interior(*v);
                flags.snapped_interior += 1;
            }
        }

        let mut histograms: BTreeMap<u8, BTreeMap<u8, usize>> = BTreeMap::new();
        for (x, y, &id) in instance.iter_xy() {
            if id == 0 {
                continue;
            }
            if !codes.interior[interior.get(x, y)] {
                return Err(MaskError::Invariant { instance: id, x, y });
            }
            *histograms
                .entry(id)
                .or_default()
                .entry(*semantic.get(x, y))
                .or_default() += 1;
        }
        let mut unknown: Vec<u8> = semantic
            .as_slice()
            .iter()
            .copied()
            .filter(|c| !codes.semantic.contains_key(c))
            .collect();
        unknown.sort_unstable();
        unknown.dedup();
        flags.unknown_semantic = unknown;

        let mut instances = BTreeMap::new();
        for (id, hist) in histograms {
            let pixels = hist.values().sum();
            // max_by_key keeps the last maximum; iterate in reverse so ties resolve to the smaller code
            let (&label, _) = hist.iter().rev().max_by_key(|(_, &n)| n).expect("non-empty");
            let mixed = hist.len() > 1;
            if mixed {
                flags.mixed_instances.push(id);
            }
            instances.insert(id, InstanceInfo { label, pixels, mixed });
        }

        Ok(Self {
            boundary,
            semantic,
            instance,
            interior,
            instances,
            flags,
        })
    }

    pub fn width(&self) -> usize {
        self.boundary.width()
    }

    pub fn height(&self) -> usize {
        self.boundary.height()
    }

    pub fn boundary(&self) -> &Grid<u8> {
        &self.boundary
    }

    pub fn semantic(&self) -> &Grid<u8> {
        &self.semantic
    }

    pub fn instance(&self) -> &Grid<u8> {
        &self.instance
    }

    pub fn interior(&self) -> &Grid<u8> {
        &self.interior
    }

    pub fn instances(&self) -> &BTreeMap<u8, InstanceInfo> {
        &self.instances
    }

    pub fn flags(&self) -> &MaskFlags {
        &self.flags
    }

    pub fn interior_pixel_count(&self, codes: &ChannelCodeTable) -> usize {
        self.interior
            .as_slice()
            .iter()
            .filter(|v| codes.interior.get(v).copied().unwrap_or(false))
            .count()
    }

    /// Binary mask of one instance.
    pub fn instance_mask(&self, id: u8) -> BinaryGrid {
        self.instance.map(|&v| v == id)
    }

    /// Encodes as an 8-bit RGBA PNG in the fixed channel order.
    pub fn encode_png(&self) -> Vec<u8> {
        let (w, h) = self.boundary.dims();
        let mut raw = Vec::with_capacity(w * h * 4);
        for i in 0..w * h {
            raw.push(self.boundary.as_slice()[i]);
            raw.push(self.semantic.as_slice()[i]);
            raw.push(self.instance.as_slice()[i]);
            raw.push(self.interior.as_slice()[i]);
        }
        let img = RgbaImage::from_raw(w as u32, h as u32, raw).expect("buffer sized above");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .expect("in-memory PNG encoding does not fail");
        out.into_inner()
    }
}

/// Decodes a PNG layout with the default RPLAN code table.
pub fn parse_layout(bytes: &[u8]) -> Result<LayoutMask, MaskError> {
    parse_layout_with(bytes, &ChannelCodeTable::default())
}

pub fn parse_layout_with(bytes: &[u8], codes: &ChannelCodeTable) -> Result<LayoutMask, MaskError> {
    let img =
        image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| MaskError::Decode(e.to_string()))?;
    let color = img.color();
    if color.channel_count() != 4 {
        return Err(MaskError::ChannelCount(color.channel_count()));
    }
    if color != ColorType::Rgba8 {
        return Err(MaskError::Decode(format!("expected 8 bits per channel, got {color:?}")));
    }
    let rgba = img.into_rgba8();
    let (w, h) = (rgba.width() as usize, rgba.height() as usize);
    let raw = rgba.into_raw();
    let channel = |c: usize| {
        Grid::from_vec(w, h, raw.iter().skip(c).step_by(4).copied().collect()).expect("decoder returns w*h pixels")
    };
    LayoutMask::from_channels(channel(0), channel(1), channel(2), channel(3), codes)
}

/// Interior, wall and door grids derived from the channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedMasks {
    pub interior: BinaryGrid,
    pub wall: BinaryGrid,
    pub door: BinaryGrid,
    /// Boundary pixels snapped to the nearest known code (lenient mode only).
    pub snapped_boundary: usize,
}

/// Derives interior/wall/door masks. A pixel that is both a wall and a door
/// cue counts as a door. In strict mode an unknown boundary code is an error;
/// otherwise it is snapped to the nearest known code.
pub fn derive_masks(m: &LayoutMask, codes: &ChannelCodeTable, strict: bool) -> Result<DerivedMasks, MaskError> {
    let (w, h) = (m.width(), m.height());
    let mut interior = BinaryGrid::new(w, h);
    let mut wall = BinaryGrid::new(w, h);
    let mut door = BinaryGrid::new(w, h);
    let mut snapped = 0;
    for y in 0..h {
        for x in 0..w {
            let b = *m.boundary.get(x, y);
            let role = match codes.boundary.get(&b) {
                Some(r) => *r,
                None if strict => return Err(MaskError::UnknownCode { code: b, x, y }),
                None => {
                    snapped += 1;
                    codes.boundary[&codes.snap_boundary(b)]
                }
            };
            let sem = codes.semantic_role(*m.semantic.get(x, y));
            let sem_wall = matches!(sem, Some(SemanticRole::Structural(StructuralRole::Wall)));
            let sem_door = matches!(
                sem,
                Some(SemanticRole::Structural(
                    StructuralRole::InteriorDoor | StructuralRole::EntranceDoor
                ))
            );
            let is_door = role.is_door() || sem_door;
            let is_wall = !is_door && (role == BoundaryRole::Wall || sem_wall);
            interior.set(x, y, codes.interior[m.interior.get(x, y)]);
            wall.set(x, y, is_wall);
            door.set(x, y, is_door);
        }
    }
    Ok(DerivedMasks {
        interior,
        wall,
        door,
        snapped_boundary: snapped,
    })
}

/// Walkable core of one room instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomCore {
    pub instance_id: u8,
    pub room_type: u8,
    pub core: BinaryGrid,
    /// Instance pixel count before wall/door removal.
    pub instance_pixels: usize,
    pub core_pixels: usize,
}

impl RoomCore {
    pub fn is_empty(&self) -> bool {
        self.core_pixels == 0
    }
}

/// One core per instance id, sorted by id. Empty cores are kept.
pub fn room_cores(m: &LayoutMask, d: &DerivedMasks) -> Vec<RoomCore> {
    m.instances
        .iter()
        .map(|(&id, info)| {
            let inst = m.instance_mask(id);
            let core = inst.and_not(&d.wall).and_not(&d.door);
            let core_pixels = core.count();
            RoomCore {
                instance_id: id,
                room_type: info.label,
                core,
                instance_pixels: info.pixels,
                core_pixels,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank(w: usize, h: usize) -> [Grid<u8>; 4] {
        [
            Grid::filled(w, h, 0),
            Grid::filled(w, h, 13),
            Grid::filled(w, h, 0),
            Grid::filled(w, h, 0),
        ]
    }

    fn build([b, s, i, n]: [Grid<u8>; 4]) -> Result<LayoutMask, MaskError> {
        LayoutMask::from_channels(b, s, i, n, &ChannelCodeTable::default())
    }

    fn paint(ch: &mut [Grid<u8>; 4], x0: usize, y0: usize, w: usize, h: usize, id: u8, label: u8) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                ch[1].set(x, y, label);
                ch[2].set(x, y, id);
                ch[3].set(x, y, 255);
            }
        }
    }

    #[test]
    fn single_instance_fixture() {
        let mut ch = blank(8, 8);
        paint(&mut ch, 2, 2, 4, 4, 1, 0);
        let m = build(ch).unwrap();
        assert_eq!(m.instances().len(), 1);
        assert_eq!(m.instances()[&1].pixels, 16);
        assert_eq!(m.interior_pixel_count(&ChannelCodeTable::default()), 16);
        assert!(m.flags().is_clean());
    }

    #[test]
    fn instance_outside_interior_is_rejected() {
        let mut ch = blank(4, 4);
        ch[2].set(1, 1, 3);
        assert!(matches!(build(ch), Err(MaskError::Invariant { instance: 3, .. })));
    }

    #[test]
    fn three_channel_png_is_rejected() {
        let img = image::RgbImage::new(4, 4);
        let mut buf = Cursor::new(Vec::new());
        img.write_to(&mut buf, ImageFormat::Png).unwrap();
        assert!(matches!(parse_layout(buf.get_ref()), Err(MaskError::ChannelCount(3))));
        assert!(matches!(parse_layout(b"not a png"), Err(MaskError::Decode(_))));
    }

    #[test]
    fn mixed_labels_take_the_mode() {
        let mut ch = blank(4, 4);
        paint(&mut ch, 0, 0, 4, 2, 1, 3);
        ch[1].set(0, 0, 2);
        ch[1].set(1, 0, 99);
        let m = build(ch).unwrap();
        assert_eq!(m.instances()[&1].label, 3);
        assert!(m.instances()[&1].mixed);
        assert_eq!(m.flags().mixed_instances, vec![1]);
        assert_eq!(m.flags().unknown_semantic, vec![99]);
    }

    #[test]
    fn anti_aliased_interior_is_snapped() {
        let mut ch = blank(4, 4);
        paint(&mut ch, 0, 0, 2, 2, 1, 0);
        ch[3].set(0, 0, 250);
        let m = build(ch).unwrap();
        assert_eq!(*m.interior().get(0, 0), 255);
        assert_eq!(m.flags().snapped_interior, 1);
    }

    #[test]
    fn door_segment_between_two_rooms() {
        let codes = ChannelCodeTable::default();
        let mut ch = blank(10, 6);
        paint(&mut ch, 0, 0, 5, 6, 1, 0);
        paint(&mut ch, 5, 0, 5, 6, 2, 3);
        for y in 0..6 {
            ch[0].set(4, y, 127);
            ch[0].set(5, y, 127);
        }
        for y in 2..5 {
            ch[0].set(4, y, 64);
        }
        let m = build(ch).unwrap();
        let d = derive_masks(&m, &codes, true).unwrap();
        let doors: Vec<_> = d.door.iter_xy().filter(|p| *p.2).map(|(x, y, _)| (x, y)).collect();
        assert_eq!(doors, vec![(4, 2), (4, 3), (4, 4)]);
        assert_eq!(d.wall.count(), 9);
        assert!(d.wall.and(&d.door).is_empty());
    }

    #[test]
    fn no_doors_gives_empty_door_grid() {
        let mut ch = blank(6, 6);
        paint(&mut ch, 1, 1, 4, 4, 1, 0);
        let m = build(ch).unwrap();
        let d = derive_masks(&m, &ChannelCodeTable::default(), true).unwrap();
        assert!(d.door.is_empty());
    }

    #[test]
    fn unknown_boundary_code_strict_vs_lenient() {
        let mut ch = blank(3, 3);
        ch[0].set(1, 1, 120);
        let m = build(ch).unwrap();
        let codes = ChannelCodeTable::default();
        assert!(matches!(
            derive_masks(&m, &codes, true),
            Err(MaskError::UnknownCode { code: 120, x: 1, y: 1 })
        ));
        let d = derive_masks(&m, &codes, false).unwrap();
        assert_eq!(d.snapped_boundary, 1);
        assert!(*d.wall.get(1, 1));
    }

    #[test]
    fn wall_strip_inside_instance_shrinks_core() {
        let mut ch = blank(6, 6);
        paint(&mut ch, 1, 1, 4, 4, 1, 0);
        for x in 1..5 {
            ch[0].set(x, 4, 127);
        }
        let m = build(ch).unwrap();
        let d = derive_masks(&m, &ChannelCodeTable::default(), true).unwrap();
        let cores = room_cores(&m, &d);
        assert_eq!(cores.len(), 1);
        assert_eq!(cores[0].core_pixels, 12);
    }

    #[test]
    fn fully_walled_instance_has_empty_core() {
        let mut ch = blank(4, 4);
        paint(&mut ch, 0, 0, 2, 2, 1, 0);
        paint(&mut ch, 2, 2, 2, 2, 2, 3);
        for y in 0..2 {
            for x in 0..2 {
                ch[0].set(x, y, 127);
            }
        }
        let m = build(ch).unwrap();
        let d = derive_masks(&m, &ChannelCodeTable::default(), true).unwrap();
        let cores = room_cores(&m, &d);
        assert_eq!(cores.iter().map(|c| c.instance_id).collect::<Vec<_>>(), [1, 2]);
        assert!(cores[0].is_empty());
        assert!(!cores[1].is_empty());
    }
}
