//! Room programs (conditions), their line-oriented JSON files, the fixed-size
//! encoding fed to the policy, and the room-count-capped sampler.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{Category, CategoryMap};

/// Room type code used for the living room.
pub const LIVING_TYPE: u8 = 0;
/// Room types drawn for the non-living slots.
pub const OTHER_TYPES: [u8; 8] = [1, 2, 3, 4, 6, 9, 10, 11];
pub const DEFAULT_MAX_ROOMS: usize = 8;

#[derive(Debug, Error)]
pub enum ConditionError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("condition {id}: {message}")]
    Invalid { id: String, message: String },
}

/// A room program: one type per slot, required adjacencies between slots and
/// the building envelope as `[x0, y0, x1, y1]` in normalized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub rooms: Vec<u8>,
    pub adjacency: Vec<[usize; 2]>,
    pub boundary: [f64; 4],
}

impl Condition {
    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    pub fn validate(&self, max_rooms: usize) -> Result<(), ConditionError> {
        let fail = |m: String| {
            Err(ConditionError::Invalid {
                id: self.id.clone(),
                message: m,
            })
        };
        if self.rooms.is_empty() || self.rooms.len() > max_rooms {
            return fail(format!("room count {} outside 1..={max_rooms}", self.rooms.len()));
        }
        for &[a, b] in &self.adjacency {
            if a >= self.rooms.len() || b >= self.rooms.len() || a == b {
                return fail(format!("bad adjacency [{a}, {b}]"));
            }
        }
        let [x0, y0, x1, y1] = self.boundary;
        if !(-1.0..=1.0).contains(&x0)
            || !(-1.0..=1.0).contains(&x1)
            || !(-1.0..=1.0).contains(&y0)
            || !(-1.0..=1.0).contains(&y1)
            || x0 >= x1
            || y0 >= y1
        {
            return fail(format!("bad boundary {:?}", self.boundary));
        }
        Ok(())
    }
}

pub fn read_conditions<R: BufRead>(r: R) -> Result<Vec<Condition>, ConditionError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let c: Condition = serde_json::from_str(t).map_err(|e| ConditionError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(c);
    }
    Ok(out)
}

pub fn write_conditions<W: Write>(conds: &[Condition], mut w: W) -> std::io::Result<()> {
    for c in conds {
        writeln!(w, "{}", serde_json::to_string(c).expect("conditions serialize"))?;
    }
    Ok(())
}

/// Length of [`encode_condition`] output for `max_rooms` slots.
pub fn encoding_len(max_rooms: usize) -> usize {
    let cats = Category::ALL.len();
    cats + max_rooms * cats + max_rooms + 4
}

fn category_index(room_type: u8) -> usize {
    static MAP: OnceLock<CategoryMap> = OnceLock::new();
    let cat = MAP.get_or_init(CategoryMap::default).category(room_type);
    Category::ALL.iter().position(|&c| c == cat).expect("listed category")
}

/// Fixed-size condition features: category histogram (fractions of
/// `max_rooms`), per-slot category one-hot, slot-active mask, boundary box.
pub fn encode_condition(c: &Condition, max_rooms: usize) -> Vec<f64> {
    let cats = Category::ALL.len();
    let mut v = vec![0.0; encoding_len(max_rooms)];
    for (slot, &t) in c.rooms.iter().enumerate().take(max_rooms) {
        let k = category_index(t);
        v[k] += 1.0 / max_rooms as f64;
        v[cats + slot * cats + k] = 1.0;
        v[cats + max_rooms * cats + slot] = 1.0;
    }
    let off = cats + max_rooms * cats + max_rooms;
    v[off..off + 4].copy_from_slice(&c.boundary);
    v
}

/// Draws room programs with a room-count range. Slot 0 is always the living
/// room and it is adjacent to every other slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSampler {
    pub min_rooms: usize,
    pub max_rooms: usize,
}

impl ConditionSampler {
    /// Training conditions: 4 to `cap` rooms.
    pub fn train(cap: usize) -> Self {
        Self {
            min_rooms: 4.min(cap),
            max_rooms: cap,
        }
    }

    /// Evaluation conditions with exactly `n` rooms.
    pub fn exact(n: usize) -> Self {
        Self {
            min_rooms: n,
            max_rooms: n,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, id: String, rng: &mut R) -> Condition {
        let n = rng.random_range(self.min_rooms..=self.max_rooms);
        let mut rooms = vec![LIVING_TYPE];
        rooms.extend((1..n).map(|_| OTHER_TYPES[rng.random_range(0..OTHER_TYPES.len())]));
        let adjacency = (1..n).map(|j| [0, j]).collect();
        let boundary = [
            -rng.random_range(0.75..0.95),
            -rng.random_range(0.75..0.95),
            rng.random_range(0.75..0.95),
            rng.random_range(0.75..0.95),
        ];
        Condition {
            id,
            rooms,
            adjacency,
            boundary,
        }
    }
}

/// Counts every condition handed to training against a room cap.
#[derive(Debug)]
pub struct OodGuard {
    pub cap: usize,
    sampled: AtomicUsize,
    violations: AtomicUsize,
}

impl OodGuard {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            sampled: AtomicUsize::new(0),
            violations: AtomicUsize::new(0),
        }
    }

    /// Records one condition; returns false (and logs) when it exceeds the cap.
    pub fn check(&self, c: &Condition) -> bool {
        self.sampled.fetch_add(1, Ordering::Relaxed);
        if c.room_count() > self.cap {
            self.violations.fetch_add(1, Ordering::Relaxed);
            eprintln!(
                "warning: condition {} has {} rooms, above the training cap {}",
                c.id,
                c.room_count(),
                self.cap
            );
            return false;
        }
        true
    }

    pub fn sampled(&self) -> usize {
        self.sampled.load(Ordering::Relaxed)
    }

    pub fn violations(&self) -> usize {
        self.violations.load(Ordering::Relaxed)
    }
}
