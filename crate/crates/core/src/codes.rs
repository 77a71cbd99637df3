//! Channel-code table: the single place where raw pixel byte values get meaning.
//!
//! The default table follows RPLAN conventions. Room labels live in the
//! semantic channel (`0` = living room, ...); structural labels (external,
//! walls, doors) are also semantic codes and form the ignore set. The boundary
//! channel carries wall and door cues; interior and entrance doors are separate
//! entries because the public release does not document whether they share a
//! code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, FlatConfig};

pub const CODE_TABLE_VERSION: u32 = 1;

/// Meaning of a boundary-channel value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryRole {
    None,
    Wall,
    InteriorDoor,
    EntranceDoor,
}

impl BoundaryRole {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => Self::None,
            "wall" => Self::Wall,
            "interior_door" => Self::InteriorDoor,
            "entrance_door" => Self::EntranceDoor,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Wall => "wall",
            Self::InteriorDoor => "interior_door",
            Self::EntranceDoor => "entrance_door",
        }
    }

    pub fn is_door(self) -> bool {
        matches!(self, Self::InteriorDoor | Self::EntranceDoor)
    }
}

/// Meaning of a semantic-channel value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemanticRole {
    /// A functional room type, e.g. `living` or `bathroom`.
    Room(String),
    /// Structural label excluded from room statistics.
    Structural(StructuralRole),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructuralRole {
    External,
    Wall,
    InteriorDoor,
    EntranceDoor,
    Other,
}

const ROOM_NAMES: &[&str] = &[
    "living",
    "master_room",
    "kitchen",
    "bathroom",
    "dining",
    "child_room",
    "study",
    "second_room",
    "guest_room",
    "balcony",
    "entrance",
    "storage",
    "bedroom",
    "unknown",
];

impl SemanticRole {
    fn parse(s: &str) -> Option<Self> {
        let structural = match s {
            "external" => Some(StructuralRole::External),
            "exterior_wall" | "interior_wall" => Some(StructuralRole::Wall),
            "front_door" => Some(StructuralRole::EntranceDoor),
            "interior_door" => Some(StructuralRole::InteriorDoor),
            "wall_in" => Some(StructuralRole::Other),
            _ => None,
        };
        match structural {
            Some(r) => Some(Self::Structural(r)),
            None if ROOM_NAMES.contains(&s) => Some(Self::Room(s.to_string())),
            None => None,
        }
    }

    pub fn room_name(&self) -> Option<&str> {
        match self {
            Self::Room(n) => Some(n),
            Self::Structural(_) => None,
        }
    }
}

/// Maps raw channel bytes to roles.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelCodeTable {
    pub boundary: BTreeMap<u8, BoundaryRole>,
    /// Semantic code -> role, with the config name kept for reporting.
    pub semantic: BTreeMap<u8, (String, SemanticRole)>,
    /// Interior channel code -> `true` for interior.
    pub interior: BTreeMap<u8, bool>,
}

pub const DEFAULT_CODE_TABLE: &str = include_str!("../data/rplan_codes.conf");

impl Default for ChannelCodeTable {
    fn default() -> Self {
        Self::parse(DEFAULT_CODE_TABLE).expect("bundled code table is valid")
    }
}

impl ChannelCodeTable {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg = FlatConfig::parse(text)?;
        let version: Option<u32> = cfg.parse_value("version")?;
        if let Some(v) = version {
            if v != CODE_TABLE_VERSION {
                return Err(ConfigError::Invalid(format!("unsupported code table version {v}")));
            }
        }
        let mut table = Self {
            boundary: BTreeMap::new(),
            semantic: BTreeMap::new(),
            interior: BTreeMap::new(),
        };
        for (key, value) in cfg.entries() {
            if key == "version" {
                continue;
            }
            let (channel, code) = key
                .split_once('.')
                .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            let code: u8 = code.parse().map_err(|_| ConfigError::Value {
                key: key.to_string(),
                value: code.to_string(),
            })?;
            let bad = || ConfigError::Value {
                key: key.to_string(),
                value: value.to_string(),
            };
            match channel {
                "boundary" => {
                    table.boundary.insert(code, BoundaryRole::parse(value).ok_or_else(bad)?);
                }
                "semantic" => {
                    let role = SemanticRole::parse(value).ok_or_else(bad)?;
                    table.semantic.insert(code, (value.to_string(), role));
                }
                "interior" => {
                    let flag = match value {
                        "interior" => true,
                        "exterior" => false,
                        _ => return Err(bad()),
                    };
                    table.interior.insert(code, flag);
                }
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        if table.interior.values().filter(|&&v| v).count() != 1 || table.interior.values().filter(|&&v| !v).count() != 1
        {
            return Err(ConfigError::Invalid(
                "interior channel needs exactly one interior and one exterior code".into(),
            ));
        }
        Ok(table)
    }

    /// Serializes back to the flat config format.
    pub fn to_config_string(&self) -> String {
        let mut s = format!("version = {CODE_TABLE_VERSION}\n");
        for (c, r) in &self.boundary {
            s.push_str(&format!("boundary.{c} = {}\n", r.name()));
        }
        for (c, (name, _)) in &self.semantic {
            s.push_str(&format!("semantic.{c} = {name}\n"));
        }
        for (c, v) in &self.interior {
            let name = if *v { "interior" } else { "exterior" };
            s.push_str(&format!("interior.{c} = {name}\n"));
        }
        s
    }

    pub fn boundary_code(&self, role: BoundaryRole) -> Option<u8> {
        self.boundary.iter().find(|(_, r)| **r == role).map(|(c, _)| *c)
    }

    pub fn interior_code(&self, interior: bool) -> u8 {
        *self
            .interior
            .iter()
            .find(|(_, v)| **v == interior)
            .expect("validated at parse time")
            .0
    }

    pub fn semantic_code(&self, name: &str) -> Option<u8> {
        self.semantic.iter().find(|(_, (n, _))| n == name).map(|(c, _)| *c)
    }

    pub fn semantic_role(&self, code: u8) -> Option<&SemanticRole> {
        self.semantic.get(&code).map(|(_, r)| r)
    }

    pub fn semantic_name(&self, code: u8) -> Option<&str> {
        self.semantic.get(&code).map(|(n, _)| n.as_str())
    }

    /// Semantic codes excluded from room statistics (walls, doors, external).
    pub fn ignore_set(&self) -> Vec<u8> {
        self.semantic
            .iter()
            .filter(|(_, (_, r))| matches!(r, SemanticRole::Structural(_)))
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn is_room_code(&self, code: u8) -> bool {
        !matches!(self.semantic_role(code), Some(SemanticRole::Structural(_)))
    }

    /// Nearest known boundary code; ties go to the smaller code.
    pub fn snap_boundary(&self, value: u8) -> u8 {
        snap(self.boundary.keys().copied(), value)
    }

    pub fn snap_interior(&self, value: u8) -> u8 {
        snap(self.interior.keys().copied(), value)
    }
}

fn snap(codes: impl Iterator<Item = u8>, value: u8) -> u8 {
    codes
        .min_by_key(|&c| ((c as i16 - value as i16).abs(), c))
        .unwrap_or(value)
}

impl serde::Serialize for ChannelCodeTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_config_string())
    }
}

impl<'de> serde::Deserialize<'de> for ChannelCodeTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(d)?;
        ChannelCodeTable::parse(&text).map_err(serde::de::Error::custom)
    }
}
