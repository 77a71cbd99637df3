//! Plan- and dataset-level integration metrics: public-space dominance,
//! category profiles, living-room indicators, CWRI and profile distance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::ChannelCodeTable;
use crate::integration::RoomScores;

pub use crate::stats::{summarize, SummaryStats};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("plan has no scored public room")]
    MissingPublic,
    #[error("plan has no scored non-public room")]
    MissingOther,
    #[error("plan has no valid category")]
    NoValidCategory,
    #[error("plan has no living-room category")]
    MissingLiving,
    #[error("no visible category besides the living room")]
    NoVisibleRival,
    #[error("category sets differ")]
    CategoryMismatch,
}

/// Merged functional category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Living,
    Bedroom,
    Kitchen,
    Bathroom,
    Dining,
    Study,
    Balcony,
    Entrance,
    Storage,
    Unknown,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Living,
        Category::Bedroom,
        Category::Kitchen,
        Category::Bathroom,
        Category::Dining,
        Category::Study,
        Category::Balcony,
        Category::Entrance,
        Category::Storage,
        Category::Unknown,
    ];

    /// Default normalization set (everything but Unknown).
    pub const DENOMINATOR: [Category; 9] = [
        Category::Living,
        Category::Bedroom,
        Category::Kitchen,
        Category::Bathroom,
        Category::Dining,
        Category::Study,
        Category::Balcony,
        Category::Entrance,
        Category::Storage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Living => "living",
            Category::Bedroom => "bedroom",
            Category::Kitchen => "kitchen",
            Category::Bathroom => "bathroom",
            Category::Dining => "dining",
            Category::Study => "study",
            Category::Balcony => "balcony",
            Category::Entrance => "entrance",
            Category::Storage => "storage",
            Category::Unknown => "unknown",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Merged category for a room label name from the code table.
    pub fn for_room_name(name: &str) -> Self {
        match name {
            "living" => Category::Living,
            "master_room" | "child_room" | "second_room" | "guest_room" | "bedroom" => Category::Bedroom,
            "kitchen" => Category::Kitchen,
            "bathroom" => Category::Bathroom,
            "dining" => Category::Dining,
            "study" => Category::Study,
            "balcony" => Category::Balcony,
            "entrance" => Category::Entrance,
            "storage" => Category::Storage,
            _ => Category::Unknown,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Room type -> category mapping plus the public, denominator and visible sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub by_type: BTreeMap<u8, Category>,
    /// Room types counted as public space.
    pub public_types: BTreeSet<u8>,
    pub denominator: BTreeSet<Category>,
    pub visible: BTreeSet<Category>,
}

impl Default for CategoryMap {
    fn default() -> Self {
        Self::from_codes(&ChannelCodeTable::default())
    }
}

impl CategoryMap {
    /// Builds the map from room names in the code table. Public set: living rooms.
    pub fn from_codes(codes: &ChannelCodeTable) -> Self {
        let by_type: BTreeMap<u8, Category> = codes
            .semantic
            .iter()
            .filter_map(|(&c, (_, role))| role.room_name().map(|n| (c, Category::for_room_name(n))))
            .collect();
        let public_types = by_type
            .iter()
            .filter(|(_, &cat)| cat == Category::Living)
            .map(|(&t, _)| t)
            .collect();
        let denominator: BTreeSet<Category> = Category::DENOMINATOR.into_iter().collect();
        let visible = denominator
            .iter()
            .copied()
            .filter(|c| !matches!(c, Category::Entrance | Category::Unknown))
            .collect();
        Self {
            by_type,
            public_types,
            denominator,
            visible,
        }
    }

    pub fn category(&self, room_type: u8) -> Category {
        self.by_type.get(&room_type).copied().unwrap_or(Category::Unknown)
    }

    /// Adds every room type of `cat` to the public set.
    pub fn with_public_category(mut self, cat: Category) -> Self {
        let extra: Vec<u8> = self
            .by_type
            .iter()
            .filter(|(_, &c)| c == cat)
            .map(|(&t, _)| t)
            .collect();
        self.public_types.extend(extra);
        self
    }
}

/// `max public room mean - max non-public room mean`.
pub fn public_score(rs: &RoomScores, cm: &CategoryMap) -> Result<f64, MetricsError> {
    let mut public_max: Option<f64> = None;
    let mut other_max: Option<f64> = None;
    for r in rs.rooms.values() {
        let slot = if cm.public_types.contains(&r.room_type) {
            &mut public_max
        } else {
            &mut other_max
        };
        *slot = Some(slot.map_or(r.mean, |m: f64| m.max(r.mean)));
    }
    let p = public_max.ok_or(MetricsError::MissingPublic)?;
    let o = other_max.ok_or(MetricsError::MissingOther)?;
    Ok(p - o)
}

/// Absolute (`I`) and relative (`R`) integration per category for one plan.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryProfile {
    pub absolute: BTreeMap<Category, f64>,
    /// Only categories in the denominator set.
    pub relative: BTreeMap<Category, f64>,
}

/// Mean room integration per room type (unweighted mean of instance means)
/// with the instance count.
pub fn type_means(rs: &RoomScores) -> BTreeMap<u8, (usize, f64)> {
    let mut acc: BTreeMap<u8, (usize, f64)> = BTreeMap::new();
    for r in rs.rooms.values() {
        let e = acc.entry(r.room_type).or_default();
        e.0 += 1;
        e.1 += r.mean;
    }
    acc.into_iter().map(|(t, (n, s))| (t, (n, s / n as f64))).collect()
}

pub fn category_profile(rs: &RoomScores, cm: &CategoryMap) -> Result<CategoryProfile, MetricsError> {
    let mut sums: BTreeMap<Category, (f64, f64)> = BTreeMap::new();
    for (t, (n, m)) in type_means(rs) {
        let e = sums.entry(cm.category(t)).or_default();
        e.0 += n as f64 * m;
        e.1 += n as f64;
    }
    let absolute: BTreeMap<Category, f64> = sums.into_iter().map(|(g, (s, n))| (g, s / n)).collect();
    let valid: Vec<(Category, f64)> = absolute
        .iter()
        .filter(|(g, _)| cm.denominator.contains(g))
        .map(|(&g, &v)| (g, v))
        .collect();
    if valid.is_empty() {
        return Err(MetricsError::NoValidCategory);
    }
    let mu = valid.iter().map(|(_, v)| v).sum::<f64>() / valid.len() as f64;
    let relative = valid.into_iter().map(|(g, v)| (g, v / mu)).collect();
    Ok(CategoryProfile { absolute, relative })
}

/// `(living_room, living_adv)`: the living room's relative integration and its
/// lead over the strongest other visible category.
pub fn living_metrics(p: &CategoryProfile, cm: &CategoryMap) -> Result<(f64, f64), MetricsError> {
    let living = *p.relative.get(&Category::Living).ok_or(MetricsError::MissingLiving)?;
    let rival = p
        .relative
        .iter()
        .filter(|(g, _)| **g != Category::Living && cm.visible.contains(g))
        .map(|(_, &v)| v)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(MetricsError::NoVisibleRival)?;
    Ok((living, living - rival))
}

/// Coverage-weighted relative integration over a dataset of per-plan relative
/// profiles. Every category in `categories` gets a value; absent ones are 0.
pub fn cwri(plans: &[BTreeMap<Category, f64>], categories: &[Category]) -> BTreeMap<Category, f64> {
    let total = plans.len() as f64;
    categories
        .iter()
        .map(|&g| {
            let vals: Vec<f64> = plans.iter().filter_map(|p| p.get(&g).copied()).collect();
            let v = if vals.is_empty() || total == 0.0 {
                0.0
            } else {
                let mean_r = vals.iter().sum::<f64>() / vals.len() as f64;
                mean_r * (vals.len() as f64 / total)
            };
            (g, v)
        })
        .collect()
}

/// Mean absolute difference between two median profiles over the same categories.
pub fn profile_distance(y: &BTreeMap<Category, f64>, y_ref: &BTreeMap<Category, f64>) -> Result<f64, MetricsError> {
    if y.is_empty() || !y.keys().eq(y_ref.keys()) {
        return Err(MetricsError::CategoryMismatch);
    }
    let sum: f64 = y.iter().map(|(g, v)| (v - y_ref[g]).abs()).sum();
    Ok(sum / y.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::RoomScore;

    fn rooms(list: &[(u8, u8, f64)]) -> RoomScores {
        RoomScores {
            rooms: list
                .iter()
                .map(|&(id, ty, mean)| {
                    (
                        id,
                        RoomScore {
                            instance_id: id,
                            room_type: ty,
                            nodes: vec![],
                            mean,
                        },
                    )
                })
                .collect(),
            unscored: vec![],
        }
    }

    #[test]
    fn public_score_cases() {
        let cm = CategoryMap::default();
        let rs = rooms(&[(1, 0, 1.5), (2, 1, 1.2), (3, 3, 0.7)]);
        assert!((public_score(&rs, &cm).unwrap() - 0.3).abs() < 1e-12);
        let rs = rooms(&[(1, 0, 1.0), (2, 1, 1.0)]);
        assert_eq!(public_score(&rs, &cm).unwrap(), 0.0);
        assert_eq!(
            public_score(&rooms(&[(1, 1, 1.0)]), &cm),
            Err(MetricsError::MissingPublic)
        );
        assert_eq!(
            public_score(&rooms(&[(1, 0, 1.0)]), &cm),
            Err(MetricsError::MissingOther)
        );
    }

    #[test]
    fn public_set_can_be_extended() {
        let cm = CategoryMap::default().with_public_category(Category::Dining);
        let rs = rooms(&[(1, 0, 1.0), (2, 4, 2.0), (3, 1, 1.5)]);
        assert!((public_score(&rs, &cm).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_category_profile() {
        let cm = CategoryMap::default();
        let p = category_profile(&rooms(&[(1, 0, 2.0), (2, 3, 4.0)]), &cm).unwrap();
        assert!((p.relative[&Category::Living] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.relative[&Category::Bathroom] - 4.0 / 3.0).abs() < 1e-12);
        let p = category_profile(&rooms(&[(1, 2, 5.0)]), &cm).unwrap();
        assert_eq!(p.relative[&Category::Kitchen], 1.0);
    }

    #[test]
    fn bedroom_family_merges() {
        let cm = CategoryMap::default();
        // master (1) two instances avg 2.0, child (5) one instance 5.0
        let p = category_profile(&rooms(&[(1, 1, 1.0), (2, 1, 3.0), (3, 5, 5.0)]), &cm).unwrap();
        assert!((p.absolute[&Category::Bedroom] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_is_outside_denominator() {
        let cm = CategoryMap::default();
        let p = category_profile(&rooms(&[(1, 0, 2.0), (2, 200, 8.0)]), &cm).unwrap();
        assert_eq!(p.relative.len(), 1);
        assert!(p.absolute.contains_key(&Category::Unknown));
        assert_eq!(
            category_profile(&rooms(&[(2, 200, 8.0)]), &cm),
            Err(MetricsError::NoValidCategory)
        );
    }

    #[test]
    fn living_adv_excludes_entrance() {
        let cm = CategoryMap::default();
        let p = CategoryProfile {
            absolute: BTreeMap::new(),
            relative: [
                (Category::Living, 1.4),
                (Category::Bedroom, 1.0),
                (Category::Entrance, 1.6),
            ]
            .into_iter()
            .collect(),
        };
        let (lr, adv) = living_metrics(&p, &cm).unwrap();
        assert_eq!(lr, 1.4);
        assert!((adv - 0.4).abs() < 1e-12);
        let p = CategoryProfile {
            absolute: BTreeMap::new(),
            relative: [(Category::Living, 1.0), (Category::Bedroom, 1.0)]
                .into_iter()
                .collect(),
        };
        assert_eq!(living_metrics(&p, &cm).unwrap().1, 0.0);
        let p = CategoryProfile::default();
        assert_eq!(living_metrics(&p, &cm), Err(MetricsError::MissingLiving));
    }

    #[test]
    fn cwri_cases() {
        let full: Vec<BTreeMap<Category, f64>> = vec![[(Category::Living, 1.0)].into_iter().collect(); 4];
        assert_eq!(cwri(&full, &[Category::Living])[&Category::Living], 1.0);
        let half: Vec<BTreeMap<Category, f64>> = vec![[(Category::Study, 2.0)].into_iter().collect(), BTreeMap::new()];
        let c = cwri(&half, &[Category::Study, Category::Balcony]);
        assert_eq!(c[&Category::Study], 1.0);
        assert_eq!(c[&Category::Balcony], 0.0);
    }

    #[test]
    fn profile_distance_cases() {
        let y: BTreeMap<_, _> = [(Category::Living, 1.5), (Category::Bedroom, 1.0)]
            .into_iter()
            .collect();
        assert_eq!(profile_distance(&y, &y).unwrap(), 0.0);
        let mut z = y.clone();
        *z.get_mut(&Category::Living).unwrap() += 0.2;
        assert!((profile_distance(&y, &z).unwrap() - 0.1).abs() < 1e-12);
        let single: BTreeMap<_, _> = [(Category::Living, 1.0)].into_iter().collect();
        let single2: BTreeMap<_, _> = [(Category::Living, 1.2)].into_iter().collect();
        assert!((profile_distance(&single, &single2).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(profile_distance(&y, &single), Err(MetricsError::CategoryMismatch));
    }
}
