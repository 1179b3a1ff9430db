//! Building specifications and their admissible parameter ranges.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STORIES_MIN: u32 = 3;
pub const STORIES_MAX: u32 = 7;
pub const STORY_HEIGHT_MIN: f64 = 3.0;
pub const STORY_HEIGHT_MAX: f64 = 4.0;
/// Exclusive upper bound on stories × story height, in metres.
pub const TOTAL_HEIGHT_LIMIT: f64 = 23.0;
pub const PLAN_MIN: f64 = 40.0;
pub const PLAN_MAX: f64 = 100.0;
pub const SEISMIC_INTENSITIES: [f64; 5] = [7.0, 7.5, 8.0, 8.5, 9.0];
/// Peak ground accelerations in units of g.
pub const PGA_LEVELS: [f64; 5] = [0.10, 0.15, 0.20, 0.30, 0.40];
pub const SEISMIC_GROUPS: [u8; 3] = [1, 2, 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuildingFunction {
    Office,
    Residential,
    Mall,
    Hospital,
    School,
    Factory,
}

impl BuildingFunction {
    pub const ALL: [BuildingFunction; 6] = [
        BuildingFunction::Office,
        BuildingFunction::Residential,
        BuildingFunction::Mall,
        BuildingFunction::Hospital,
        BuildingFunction::School,
        BuildingFunction::Factory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuildingFunction::Office => "Office",
            BuildingFunction::Residential => "Residential",
            BuildingFunction::Mall => "Mall",
            BuildingFunction::Hospital => "Hospital",
            BuildingFunction::School => "School",
            BuildingFunction::Factory => "Factory",
        }
    }
}

impl fmt::Display for BuildingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SiteClass {
    I0,
    I1,
    II,
    III,
    IV,
}

impl SiteClass {
    pub const ALL: [SiteClass; 5] = [
        SiteClass::I0,
        SiteClass::I1,
        SiteClass::II,
        SiteClass::III,
        SiteClass::IV,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub function: BuildingFunction,
    pub stories: u32,
    /// Metres.
    pub story_height: f64,
    pub plan_length: f64,
    pub plan_width: f64,
    pub seismic_intensity: f64,
    /// Units of g.
    pub pga: f64,
    pub seismic_group: u8,
    pub site_class: SiteClass,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("building parameter out of range: {0}")]
pub struct OutOfRange(pub String);

impl BuildingSpec {
    pub fn total_height(&self) -> f64 {
        f64::from(self.stories) * self.story_height
    }

    pub fn plan_area(&self) -> f64 {
        self.plan_length * self.plan_width
    }

    /// Independent draw of every parameter; may violate the joint constraints.
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            function: *BuildingFunction::ALL.choose(rng).expect("non-empty"),
            stories: rng.gen_range(STORIES_MIN..=STORIES_MAX),
            story_height: rng.gen_range(STORY_HEIGHT_MIN..=STORY_HEIGHT_MAX),
            plan_length: rng.gen_range(PLAN_MIN..=PLAN_MAX),
            plan_width: rng.gen_range(PLAN_MIN..=PLAN_MAX),
            seismic_intensity: *SEISMIC_INTENSITIES.choose(rng).expect("non-empty"),
            pga: *PGA_LEVELS.choose(rng).expect("non-empty"),
            seismic_group: *SEISMIC_GROUPS.choose(rng).expect("non-empty"),
            site_class: *SiteClass::ALL.choose(rng).expect("non-empty"),
        }
    }

    /// Uniform draw over the admissible ranges, redrawing the whole spec
    /// until the joint constraints hold.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::sample_where(rng, |_| true)
    }

    /// Rejection sampling restricted by an extra predicate.
    pub fn sample_where<R: Rng + ?Sized>(rng: &mut R, accept: impl Fn(&BuildingSpec) -> bool) -> Self {
        loop {
            let spec = Self::draw(rng);
            if spec.validate().is_ok() && accept(&spec) {
                return spec;
            }
        }
    }

    /// Checks every admissible-range constraint.
    pub fn validate(&self) -> Result<(), OutOfRange> {
        let bad = |msg: String| Err(OutOfRange(msg));
        if !(STORIES_MIN..=STORIES_MAX).contains(&self.stories) {
            return bad(format!("stories = {} not in [{STORIES_MIN}, {STORIES_MAX}]", self.stories));
        }
        if !(STORY_HEIGHT_MIN..=STORY_HEIGHT_MAX).contains(&self.story_height) {
            return bad(format!("story_height = {} not in [3.0, 4.0]", self.story_height));
        }
        if !(self.total_height() < TOTAL_HEIGHT_LIMIT) {
            return bad(format!("total height {} m is not below 23.0 m", self.total_height()));
        }
        for (label, v) in [("plan_length", self.plan_length), ("plan_width", self.plan_width)] {
            if !(PLAN_MIN..=PLAN_MAX).contains(&v) {
                return bad(format!("{label} = {v} not in [40, 100]"));
            }
        }
        if self.plan_width > self.plan_length {
            return bad(format!(
                "plan_width {} exceeds plan_length {}",
                self.plan_width, self.plan_length
            ));
        }
        if !SEISMIC_INTENSITIES.contains(&self.seismic_intensity) {
            return bad(format!("seismic_intensity = {}", self.seismic_intensity));
        }
        if !PGA_LEVELS.contains(&self.pga) {
            return bad(format!("pga = {}", self.pga));
        }
        if !SEISMIC_GROUPS.contains(&self.seismic_group) {
            return bad(format!("seismic_group = {}", self.seismic_group));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) fn sample_spec(stories: u32, story_height: f64) -> BuildingSpec {
    BuildingSpec {
        function: BuildingFunction::Office,
        stories,
        story_height,
        plan_length: 60.0,
        plan_width: 45.0,
        seismic_intensity: 8.0,
        pga: 0.20,
        seismic_group: 2,
        site_class: SiteClass::II,
    }
}
