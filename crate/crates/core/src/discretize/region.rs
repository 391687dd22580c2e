use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

/// Tissue region of a node. `One` is the principal (healthy) region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn other(self) -> Self {
        match self {
            Region::One => Region::Two,
            Region::Two => Region::One,
        }
    }
}

/// Geometric membership test for region 2.
pub trait RegionPredicate {
    fn contains(&self, point: [f64; 3]) -> bool;
}

impl<F: Fn([f64; 3]) -> bool> RegionPredicate for F {
    fn contains(&self, point: [f64; 3]) -> bool {
        self(point)
    }
}

/// `x > split`. The split point itself stays in region 1, so region 1 is the closed left part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfInterval {
    pub split: f64,
}

impl RegionPredicate for HalfInterval {
    fn contains(&self, point: [f64; 3]) -> bool {
        point[0] > self.split
    }
}

/// Axis-aligned box with strict inequalities; infinite bounds are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenBox {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl OpenBox {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|d| p[d] > self.lower[d] && p[d] < self.upper[d])
    }
}

/// Closed ball, minus an optional open box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRegion {
    pub center: [f64; 3],
    pub radius: f64,
    pub exclusion: Option<OpenBox>,
}

impl SphereRegion {
    /// Damaged region of the rabbit-heart experiment: a ball of radius 1.25
    /// with the septal tissue `{x < 1.3, y > 0.095, x > -0.3}` cut out.
    pub fn ischaemic_default() -> Self {
        Self {
            center: [1.0352, -0.6256, 0.248],
            radius: 1.25,
            exclusion: Some(OpenBox {
                lower: [-0.3, 0.095, f64::NEG_INFINITY],
                upper: [1.3, f64::INFINITY, f64::INFINITY],
            }),
        }
    }
}

impl RegionPredicate for SphereRegion {
    fn contains(&self, p: [f64; 3]) -> bool {
        let d2: f64 = (0..3).map(|i| (p[i] - self.center[i]).powi(2)).sum();
        d2.sqrt() <= self.radius && !self.exclusion.is_some_and(|b| b.contains(p))
    }
}

/// Node-to-region map with both index sets. Nodes are never reordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    labels: Vec<Region>,
    region1: Vec<usize>,
    region2: Vec<usize>,
}

impl RegionPartition {
    /// All nodes in region 1.
    pub fn uniform(n: usize) -> Self {
        Self {
            labels: alloc::vec![Region::One; n],
            region1: (0..n).collect(),
            region2: Vec::new(),
        }
    }

    /// From numeric labels `1` and `2`; anything else is rejected.
    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        let regions = labels
            .iter()
            .enumerate()
            .map(|(node, &label)| match label {
                1 => Ok(Region::One),
                2 => Ok(Region::Two),
                label => Err(Error::TooManyRegions { node, label }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_regions(regions))
    }

    pub fn from_regions(labels: Vec<Region>) -> Self {
        let region1 = (0..labels.len()).filter(|&i| labels[i] == Region::One).collect();
        let region2 = (0..labels.len()).filter(|&i| labels[i] == Region::Two).collect();
        Self {
            labels,
            region1,
            region2,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn region_of(&self, node: usize) -> Region {
        self.labels[node]
    }

    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    pub fn indices(&self, region: Region) -> &[usize] {
        match region {
            Region::One => &self.region1,
            Region::Two => &self.region2,
        }
    }

    /// `out = E_region x`: copies the rows of `region` and zeroes the rest.
    pub fn select(&self, region: Region, x: &[f64], out: &mut [f64]) {
        for ((o, &xi), &r) in out.iter_mut().zip(x).zip(&self.labels) {
            *o = if r == region { xi } else { 0.0 };
        }
    }
}

/// Region 2 is every node whose coordinates satisfy `predicate`.
pub fn partition_regions<P: RegionPredicate + ?Sized>(coords: &[[f64; 3]], predicate: &P) -> RegionPartition {
    RegionPartition::from_regions(
        coords
            .iter()
            .map(|&p| if predicate.contains(p) { Region::Two } else { Region::One })
            .collect(),
    )
}
