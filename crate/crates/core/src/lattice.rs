//! Finite subsets of Z^n with open boundaries, regions, and distances.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO};

/// Lattice metric used for `d_XY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Graph distance; reduces to `|x - y|` on a chain.
    #[default]
    Manhattan,
    Euclidean,
}

/// An ordered, duplicate-free list of integer sites. The position of a site
/// in the list is its matrix index.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    dimension: usize,
    sites: Vec<Vec<i64>>,
    lookup: HashMap<Vec<i64>, usize>,
    metric: Metric,
}

impl LatticeGeometry {
    pub fn from_sites(dimension: usize, sites: Vec<Vec<i64>>, metric: Metric) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Domain("lattice dimension must be >= 1".into()));
        }
        if sites.len() < 2 {
            return Err(Error::Domain(format!(
                "lattice needs at least 2 sites, got {}",
                sites.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(sites.len());
        for (i, s) in sites.iter().enumerate() {
            if s.len() != dimension {
                return Err(Error::Domain(format!(
                    "site {s:?} has {} coordinates, lattice dimension is {dimension}",
                    s.len()
                )));
            }
            if lookup.insert(s.clone(), i).is_some() {
                return Err(Error::Domain(format!("duplicate site {s:?}")));
            }
        }
        Ok(LatticeGeometry {
            dimension,
            sites,
            lookup,
            metric,
        })
    }

    /// Open chain `0, 1, ..., len - 1`.
    pub fn chain(len: usize) -> Result<Self> {
        Self::from_sites(1, (0..len as i64).map(|x| vec![x]).collect(), Metric::Manhattan)
    }

    /// Open box `[0, e_0) x ... x [0, e_{n-1})`, last coordinate fastest.
    pub fn hypercubic(extent: &[usize], metric: Metric) -> Result<Self> {
        if extent.is_empty() {
            return Err(Error::Domain("lattice dimension must be >= 1".into()));
        }
        let mut sites: Vec<Vec<i64>> = vec![Vec::new()];
        for &e in extent {
            sites = sites
                .into_iter()
                .flat_map(|prefix| {
                    (0..e as i64).map(move |x| {
                        let mut s = prefix.clone();
                        s.push(x);
                        s
                    })
                })
                .collect();
        }
        Self::from_sites(extent.len(), sites, metric)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn site(&self, index: usize) -> &[i64] {
        &self.sites[index]
    }

    pub fn sites(&self) -> &[Vec<i64>] {
        &self.sites
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        self.lookup.get(coords).copied()
    }

    pub fn site_distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.sites[i], &self.sites[j]);
        match self.metric {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs() as f64).sum(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| ((x - y) as f64).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Pairs `(i, j)` with `i < j` at graph distance one.
    pub fn nearest_neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, s) in self.sites.iter().enumerate() {
            for axis in 0..self.dimension {
                let mut n = s.clone();
                n[axis] += 1;
                if let Some(j) = self.index_of(&n) {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// A subset of the sites of a shared lattice.
#[derive(Clone)]
pub struct Region {
    parent: Arc<LatticeGeometry>,
    members: BTreeSet<usize>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("members", &self.members)
            .field("lattice_len", &self.parent.len())
            .finish()
    }
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.same_parent(other) && self.members == other.members
    }
}

impl Region {
    pub fn new(parent: &Arc<LatticeGeometry>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&m| m >= parent.len()) {
            return Err(Error::Domain(format!(
                "site index {bad} outside lattice of {} sites",
                parent.len()
            )));
        }
        Ok(Region {
            parent: Arc::clone(parent),
            members,
        })
    }

    /// Inclusive index range `lo..=hi`.
    pub fn range(parent: &Arc<LatticeGeometry>, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty range {lo}..={hi}")));
        }
        Self::new(parent, lo..=hi)
    }

    pub fn full(parent: &Arc<LatticeGeometry>) -> Self {
        Region {
            parent: Arc::clone(parent),
            members: (0..parent.len()).collect(),
        }
    }

    pub fn empty(parent: &Arc<LatticeGeometry>) -> Self {
        Region {
            parent: Arc::clone(parent),
            members: BTreeSet::new(),
        }
    }

    pub fn parent(&self) -> &Arc<LatticeGeometry> {
        &self.parent
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.members.contains(&site)
    }

    pub fn same_parent(&self, other: &Region) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) || *self.parent == *other.parent
    }

    pub fn complement(&self) -> Region {
        Region {
            parent: Arc::clone(&self.parent),
            members: (0..self.parent.len())
                .filter(|i| !self.members.contains(i))
                .collect(),
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        self.check_parent(other)?;
        Ok(Region {
            parent: Arc::clone(&self.parent),
            members: self.members.union(&other.members).copied().collect(),
        })
    }

    pub fn intersection(&self, other: &Region) -> Result<Region> {
        self.check_parent(other)?;
        Ok(Region {
            parent: Arc::clone(&self.parent),
            members: self.members.intersection(&other.members).copied().collect(),
        })
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.members.is_subset(&other.members)
    }

    fn check_parent(&self, other: &Region) -> Result<()> {
        if self.same_parent(other) {
            Ok(())
        } else {
            Err(Error::Domain("regions belong to different lattices".into()))
        }
    }

    /// `d_XY`: the minimum site distance between the two regions.
    pub fn distance(&self, other: &Region) -> Result<f64> {
        region_distance(self, other)
    }

    /// Diagonal 0/1 matrix `χ_X` on the single-particle space.
    pub fn indicator(&self) -> CMat {
        let n = self.parent.len();
        CMat::from_fn(n, n, |i, j| {
            if i == j && self.members.contains(&i) {
                ONE
            } else {
                ZERO
            }
        })
    }

    /// Indices of `χ_X ⊗ 1_B` in the bipartite basis.
    pub fn tensor_indices(&self, d_b: usize) -> Vec<usize> {
        self.members
            .iter()
            .flat_map(|&x| (0..d_b).map(move |b| x * d_b + b))
            .collect()
    }
}

pub fn region_distance(a: &Region, b: &Region) -> Result<f64> {
    a.check_parent(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("distance to an empty region".into()));
    }
    if !a.is_disjoint(b) {
        return Ok(0.0);
    }
    let geom = &a.parent;
    let mut best = f64::INFINITY;
    for x in a.members() {
        for y in b.members() {
            best = best.min(geom.site_distance(x, y));
        }
    }
    Ok(best)
}
