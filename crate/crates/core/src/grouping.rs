//! Partitions the tube database into groups by spatio-temporal proximity
//! (threshold `alpha` on the interaction distance) and chronological
//! proximity (threshold `beta` on start-frame gaps).
//!
//! Two modes: `Transitive` (default) takes connected components of the
//! pairwise relation, so chains of nearby tubes end up together.
//! `Literal` runs a single pass in ascending id order where a freshly
//! opened group absorbs at most one partner; it is kept for comparison and
//! caps groups at two members.

use serde::{Deserialize, Serialize};

use crate::energy::DistanceCache;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::tube::{Group, GroupingMode, Params, Tube, TubeDatabase, TubeId};

/// A partition of the tube ids together with the thresholds that produced
/// it. Groups are ordered by smallest member id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingResult<R: Real> {
    pub groups: Vec<Group>,
    pub alpha: R,
    pub beta: R,
    pub mode: GroupingMode,
}

impl<R: Real> GroupingResult<R> {
    /// Wrap an explicit partition, validating it against the database.
    pub fn from_groups(db: &TubeDatabase, groups: Vec<Group>, p: &Params<R>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &groups {
            for id in g.members() {
                db.get(id)?;
                if !seen.insert(id) {
                    return Err(Error::InvalidGrouping(format!(
                        "tube {id} appears in more than one group"
                    )));
                }
            }
        }
        if seen.len() != db.len() {
            return Err(Error::InvalidGrouping(format!(
                "groups cover {} of {} tubes",
                seen.len(),
                db.len()
            )));
        }
        let mut groups = groups;
        groups.sort_by_key(Group::min_id);
        Ok(GroupingResult {
            groups,
            alpha: p.alpha,
            beta: p.beta,
            mode: p.grouping_mode,
        })
    }

    /// One singleton group per tube.
    pub fn singletons(db: &TubeDatabase, p: &Params<R>) -> Self {
        GroupingResult {
            groups: db.ids().map(Group::singleton).collect(),
            alpha: p.alpha,
            beta: p.beta,
            mode: p.grouping_mode,
        }
    }

    pub fn group_of(&self, id: TubeId) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(id))
    }

    /// True when the groups are pairwise disjoint and cover the database.
    pub fn is_partition_of(&self, db: &TubeDatabase) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for g in &self.groups {
            for id in g.members() {
                if db.get(id).is_err() || !seen.insert(id) {
                    return false;
                }
            }
        }
        seen.len() == db.len()
    }
}

/// Whether two tubes belong in one group: interaction distance below
/// `alpha` (an infinite distance never qualifies) or absolute start gap
/// below `beta`.
pub fn pair_groupable<R: Real>(a: &Tube, b: &Tube, p: &Params<R>) -> bool {
    let d = crate::energy::interaction_distance(a, b, None, p).expect("no mapping involved");
    if d.is_finite() && d < p.alpha {
        return true;
    }
    R::of_i64((a.start_frame() - b.start_frame()).abs()) < p.beta
}

fn pair_groupable_cached<R: Real>(
    cache: &mut DistanceCache<R>,
    a: &Tube,
    b: &Tube,
    p: &Params<R>,
) -> bool {
    let d = cache.interaction_distance(a, b, p);
    if d.is_finite() && d < p.alpha {
        return true;
    }
    R::of_i64(cache.start_gap(a, b)) < p.beta
}

/// Partition the database under the thresholds in `p`.
pub fn group_tubes<R: Real>(db: &TubeDatabase, p: &Params<R>) -> Result<GroupingResult<R>> {
    p.validate()?;
    let mut cache = DistanceCache::new();
    Ok(group_tubes_cached(db, p, &mut cache))
}

/// Like [`group_tubes`] but reusing a distance cache, so sweeps over
/// thresholds pay the per-frame scans once.
pub fn group_tubes_cached<R: Real>(
    db: &TubeDatabase,
    p: &Params<R>,
    cache: &mut DistanceCache<R>,
) -> GroupingResult<R> {
    let tubes: Vec<&Tube> = db.tubes().collect();
    let groups = match p.grouping_mode {
        GroupingMode::Literal => literal_groups(&tubes, p, cache),
        GroupingMode::Transitive => transitive_groups(&tubes, p, cache),
    };
    GroupingResult {
        groups,
        alpha: p.alpha,
        beta: p.beta,
        mode: p.grouping_mode,
    }
}

/// Single pass in ascending id order: each unassigned tube opens a group
/// and absorbs the first unassigned partner it can pair with, then moves
/// on. Groups never exceed two members.
fn literal_groups<R: Real>(
    tubes: &[&Tube],
    p: &Params<R>,
    cache: &mut DistanceCache<R>,
) -> Vec<Group> {
    let n = tubes.len();
    let mut assigned = vec![false; n];
    let mut groups = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let mut members: std::collections::BTreeSet<TubeId> =
            std::iter::once(tubes[i].id()).collect();
        for j in 0..n {
            if assigned[j] {
                continue;
            }
            if pair_groupable_cached(cache, tubes[i], tubes[j], p) {
                assigned[j] = true;
                members.insert(tubes[j].id());
                break;
            }
        }
        groups.push(Group::new(members).expect("members non-empty"));
    }
    groups
}

/// Connected components of the groupable relation, explored in ascending
/// id order so output is deterministic.
fn transitive_groups<R: Real>(
    tubes: &[&Tube],
    p: &Params<R>,
    cache: &mut DistanceCache<R>,
) -> Vec<Group> {
    let n = tubes.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if pair_groupable_cached(cache, tubes[i], tubes[j], p) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    let mut visited = vec![false; n];
    let mut groups = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut members = std::collections::BTreeSet::new();
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            members.insert(tubes[i].id());
            for &j in &adjacency[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        groups.push(Group::new(members).expect("members non-empty"));
    }
    groups
}
