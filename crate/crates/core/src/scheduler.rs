//! Assigns one rigid temporal shift per group to minimize synopsis length
//! under a collision budget, re-scores externally supplied mappings, and
//! sweeps thresholds to trace length/energy trade-off curves.
//!
//! Packing is greedy: groups are taken in chronological order of their
//! earliest member and dropped at the smallest synopsis start where every
//! cross-group per-frame box intersection stays within the budget. An
//! exhaustive search over per-group offsets serves as the optimality
//! oracle at small instance sizes.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{total_energy, DistanceCache};
use crate::error::{Error, Result};
use crate::grouping::{group_tubes_cached, GroupingResult};
use crate::num::Real;
use crate::tube::{EnergyBreakdown, Group, Mapping, Params, Tube, TubeDatabase, TubeId};

const MAX_BRUTE_GROUPS: usize = 6;

/// A packed synopsis: the per-tube mapping, its length, its energy
/// breakdown, and the grouping and parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynopsisSchedule<R: Real> {
    pub mapping: Mapping,
    /// Synopsis length in frames: max shifted end − min shifted start + 1.
    pub length: i64,
    pub energy: EnergyBreakdown<R>,
    pub groups: GroupingResult<R>,
    pub params: Params<R>,
}

/// Whole-trajectory spatial hull of a tube; two tubes whose hulls never
/// meet can share any frame without colliding.
#[derive(Debug, Clone, Copy)]
struct Hull {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

fn hull_of(t: &Tube) -> Hull {
    let mut h = Hull {
        x0: i64::MAX,
        y0: i64::MAX,
        x1: i64::MIN,
        y1: i64::MIN,
    };
    for b in t.boxes() {
        h.x0 = h.x0.min(b.x as i64);
        h.y0 = h.y0.min(b.y as i64);
        h.x1 = h.x1.max(b.x as i64 + b.w as i64);
        h.y1 = h.y1.max(b.y as i64 + b.h as i64);
    }
    h
}

fn hulls_meet(a: &Hull, b: &Hull) -> bool {
    a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1
}

/// Largest per-frame box intersection between `a` shifted by `da` and `b`
/// shifted by `db`, in pixels².
fn max_pair_overlap(a: &Tube, da: i64, b: &Tube, db: i64) -> u64 {
    let shared = match a.span().shifted(da).intersect(&b.span().shifted(db)) {
        Some(s) => s,
        None => return 0,
    };
    let mut max = 0u64;
    for t in shared.frames() {
        let ab = a.box_at(t - da).expect("t - da lies in a's span");
        let bb = b.box_at(t - db).expect("t - db lies in b's span");
        max = max.max(ab.intersection_area(bb));
    }
    max
}

fn pair_within_budget<R: Real>(
    a: &Tube,
    da: i64,
    b: &Tube,
    db: i64,
    budget: R,
    hulls: &HashMap<TubeId, Hull>,
) -> bool {
    if !hulls_meet(&hulls[&a.id()], &hulls[&b.id()]) {
        return true;
    }
    R::of_u64(max_pair_overlap(a, da, b, db)) <= budget
}

/// Largest per-frame pairwise box intersection in the original layout.
/// A packing budget at or above this value always admits the original
/// arrangement itself.
pub fn max_original_frame_overlap(db: &TubeDatabase) -> u64 {
    let tubes: Vec<&Tube> = db.tubes().collect();
    let mut max = 0u64;
    for i in 0..tubes.len() {
        for j in (i + 1)..tubes.len() {
            max = max.max(max_pair_overlap(tubes[i], 0, tubes[j], 0));
        }
    }
    max
}

/// Largest per-frame box intersection between tubes of different groups
/// under a mapping.
pub fn max_cross_group_overlap<R: Real>(
    db: &TubeDatabase,
    m: &Mapping,
    groups: &GroupingResult<R>,
) -> Result<u64> {
    let tubes: Vec<&Tube> = db.tubes().collect();
    let mut max = 0u64;
    for i in 0..tubes.len() {
        for j in (i + 1)..tubes.len() {
            let (a, b) = (tubes[i], tubes[j]);
            if groups.group_of(a.id()) == groups.group_of(b.id()) {
                continue;
            }
            max = max.max(max_pair_overlap(a, m.shift(a.id())?, b, m.shift(b.id())?));
        }
    }
    Ok(max)
}

/// Groups ordered for packing: ascending earliest member start, ties by
/// smallest member id. Returns (members, group start frame) per group.
fn packing_order<'a>(
    db: &'a TubeDatabase,
    groups: &[Group],
) -> Result<Vec<(Vec<&'a Tube>, i64)>> {
    let mut prepared = Vec::with_capacity(groups.len());
    for g in groups {
        let members: Vec<&Tube> = g
            .members()
            .map(|id| db.get(id))
            .collect::<Result<Vec<_>>>()?;
        let start = members
            .iter()
            .map(|t| t.start_frame())
            .min()
            .expect("group is non-empty");
        prepared.push((members, start));
    }
    prepared.sort_by_key(|(members, start)| (*start, members[0].id()));
    Ok(prepared)
}

/// Greedy earliest-fit packing: one rigid shift per group, smallest
/// feasible synopsis start first. Within-group relative timing is
/// untouched, so every within-group pair scores zero temporal and
/// chronological cost.
pub fn minimize_length<R: Real>(
    db: &TubeDatabase,
    groups: &GroupingResult<R>,
    p: &Params<R>,
) -> Result<SynopsisSchedule<R>> {
    p.validate()?;
    if !groups.is_partition_of(db) {
        return Err(Error::InvalidGrouping(
            "groups do not partition the database".into(),
        ));
    }
    let hulls: HashMap<TubeId, Hull> = db.tubes().map(|t| (t.id(), hull_of(t))).collect();
    let order = packing_order(db, &groups.groups)?;

    let mut mapping = Mapping::new();
    let mut placed: Vec<(&Tube, i64)> = Vec::new();
    let mut max_end = i64::MIN;
    for (members, group_start) in &order {
        // Past every placed tube the group can no longer collide, so the
        // search below always terminates.
        let clear_start = if placed.is_empty() { 0 } else { max_end + 1 };
        let mut chosen = clear_start;
        'search: for s in 0..=clear_start {
            let shift = s - group_start;
            for member in members {
                for (pt, pshift) in &placed {
                    if !pair_within_budget(member, shift, pt, *pshift, p.collision_budget, &hulls)
                    {
                        continue 'search;
                    }
                }
            }
            chosen = s;
            break;
        }
        let shift = chosen - group_start;
        for member in members {
            mapping.set(member.id(), shift);
            max_end = max_end.max(member.end_frame() + shift);
            placed.push((member, shift));
        }
    }

    let length = if placed.is_empty() {
        0
    } else {
        let min_start = placed
            .iter()
            .map(|(t, s)| t.start_frame() + s)
            .min()
            .expect("non-empty");
        debug_assert_eq!(min_start, 0, "first group packs to synopsis start 0");
        max_end - min_start + 1
    };
    let energy = total_energy(db, &mapping, p, &[])?;
    Ok(SynopsisSchedule {
        mapping,
        length,
        energy,
        groups: groups.clone(),
        params: *p,
    })
}

/// Re-score an externally supplied mapping: validates it, computes length
/// and energy, and reports singleton groups.
pub fn evaluate_schedule<R: Real>(
    db: &TubeDatabase,
    m: &Mapping,
    p: &Params<R>,
) -> Result<SynopsisSchedule<R>> {
    p.validate()?;
    m.validate(db)?;
    let length = if db.is_empty() {
        0
    } else {
        let starts = db
            .tubes()
            .map(|t| Ok(t.start_frame() + m.shift(t.id())?))
            .collect::<Result<Vec<i64>>>()?;
        let ends = db
            .tubes()
            .map(|t| Ok(t.end_frame() + m.shift(t.id())?))
            .collect::<Result<Vec<i64>>>()?;
        ends.iter().max().unwrap() - starts.iter().min().unwrap() + 1
    };
    let energy = total_energy(db, m, p, &[])?;
    Ok(SynopsisSchedule {
        mapping: m.clone(),
        length,
        energy,
        groups: GroupingResult::singletons(db, p),
        params: *p,
    })
}

/// Exhaustive minimum synopsis length over all per-group synopsis starts
/// in `[0, max_offset]` that respect the collision budget. Refuses more
/// than six groups. Oracle for the greedy packer.
pub fn brute_force_optimal_length<R: Real>(
    db: &TubeDatabase,
    groups: &GroupingResult<R>,
    p: &Params<R>,
    max_offset: i64,
) -> Result<i64> {
    p.validate()?;
    if !groups.is_partition_of(db) {
        return Err(Error::InvalidGrouping(
            "groups do not partition the database".into(),
        ));
    }
    if groups.groups.len() > MAX_BRUTE_GROUPS {
        return Err(Error::TooLarge {
            groups: groups.groups.len(),
            limit: MAX_BRUTE_GROUPS,
        });
    }
    if max_offset < 0 {
        return Err(Error::InvalidParams(format!(
            "max_offset must be >= 0, got {max_offset}"
        )));
    }
    if db.is_empty() {
        return Ok(0);
    }

    let hulls: HashMap<TubeId, Hull> = db.tubes().map(|t| (t.id(), hull_of(t))).collect();
    let order = packing_order(db, &groups.groups)?;
    let k = order.len();
    let spans: Vec<i64> = order
        .iter()
        .map(|(members, start)| {
            members.iter().map(|t| t.end_frame()).max().unwrap() - start + 1
        })
        .collect();

    // Pairwise feasibility by relative synopsis-start offset, precomputed
    // so the search only does table lookups.
    let width = (2 * max_offset + 1) as usize;
    let mut feas = vec![vec![true; width]; k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            for d in -max_offset..=max_offset {
                // Group j at start of group i + d.
                let mut ok = true;
                'pair: for a in &order[i].0 {
                    for b in &order[j].0 {
                        let sa = -order[i].1; // group i at synopsis start 0
                        let sb = d - order[j].1;
                        if !pair_within_budget(a, sa, b, sb, p.collision_budget, &hulls) {
                            ok = false;
                            break 'pair;
                        }
                    }
                }
                feas[i * k + j][(d + max_offset) as usize] = ok;
            }
        }
    }

    // DFS over group starts with bound pruning. The greedy result caps
    // the search but only combinations inside the offset box count.
    let greedy_len = minimize_length(db, groups, p)?.length;
    let mut best: Option<i64> = None;
    let mut starts = vec![0i64; k];

    fn dfs(
        level: usize,
        k: usize,
        max_offset: i64,
        spans: &[i64],
        feas: &[Vec<bool>],
        starts: &mut Vec<i64>,
        max_end: i64,
        min_start: i64,
        best: &mut Option<i64>,
        cap: i64,
    ) {
        if level == k {
            let len = max_end - min_start + 1;
            if best.map_or(true, |b| len < b) {
                *best = Some(len);
            }
            return;
        }
        's: for s in 0..=max_offset {
            let new_end = max_end.max(s + spans[level] - 1);
            let new_min = min_start.min(s);
            let bound = best.map_or(cap, |b| b.min(cap));
            if new_end - new_min + 1 >= bound {
                if s >= min_start {
                    break; // monotone in s from here on
                }
                continue;
            }
            for prev in 0..level {
                let d = s - starts[prev];
                if d < -max_offset || d > max_offset {
                    continue;
                }
                if !feas[prev * k + level][(d + max_offset) as usize] {
                    continue 's;
                }
            }
            starts[level] = s;
            dfs(
                level + 1,
                k,
                max_offset,
                spans,
                feas,
                starts,
                new_end,
                new_min,
                best,
                cap,
            );
        }
    }

    dfs(
        0,
        k,
        max_offset,
        &spans,
        &feas,
        &mut starts,
        i64::MIN,
        i64::MAX,
        &mut best,
        greedy_len + 1,
    );
    best.ok_or_else(|| {
        Error::InvalidParams(format!(
            "no feasible placement within max_offset {max_offset}"
        ))
    })
}

/// Threshold swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Vary `alpha` with `beta` pinned to 0.
    Alpha,
    /// Vary `beta` with `alpha` pinned to 0.
    Beta,
    /// Vary the collision budget with grouping thresholds as given.
    Budget,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepAxis::Alpha => write!(f, "alpha"),
            SweepAxis::Beta => write!(f, "beta"),
            SweepAxis::Budget => write!(f, "budget"),
        }
    }
}

/// One sweep sample: the parameter value, the packed synopsis length, and
/// the total energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<R: Real> {
    pub value: R,
    pub length: i64,
    pub energy: R,
}

/// Group and pack the database once per value of the chosen axis,
/// recording (value, length, total energy) in input order. Samples run
/// in parallel; pairwise distances are computed once and shared.
pub fn sweep<R: Real>(
    db: &TubeDatabase,
    axis: SweepAxis,
    values: &[R],
    p: &Params<R>,
) -> Result<Vec<SweepPoint<R>>> {
    p.validate()?;
    if values.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams(
            "sweep values must be sorted ascending".into(),
        ));
    }
    let base = match axis {
        SweepAxis::Alpha => Params {
            beta: R::zero(),
            ..*p
        },
        SweepAxis::Beta => Params {
            alpha: R::zero(),
            ..*p
        },
        SweepAxis::Budget => *p,
    };
    let cache = DistanceCache::precompute(db, &base);
    let fixed_grouping = match axis {
        SweepAxis::Budget => Some(group_tubes_cached(db, &base, &mut cache.clone())),
        _ => None,
    };

    values
        .par_iter()
        .map(|&value| {
            let pv = match axis {
                SweepAxis::Alpha => Params {
                    alpha: value,
                    ..base
                },
                SweepAxis::Beta => Params { beta: value, ..base },
                SweepAxis::Budget => Params {
                    collision_budget: value,
                    ..base
                },
            };
            pv.validate()?;
            let grouping = match &fixed_grouping {
                Some(g) => GroupingResult {
                    alpha: pv.alpha,
                    beta: pv.beta,
                    ..g.clone()
                },
                None => group_tubes_cached(db, &pv, &mut cache.clone()),
            };
            let schedule = minimize_length(db, &grouping, &pv)?;
            Ok(SweepPoint {
                value,
                length: schedule.length,
                energy: schedule.energy.total,
            })
        })
        .collect()
}
