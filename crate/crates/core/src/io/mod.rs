//! Persistence: versioned JSON formats for tube databases and schedules,
//! CSV export for sweep curves, netpbm image IO, and the synthetic scene
//! generator. Serialization is canonical (sorted, stable float formatting)
//! so identical data always produces identical bytes, and schedules pin
//! the database they were computed from by content hash.

pub mod netpbm;
mod synth;

pub use synth::{render_scene_frames, synth_scene, ObjectSpec, SceneSpec, SynthScene};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grouping::GroupingResult;
use crate::num::Real;
use crate::scheduler::{SynopsisSchedule, SweepPoint};
use crate::tube::{
    BoundingBox, EnergyBreakdown, Fps, Group, Mapping, Params, Tube, TubeDatabase, TubeId,
};

const TUBE_DB_VERSION: u32 = 1;
const SCHEDULE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TubeRecord {
    id: u64,
    /// Rows of [frame, x, y, w, h].
    boxes: Vec<(i64, i32, i32, u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct TubeDbFile {
    version: u32,
    scene_width: u32,
    scene_height: u32,
    fps: Fps,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    background: Option<String>,
    tubes: Vec<TubeRecord>,
}

impl TubeDbFile {
    fn from_db(db: &TubeDatabase) -> Self {
        TubeDbFile {
            version: TUBE_DB_VERSION,
            scene_width: db.scene_width(),
            scene_height: db.scene_height(),
            fps: db.fps(),
            background: db.background().map(str::to_owned),
            tubes: db
                .tubes()
                .map(|t| TubeRecord {
                    id: t.id().0,
                    boxes: t
                        .boxes()
                        .iter()
                        .map(|b| (b.frame, b.x, b.y, b.w, b.h))
                        .collect(),
                })
                .collect(),
        }
    }

    fn into_db(self, origin: &str) -> Result<TubeDatabase> {
        if self.version != TUBE_DB_VERSION {
            return Err(Error::parse(
                origin,
                format!("unsupported tube-db version {}", self.version),
            ));
        }
        let mut db = TubeDatabase::new(self.scene_width, self.scene_height, self.fps)?;
        db.set_background(self.background);
        for rec in self.tubes {
            let boxes = rec
                .boxes
                .into_iter()
                .map(|(frame, x, y, w, h)| BoundingBox::new(frame, x, y, w, h))
                .collect();
            db.insert(Tube::new(TubeId(rec.id), boxes)?)?;
        }
        Ok(db)
    }
}

/// Canonical serialization of a database; also the content that gets
/// hashed to link schedules to their database.
pub fn tube_db_to_json(db: &TubeDatabase) -> String {
    serde_json::to_string_pretty(&TubeDbFile::from_db(db)).expect("db serializes")
}

/// Hex SHA-256 of the canonical database serialization.
pub fn db_content_hash(db: &TubeDatabase) -> String {
    let digest = Sha256::digest(tube_db_to_json(db).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_tube_db(db: &TubeDatabase, path: &Path) -> Result<()> {
    std::fs::write(path, tube_db_to_json(db))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_tube_db(path: &Path) -> Result<TubeDatabase> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: TubeDbFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    file.into_db(&path.display().to_string())
}

#[derive(Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: DeserializeOwned"
))]
struct ScheduleFile<R: Real> {
    version: u32,
    /// Hash of the database this schedule was computed for.
    db_hash: String,
    params: Params<R>,
    grouping_mode: crate::tube::GroupingMode,
    grouping_alpha: R,
    grouping_beta: R,
    groups: Vec<Vec<u64>>,
    /// Rows of [tube id, shift], ascending by id.
    shifts: Vec<(u64, i64)>,
    length: i64,
    energy: EnergyBreakdown<R>,
}

/// Write a schedule next to the database it was computed from; the file
/// embeds the database's content hash so stale pairings are detected on
/// load.
pub fn save_schedule<R: Real + Serialize>(
    schedule: &SynopsisSchedule<R>,
    db: &TubeDatabase,
    path: &Path,
) -> Result<()> {
    let file = ScheduleFile {
        version: SCHEDULE_VERSION,
        db_hash: db_content_hash(db),
        params: schedule.params,
        grouping_mode: schedule.groups.mode,
        grouping_alpha: schedule.groups.alpha,
        grouping_beta: schedule.groups.beta,
        groups: schedule
            .groups
            .groups
            .iter()
            .map(|g| g.members().map(|id| id.0).collect())
            .collect(),
        shifts: schedule.mapping.iter().map(|(id, s)| (id.0, s)).collect(),
        length: schedule.length,
        energy: schedule.energy.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("schedule serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Load a schedule and validate it against the database it claims to
/// describe. A hash mismatch means the database changed since the
/// schedule was computed.
pub fn load_schedule<R: Real + DeserializeOwned>(
    path: &Path,
    db: &TubeDatabase,
) -> Result<SynopsisSchedule<R>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let file: ScheduleFile<R> = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    if file.version != SCHEDULE_VERSION {
        return Err(Error::parse(
            path.display().to_string(),
            format!("unsupported schedule version {}", file.version),
        ));
    }
    let expected = db_content_hash(db);
    if file.db_hash != expected {
        return Err(Error::StaleSchedule {
            expected,
            found: file.db_hash,
        });
    }
    let mut mapping = Mapping::new();
    for (id, s) in file.shifts {
        mapping.set(TubeId(id), s);
    }
    mapping.validate(db)?;
    let groups = file
        .groups
        .into_iter()
        .map(|members| Group::new(members.into_iter().map(TubeId).collect()))
        .collect::<Result<Vec<_>>>()?;
    let grouping = GroupingResult::from_groups(
        db,
        groups,
        &Params {
            grouping_mode: file.grouping_mode,
            alpha: file.grouping_alpha,
            beta: file.grouping_beta,
            ..file.params
        },
    )?;
    Ok(SynopsisSchedule {
        mapping,
        length: file.length,
        energy: file.energy,
        groups: grouping,
        params: file.params,
    })
}

/// Format with six significant digits, stable under parse/re-format.
fn sig6<R: Real>(v: R) -> String {
    let v = v.as_f64();
    if v == 0.0 {
        "0.00000e0".to_string()
    } else {
        format!("{v:.5e}")
    }
}

/// Write sweep samples as `param,length,energy` CSV.
pub fn export_curve_csv<R: Real>(rows: &[SweepPoint<R>], path: &Path) -> Result<()> {
    let mut out = String::from("param,length,energy\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", sig6(r.value), r.length, sig6(r.energy)));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read back a curve CSV written by [`export_curve_csv`].
pub fn load_curve_csv<R: Real>(path: &Path) -> Result<Vec<SweepPoint<R>>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("param,length,energy") => {}
        other => {
            return Err(Error::parse(
                path.display().to_string(),
                format!("bad csv header {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse_err = || Error::parse(path.display().to_string(), format!("bad row {}", ln + 2));
        let value: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(parse_err)?;
        let length: i64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(parse_err)?;
        let energy: f64 = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(parse_err)?;
        if fields.next().is_some() {
            return Err(parse_err());
        }
        rows.push(SweepPoint {
            value: R::of_f64(value),
            length,
            energy: R::of_f64(energy),
        });
    }
    Ok(rows)
}
