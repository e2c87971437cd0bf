//! Trip records to an empirical pickup distribution.

use std::collections::HashMap;
use std::path::Path;

use robotaxi_core::DemandDistribution;

use crate::error::{CliError, Result};

pub const DEFAULT_ZONE_COLUMN: &str = "PULocationID";

/// Reads a two-column headered CSV `raw_id,index` mapping sparse zone ids
/// to dense indices.
pub fn read_zone_map(path: &Path) -> Result<HashMap<String, usize>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let mut map = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let (Some(raw), Some(idx)) = (rec.get(0), rec.get(1)) else {
            return Err(CliError::Invalid(format!(
                "{}: line {line} needs two columns",
                path.display()
            )));
        };
        let idx: usize = idx.trim().parse().map_err(|_| {
            CliError::Invalid(format!(
                "{}: line {line}: bad index {idx:?}",
                path.display()
            ))
        })?;
        map.insert(raw.trim().to_string(), idx);
    }
    Ok(map)
}

/// Empirical distribution of the pickup zones in `trips`: `count(z) / total`.
///
/// Without a zone map the column must hold integer ids in `[0, zone_count)`.
pub fn ingest_trips(
    trips: &Path,
    zone_count: usize,
    column: &str,
    zone_map: Option<&HashMap<String, usize>>,
) -> Result<(DemandDistribution, u64)> {
    let mut rdr = csv::Reader::from_path(trips).map_err(|e| CliError::csv(trips, e))?;
    let headers = rdr.headers().map_err(|e| CliError::csv(trips, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| CliError::Invalid(format!("{}: no column {column:?}", trips.display())))?;
    let mut counts = vec![0u64; zone_count];
    let mut total = 0u64;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::csv(trips, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw = rec.get(col).unwrap_or("").trim();
        let zone = match zone_map {
            Some(m) => m.get(raw).copied(),
            None => raw.parse::<usize>().ok(),
        };
        match zone {
            Some(z) if z < zone_count => counts[z] += 1,
            _ => {
                return Err(CliError::UnknownZone {
                    id: raw.to_string(),
                    line,
                })
            }
        }
        total += 1;
    }
    if total == 0 {
        return Err(CliError::EmptyFile(trips.to_path_buf()));
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok((DemandDistribution::new(probs)?, total))
}
