use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kernels::{EigenSystem, ModelParams};

use super::mild::{simulate_replicate, SimConfig};

const MAGIC: &str = "fracstorm-ensemble v1";

/// Streams every replicate path as little-endian records (u32 replicate, u32 t index, u32 x index, f64 value)
/// after a one-line text header. Blown-up replicates are skipped; returns their count.
pub fn write_ensemble<W: Write>(
    out: &mut W,
    params: &ModelParams,
    es: &EigenSystem,
    u0: &[f64],
    config: &SimConfig,
) -> Result<usize> {
    writeln!(
        out,
        "{MAGIC} record=u32:replicate,u32:t_index,u32:x_index,f64:value little-endian seed={} nx={} nt={} T={} replicates={}",
        config.seed, config.nx, config.nt, config.horizon, config.replicates
    )?;
    let mut blowups = 0;
    for rep in 0..config.replicates {
        let Some(path) = simulate_replicate(params, es, u0, config, rep)? else {
            blowups += 1;
            continue;
        };
        for (j, row) in path.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                out.write_all(&(rep as u32).to_le_bytes())?;
                out.write_all(&(j as u32).to_le_bytes())?;
                out.write_all(&(i as u32).to_le_bytes())?;
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(blowups)
}

/// Reads the header line and returns its `key=value` fields.
pub fn read_ensemble_header<R: BufRead>(input: &mut R) -> Result<Vec<(String, String)>> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let rest = line
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Io("not a fracstorm ensemble file".into()))?;
    Ok(rest
        .split_whitespace()
        .filter_map(|kv| kv.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect())
}
