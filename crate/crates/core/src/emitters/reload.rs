use std::fs;
use std::path::Path;

use super::{core_file, emit_connection_list, CORES_DIR, REPORT_FILE};
use crate::error::{Error, Result};
use crate::ir::{NetworkSpec, NeuronId};
use crate::mapper::{choose_tile_shape, CoreAllocation, CoreSpec, MappingResult};
use crate::scalar::Scalar;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn artifact(path: &Path, msg: impl Into<String>) -> Error {
    Error::Artifact {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn records(path: &Path, text: &str) -> Result<Vec<csv::StringRecord>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| artifact(path, e.to_string()))
}

/// Core geometry and total core count from the report's totals row.
fn read_report(path: &Path) -> Result<(CoreSpec, usize)> {
    let rows = records(path, &read(path)?)?;
    let total = rows
        .iter()
        .find(|r| r.get(0) == Some("total"))
        .ok_or_else(|| artifact(path, "no totals row"))?;
    let num = |i: usize| -> Result<usize> {
        total
            .get(i)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| artifact(path, format!("bad totals column {i}")))
    };
    let core = CoreSpec::new(num(4)?, num(5)?).map_err(|e| artifact(path, e.to_string()))?;
    Ok((core, num(3)?))
}

fn read_core_dump<T: Scalar>(path: &Path, core_id: usize) -> Result<CoreAllocation<T>> {
    let rows = records(path, &read(path)?)?;
    let (header, body) = rows.split_first().ok_or_else(|| artifact(path, "empty dump"))?;
    let id = |s: &str| s.parse::<NeuronId>().map_err(|e| artifact(path, e.to_string()));
    let neuron_slots = header.iter().skip(1).map(id).collect::<Result<Vec<_>>>()?;
    let layer = neuron_slots
        .first()
        .ok_or_else(|| artifact(path, "core has no neurons"))?
        .layer;
    if layer == 0 || neuron_slots.iter().any(|n| n.layer != layer) {
        return Err(artifact(path, "neuron slots must share one layer ≥ 1"));
    }

    let mut axon_slots = Vec::with_capacity(body.len());
    let mut weights = Vec::with_capacity(body.len() * neuron_slots.len());
    for (line, rec) in body.iter().enumerate() {
        if rec.len() != neuron_slots.len() + 1 {
            return Err(artifact(path, format!("row {} has {} fields", line + 2, rec.len())));
        }
        axon_slots.push(id(&rec[0])?);
        for cell in rec.iter().skip(1) {
            weights.push(
                cell.parse::<T>()
                    .map_err(|_| artifact(path, format!("bad weight {cell:?} on row {}", line + 2)))?,
            );
        }
    }
    if axon_slots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(artifact(path, "axon slots must be strictly increasing"));
    }
    CoreAllocation::new(core_id, layer, axon_slots, neuron_slots, weights).map_err(|e| artifact(path, e.to_string()))
}

/// Rebuilds a mapping from an artifact directory written by
/// [`super::write_output_tree`]. Weights come from the core dumps, so a
/// tampered dump yields a tampered mapping.
pub fn load_mapping<T: Scalar>(spec: &NetworkSpec, dir: &Path) -> Result<MappingResult<T>> {
    let (core, total) = read_report(&dir.join(REPORT_FILE))?;
    let cores_dir = dir.join(CORES_DIR);
    let mut cores = Vec::with_capacity(total);
    for id in 0..total {
        let path = cores_dir.join(core_file(id));
        let c = read_core_dump::<T>(&path, id)?;
        if c.layer > spec.num_layers() || cores.last().is_some_and(|p: &CoreAllocation<T>| p.layer > c.layer) {
            return Err(artifact(&path, format!("layer {} out of order", c.layer)));
        }
        cores.push(c);
    }
    let plans = (1..=spec.num_layers())
        .map(|i| choose_tile_shape(spec.layer(i), spec.shape(i - 1), spec.shape(i), core))
        .collect::<Result<Vec<_>>>()?;
    Ok(MappingResult::from_parts(core, spec.shapes().to_vec(), plans, cores))
}

/// Compares a connection list against the one implied by `result`.
/// Returns a description of the first disagreement, if any.
pub fn check_connection_list<T: Scalar>(result: &MappingResult<T>, text: &str) -> Option<String> {
    let expected = match emit_connection_list(result) {
        Ok(e) => e,
        Err(e) => return Some(e.to_string()),
    };
    let mut got = text.lines();
    for (i, want) in expected.lines().enumerate() {
        match got.next() {
            Some(line) if line == want => {}
            Some(line) => return Some(format!("line {}: expected {want:?}, found {line:?}", i + 1)),
            None => return Some(format!("line {}: expected {want:?}, file ends", i + 1)),
        }
    }
    got.next().map(|extra| format!("unexpected trailing line {extra:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitters::{write_output_tree, CONNECTIONS_FILE};
    use crate::ir::{ConvParams, LayerSpec, TensorShape, WeightStore};
    use crate::mapper::map_network;

    fn spec() -> NetworkSpec {
        NetworkSpec::new(
            TensorShape::new(7, 7, 2).unwrap(),
            vec![
                LayerSpec::conv(1, ConvParams::square(3, 1, 1), 3),
                LayerSpec::conv(2, ConvParams::square(3, 2, 0), 4),
                LayerSpec::fully_connected(3, 5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn reload_reproduces_mapping() {
        let spec = spec();
        let ws = WeightStore::<f32>::from_fn(&spec, |l, j| (l * 1000 + j) as f32 * 0.37 - 11.0);
        let m = map_network(&spec, &ws, CoreSpec::new(40, 12).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_output_tree(&m, dir.path()).unwrap();
        let back: MappingResult<f32> = load_mapping(&spec, dir.path()).unwrap();
        assert_eq!(back, m);
        let text = fs::read_to_string(dir.path().join(CONNECTIONS_FILE)).unwrap();
        assert_eq!(check_connection_list(&back, &text), None);
        assert!(check_connection_list(&back, &text.replacen("-1,", "-1,9", 1)).is_some());
    }

    #[test]
    fn missing_dump_is_io_error() {
        let spec = spec();
        let ws = WeightStore::<f32>::zeros(&spec);
        let m = map_network(&spec, &ws, CoreSpec::new(40, 12).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_output_tree(&m, dir.path()).unwrap();
        fs::remove_file(dir.path().join("cores").join(core_file(2))).unwrap();
        assert!(matches!(load_mapping::<f32>(&spec, dir.path()), Err(Error::Io { .. })));
    }
}
