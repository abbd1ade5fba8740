//! CSV artifacts describing a mapping.
//!
//! Output directory layout:
//!
//! ```text
//! report.csv              per-layer utilization and core counts
//! connections.csv         routing links between cores (and from the input)
//! connectivity_L{n}.csv   which cores feed which, per layer
//! cores/core_{id}.csv     crossbar dump of every core
//! ```
//!
//! Every emitter is a pure function of the [`MappingResult`]; output uses LF
//! line endings and quotes only fields that contain a comma.

mod reload;

pub use reload::{check_connection_list, load_mapping};

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ir::NeuronId;
use crate::mapper::{CoreAllocation, CoreSpec, MappingResult};
use crate::scalar::Scalar;

pub const REPORT_FILE: &str = "report.csv";
pub const CONNECTIONS_FILE: &str = "connections.csv";
pub const CORES_DIR: &str = "cores";

pub fn connectivity_file(layer: usize) -> String {
    format!("connectivity_L{layer}.csv")
}

pub fn core_file(core_id: usize) -> String {
    format!("core_{core_id}.csv")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerUtilization {
    pub layer: usize,
    pub axons: usize,
    pub neurons: usize,
    pub cores: usize,
    pub notes: String,
}

/// Per-layer `[axons, neurons]` of a full tile plus the core count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilizationReport {
    pub core: CoreSpec,
    pub layers: Vec<LayerUtilization>,
    pub total_cores: usize,
}

impl UtilizationReport {
    pub fn from_mapping<T: Scalar>(result: &MappingResult<T>) -> Self {
        let layers = result
            .plans
            .iter()
            .map(|p| {
                let layer_neurons = result.shapes[p.layer].len();
                let cores = result.layer_core_counts[p.layer - 1];
                let partial = result
                    .layer_cores(p.layer)
                    .iter()
                    .filter(|c| c.neurons_used() < p.neurons_used)
                    .count();
                let mut notes = format!("tile {}x{}x{}", p.neuron_rows, p.neuron_cols, p.channels_per_core);
                if partial > 0 {
                    notes.push_str(&format!(
                        "; {partial} partial edge tiles; packing bound {} cores",
                        layer_neurons.div_ceil(p.neurons_used)
                    ));
                }
                LayerUtilization {
                    layer: p.layer,
                    axons: p.axons_used,
                    neurons: p.neurons_used,
                    cores,
                    notes,
                }
            })
            .collect();
        UtilizationReport {
            core: result.core,
            layers,
            total_cores: result.total_cores,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = writer();
        let (ca, cn) = (self.core.axon_capacity.to_string(), self.core.neuron_capacity.to_string());
        w.write_record(["layer", "axons", "neurons", "cores", "core_axons", "core_neurons", "notes"])
            .unwrap();
        for l in &self.layers {
            w.write_record([
                l.layer.to_string(),
                l.axons.to_string(),
                l.neurons.to_string(),
                l.cores.to_string(),
                ca.clone(),
                cn.clone(),
                l.notes.clone(),
            ])
            .unwrap();
        }
        w.write_record(["total", "", "", &self.total_cores.to_string(), &ca, &cn, ""])
            .unwrap();
        finish(w)
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// `report.csv`.
pub fn emit_utilization_report<T: Scalar>(result: &MappingResult<T>) -> String {
    UtilizationReport::from_mapping(result).to_csv()
}

/// One routing link: a producer (input pixel or core neuron slot) feeding
/// an axon slot of a downstream core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    /// `-1` for the network input.
    pub src_core: i64,
    /// Input pixel linear index (row-major, channel-minor) when `src_core` is -1.
    pub src_slot: usize,
    pub dst_core: usize,
    pub dst_axon: usize,
}

/// Where every mapped neuron lives: id → (core id, neuron slot).
pub(crate) fn neuron_locations<T: Scalar>(result: &MappingResult<T>) -> HashMap<NeuronId, (usize, usize)> {
    result
        .cores
        .iter()
        .flat_map(|c| c.neuron_slots.iter().enumerate().map(move |(s, n)| (*n, (c.core_id, s))))
        .collect()
}

/// Every routing link of the mapping, sorted.
pub fn links<T: Scalar>(result: &MappingResult<T>) -> Result<Vec<Link>> {
    let located = neuron_locations(result);
    let input = result.shapes[0];
    let mut out = Vec::new();
    for core in &result.cores {
        for (a, src) in core.axon_slots.iter().enumerate() {
            let (src_core, src_slot) = if src.layer == 0 {
                if src.row > input.height || src.col > input.width || src.feature > input.channels {
                    return Err(Error::MissingSource(src.to_string()));
                }
                (-1, input.index(src.row - 1, src.col - 1, src.feature - 1))
            } else {
                let &(c, s) = located
                    .get(src)
                    .ok_or_else(|| Error::MissingSource(src.to_string()))?;
                (c as i64, s)
            };
            out.push(Link {
                src_core,
                src_slot,
                dst_core: core.core_id,
                dst_axon: a,
            });
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `connections.csv`: `src_core,src_slot,dst_core,dst_axon,weight`.
///
/// Links carry values unchanged, so `weight` is always 1; synaptic weights
/// live in the core dumps.
pub fn emit_connection_list<T: Scalar>(result: &MappingResult<T>) -> Result<String> {
    let mut w = writer();
    w.write_record(["src_core", "src_slot", "dst_core", "dst_axon", "weight"])
        .unwrap();
    for l in links(result)? {
        w.write_record([
            l.src_core.to_string(),
            l.src_slot.to_string(),
            l.dst_core.to_string(),
            l.dst_axon.to_string(),
            "1".to_string(),
        ])
        .unwrap();
    }
    Ok(finish(w))
}

/// Boolean core-to-core matrix for layer `layer` (1-based).
///
/// Rows are the cores of the previous layer, or a single `input` row for
/// layer 1; columns are the cores of `layer`.
pub fn connectivity_matrix<T: Scalar>(result: &MappingResult<T>, layer: usize) -> (Vec<String>, Vec<usize>, Vec<Vec<bool>>) {
    let dst: Vec<usize> = result.layer_range(layer).collect();
    let (row_labels, src_ids): (Vec<String>, Vec<Option<usize>>) = if layer == 1 {
        (vec!["input".to_string()], vec![None])
    } else {
        result
            .layer_range(layer - 1)
            .map(|c| (c.to_string(), Some(c)))
            .unzip()
    };
    let row_index: HashMap<Option<usize>, usize> = src_ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let located = neuron_locations(result);

    let mut cells = vec![vec![false; dst.len()]; src_ids.len()];
    for (j, &d) in dst.iter().enumerate() {
        for src in &result.cores[d].axon_slots {
            let key = if src.layer == 0 {
                None
            } else {
                located.get(src).map(|&(c, _)| c)
            };
            if let Some(&i) = row_index.get(&key) {
                cells[i][j] = true;
            }
        }
    }
    (row_labels, dst, cells)
}

/// `connectivity_L{layer}.csv`.
pub fn emit_connectivity_matrix<T: Scalar>(result: &MappingResult<T>, layer: usize) -> String {
    let (rows, cols, cells) = connectivity_matrix(result, layer);
    let mut w = writer();
    let mut header = vec!["src_core".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    w.write_record(&header).unwrap();
    for (label, row) in rows.iter().zip(&cells) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&rec).unwrap();
    }
    finish(w)
}

/// `cores/core_{id}.csv`: destination ids across the top, source ids down
/// the side, weights in the body (0 where no synapse exists).
pub fn emit_core_dump<T: Scalar>(core: &CoreAllocation<T>) -> String {
    let mut w = writer();
    let mut header = vec![String::new()];
    header.extend(core.neuron_slots.iter().map(|n| n.to_string()));
    w.write_record(&header).unwrap();
    for (a, src) in core.axon_slots.iter().enumerate() {
        let mut rec = Vec::with_capacity(core.neurons_used() + 1);
        rec.push(src.to_string());
        rec.extend((0..core.neurons_used()).map(|n| core.weight(a, n).to_string()));
        w.write_record(&rec).unwrap();
    }
    finish(w)
}

/// Writes the full artifact tree under `dir`.
pub fn write_output_tree<T: Scalar>(result: &MappingResult<T>, dir: &Path) -> Result<()> {
    let cores_dir = dir.join(CORES_DIR);
    fs::create_dir_all(&cores_dir).map_err(|e| Error::io(&cores_dir, e))?;
    let write = |path: &Path, text: &str| fs::write(path, text).map_err(|e| Error::io(path, e));

    write(&dir.join(REPORT_FILE), &emit_utilization_report(result))?;
    write(&dir.join(CONNECTIONS_FILE), &emit_connection_list(result)?)?;
    for layer in 1..=result.num_layers() {
        write(&dir.join(connectivity_file(layer)), &emit_connectivity_matrix(result, layer))?;
    }
    for core in &result.cores {
        write(&cores_dir.join(core_file(core.core_id)), &emit_core_dump(core))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ConvParams, LayerSpec, NetworkSpec, TensorShape, WeightStore};
    use crate::mapper::map_network;

    fn tiny() -> MappingResult<f32> {
        let spec = NetworkSpec::new(
            TensorShape::new(3, 3, 1).unwrap(),
            vec![LayerSpec::conv(1, ConvParams::square(3, 1, 0), 1)],
        )
        .unwrap();
        let ws = WeightStore::<f32>::from_fn(&spec, |_, j| j as f32 * 0.5);
        map_network(&spec, &ws, CoreSpec::square(256)).unwrap()
    }

    #[test]
    fn single_core_connection_list() {
        let text = emit_connection_list(&tiny()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "src_core,src_slot,dst_core,dst_axon,weight");
        assert!(lines[1..].iter().all(|l| l.starts_with("-1,")));
        assert_eq!(lines[9], "-1,8,0,8,1");
    }

    #[test]
    fn single_core_matrix() {
        assert_eq!(emit_connectivity_matrix(&tiny(), 1), "src_core,0\ninput,1\n");
    }

    #[test]
    fn single_neuron_dump_is_kernel_column() {
        let dump = emit_core_dump(&tiny().cores[0]);
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], ",\"L1-F1-N[1,1]\"");
        assert_eq!(lines[1], "\"L0-F1-N[1,1]\",0");
        assert_eq!(lines[9], "\"L0-F1-N[3,3]\",4");
        assert_eq!(lines.len(), 10);
    }

    #[test]
    fn empty_network_report() {
        let spec = NetworkSpec::new(TensorShape::new(2, 2, 1).unwrap(), vec![]).unwrap();
        let ws = WeightStore::<f32>::zeros(&spec);
        let m = map_network(&spec, &ws, CoreSpec::square(256)).unwrap();
        assert_eq!(
            emit_utilization_report(&m),
            "layer,axons,neurons,cores,core_axons,core_neurons,notes\ntotal,,,0,256,256,\n"
        );
    }

    #[test]
    fn report_row() {
        let text = emit_utilization_report(&tiny());
        assert!(text.contains("\n1,9,1,1,256,256,tile 1x1x1\n"), "{text}");
    }
}
