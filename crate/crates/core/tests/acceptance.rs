//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line; run with `--nocapture` to see them.

mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use neuromap::connectivity::build_connectivity;
use neuromap::emitters::{load_mapping, write_output_tree, UtilizationReport};
use neuromap::simcore::{lif_step, verify, CoreState};
use neuromap::{
    axons_required, choose_tile_shape, map_network, Activation, CoreSpec, LifParams, MappingResult, NetworkSpec,
    NeuronId, Tensor, TensorShape, WeightStore,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn weights(spec: &NetworkSpec) -> WeightStore<f32> {
    WeightStore::from_fn(spec, |l, j| ((l * 3 + j * 7) % 11) as f32 * 0.25 - 1.0)
}

fn tuples(m: &MappingResult<f32>) -> Vec<(usize, usize, usize)> {
    m.plans.iter().map(|p| (p.axons_used, p.neurons_used, p.cores())).collect()
}

#[test]
fn criterion_01_mnist_256() {
    let start = Instant::now();
    let spec = mnist();
    let m = map_network(&spec, &weights(&spec), CoreSpec::square(256)).unwrap();
    let elapsed = start.elapsed();
    let got = tuples(&m);
    let ok = got == [(60, 256, 28), (200, 64, 49), (240, 128, 18)]
        && m.total_cores == 95
        && elapsed < Duration::from_secs(5);
    report(1, ok, format!("{got:?} total={} in {elapsed:?}", m.total_cores));
}

#[test]
fn criterion_02_mnist_512() {
    let spec = mnist();
    let m = map_network(&spec, &weights(&spec), CoreSpec::square(512)).unwrap();
    let got = tuples(&m);
    let rep = UtilizationReport::from_mapping(&m);
    let notes_ok = rep.layers[..2].iter().all(|l| l.notes.contains("partial edge tiles"));
    let ok = got == [(100, 512, 16), (504, 192, 20), (400, 256, 9)] && notes_ok;
    report(2, ok, format!("{got:?} notes={:?}", rep.layers.iter().map(|l| &l.notes).collect::<Vec<_>>()));
}

#[test]
fn criterion_03_cifar_256() {
    let spec = cifar();
    let m = map_network(&spec, &weights(&spec), CoreSpec::square(256)).unwrap();
    let got = tuples(&m);
    let rep = UtilizationReport::from_mapping(&m);
    // row 1 is the tile-consistent result for 3 input channels
    let ok = got[1..] == [(200, 64, 49), (240, 128, 18)]
        && got[0] == (180, 256, 32)
        && rep.layers[0].notes.contains("partial edge tiles");
    report(3, ok, format!("{got:?} row1 notes={:?}", rep.layers[0].notes));
}

#[test]
fn criterion_04_axon_formula_matches_union() {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut checked = 0;
    for k in 1..=6 {
        for s in 1..=k {
            for r in 1..=6 {
                for c in 1..=6 {
                    checked += 1;
                    if axons_required(k, s, r, c) != receptive_union(k, s, r, c) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        mismatches == 0 && elapsed < Duration::from_secs(1),
        format!("{checked} cases, {mismatches} mismatches in {elapsed:?}"),
    );
}

#[test]
fn criterion_05_sixteen_neuron_example() {
    let spec = NetworkSpec::new(TensorShape::new(30, 30, 1).unwrap(), vec![conv(1, 3, 1, 0, 1)]).unwrap();
    let p = choose_tile_shape(spec.layer(1), spec.shape(0), spec.shape(1), CoreSpec::new(256, 16).unwrap()).unwrap();
    let (wide, square) = (axons_required(3, 1, 2, 8), axons_required(3, 1, 4, 4));
    let ok = wide == 40 && square == 36 && (p.neuron_rows, p.neuron_cols, p.axons_used) == (4, 4, 36);
    report(5, ok, format!("2x8={wide} 4x4={square} chosen={}x{} [{},{}]", p.neuron_rows, p.neuron_cols, p.axons_used, p.neurons_used));
}

#[test]
fn criterion_06_square_tiles_when_kernel_equals_stride() {
    let mut failures = Vec::new();
    for k in 1..=3 {
        let spec = NetworkSpec::new(TensorShape::new(64 * k, 64 * k, 1).unwrap(), vec![conv(1, k, k, 0, 1)]).unwrap();
        for a in 1..=64 {
            let core = CoreSpec::new(k * k * 64, a).unwrap();
            let p = choose_tile_shape(spec.layer(1), spec.shape(0), spec.shape(1), core).unwrap();
            let (r, c) = (p.neuron_rows, p.neuron_cols);
            let pairs: Vec<(usize, usize)> = (1..=a).filter(|d| a % d == 0).map(|d| (d, a / d)).collect();
            let min_axons = pairs.iter().map(|&(x, y)| axons_required(k, k, x, y)).min().unwrap();
            let min_sum = pairs.iter().map(|&(x, y)| x + y).min().unwrap();
            let root = (a as f64).sqrt().round() as usize;
            let ok = r * c == a
                && p.axons_used == min_axons
                && r + c == min_sum
                && (root * root != a || r == c);
            if !ok {
                failures.push((k, a, r, c));
            }
        }
    }
    report(6, failures.is_empty(), format!("192 cases, failures {failures:?}"));
}

#[test]
fn criterion_07_mapped_matches_dense() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..200 {
        let case = random_case::<f64, _>(&mut rng);
        let m = map_network(&case.spec, &case.weights, case.core).unwrap();
        let rep = verify(&m, &case.spec, &case.weights, &case.input, case.activation, 1e-5).unwrap();
        worst = worst.max(rep.max_deviation());
        if !rep.passed() {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        7,
        failures == 0 && elapsed < Duration::from_secs(60),
        format!("200 networks, {failures} failures, max deviation {worst:.1e} in {elapsed:?}"),
    );
}

#[test]
fn criterion_08_virtual_padding() {
    let spec = NetworkSpec::new(TensorShape::new(28, 28, 1).unwrap(), vec![conv(1, 3, 1, 1, 1)]).unwrap();
    let ws = WeightStore::<f32>::from_fn(&spec, |_, _| 1.0);
    let list = build_connectivity(&spec, &ws, 1);
    let fan = |r, c| list.fan_in_of(&NeuronId::new(1, 1, r, c));
    let (corner, edge, interior) = (fan(1, 1), fan(1, 14), fan(14, 14));
    let m = map_network(&spec, &ws, CoreSpec::square(256)).unwrap();
    let oob = m
        .cores
        .iter()
        .flat_map(|c| &c.axon_slots)
        .filter(|a| a.row < 1 || a.row > 28 || a.col < 1 || a.col > 28)
        .count();
    let ok = (corner, edge, interior) == (4, 6, 9) && oob == 0;
    report(8, ok, format!("fan-in {corner}/{edge}/{interior}, {oob} out-of-bounds axons"));
}

fn perturb_dump(path: &Path, axon: usize, neuron: usize) -> String {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    let mut rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let name = rows[0][neuron + 1].to_string();
    let old: f64 = rows[axon + 1][neuron + 1].parse().unwrap();
    let mut fields: Vec<String> = rows[axon + 1].iter().map(String::from).collect();
    fields[neuron + 1] = (old + 1.0).to_string();
    rows[axon + 1] = csv::StringRecord::from(fields);
    let mut w = csv::Writer::from_path(path).unwrap();
    for r in &rows {
        w.write_record(r).unwrap();
    }
    w.flush().unwrap();
    name
}

#[test]
fn criterion_09_fault_injection() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut detected = 0;
    let mut misattributed = Vec::new();
    for trial in 0..50 {
        let spec = random_network(&mut rng);
        let core = random_core(&mut rng, &spec);
        let ws = WeightStore::<f64>::from_fn(&spec, |_, _| rng.gen_range(0.5..1.5));
        let input = Tensor::from_vec(spec.shape(0), (0..spec.shape(0).len()).map(|_| rng.gen_range(0.5..1.5)).collect())
            .unwrap();
        let m = map_network(&spec, &ws, core).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_output_tree(&m, dir.path()).unwrap();

        let candidates: Vec<usize> = (0..m.cores.len()).filter(|&i| m.cores[i].axons_used() > 0).collect();
        let target = &m.cores[candidates[rng.gen_range(0..candidates.len())]];
        let axon = rng.gen_range(0..target.axons_used());
        let neuron = rng.gen_range(0..target.neurons_used());
        let dump = dir.path().join("cores").join(format!("core_{}.csv", target.core_id));
        let name = perturb_dump(&dump, axon, neuron);
        assert_eq!(name, target.neuron_slots[neuron].to_string());

        let reloaded = load_mapping::<f64>(&spec, dir.path()).unwrap();
        let rep = verify(&reloaded, &spec, &ws, &input, Activation::Linear, 1e-5).unwrap();
        if !rep.passed() {
            detected += 1;
            match rep.first_mismatch() {
                Some(id) if target.neuron_slots.contains(&id) => {}
                other => misattributed.push((trial, other.map(|i| i.to_string()))),
            }
        }
    }
    report(
        9,
        detected == 50 && misattributed.is_empty(),
        format!("{detected}/50 detected, misattributed {misattributed:?}"),
    );
}

fn euler_error(steps_per_tau: usize) -> f64 {
    let tau = 0.02;
    let p = LifParams::<f64> {
        tau_m: tau,
        resistance: 1.0,
        u_rest: 0.0,
        u_threshold: f64::INFINITY,
        u_reset: 0.0,
        dt: tau / steps_per_tau as f64,
    };
    let current = 0.8;
    let mut s = CoreState::with_neurons(1, p.u_rest);
    let mut worst = 0.0f64;
    for n in 1..=5 * steps_per_tau {
        lif_step(&mut s, &p, &[current]).unwrap();
        let t = n as f64 * p.dt;
        let exact = p.u_rest + p.resistance * current * (1.0 - (-t / tau).exp());
        worst = worst.max((s.potentials[0] - exact).abs());
    }
    worst
}

#[test]
fn criterion_10_lif_first_order() {
    let (coarse, fine) = (euler_error(50), euler_error(100));
    let bound = 1.2 * coarse / 2.0;
    report(10, fine <= bound, format!("e(tau/50)={coarse:.3e} e(tau/100)={fine:.3e} bound={bound:.3e}"));
}

fn tree_hash(root: &Path) -> String {
    let mut h = Sha256::new();
    for (path, bytes) in read_tree(root) {
        h.update(path.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn criterion_11_deterministic_map() {
    let dir = tempfile::tempdir().unwrap();
    let mut hashes = Vec::new();
    for spec in [mnist(), cifar()] {
        let ws = weights(&spec);
        let (blob, entries) = ws.to_blob();
        let net = dir.path().join("net.json");
        let bin = dir.path().join("w.bin");
        let man = dir.path().join("w.json");
        fs::write(&net, manifest_json(&spec)).unwrap();
        fs::write(&bin, blob).unwrap();
        fs::write(&man, serde_json::to_string(&entries).unwrap()).unwrap();
        let run = |out: &Path| {
            let args = [
                "neuromap".as_ref(),
                "map".as_ref(),
                "--network".as_ref(),
                net.as_os_str(),
                "--weights".as_ref(),
                bin.as_os_str(),
                "--weights-manifest".as_ref(),
                man.as_os_str(),
                "--core".as_ref(),
                "256".as_ref(),
                "256".as_ref(),
                "--out".as_ref(),
                out.as_os_str(),
            ];
            let (mut o, mut e) = (Vec::new(), Vec::new());
            assert_eq!(neuromap::cli::run(args, &mut o, &mut e), 0, "{}", String::from_utf8_lossy(&e));
            tree_hash(out)
        };
        let a = run(&dir.path().join(format!("a{}", hashes.len())));
        let b = run(&dir.path().join(format!("b{}", hashes.len())));
        hashes.push((a, b));
    }
    let ok = hashes.iter().all(|(a, b)| a == b);
    report(11, ok, format!("tree sha256 {}", hashes.iter().map(|(a, _)| &a[..16]).collect::<Vec<_>>().join(" ")));
}
