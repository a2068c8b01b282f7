//! Every example runs to completion.

#[allow(dead_code)]
mod config_files {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_files.rs"));
}

#[allow(dead_code)]
mod distortion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/distortion.rs"));
}

#[allow(dead_code)]
mod harper {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/harper.rs"));
}

#[allow(dead_code)]
mod invariant_graphs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/invariant_graphs.rs"));
}

#[allow(dead_code)]
mod qcurves {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/qcurves.rs"));
}

#[allow(dead_code)]
mod reconstruction {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reconstruction.rs"));
}

#[allow(dead_code)]
mod return_times {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/return_times.rs"));
}

#[allow(dead_code)]
mod rotation_numbers {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rotation_numbers.rs"));
}

#[allow(dead_code)]
mod transitivity_probe {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transitivity_probe.rs"));
}

#[allow(dead_code)]
mod tubes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tubes.rs"));
}

#[test]
fn config_files_runs() {
    config_files::run_example().unwrap();
}

#[test]
fn distortion_runs() {
    distortion::run_example().unwrap();
}

#[test]
fn harper_runs() {
    harper::run_example().unwrap();
}

#[test]
fn invariant_graphs_runs() {
    invariant_graphs::run_example().unwrap();
}

#[test]
fn qcurves_runs() {
    qcurves::run_example().unwrap();
}

#[test]
fn reconstruction_runs() {
    reconstruction::run_example().unwrap();
}

#[test]
fn return_times_runs() {
    return_times::run_example().unwrap();
}

#[test]
fn rotation_numbers_runs() {
    rotation_numbers::run_example().unwrap();
}

#[test]
fn transitivity_probe_runs() {
    transitivity_probe::run_example().unwrap();
}

#[test]
fn tubes_runs() {
    tubes::run_example().unwrap();
}
