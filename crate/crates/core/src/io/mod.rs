//! Run configuration and table emission.

mod config;
mod emit;

pub use config::{
    AxisEntry, Options, Params, PhysicalSection, ReducedSection, RunConfig, SweepSection, DEFAULT_REDUCED,
};
pub use emit::{
    emit, format_float, load, read_csv, read_json, sidecar_path, write_csv, write_json, write_table, Format,
};
