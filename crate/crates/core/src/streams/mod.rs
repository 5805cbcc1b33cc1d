//! Stream sources: seeded synthetic generators and real-dataset loaders.

pub mod loaders;
pub mod synthetic;

pub use loaders::{
    batch_windows, load_air_quality, load_gsadd, load_water_quality, read_gas_records,
    read_water_records, standardize, AirQuality, GasConfig, GasRecord, WaterRecord,
};
pub use synthetic::{
    gen_ds1, gen_rotating_hyperplane, halve_stream, inject_label_noise, BaseGenerator, Ds1Spec,
    HyperplaneSpec, SyntheticSpec,
};
