//! Experiment drivers: configuration, deterministic seeding, and the BER,
//! radar, PAPR and aliasing-check runners behind the CLI.

pub mod alias_run;
pub mod ber;
pub mod config;
pub mod papr;
pub mod radar_run;
pub mod seeds;

pub use alias_run::{run_alias_check, AliasCase, ALIAS_TOLERANCE};
pub use ber::{ebn0_at_ber, noise_variance, run_ber, write_ber_csv, BerRecord};
pub use config::ExperimentConfig;
pub use papr::{run_papr, write_papr_csv, PaprResult};
pub use radar_run::{run_radar, write_radar_outputs, RadarRun};
