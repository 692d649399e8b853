//! Experiment orchestration: configs, sweeps, comparison tables, CSV.
