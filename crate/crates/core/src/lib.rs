mod bits;
pub mod cli;
pub mod compressor;
pub mod harness;
pub mod infodist;
pub mod kg;
pub mod mdl;
pub mod metrics;
pub mod net;
