pub mod dcfp;
pub mod distributions;
pub mod error;
pub mod extensions;
pub mod harness;
pub mod rng;
pub mod sandwich;
pub mod walk;
