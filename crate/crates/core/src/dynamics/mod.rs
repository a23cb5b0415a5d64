//! Dynamical maps from time-local generators.

pub mod kernel;
pub mod model;
pub mod ode;
pub mod scalar;
pub mod superop;
pub mod trajectory;

pub use kernel::{solve_memory_kernel, KernelSolution, MemoryKernel};
pub use model::{GeneratorModel, GkslGenerator, HamiltonianTerm, NoiseTerm, OmegaFamily, SpinBoson};
pub use ode::OdeOptions;
pub use scalar::ScalarFn;
pub use superop::Superoperator;
pub use trajectory::{evolve, Backend, TimeGrid, Trajectory};
