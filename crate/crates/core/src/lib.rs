//! Spreading speeds, propagation direction and critical mobility for a
//! two-component epidemic model with nonlocal dispersal,
//!
//! ```text
//! u_t = k1 * u - u - alpha u + h(v)
//! v_t = k2 * v - v - beta  v + g(u)
//! ```
//!
//! together with a method-of-lines simulator used to check the analytic
//! predictions. All numerical code is generic over [`Scalar`] (`f32`/`f64`);
//! the aliases at the crate root fix the scalar to `f64`.

pub mod dispersion;
pub mod dynamics;
pub mod kernels;
pub mod roots;
pub mod scalar;
pub mod special;

pub use scalar::Scalar;

pub type Kernel = kernels::Kernel<f64>;
pub type Tabulated = kernels::Tabulated<f64>;
pub type Nonlinearity = dispersion::Nonlinearity<f64>;
pub type ModelParams = dispersion::ModelParams<f64>;
pub type DispersionSystem = dispersion::DispersionSystem<f64>;
pub type SpeedProfile = dispersion::SpeedProfile<f64>;
pub type Grid = dynamics::Grid<f64>;
pub type FieldState = dynamics::FieldState<f64>;
pub type FrontTrace = dynamics::FrontTrace<f64>;
pub type InitialData = dynamics::InitialData<f64>;
pub type Simulator = dynamics::Simulator<f64>;
pub type SimConfig = dynamics::SimConfig<f64>;

pub type Kernel32 = kernels::Kernel<f32>;
pub type DispersionSystem32 = dispersion::DispersionSystem<f32>;
