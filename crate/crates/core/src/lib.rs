//! Stability regions of linear systems with discrete or distributed delays.
//!
//! A system is reduced to its characteristic function
//! `F(λ, L) = λ^q − Σ P_{k,j}(L) λ^k ĥ(λ)^j`, where `L` is a complex gain and
//! `ĥ` the Laplace transform of the delay kernel. The crate traces the curves
//! in the `L` plane on which `F` has an imaginary root ([`scc`]), labels the
//! plane by the number of unstable roots ([`regions`]), applies the result to
//! networks via their spectra ([`networks`]) and checks verdicts by direct
//! simulation ([`simulate`]).
//!
//! Everything is generic over [`scalar::Real`]; the aliases below fix `f64`.

pub mod charfun;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod networks;
pub mod poly;
pub mod regions;
pub mod scalar;
pub mod scc;
pub mod simulate;
pub mod systems;

pub use num_complex::Complex64;

pub type CharFun = charfun::CharFun<f64>;
pub type MatrixFun = charfun::MatrixFun<f64>;
pub type DelayKernel = kernels::DelayKernel<f64>;
pub type ComplexPoly = poly::ComplexPoly<f64>;
pub type Window = geometry::Window<f64>;
pub type SccBranch = scc::SccBranch<f64>;
pub type TraceOptions = scc::TraceOptions<f64>;
pub type Coverage = scc::Coverage<f64>;
pub type CrossingReport = scc::CrossingReport<f64>;
pub type NuMap = regions::NuMap<f64>;
pub type Region = regions::Region<f64>;
pub type NetworkSpec = networks::NetworkSpec<f64>;
pub type Spectrum = networks::Spectrum<f64>;
pub type MasParams = networks::MasParams<f64>;
pub type SimConfig = simulate::SimConfig<f64>;
pub type Trajectory = simulate::Trajectory<f64>;
pub type RateEstimate = simulate::RateEstimate<f64>;
pub type KuramotoParams = simulate::KuramotoParams<f64>;
pub type OaParams = simulate::OaParams<f64>;
