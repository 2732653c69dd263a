pub mod error;
pub mod fahs;
pub mod horseshoe;
pub mod linalg;
pub mod model;
pub mod pdc;
pub mod procedure;
pub mod pvalue;
pub mod quadrature;
mod real;
pub mod realdata;
pub mod rng;
pub mod sim;
pub mod special;
pub mod twogroups;

pub use error::{Error, Result};
pub use real::Real;

pub use fahs::{run_fahs, FahsVariant};
pub use horseshoe::{gibbs_run, GibbsConfig, SigmaMode, XiMode};
pub use model::{DecisionVector, GroundTruth, ObservationVector};
pub use procedure::{run_procedure, Procedure, ProcedureConfig};

pub type ObservationVectorF64 = model::ObservationVector<f64>;
pub type ObservationVectorF32 = model::ObservationVector<f32>;
pub type GroundTruthF64 = model::GroundTruth<f64>;
pub type GroundTruthF32 = model::GroundTruth<f32>;
pub type GibbsConfigF64 = horseshoe::GibbsConfig<f64>;
pub type GibbsConfigF32 = horseshoe::GibbsConfig<f32>;
pub type PosteriorSummaryF64 = horseshoe::PosteriorSummary<f64>;
pub type PosteriorSummaryF32 = horseshoe::PosteriorSummary<f32>;
pub type FahsResultF64 = fahs::FahsResult<f64>;
pub type FahsResultF32 = fahs::FahsResult<f32>;
pub type PdcResultF64 = pdc::PdcResult<f64>;
pub type PdcResultF32 = pdc::PdcResult<f32>;
pub type SimulationSettingF64 = sim::SimulationSetting<f64>;
pub type SimulationSettingF32 = sim::SimulationSetting<f32>;
pub type ReplicationRecordF64 = sim::ReplicationRecord<f64>;
pub type ExpressionMatrixF64 = realdata::ExpressionMatrix<f64>;
pub type GeneRankingF64 = realdata::GeneRanking<f64>;
