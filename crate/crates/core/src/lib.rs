//! Numerical workbench for Lagrangian submanifolds in complex space forms.
//!
//! The crate evaluates the pointwise geometry of closed-form Lagrangian
//! immersions with exact jet differentiation, cross-checks the structural
//! identities, integrates energy functionals, and runs the sixth-order
//! graph flow on periodic domains.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod complex;
pub mod error;
pub mod expr;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod graph;
pub mod immersions;
pub mod jet;
pub mod maslov;
pub mod quadrature;
pub mod spectral;
pub mod tensor;
pub mod verify;

pub use ambient::{AmbientPointData, AmbientSpace, ChartKind};
pub use complex::CJet;
pub use error::{Error, Result};
pub use expr::Expr;
pub use flow::{FlowConfig, FlowState, RunStatus, RunSummary, Scheme};
pub use functionals::FunctionalReport;
pub use geometry::{point_frame, PointFrame};
pub use graph::GraphFourthOrder;
pub use immersions::{ChartPoint, Domain, EmbeddingJet, Immersion, ImmersionSpec};
pub use jet::{Elementary, Jet};
pub use maslov::{LiLi, MaslovFrame};
pub use quadrature::{GridSpec, QuadratureGrid};
pub use verify::{CheckRow, Suite, VerifyReport};
