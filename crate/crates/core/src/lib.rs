//! Hard-core model analysis on graphs with locally sparse neighbourhoods.
//!
//! * [`graph`]: graphs, file formats and the local triangle-sparsity audit.
//! * [`exact`]: partition function, marginals and uncovered-neighbour
//!   expectations by exact enumeration, with checks of the occupancy
//!   inequalities they satisfy.
//! * [`sampler`]: Glauber dynamics for graphs beyond enumeration.
//! * [`bounds`]: Lambert W, the balance equation for `z`, occupancy lower
//!   bounds and fractional colouring weights.
//! * [`fractional`]: exact fractional chromatic number and certificate checks.
//! * [`generators`]: random regular graphs, blow-ups and named families.
//! * [`experiment`]: batch runs producing JSON/CSV reports.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fractional;
pub mod generators;
pub mod graph;
pub mod lambert;
mod ratio_serde;
pub mod sampler;
pub mod simplex;

pub use error::{BoundsError, ExactError, FractionalError, GenError, GraphError, SamplerError};
pub use exact::Fugacity;
pub use graph::{audit, load_graph, Graph, GraphFormat, SparsityAudit};
