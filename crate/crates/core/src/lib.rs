//! Worst-case pricing of finite-maturity Dynkin games (game / Israeli options)
//! when the instantaneous volatility is only known to lie in an interval.
//!
//! The value is computed on a recombining trinomial lattice whose one-step
//! transition laws form a one-parameter family; the supremum over that family
//! is attained at the two endpoints of the parameter range, which keeps the
//! backward recursion at `O(n²)`.
//!
//! Module map:
//!
//! * [`lattice`] grid geometry (log step, node prices, layer times)
//! * [`payoffs`] discounted game put / call payoffs and custom payoff triples
//! * [`uncertainty`] the admissible range of the transition parameter
//! * [`solver`] the robust backward recursion
//! * [`binomial`] single-volatility CRR comparator
//! * [`regions`] seller / buyer stopping regions and the seller boundary
//! * [`oracle`] brute-force verification on small trees

pub mod binomial;
pub mod error;
pub mod lattice;
pub mod oracle;
pub mod payoffs;
pub mod regions;
pub mod solver;
pub mod uncertainty;

pub use binomial::{crr_game_price, crr_solve, BinomialParams};
pub use error::{Error, Result};
pub use lattice::{layer_time, node_value, step_size, GridParams, LogStep};
pub use oracle::{brute_force_value, strategy_enumeration_value};
pub use payoffs::{make_discounted, validate_order, DiscountedPayoffs, GameOptionSpec, OptionKind};
pub use regions::{classify, seller_boundary, BoundaryFrame, NodeFlag, RegionFlags, StoppingRegion};
pub use solver::{continuation, solve, solve_with, value, GameValue, LatticeKind, Retention, SolveOptions, ValueGrid};
pub use uncertainty::{p_range, triple, PRange, ProbabilityTriple, VolatilityInterval};
