//! Discrimination of quantum channels under causally structured strategies,
//! with rigorously certified bounds.
//!
//! Given an ensemble of channels (each with a prior), the crate computes the
//! maximal probability of identifying which channel acted when the unknown
//! channel may be used twice, under four nested classes of strategies:
//!
//! * **parallel** — both uses happen side by side on one entangled probe;
//! * **sequential** — the uses happen in a fixed order, with arbitrary
//!   processing in between (either order separately);
//! * **causally separable** — probabilistic mixtures of the two orders;
//! * **general** — all two-slot quantum supermaps, including those with
//!   indefinite causal order.
//!
//! Each class is a semidefinite program over two-slot testers whose
//! normalization ranges over the matching class of process matrices. The
//! bundled interior-point solver ([`sdp`]) produces high-accuracy primal and
//! dual witnesses, and the certification layer ([`certify`]) converts them
//! into *exact* rational lower and upper bounds on the optimal success
//! probability, verified in arithmetic over ℚ(√d) with no floating-point
//! trust anywhere in the accept path.
//!
//! The strategy classes are strictly nested, and for well-chosen ensembles
//! (amplitude damping vs. bit flip, or two amplitude-damping channels) every
//! inclusion is strict — the certified bounds are sharp enough to separate
//! all four values.
//!
//! # Crate layout
//!
//! * [`exact`] — ℚ(√d) scalars, radical sums, exact PSD tests, η-searches;
//! * [`tensor`] — labeled tensor spaces, partial trace, link product;
//! * [`channels`] — channel families, Choi matrices, ensembles, sampling;
//! * [`strategies`] — process/tester subspace projectors for each class;
//! * [`sdp`] — dense complex interior-point solver and problem builders;
//! * [`certify`] — exact bound certification and certificate (de)serialization;
//! * [`scan`] — batch censuses over sampled pairs and parameter sweeps.

pub mod certify;
pub mod channels;
pub mod exact;
pub mod scan;
pub mod sdp;
pub mod strategies;
pub mod tensor;
