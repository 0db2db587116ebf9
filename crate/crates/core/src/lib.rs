//! Weighted pure simplicial complexes with their up/down averaging operators,
//! higher-order walks, Fourier-style level decompositions, and the numerical
//! analysis layer (local-spectral expansion, pseudorandomness, theorem checks)
//! built on top of them.
//!
//! Levels are indexed by vertex count: `X(0) = {∅}`, `X(1)` the vertices, and
//! `X(d)` the top faces of a `d`-dimensional complex. Every level carries a
//! probability measure `π_i` obtained from the normalized top weights by
//! repeated facet averaging, and all inner products are `π`-weighted.

pub mod analysis;
pub mod complex;
pub mod decompose;
pub mod error;
pub mod face;
pub mod function;
pub mod generators;
pub mod io;
pub mod linmap;
pub mod localization;
pub mod spectral;
pub mod walks;

pub use analysis::{
    anti_tribes_experiment, check_bourgain, check_expansion_theorem, check_hypercontractivity,
    check_level_i, check_noise_hypercontractivity, check_noise_sensitivity, pseudorandomness,
    AntiTribesParams, PseudorandomnessReport, TheoremVerdict, TribesMode, VerdictStatus,
};
pub use complex::{Link, SimplicialComplex};
pub use decompose::{BasisKind, Decomposition, HdBasis};
pub use error::{HdxError, Result};
pub use face::{Face, VertexId};
pub use io::{
    read_complex, read_complex_path, read_function, read_operator, write_complex,
    write_complex_path, write_decomposition, write_function, write_operator, write_verdict,
};
pub use function::FaceFunction;
pub use linmap::LinearMap;
pub use spectral::{
    approximate_eigenvalues, measure_gamma, st_rank, LinkSpectrum, SpectralProfile, Strip,
    StripReport,
};
pub use walks::{Step, WalkSpec, WalkTerm};
