//! Stand-alone implementations and numerical verifications of the explicit
//! analytic objects: heat trace gain, Fokker-Planck Green function,
//! parabolic symmetrizer and Hardy inequalities.

pub mod fokker_planck;
pub mod hardy;
pub mod heat;
pub mod quad;
pub mod symmetrizer;

pub use fokker_planck::{fp_conormal_bound, fp_evolve, DriftRate, Extension, FpEvolution, Profile1D};
pub use hardy::{hardy_check, standard_corpus};
pub use heat::{heat_trace_gain, mode_grid};
pub use quad::{clenshaw_curtis, integrate};
pub use symmetrizer::{
    default_delta_grid, sample_compact_set, symmetrizer, verify_family, CompactSetParams,
    FamilyReport, ParabolicSymbolPoint, SymmetrizerResult,
};
