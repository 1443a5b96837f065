//! Spectrally localized wave kernels, their envelopes and norms.

pub mod bump;
pub mod dyadic;
pub mod envelope;
pub mod lemma;
pub mod norms;
pub mod propagator;
pub mod subordination;
pub mod sweep;

pub use bump::{list_presets, BumpFunction, BumpPreset, SupportClass};
pub use dyadic::{dyadic_bound, dyadic_decomposition, dyadic_l1_report, piece_decay, Cutoff, DyadicPiece, DyadicReport, DyadicRow, Symbol};
pub use envelope::{envelope_g, envelope_h, pair_envelope};
pub use lemma::{lemma_report, n_integral, LemmaReport, LemmaRow};
pub use norms::{gradient_l1_norm, multiplier_l1_norm, radial_l1, shell_monte_carlo, shell_monte_carlo_value, sup_norm, weighted_l1_norm, L1Norm, McOptions, WeightKind};
pub use propagator::{gradient_wave_kernel, wave_kernel, Flavor, TimeScale, WaveKernel, WaveKernelSpec, WaveMultiplier};
pub use subordination::{corollary_norm, default_f, subordination_kernel, CorollaryRow, FourierProfile, SubordinationRow};
pub use sweep::{
    gradient_bound, gradient_branch, l1_bound, l1_branch, sup_bound, sup_norm_check, sweep_gradient, sweep_l1, verify_envelope_g, verify_envelope_h, Branch, Check, EnvelopeGrid, SweepReport, SweepRow, TRegressor,
};
