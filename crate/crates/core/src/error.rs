use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variants are grouped by the module
/// that raises them; `Display` text is prefixed with that module's name so
/// the CLI can forward it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("potential: invalid parameter {name} = {value} ({reason})")]
    InvalidPotential { name: &'static str, value: f64, reason: &'static str },
    #[error("potential: radius must be positive, got {r}")]
    NonPositiveRadius { r: f64 },
    #[error("potential: radius {r} lies below the first tabulated point {first}")]
    BelowTable { r: f64, first: f64 },
    #[error("potential: tabulated tail violates the short-range contract at r = {r} (|V|r² = {value:e})")]
    LongRangeTail { r: f64, value: f64 },
    #[error("potential: features at r = {first} and r = {second} are closer than 3 grid points")]
    GridTooCoarse { first: f64, second: f64 },
    #[error("potential: energy must be positive, got {energy}")]
    NonPositiveEnergy { energy: f64 },

    #[error("radialsolver: invalid grid ({reason})")]
    InvalidGrid { reason: String },
    #[error(
        "radialsolver: local wavelength {wavelength:.3e} at r = {r:.4} spans fewer than 6 grid steps (step {step:.3e})"
    )]
    StepTooCoarse { r: f64, wavelength: f64, step: f64 },
    #[error("radialsolver: invalid energy window [{lo}, {hi}] ({reason})")]
    InvalidWindow { lo: f64, hi: f64, reason: &'static str },
    #[error("radialsolver: {found} bound states in window exceed the requested maximum {n_max}")]
    TooManyStates { found: usize, n_max: usize },

    #[error("scattering: matching radius {r_match} lies inside the potential range {range}")]
    MatchInsideRange { r_match: f64, range: f64 },
    #[error("scattering: grid ends at {r_max} but needs {required} for matching at k = {k}")]
    GridTooShort { r_max: f64, required: f64, k: f64 },
    #[error("scattering: ill-conditioned match at r = {r_match}")]
    IllConditionedMatch { r_match: f64 },
    #[error(
        "scattering: unresolvable phase jump of {jump:.3} rad between E = {e_lo} and {e_hi} after maximum refinement"
    )]
    UnresolvedJump { e_lo: f64, e_hi: f64, jump: f64 },
    #[error("scattering: energy {energy} outside curve range [{lo}, {hi}]")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },
    #[error("scattering: invalid energy grid ({reason})")]
    InvalidEnergyGrid { reason: String },

    #[error("resonance: no resonant structure detected ({reason})")]
    NoResonantStructure { reason: String },
    #[error("resonance: fit did not converge within {iterations} iterations")]
    FitNotConverged { iterations: usize },
    #[error("resonance: insufficient data ({found} points, need {needed})")]
    InsufficientData { found: usize, needed: usize },
    #[error("resonance: phase rise {rise:.4} rad is below 0.9π")]
    InsufficientRise { rise: f64 },
    #[error("resonance: background fit residual {residual:.4} rad exceeds 0.05 rad")]
    BackgroundNotSlow { residual: f64 },
    #[error("resonance: negative cross section {value} at E = {energy}")]
    NegativeCrossSection { energy: f64, value: f64 },

    #[error("timedelay: need at least {needed} points, got {found}")]
    TooFewPoints { found: usize, needed: usize },
    #[error("timedelay: causality bound is only defined for full-scattering delays")]
    HalfScatteringBound,
    #[error("timedelay: interaction range must be positive, got {range}")]
    InvalidRange { range: f64 },

    #[error("photo: dipole selection rule violated ({initial} -> {final_ell})")]
    SelectionRule { initial: u32, final_ell: u32 },
    #[error("photo: continuum normalization failed at E = {energy} (amplitude spread {spread:.3e})")]
    NormalizationFailure { energy: f64, spread: f64 },
    #[error("photo: no Cooper minimum detected (no sign change of the dipole matrix element)")]
    NoCooperMinimum,
    #[error("photo: non-positive cross section {value} at E = {energy}; cannot take log")]
    NonPositiveSigma { energy: f64, value: f64 },
    #[error("photo: no bound state with {nodes} nodes for ell = {ell}")]
    MissingBoundState { ell: u32, nodes: usize },

    #[error("wkb: no barrier at E = {energy} (barrier top {top})")]
    NoBarrier { energy: f64, top: f64 },
    #[error("wkb: effective curve has no barrier feature")]
    BarrierAbsent,
    #[error("wkb: no classically allowed region inside the barrier at E = {energy}")]
    NoInnerRegion { energy: f64 },
}
