use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("amplitude too low on measurement circle (min/max = {ratio:.3e}); winding undefined")]
    AmplitudeTooLow { ratio: f64 },
    #[error("undersampled: {0}")]
    Undersampled(String),
    #[error("negative radicand {value:.6e} m^2 at pinhole {index}; design infeasible")]
    NegativeRadicand { index: usize, value: f64 },
    #[error("overlapping pinholes: {}", format_pairs(.pairs))]
    Overlap { pairs: Vec<(usize, usize)> },
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("extent: {0}")]
    Extent(String),
    #[error("window: {0}")]
    Window(String),
    #[error("spectrum has zero total power")]
    ZeroPower,
    #[error("pinhole {index} Fresnel number {fresnel:.4} exceeds {limit}; use the quadrature oracle")]
    FresnelNumber { index: usize, fresnel: f64, limit: f64 },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("no stripe pattern found along the requested direction")]
    NoPattern,
    #[error("format: {0}")]
    Format(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used by the command line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Construction,
    Physics,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Format(_) => ErrorClass::Config,
            Error::InvalidArgument(_) | Error::NegativeRadicand { .. } | Error::Overlap { .. } => {
                ErrorClass::Construction
            }
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Physics,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::AmplitudeTooLow { .. } => "amplitude_too_low",
            Error::Undersampled(_) => "undersampled",
            Error::NegativeRadicand { .. } => "negative_radicand",
            Error::Overlap { .. } => "overlap",
            Error::Resolution(_) => "resolution",
            Error::Extent(_) => "extent",
            Error::Window(_) => "window",
            Error::ZeroPower => "zero_power",
            Error::FresnelNumber { .. } => "fresnel_number",
            Error::Geometry(_) => "geometry",
            Error::NoPattern => "no_pattern",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

fn format_pairs(pairs: &[(usize, usize)]) -> String {
    const SHOWN: usize = 8;
    let mut s = pairs
        .iter()
        .take(SHOWN)
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ");
    if pairs.len() > SHOWN {
        s.push_str(&format!(" and {} more", pairs.len() - SHOWN));
    }
    s
}
