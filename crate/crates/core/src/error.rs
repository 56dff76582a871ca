use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {0:?}")]
    EmptyDims([usize; 3]),
    #[error("voxel size must be positive and finite, got {0}")]
    BadVoxelSize(f64),
    #[error("grid origin must be finite")]
    BadOrigin,
    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("label {label} at index {index} is outside the taxonomy ({classes} classes)")]
    LabelOutOfRange {
        label: u8,
        index: usize,
        classes: usize,
    },
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("voxel coordinate {coord:?} is outside dims {dims:?}")]
    CoordOutOfRange { coord: [usize; 3], dims: [usize; 3] },
    #[error("class count list is empty")]
    NoClasses,
    #[error("grids differ in {0}")]
    GeometryMismatch(&'static str),
    #[error("invalid box: {0}")]
    BadBox(String),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("invalid UTF-8 in class name")]
    BadName,
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayError {
    #[error("ray direction has zero length")]
    ZeroDirection,
    #[error("ray direction is not unit length (norm {0})")]
    NotUnit(f64),
    #[error("ray origin or direction is not finite")]
    NonFinite,
    #[error("max range must be positive, got {0}")]
    BadRange(f64),
    #[error("march step must be positive, got {0}")]
    BadStep(f64),
    #[error("invalid ray configuration: {0}")]
    Config(String),
    #[error("invalid pose: {0}")]
    BadPose(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("threshold list is empty")]
    NoThresholds,
    #[error("threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("IoU {0} outside [0, 1]")]
    BadIou(f64),
    #[error("confusion tallies differ in thresholds or class count")]
    ShapeMismatch,
    #[error("instance matching invariant violated: {0}")]
    NotDisjoint(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scene spec: {0}")]
    Spec(String),
    #[error("could not place {n_boxes} boxes without overlap for seed {seed}")]
    Placement { seed: u64, n_boxes: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Ray(#[from] RayError),
}
