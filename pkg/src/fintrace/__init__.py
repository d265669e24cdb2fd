"""fintrace: two-tier unsupervised extraction of dorsal fin outlines."""

from .binary import (
    BinaryImage,
    ComponentLabels,
    bit_and,
    bit_xor,
    boundary,
    component_at_seed,
    connected_components,
    dilate,
    erode,
    largest_component,
    opening,
    threshold_apply,
    write_pbm,
)
from .chain import (
    ChainOutline,
    EndpointPair,
    Point,
    SecantGeometry,
    WalkError,
    compute_secant,
    detect_endpoints_auto,
    outline_from_dict,
    outline_to_dict,
    rescale_outline,
    validate_outline,
    walk_outline,
    write_outline_json,
    write_outline_xy,
)
from .images import (
    GrayImage,
    Histogram,
    ImageLoadError,
    Rect,
    RgbImage,
    crop,
    downsample,
    histogram,
    load_image,
    rgb_to_cyan,
    rgb_to_luma,
)
from .pipeline import (
    TraceConfig,
    TraceRequest,
    TraceResult,
    approach1,
    approach2,
    autotrace,
    preprocess,
)
from .thresholding import (
    PixelarityCurve,
    PixelarityLut,
    ThresholdChoice,
    ValleyAnalysis,
    ValleyNotFound,
    build_pixelarity_lut,
    find_valley_threshold,
    mean_pixelarity,
    pixelarity_curve,
    score_window,
    select_threshold_from_curve,
)

__version__ = "0.1.0"
