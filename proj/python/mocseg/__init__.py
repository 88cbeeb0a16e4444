"""Text-line segmentation of binarized handwritten pages."""

from ._mocseg import (
    CapacityError,
    DomainError,
    FormatError,
    IoError,
    ParseError,
    PlacementError,
    build_kernel,
    enhance,
    evaluate,
    evaluate_labels,
    generate_page,
    height_stats,
    ligature_log_cost,
    linearity_weight,
    load_binary_image,
    minimize_labeling,
    polygons_from_labels,
    random_page,
    read_page_xml,
    read_raw_labels,
    segment,
    write_page_xml,
    write_raw_labels,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
