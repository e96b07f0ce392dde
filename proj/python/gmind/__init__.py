"""MIND / G-MIND deformable registration for 2D grayscale images."""

from ._gmind import (
    GmindError,
    InternalError,
    apply_affine,
    default_spec_json,
    edge_mask,
    generate_dataset,
    gradient,
    load_image,
    mind_descriptor,
    read_gmdf,
    register,
    registration_error_map,
    save_image,
    set_num_threads,
    similarity_map,
    tre,
    warp,
    write_gmdf,
)

__all__ = [
    "GmindError",
    "InternalError",
    "apply_affine",
    "default_spec_json",
    "edge_mask",
    "generate_dataset",
    "gradient",
    "load_image",
    "mind_descriptor",
    "read_gmdf",
    "register",
    "registration_error_map",
    "save_image",
    "set_num_threads",
    "similarity_map",
    "tre",
    "warp",
    "write_gmdf",
]
