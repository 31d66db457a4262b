"""Spectral mapping on textured 3D models: calibration, spectral cubes and
spectral-angle classification."""

from ._specmap import (
    NO_FACE,
    UNCLASSIFIED,
    UNDEFINED_ANGLE,
    ValidationError,
    __version__,
    build_cube,
    calibrate,
    calibrate_uvf,
    calibrate_vis,
    classify,
    classify_multi,
    decode_rle_rows,
    encode_rle_rows,
    load_mesh,
    make_fixture,
    patch_median,
    rasterize_occupancy,
    read_texture,
    sam_map,
    spectral_angle,
    threshold_region,
    uv_to_texel,
    write_pfm,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
