# app/modules/data/__init__.py
from .types import ShapeKind
from .schemas import ManifestEntry, Sample, ShapeSpec, SynthConfig, SyntheticScene
from .netpbm import (
    decode_pgm,
    decode_ppm,
    encode_pgm,
    encode_ppm,
    read_pgm,
    read_ppm,
    write_pgm,
    write_ppm,
)
from .manifest import (
    MANIFEST_NAME,
    load_manifest,
    load_sample,
    read_manifest,
    resolve_manifest,
    write_manifest,
)
from .synthetic import (
    BACKGROUND_COLOR,
    class_color,
    class_names,
    dataset_mean_rgb,
    generate_scene,
    generate_synthetic,
    iter_scenes,
    render_labels,
    shape_kind,
    shape_mask,
)

__all__ = [
    "ShapeKind",
    "ManifestEntry",
    "Sample",
    "ShapeSpec",
    "SynthConfig",
    "SyntheticScene",
    "decode_pgm",
    "decode_ppm",
    "encode_pgm",
    "encode_ppm",
    "read_pgm",
    "read_ppm",
    "write_pgm",
    "write_ppm",
    "MANIFEST_NAME",
    "load_manifest",
    "load_sample",
    "read_manifest",
    "resolve_manifest",
    "write_manifest",
    "BACKGROUND_COLOR",
    "class_color",
    "class_names",
    "dataset_mean_rgb",
    "generate_scene",
    "generate_synthetic",
    "iter_scenes",
    "render_labels",
    "shape_kind",
    "shape_mask",
]
