from tabletop_pose.dataset.archive import ArchiveEntry, assign_splits, build_archive
from tabletop_pose.dataset.image import DEFAULT_SHIFTS, apply_mask, resize_half, shift_augment, shift_image
from tabletop_pose.dataset.manifest import (
    MANIFEST_COLUMNS,
    MANIFEST_NAME,
    Manifest,
    ManifestRow,
    load_samples,
    sample_from_row,
)
from tabletop_pose.dataset.naming import (
    ImageName,
    augmented_name,
    format_filename,
    mask_name_for,
    parse_filename,
)
from tabletop_pose.dataset.pgm import (
    decode_pgm,
    encode_pgm,
    quantize,
    read_pgm,
    read_unit_image,
    write_pgm,
    write_unit_image,
)
from tabletop_pose.dataset.sample import Sample
from tabletop_pose.dataset.synth import InstanceShape, SynthConfig, render_silhouette, synth_generate

__all__ = [
    # Samples
    "Sample",
    # PGM
    "decode_pgm",
    "encode_pgm",
    "quantize",
    "read_pgm",
    "read_unit_image",
    "write_pgm",
    "write_unit_image",
    # Preprocessing
    "DEFAULT_SHIFTS",
    "apply_mask",
    "resize_half",
    "shift_augment",
    "shift_image",
    # Naming
    "ImageName",
    "augmented_name",
    "format_filename",
    "mask_name_for",
    "parse_filename",
    # Manifest
    "MANIFEST_COLUMNS",
    "MANIFEST_NAME",
    "Manifest",
    "ManifestRow",
    "load_samples",
    "sample_from_row",
    # Archives
    "ArchiveEntry",
    "assign_splits",
    "build_archive",
    # Synthesis
    "InstanceShape",
    "SynthConfig",
    "render_silhouette",
    "synth_generate",
]
