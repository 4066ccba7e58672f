"""Conditional encoder-decoder surrogate for powder-bed sintering fields."""

from ._ynet import (
    Condition,
    FormatError,
    IoError,
    Model,
    RangeError,
    ShapeError,
    WeightsFormatError,
    bed_surface_row,
    crop_count,
    dataset_pair_count,
    derive_seed,
    global_accuracy,
    lhs_sample,
    load_dataset,
    oracle_schedule,
    rain_deposit,
    read_pgm,
    simulate_component,
    sinter_oracle,
    tile_offsets,
    write_pgm,
)

__all__ = [
    "Condition",
    "FormatError",
    "IoError",
    "Model",
    "RangeError",
    "ShapeError",
    "WeightsFormatError",
    "bed_surface_row",
    "crop_count",
    "dataset_pair_count",
    "derive_seed",
    "global_accuracy",
    "lhs_sample",
    "load_dataset",
    "oracle_schedule",
    "rain_deposit",
    "read_pgm",
    "simulate_component",
    "sinter_oracle",
    "tile_offsets",
    "write_pgm",
]
