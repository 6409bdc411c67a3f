"""
Dense tensor-product oracle for the recovery protocol (system (x) ancilla qubit).
"""

from src.oracle.dense_pipeline import (
    DensePipeline,
    block_to_tensor_order,
    dense_embed,
    dense_outer_measurement,
    dense_quasi_copy,
    dense_recovery,
    embedding_isometry,
    ket0,
    ket1,
    ketbra,
    run_dense_pipeline,
    sigma_z,
    tensor_to_block_order,
)

__all__ = [
    "DensePipeline",
    "block_to_tensor_order",
    "dense_embed",
    "dense_outer_measurement",
    "dense_quasi_copy",
    "dense_recovery",
    "embedding_isometry",
    "ket0",
    "ket1",
    "ketbra",
    "run_dense_pipeline",
    "sigma_z",
    "tensor_to_block_order",
]
