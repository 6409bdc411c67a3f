"""
Direct-sum operator algebra.

Components:
- BlockOperator: operator on H_d (+) H_d^perp held as four blocks
- block_mul / block_add / block_adjoint / block_trace: the block algebra
- to_dense / from_dense: conversion to the flattened 2d-dimensional space
- codec: JSON wire format for matrices and block operators
"""

from src.linalg.block_operator import (
    BlockOperator,
    ComplexMatrix,
    block_add,
    block_adjoint,
    block_allclose,
    block_mul,
    block_trace,
    box_plus,
    direct_sum,
    from_dense,
    is_positive,
    scale,
    to_dense,
)
from src.linalg.codec import BlockPayload, decode_block, encode_block

__all__ = [
    "BlockOperator",
    "ComplexMatrix",
    "block_add",
    "block_adjoint",
    "block_allclose",
    "block_mul",
    "block_trace",
    "box_plus",
    "direct_sum",
    "from_dense",
    "is_positive",
    "scale",
    "to_dense",
    "BlockPayload",
    "decode_block",
    "encode_block",
]
