"""Compressed location Bloom filters for segment-level packet provenance."""

from .analysis import build_c_table, expected_fp, optimize_k2, required_m2
from .compression import compress, decompress
from .core import BloomFilter, ClbfPacket, NodeCredentials, forward_step
from .recovery import KeyStore, recover
from .segments import DomainError, SegmentSpace, SpatialMap, validate_sequence

__version__ = "0.1.0"

__all__ = [
    "BloomFilter",
    "ClbfPacket",
    "DomainError",
    "KeyStore",
    "NodeCredentials",
    "SegmentSpace",
    "SpatialMap",
    "build_c_table",
    "compress",
    "decompress",
    "expected_fp",
    "forward_step",
    "optimize_k2",
    "recover",
    "required_m2",
    "validate_sequence",
]
