"""Affinity of permutations of finite affine spaces F_q^n."""

__version__ = "0.1.0"

from .affinity import (AffinityState, Permutation, Verdict, affinity_profile, compute_vf,
                       count_affinity, k_affinity, threshold_check, transposition_formula)
from .field import FieldSpec, make_field
from .geometry import Flat, Space, Subspace, count_flats, enumerate_flats, qbinom

__all__ = [
    "AffinityState", "Permutation", "Verdict", "affinity_profile", "compute_vf",
    "count_affinity", "k_affinity", "threshold_check", "transposition_formula",
    "FieldSpec", "make_field", "Flat", "Space", "Subspace", "count_flats",
    "enumerate_flats", "qbinom",
]
