"""
Random states and measurement families.

Standard random-matrix constructions, fully determined by a numpy Generator:
- Haar-random pure states and unitaries
- Normalized Wishart mixed states
- Ginibre POVMs normalized by (sum G^dag G)^(-1/2)
"""
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import linalg as sla

from src.matrices import ComplexMatrix, psd_inv_sqrt
from src.quantum.states import DensityMatrix


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    """Matrix of i.i.d. standard complex Gaussians."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar unitary via QR of a Ginibre matrix with phase correction."""
    q, r = sla.qr(ginibre(dim, dim, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def haar_pure_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    return DensityMatrix.from_pure(ginibre(dim, 1, rng))


def wishart_mixed_state(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """G G^dag / tr(G G^dag) with G of shape dim x rank (full rank by default)."""
    g = ginibre(dim, rank or dim, rng)
    w = g @ g.conj().T
    return DensityMatrix.from_unnormalized(w)


def random_povm(dim: int, n: int, rng: np.random.Generator) -> List[ComplexMatrix]:
    """M_nu = G_nu (sum_mu G_mu^dag G_mu)^(-1/2), complete by construction."""
    gs = [ginibre(dim, dim, rng) for _ in range(n)]
    total = sum(g.conj().T @ g for g in gs)
    norm = psd_inv_sqrt(total)
    return [g @ norm for g in gs]


def projective_family(dim: int, n: int) -> List[ComplexMatrix]:
    """Computational-basis projectors; basis index i goes to outcome i mod n."""
    ops = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(n)]
    for i in range(dim):
        ops[i % n][i, i] = 1.0
    return ops


def unitary_family(dim: int, n: int, rng: np.random.Generator) -> List[ComplexMatrix]:
    """M_nu = U_nu / sqrt(n) with Haar unitaries; every M^dag M equals 1/n."""
    return [haar_unitary(dim, rng) / np.sqrt(n) for _ in range(n)]


STATE_FAMILIES: Dict[str, Callable[[int, np.random.Generator], DensityMatrix]] = {
    "random_pure": haar_pure_state,
    "random_mixed": wishart_mixed_state,
    "maximally_mixed": lambda dim, rng: DensityMatrix.maximally_mixed(dim),
}

MEASUREMENT_FAMILIES: Dict[str, Callable[[int, int, np.random.Generator], List[ComplexMatrix]]] = {
    "random_povm": random_povm,
    "projective": lambda dim, n, rng: projective_family(dim, n),
    "unitary": unitary_family,
}
