"""
Block operator algebra on H_d (+) H_d^perp.

An operator on the direct sum is held as four d x d blocks:

    [[diag_top, off_top],
     [off_bot,  diag_bot]]

so that A (+) B has A, B on the diagonal and C [+] D has C mapping H_d^perp -> H_d
(``off_top``) and D mapping H_d -> H_d^perp (``off_bot``). Dense layout: indices
0..d-1 span H_d and d..2d-1 span H_d^perp.

Absent blocks are stored as ``None`` and mean an exact zero. Every operation
propagates ``None`` structurally, so products of pure (+) / pure [+] operands
keep exactly-zero blocks without any tolerance.
"""
from typing import Dict, Iterable, Optional, Union

import numpy as np
from scipy import linalg as sla

from src.config import config
from src.errors import DimensionMismatchError, NonHermitianError
from src.matrices import ComplexMatrix, hermitize, hermiticity_residual as dense_hermiticity_residual

Scalar = Union[int, float, complex]

BLOCK_NAMES = ("diag_top", "diag_bot", "off_top", "off_bot")


def _canonical_block(m, dim: int, name: str) -> Optional[ComplexMatrix]:
    """Copy a block to read-only complex128, mapping exact zeros to None."""
    if m is None:
        return None
    arr = np.array(m, dtype=np.complex128)
    if arr.size == 1 and dim == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (dim, dim):
        raise DimensionMismatchError(
            f"Block '{name}' has shape {arr.shape}, expected ({dim}, {dim})",
            details={"block": name, "shape": list(arr.shape), "dim": dim},
        )
    if not arr.any():
        return None
    arr.setflags(write=False)
    return arr


def _product(a: Optional[ComplexMatrix], b: Optional[ComplexMatrix]) -> Optional[ComplexMatrix]:
    if a is None or b is None:
        return None
    return a @ b


def _sum(terms: Iterable[Optional[ComplexMatrix]]) -> Optional[ComplexMatrix]:
    present = [t for t in terms if t is not None]
    if not present:
        return None
    total = present[0].copy()
    for t in present[1:]:
        total = total + t
    return total


class BlockOperator:
    """Immutable operator on H_d (+) H_d^perp stored as four d x d blocks."""

    __slots__ = ("_dim", "_blocks")

    def __init__(
        self,
        dim: int,
        diag_top: Optional[ComplexMatrix] = None,
        diag_bot: Optional[ComplexMatrix] = None,
        off_top: Optional[ComplexMatrix] = None,
        off_bot: Optional[ComplexMatrix] = None,
    ):
        """
        Build a block operator.

        Args:
            dim: Dimension d of H_d (and of H_d^perp)
            diag_top: A of A (+) B, acting H_d -> H_d
            diag_bot: B of A (+) B, acting H_d^perp -> H_d^perp
            off_top: C of C [+] D, acting H_d^perp -> H_d
            off_bot: D of C [+] D, acting H_d -> H_d^perp

        Raises:
            DimensionMismatchError: If dim < 1 or any block is not d x d
        """
        if int(dim) < 1:
            raise DimensionMismatchError(f"Block dimension must be positive, got {dim}")
        self._dim = int(dim)
        raw = {
            "diag_top": diag_top,
            "diag_bot": diag_bot,
            "off_top": off_top,
            "off_bot": off_bot,
        }
        self._blocks: Dict[str, Optional[ComplexMatrix]] = {
            name: _canonical_block(raw[name], self._dim, name) for name in BLOCK_NAMES
        }

    # ------------------------------------------------------------------ #
    # Construction helpers
    # ------------------------------------------------------------------ #

    @classmethod
    def identity(cls, dim: int) -> "BlockOperator":
        """1 (+) 1."""
        eye = np.eye(dim, dtype=np.complex128)
        return cls(dim, diag_top=eye, diag_bot=eye)

    @classmethod
    def zeros(cls, dim: int) -> "BlockOperator":
        """The zero operator (all blocks absent)."""
        return cls(dim)

    # ------------------------------------------------------------------ #
    # Block access
    # ------------------------------------------------------------------ #

    @property
    def dim(self) -> int:
        return self._dim

    def raw_block(self, name: str) -> Optional[ComplexMatrix]:
        """Stored block, or None when it is structurally zero."""
        return self._blocks[name]

    def _dense_block(self, name: str) -> ComplexMatrix:
        block = self._blocks[name]
        if block is None:
            return np.zeros((self._dim, self._dim), dtype=np.complex128)
        return block

    @property
    def diag_top(self) -> ComplexMatrix:
        return self._dense_block("diag_top")

    @property
    def diag_bot(self) -> ComplexMatrix:
        return self._dense_block("diag_bot")

    @property
    def off_top(self) -> ComplexMatrix:
        return self._dense_block("off_top")

    @property
    def off_bot(self) -> ComplexMatrix:
        return self._dense_block("off_bot")

    @property
    def is_pure_direct_sum(self) -> bool:
        """True when both off-diagonal blocks are exactly zero."""
        return self._blocks["off_top"] is None and self._blocks["off_bot"] is None

    @property
    def is_pure_box_plus(self) -> bool:
        """True when both diagonal blocks are exactly zero."""
        return self._blocks["diag_top"] is None and self._blocks["diag_bot"] is None

    # ------------------------------------------------------------------ #
    # Operators
    # ------------------------------------------------------------------ #

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        return block_mul(self, other)

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return block_add(self, other)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return block_add(self, scale(other, -1.0))

    def __neg__(self) -> "BlockOperator":
        return scale(self, -1.0)

    def __mul__(self, factor: Scalar) -> "BlockOperator":
        return scale(self, factor)

    __rmul__ = __mul__

    def adjoint(self) -> "BlockOperator":
        return block_adjoint(self)

    def trace(self) -> complex:
        return block_trace(self)

    def to_dense(self) -> ComplexMatrix:
        return to_dense(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockOperator):
            return NotImplemented
        if self._dim != other._dim:
            return False
        for name in BLOCK_NAMES:
            a, b = self._blocks[name], other._blocks[name]
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b):
                return False
        return True

    __hash__ = None

    def __repr__(self) -> str:
        present = [name for name in BLOCK_NAMES if self._blocks[name] is not None]
        if self.is_pure_direct_sum and not self.is_pure_box_plus:
            kind = "direct_sum"
        elif self.is_pure_box_plus and not self.is_pure_direct_sum:
            kind = "box_plus"
        elif not present:
            kind = "zero"
        else:
            kind = "mixed"
        return f"<BlockOperator dim={self._dim} kind={kind} blocks={present}>"


def direct_sum(a: ComplexMatrix, b: ComplexMatrix) -> BlockOperator:
    """A (+) B: block-diagonal operator."""
    a = np.asarray(a)
    dim = 1 if a.size == 1 else a.shape[0]
    return BlockOperator(dim, diag_top=a, diag_bot=b)


def box_plus(c: ComplexMatrix, d: ComplexMatrix) -> BlockOperator:
    """C [+] D: off-diagonal operator, C on top-right and D on bottom-left."""
    c = np.asarray(c)
    dim = 1 if c.size == 1 else c.shape[0]
    return BlockOperator(dim, off_top=c, off_bot=d)


def _check_same_dim(x: BlockOperator, y: BlockOperator) -> None:
    if x.dim != y.dim:
        raise DimensionMismatchError(
            f"Block dimensions differ: {x.dim} vs {y.dim}",
            details={"left": x.dim, "right": y.dim},
        )


def block_mul(x: BlockOperator, y: BlockOperator) -> BlockOperator:
    """
    Product of two block operators.

    Each output block is the sum of the product rules for the direct-sum
    algebra, e.g. (A (+) B)(C [+] D) = (AC) [+] (BD) and
    (A [+] B)(C [+] D) = (AD) (+) (BC). Terms with an absent factor are skipped.

    Raises:
        DimensionMismatchError: If x.dim != y.dim
    """
    _check_same_dim(x, y)
    xb, yb = x._blocks, y._blocks
    return BlockOperator(
        x.dim,
        diag_top=_sum([
            _product(xb["diag_top"], yb["diag_top"]),
            _product(xb["off_top"], yb["off_bot"]),
        ]),
        diag_bot=_sum([
            _product(xb["off_bot"], yb["off_top"]),
            _product(xb["diag_bot"], yb["diag_bot"]),
        ]),
        off_top=_sum([
            _product(xb["diag_top"], yb["off_top"]),
            _product(xb["off_top"], yb["diag_bot"]),
        ]),
        off_bot=_sum([
            _product(xb["off_bot"], yb["diag_top"]),
            _product(xb["diag_bot"], yb["off_bot"]),
        ]),
    )


def block_add(x: BlockOperator, y: BlockOperator) -> BlockOperator:
    """Blockwise sum."""
    _check_same_dim(x, y)
    return BlockOperator(
        x.dim,
        **{name: _sum([x._blocks[name], y._blocks[name]]) for name in BLOCK_NAMES},
    )


def scale(x: BlockOperator, factor: Scalar) -> BlockOperator:
    """Scalar multiple of a block operator."""
    return BlockOperator(
        x.dim,
        **{
            name: (None if block is None else factor * block)
            for name, block in x._blocks.items()
        },
    )


def block_adjoint(x: BlockOperator) -> BlockOperator:
    """
    Conjugate transpose.

    (A (+) B)^dag = A^dag (+) B^dag and (C [+] D)^dag = D^dag [+] C^dag: the
    off-diagonal blocks swap places.
    """
    def dag(m: Optional[ComplexMatrix]) -> Optional[ComplexMatrix]:
        return None if m is None else m.conj().T

    b = x._blocks
    return BlockOperator(
        x.dim,
        diag_top=dag(b["diag_top"]),
        diag_bot=dag(b["diag_bot"]),
        off_top=dag(b["off_bot"]),
        off_bot=dag(b["off_top"]),
    )


def block_trace(x: BlockOperator) -> complex:
    """tr(A (+) B) = tr(A) + tr(B); off-diagonal blocks contribute nothing."""
    total = 0j
    for name in ("diag_top", "diag_bot"):
        block = x._blocks[name]
        if block is not None:
            total += complex(np.trace(block))
    return total


def hermiticity_residual(x: BlockOperator) -> float:
    """Max-norm of x - x^dag."""
    return dense_hermiticity_residual(to_dense(x))


def is_positive(x: BlockOperator, tol: Optional[float] = None) -> bool:
    """
    Positivity test for a Hermitian block operator.

    Pure (+) operators are checked block by block (A (+) B >= 0 iff A, B >= 0);
    anything else goes through the dense eigenvalues.

    Args:
        x: Operator to test
        tol: Tolerance for both the Hermiticity check and negative eigenvalues

    Returns:
        True iff every eigenvalue is >= -tol

    Raises:
        NonHermitianError: If x is not Hermitian within tol
    """
    if tol is None:
        tol = config.tolerances.hermiticity

    residual = hermiticity_residual(x)
    if residual > tol:
        raise NonHermitianError(
            f"Operator is not Hermitian (residual {residual:.3e} > {tol:.1e})",
            details={"residual": residual, "tol": tol},
        )

    if x.is_pure_direct_sum:
        blocks = [x._blocks[name] for name in ("diag_top", "diag_bot")]
        for block in blocks:
            if block is None:
                continue
            if sla.eigvalsh(hermitize(block)).min() < -tol:
                return False
        return True

    dense = to_dense(x)
    return bool(sla.eigvalsh(hermitize(dense)).min() >= -tol)


def block_allclose(x: BlockOperator, y: BlockOperator, tol: float) -> bool:
    """Elementwise comparison of dense forms within an absolute tolerance."""
    _check_same_dim(x, y)
    return bool(np.max(np.abs(to_dense(x) - to_dense(y))) <= tol)


def to_dense(x: BlockOperator) -> ComplexMatrix:
    """Dense 2d x 2d matrix; rows/cols 0..d-1 are H_d, d..2d-1 are H_d^perp."""
    return np.block([
        [x.diag_top, x.off_top],
        [x.off_bot, x.diag_bot],
    ])


def from_dense(m: ComplexMatrix, dim: Optional[int] = None) -> BlockOperator:
    """
    Split a dense 2d x 2d matrix into blocks.

    Args:
        m: Square matrix of even size
        dim: Expected block dimension d (inferred when omitted)

    Raises:
        DimensionMismatchError: If m is not square, has odd size, or disagrees with dim
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2 != 0 or m.shape[0] == 0:
        raise DimensionMismatchError(f"Expected an even-sized matrix, got shape {m.shape}")
    d = m.shape[0] // 2
    if dim is not None and dim != d:
        raise DimensionMismatchError(
            f"Matrix of shape {m.shape} does not split into {dim} x {dim} blocks"
        )
    return BlockOperator(
        d,
        diag_top=m[:d, :d],
        diag_bot=m[d:, d:],
        off_top=m[:d, d:],
        off_bot=m[d:, :d],
    )
