"""
Counter-based random streams for reproducible, order-independent trials.

A stream is a value keyed by (seed, trial, name). The Philox key comes from the
seed and the name; the trial index sits in the counter, so distinct trials
never share draws and a trial's draws do not depend on which thread runs it or
in which order.
"""
import zlib
from typing import Optional

import numpy as np

from src.config import config

U64_MASK = (1 << 64) - 1


class RngStream:
    """Splittable counter-based stream (numpy Philox)."""

    __slots__ = ("seed", "trial", "name")

    def __init__(self, seed: int, trial: int = 0, name: str = "root"):
        """
        Initialize a stream.

        Args:
            seed: Global unsigned 64-bit seed
            trial: Trial index (counter offset)
            name: Stream name; children append "/<child>"

        Raises:
            ValueError: If seed or trial is out of range
        """
        if not 0 <= int(seed) <= U64_MASK:
            raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}")
        if not 0 <= int(trial) <= U64_MASK:
            raise ValueError(f"Trial index must be an unsigned 64-bit integer, got {trial}")
        self.seed = int(seed)
        self.trial = int(trial)
        self.name = name

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "RngStream":
        return cls(seed, trial, "trial")

    def split(self, child: str) -> "RngStream":
        """Independent child stream; does not consume any state of this one."""
        return RngStream(self.seed, self.trial, f"{self.name}/{child}")

    def generator(self) -> np.random.Generator:
        """Fresh numpy Generator positioned at the start of this stream."""
        key = np.array(
            [self.seed, zlib.crc32(self.name.encode("utf-8"))],
            dtype=np.uint64,
        )
        counter = np.array([0, self.trial, 0, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))

    def uniforms(self, k: int) -> np.ndarray:
        """First k uniforms in [0, 1) of this stream (same values on every call)."""
        return self.generator().random(k)

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RngStream):
            return NotImplemented
        return (self.seed, self.trial, self.name) == (other.seed, other.trial, other.name)

    def __hash__(self) -> int:
        return hash((self.seed, self.trial, self.name))

    def __repr__(self) -> str:
        return f"<RngStream seed={self.seed} trial={self.trial} name='{self.name}'>"


def family_generator(seed: Optional[int], family: str) -> np.random.Generator:
    """Generator for seeded random families (states, measurement sets)."""
    if seed is None:
        seed = config.simulation.default_seed
    return RngStream(seed, 0, f"family/{family}").generator()
