"""
JSON encoding for block operators.

BlockOperator: {"dim": d, "diag_top": M, "diag_bot": M, "off_top": M, "off_bot": M}
where M is the ComplexMatrix encoding and absent blocks mean zero.
"""
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from src.linalg.block_operator import BLOCK_NAMES, BlockOperator
from src.matrices import MatrixPayload


class BlockPayload(BaseModel):
    """Wire form of a block operator."""

    dim: int = Field(..., ge=1, description="Block dimension d")
    diag_top: Optional[MatrixPayload] = Field(default=None, description="A of A (+) B")
    diag_bot: Optional[MatrixPayload] = Field(default=None, description="B of A (+) B")
    off_top: Optional[MatrixPayload] = Field(default=None, description="C of C [+] D")
    off_bot: Optional[MatrixPayload] = Field(default=None, description="D of C [+] D")

    def to_block(self) -> BlockOperator:
        blocks = {}
        for name in BLOCK_NAMES:
            payload = getattr(self, name)
            blocks[name] = None if payload is None else payload.to_array()
        return BlockOperator(self.dim, **blocks)

    @classmethod
    def from_block(cls, x: BlockOperator) -> "BlockPayload":
        blocks = {}
        for name in BLOCK_NAMES:
            raw = x.raw_block(name)
            if raw is not None:
                blocks[name] = MatrixPayload.from_array(raw)
        return cls(dim=x.dim, **blocks)


def encode_block(x: BlockOperator) -> Dict[str, Any]:
    return BlockPayload.from_block(x).model_dump(exclude_none=True)


def decode_block(obj: Dict[str, Any]) -> BlockOperator:
    return BlockPayload.model_validate(obj).to_block()
