"""
Document models for the two JSON formats maapnet reads and writes.

- MaapDocument: a max-affine arithmetic program, body as nested instruction
  objects tagged by "kind" (affine | max | min | seq | par)
- NetDocument: a ReLU network as neuron and arc lists (`.relu.json`)

Field declaration order is the serialized order, so documents are
byte-for-byte reproducible.
"""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, conint, validator


class RationalDoc(BaseModel):
    """
    Exact rational encoded as decimal strings
    """
    num: str = Field(..., description="Numerator as a decimal integer string")
    den: str = Field("1", description="Positive denominator as a decimal integer string")

    @validator("num", "den")
    def _integer_literal(cls, value: str) -> str:
        text = value.strip()
        if not text.lstrip("-").isdigit():
            raise ValueError(f"not an integer literal: {value!r}")
        return text

    @validator("den")
    def _positive(cls, value: str) -> str:
        if int(value) <= 0:
            raise ValueError("denominator must be positive")
        return value


class TermDoc(BaseModel):
    coef: RationalDoc
    var: int = Field(..., ge=0)


class AffineDoc(BaseModel):
    constant: RationalDoc
    terms: List[TermDoc] = []


class AssignAffineDoc(BaseModel):
    kind: Literal["affine"]
    target: int = Field(..., ge=0)
    expr: AffineDoc


class AssignExtremumDoc(BaseModel):
    kind: Literal["max", "min"]
    target: int = Field(..., ge=0)
    terms: List[AffineDoc]


class SeqDoc(BaseModel):
    kind: Literal["seq"]
    loop: bool = False
    label: Optional[str] = None
    locals: List[conint(ge=0)] = []
    body: List["InstructionDoc"] = []


class ParDoc(BaseModel):
    kind: Literal["par"]
    loop: bool = False
    blocks: List[SeqDoc] = []


InstructionDoc = Union[AssignAffineDoc, AssignExtremumDoc, SeqDoc, ParDoc]

SeqDoc.update_forward_refs()


class MaapDocument(BaseModel):
    """
    Serialized MAAP (`.maap.json`)
    """
    format: Literal["maap"] = "maap"
    variables: List[str]
    inputs: List[conint(ge=0)]
    outputs: List[conint(ge=0)]
    body: InstructionDoc
    meta: Optional[Dict[str, Any]] = None


class NeuronDoc(BaseModel):
    id: int = Field(..., ge=0)
    layer: int = Field(..., ge=0)
    bias: str = Field("0", description="Exact bias as \"p/q\"")
    bias_float: float = 0.0
    role: Literal["input", "hidden", "output"]


class ArcDoc(BaseModel):
    src: int = Field(..., ge=0)
    dst: int = Field(..., ge=0)
    weight: str = Field(..., description="Exact weight as \"p/q\"")
    weight_float: float = 0.0


class NetDocument(BaseModel):
    """
    Serialized ReLU network (`.relu.json`)
    """
    format: Literal["relu-net"] = "relu-net"
    neurons: List[NeuronDoc]
    arcs: List[ArcDoc] = []
    meta: Optional[Dict[str, Any]] = None
