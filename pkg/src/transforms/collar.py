from typing import Any, Dict

from ..substitution import Substitution, collar
from .base import PresentationTransform, TransformResult


class CollarTransform(PresentationTransform):
    """Relabel tiles by their allowed 3-word neighbourhoods"""

    def __init__(self, config: Dict[str, Any]):
        super().__init__("collar", config)

    def apply(self, s: Substitution) -> TransformResult:
        result = collar(s)
        return TransformResult(self.name, s, result.collared, result.legend)

    def describe(self) -> str:
        return "collar(phi)"
