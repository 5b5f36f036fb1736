from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from ..substitution import Substitution


@dataclass
class TransformResult:
    """A different substitution presenting the same tiling space"""
    transform: str
    source: Substitution
    presentation: Substitution
    legend: Dict[str, Tuple[str, ...]] = field(default_factory=dict)


class PresentationTransform(ABC):
    """Base class for rewritings that keep the tiling space up to homeomorphism"""

    def __init__(self, name: str, config: Dict[str, Any]):
        self.name = name
        self.config = config

    @abstractmethod
    def apply(self, s: Substitution) -> TransformResult:
        """Return the rewritten presentation of ``s``"""
        pass

    @abstractmethod
    def describe(self) -> str:
        """Short label used in suite tables"""
        pass


class IdentityTransform(PresentationTransform):
    def __init__(self, config: Dict[str, Any]):
        super().__init__("identity", config)

    def apply(self, s: Substitution) -> TransformResult:
        return TransformResult(self.name, s, s)

    def describe(self) -> str:
        return "phi"
