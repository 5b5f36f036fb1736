import logging
from typing import Any, Dict

from ..substitution import Substitution, power
from .base import PresentationTransform, TransformResult


class PowerTransform(PresentationTransform):
    """phi -> phi^n, the same substitution iterated n times"""

    def __init__(self, config: Dict[str, Any]):
        super().__init__("power", config)
        self.n = int(config.get('n', 2))
        if self.n < 1:
            raise ValueError(f"power must be positive, got {self.n}")
        self.logger = logging.getLogger(__name__)

    def apply(self, s: Substitution) -> TransformResult:
        presentation = power(s, self.n)
        self.logger.debug(f"phi^{self.n} has image lengths {[len(w) for w in presentation.images]}")
        return TransformResult(self.name, s, presentation)

    def describe(self) -> str:
        return f"phi^{self.n}"
