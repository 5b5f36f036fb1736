import asyncio
import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from .config import AppConfig
from .errors import TilecohError
from .pipeline import compute_cohomology
from .report import ReportBuilder
from .substitution import parse_substitution


@dataclass
class BatchItemResult:
    """Outcome of analysing one block of a batch file"""
    index: int
    name: Optional[str]
    seconds: float
    report: Dict[str, Any]
    success: bool
    error_message: Optional[str] = None


class BatchRunner:
    """Analyses batch items concurrently; results come back in input order"""

    def __init__(self, config: AppConfig, builder: Optional[ReportBuilder] = None):
        self.config = config
        self.builder = builder or ReportBuilder(config.output)
        self.logger = logging.getLogger(__name__)

    def _analyse(self, index: int, block: str) -> BatchItemResult:
        clock = time.perf_counter()
        name = None
        try:
            s = parse_substitution(block)
            name = s.name
            report = self.builder.build(compute_cohomology(s, self.config))
            return BatchItemResult(index, name, time.perf_counter() - clock, report, True)
        except TilecohError as e:
            self.logger.error(f"Batch item {index} ({name or 'unnamed'}) failed: {e}")
            report = self.builder.build_error(e, name, index)
            return BatchItemResult(index, name, time.perf_counter() - clock, report, False, str(e))

    async def run(self, blocks: List[str]) -> List[BatchItemResult]:
        """Run every block, at most ``workers`` at a time"""
        semaphore = asyncio.Semaphore(self.config.workers)

        async def bounded(index: int, block: str) -> BatchItemResult:
            async with semaphore:
                return await asyncio.to_thread(self._analyse, index, block)

        results = await asyncio.gather(*(bounded(i, block) for i, block in enumerate(blocks)))
        results = sorted(results, key=lambda r: r.index)

        failed = len([r for r in results if not r.success])
        self.logger.info(f"Batch finished: {len(results) - failed} succeeded, {failed} failed")
        return results
