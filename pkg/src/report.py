import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from jinja2 import Environment, FileSystemLoader

from .complex import TransitionComplex
from .config import OutputConfig
from .errors import TilecohError
from .pipeline import CohomologyResult, InvariantTuple, SuiteReport
from .zlattice import IntMatrix, matrix_to_json

TEMPLATE_DIR = Path(__file__).parent / "templates"

_ANSI = {
    "bold": "\033[1m",
    "green": "\033[32m",
    "red": "\033[31m",
    "yellow": "\033[33m",
}
_RESET = "\033[0m"


def _decimal(value: int) -> str:
    return str(int(value))


def _float(value: float) -> float:
    return float(f"{value:.12g}")


def _gvquote(s: str) -> str:
    return '"{}"'.format(s.replace('"', r'\"'))


def _vectors(vectors: Sequence[Sequence[int]]) -> List[List[str]]:
    return [[_decimal(x) for x in v] for v in vectors]


def _invariants(invariants: InvariantTuple) -> Dict[str, Any]:
    return {
        "total_rank": _decimal(invariants.total_rank),
        "mod_p_ranks": {_decimal(p): _decimal(r) for p, r in invariants.mod_p_ranks},
        "divisible_primes": [_decimal(p) for p in invariants.divisible_primes],
        "group_divisible_primes": [_decimal(p) for p in invariants.group_divisible_primes],
    }


class ReportBuilder:
    """Turns pipeline results into JSON-ready reports and renders them"""

    def __init__(self, config: Optional[OutputConfig] = None, stream=None):
        self.config = config or OutputConfig()
        stream = stream or sys.stdout
        if self.config.color is None:
            self.color = hasattr(stream, "isatty") and stream.isatty()
        else:
            self.color = self.config.color
        self.env = Environment(
            loader=FileSystemLoader(str(TEMPLATE_DIR)),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters['style'] = self._style
        self.env.filters['gvquote'] = _gvquote
        self.env.filters['matrix'] = self._matrix
        self.logger = logging.getLogger(__name__)

    def _style(self, text: str, *styles: str) -> str:
        if not self.color:
            return text
        return "".join(_ANSI[s] for s in styles) + text + _RESET

    @staticmethod
    def _matrix(rows: List[List[str]], indent: int = 4) -> str:
        if not rows or not rows[0]:
            return " " * indent + "(empty)"
        width = max(len(x) for row in rows for x in row)
        return "\n".join(" " * indent + "[" + " ".join(x.rjust(width) for x in row) + "]" for row in rows)

    def build(self, res: CohomologyResult) -> Dict[str, Any]:
        """JSON-ready report; every integer is a decimal string"""
        s = res.input
        c: TransitionComplex = res.complex
        decomposition = res.decomposition
        dynamics = res.dynamics
        limit = res.limit
        edge = lambda pair: f"e{c.label(pair)}"

        components = [
            {
                "nodes": sorted(c.node_name(node) for node in component.nodes),
                "edges": [edge(pair) for pair in component.edges],
            }
            for component in decomposition.components
        ]
        branching = {
            "right": {s.alphabet[a]: [edge(p) for p in edges] for a, edges in res.asymptotics.right_branching},
            "left": {s.alphabet[b]: [edge(p) for p in edges] for b, edges in res.asymptotics.left_branching},
        }

        return {
            "input": {"name": s.name, "rules": s.format_rules()},
            "alphabet": list(s.alphabet),
            "matrix": matrix_to_json(res.matrix),
            "primitive": {
                "flag": res.primitivity.primitive,
                "witness_power": _decimal(res.primitivity.witness_power),
            },
            "periodicity": {
                "verdict": res.periodicity.verdict,
                "horizon": _decimal(res.periodicity.horizon),
            },
            "perron": {
                "lambda": _float(res.perron.eigenvalue),
                "omega": [_float(x) for x in res.perron.omega],
            },
            "allowed_pairs": [c.label(pair) for pair in res.pairs],
            "S": {
                "nodes": [c.node_name(node) for node in c.nodes],
                "edges": [edge(pair) for pair in c.edges],
                "components": components,
                "b1": _decimal(decomposition.b1_S),
            },
            "g_map": {edge(a): edge(b) for a, b in sorted(dynamics.g_map.items())},
            "ER": {
                "edges": [edge(pair) for pair in sorted(dynamics.er_edges)],
                "k": _decimal(res.k),
                "l": _decimal(res.l),
                "cycles": [[edge(pair) for pair in cycle.edges] for cycle in dynamics.cycles],
                "branching": branching,
            },
            "p": _decimal(res.p),
            "dropped_component": _decimal(res.dropped),
            "w_vectors": _vectors(res.w_vectors),
            "P": matrix_to_json(res.basis_change.P),
            "conjugate": matrix_to_json(res.basis_change.conjugate),
            "A1": matrix_to_json(res.basis_change.A1),
            "direct_limit": {
                "rank": _decimal(limit.rank),
                "det": _decimal(limit.det),
                "charpoly": [_decimal(x) for x in limit.charpoly],
                "divisible_primes": [_decimal(p) for p in limit.divisible_primes],
                "pretty": limit.pretty,
            },
            "H1": {"pretty": res.pretty, "k": _decimal(res.k), "G": res.G},
            "invariants": _invariants(res.invariants),
            "checks": [
                {"name": check.name, "status": check.status, "detail": check.detail}
                for check in res.checks
            ],
            "timings": {
                stage: _float(seconds) for stage, seconds in res.timings.items()
            } if self.config.report_timings else {},
        }

    @staticmethod
    def build_error(error: TilecohError, name: Optional[str] = None, index: Optional[int] = None) -> Dict[str, Any]:
        report: Dict[str, Any] = {"input": {"name": name}}
        if index is not None:
            report["index"] = _decimal(index)
        report["error"] = {
            "kind": error.kind,
            "exit_code": _decimal(error.exit_code),
            "stage": error.stage,
            "message": str(error),
        }
        return report

    def render_json(self, report: Any) -> str:
        return json.dumps(report, indent=self.config.json_indent, ensure_ascii=False) + "\n"

    def render_text(self, res: CohomologyResult) -> str:
        report = self.build(res)
        template = self.env.get_template("report.txt.j2")
        return template.render(
            report=report,
            rules=[(letter, " ".join(res.input.image(letter))) for letter in res.input.alphabet],
            witness=res.primitivity.witness_power,
        )

    def build_suite(self, suite: SuiteReport) -> Dict[str, Any]:
        presentations = []
        for entry in suite.entries:
            item = {
                "transform": entry.transform,
                "label": entry.label,
                "letters": _decimal(entry.letters),
                "invariants": _invariants(entry.invariants),
                "pretty": entry.pretty,
            }
            if self.config.report_timings:
                item["seconds"] = _float(entry.seconds)
            presentations.append(item)
        return {"name": suite.name, "consistent": True, "presentations": presentations}

    def render_check_table(self, suite: SuiteReport) -> str:
        rows = []
        for entry in suite.entries:
            drops = [f"{p}:{r}" for p, r in entry.invariants.mod_p_ranks if r != entry.invariants.total_rank]
            rows.append({
                "label": entry.label,
                "letters": str(entry.letters),
                "total_rank": str(entry.invariants.total_rank),
                "drops": " ".join(drops) or "-",
                "divisible": " ".join(str(p) for p in entry.invariants.group_divisible_primes) or "-",
                "pretty": entry.pretty,
                "seconds": f"{entry.seconds:.3f}",
            })
        template = self.env.get_template("check.txt.j2")
        return template.render(name=suite.name, rows=rows, timings=self.config.report_timings)

    def render_complex_dot(self, res: CohomologyResult) -> str:
        c = res.complex
        letters = [(c.node_name(u), c.node_name(v), c.alphabet[u[1]]) for u, v in c.letter_edges]
        transitions = [
            (c.node_name(u), c.node_name(v), f"e{c.label(pair)}", pair in res.dynamics.er_edges)
            for pair in c.edges
            for u, v in [c.endpoints(pair)]
        ]
        template = self.env.get_template("complex.dot.j2")
        return template.render(nodes=[c.node_name(n) for n in c.nodes], letters=letters, transitions=transitions)

    def render_dynamics_dot(self, res: CohomologyResult) -> str:
        c = res.complex
        er = res.dynamics.er_edges
        nodes = [(f"e{c.label(pair)}", pair in er) for pair in c.edges]
        arrows = [
            (f"e{c.label(a)}", f"e{c.label(b)}", a in er)
            for a, b in sorted(res.dynamics.g_map.items())
        ]
        template = self.env.get_template("dynamics.dot.j2")
        return template.render(nodes=nodes, arrows=arrows)

    def write_dot(self, res: CohomologyResult, directory: str) -> List[Path]:
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        written = []
        for filename, text in (("K.dot", self.render_complex_dot(res)), ("g.dot", self.render_dynamics_dot(res))):
            path = target / filename
            path.write_text(text)
            written.append(path)
            self.logger.info(f"Wrote {path}")
        return written
