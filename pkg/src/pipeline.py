"""End-to-end computation of the first cohomology of a substitution tiling space.

The group is assembled as lim A1 (+) Z^l: A1 is the action of A^t on the
quotient of Z^d by the lattice of the w-vectors, and l is the first Betti
number of the eventual range ER of the edge map g.
"""
import asyncio
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from sympy import primerange

from .complex import (
    AsymptoticReport,
    ComponentDecomposition,
    EdgeDynamics,
    Pair,
    TransitionComplex,
    asymptotic_cycles,
    build_transition_complex,
    cycle_rank,
    decompose_components,
    eventual_range,
    exit_node,
    entry_node,
    g_edge_map,
    is_bijective_on_er,
)
from .config import AnalysisConfig, AppConfig
from .errors import (
    BasisFormatError,
    ComponentIndexError,
    InternalInvariantError,
    InvarianceViolation,
    NotPrimitiveError,
    PeriodicSubstitutionError,
)
from .substitution import (
    PeriodicityVerdict,
    PerronData,
    PrimitivityResult,
    Substitution,
    allowed_factors,
    is_primitive,
    periodicity_check,
    perron_data,
    transition_matrix,
)
from .transforms import create_transform
from .zlattice import (
    BasisChange,
    DirectLimitDescriptor,
    IntMatrix,
    Vector,
    complete_basis,
    conjugate_and_extract,
    direct_limit_invariants,
    eventual_mod_p_rank,
    free_group,
    from_columns,
    hnf,
    int_matrix,
    is_unimodular,
    to_rows,
)

logger = logging.getLogger(__name__)

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    detail: str = ""


@dataclass(frozen=True)
class InvariantTuple:
    """Isomorphism invariants of the cohomology group that are cheap to compare.

    ``divisible_primes`` belongs to B, the restriction of A1 to its eventual
    image, and so depends on how the group splits into lim A1 and Z^l.
    ``group_divisible_primes`` belongs to the whole group and is empty as
    soon as l > 0.
    """
    total_rank: int
    mod_p_ranks: Tuple[Tuple[int, int], ...]
    divisible_primes: Tuple[int, ...]
    group_divisible_primes: Tuple[int, ...]

    # fields that must agree between presentations of the same tiling space
    COMPARED = ("total_rank", "mod_p_ranks", "group_divisible_primes")

    def comparable(self) -> Tuple:
        return tuple(getattr(self, name) for name in self.COMPARED)


@dataclass
class CohomologyResult:
    input: Substitution
    matrix: IntMatrix
    primitivity: PrimitivityResult
    periodicity: PeriodicityVerdict
    perron: PerronData
    pairs: Tuple[Pair, ...]
    complex: TransitionComplex
    decomposition: ComponentDecomposition
    dynamics: EdgeDynamics
    asymptotics: AsymptoticReport
    dropped: int
    w_vectors: Tuple[Vector, ...]
    basis_change: BasisChange
    limit: DirectLimitDescriptor
    max_prime: int
    checks: List[Check] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    invariants: Optional[InvariantTuple] = None

    @property
    def p(self) -> int:
        return self.decomposition.p

    @property
    def k(self) -> int:
        return self.decomposition.k

    @property
    def l(self) -> int:
        return self.decomposition.l

    @property
    def G(self) -> str:
        return free_group(self.k - 1)

    @property
    def pretty(self) -> str:
        return combine_pretty(self.limit, self.l)


def combine_pretty(limit: DirectLimitDescriptor, l: int) -> str:
    """Render lim A1 (+) Z^l, merging free summands"""
    if limit.rank == 0:
        return free_group(l)
    if abs(limit.det) == 1:
        return free_group(limit.rank + l)
    if l == 0:
        return limit.pretty
    return f"{limit.pretty} ⊕ {free_group(l)}"


@contextmanager
def _stage(name: str, timings: Dict[str, float]):
    started = time.perf_counter()
    try:
        yield
    except InternalInvariantError as e:
        if e.stage is None:
            e.stage = name
        raise
    finally:
        timings[name] = time.perf_counter() - started


def _boundary_vector(component, d: int) -> List[int]:
    """Letters whose tile terminates in the component minus letters whose tile originates there"""
    vector = [0] * d
    for letter in range(d):
        if exit_node(letter) in component.nodes:
            vector[letter] += 1
        if entry_node(letter) in component.nodes:
            vector[letter] -= 1
    return vector


def w_vectors(decomp: ComponentDecomposition, complex: TransitionComplex,
              drop: Optional[int] = None) -> List[Vector]:
    """One vector per component of S except the dropped one (the first by default)"""
    if decomp.p < 1:
        raise InternalInvariantError("transition complex has no components")
    drop = 0 if drop is None else drop
    if not 0 <= drop < decomp.p:
        raise ComponentIndexError(drop, decomp.p)
    return [
        tuple(_boundary_vector(component, complex.d))
        for i, component in enumerate(decomp.components)
        if i != drop
    ]


def _validate_basis(P: IntMatrix, w: List[Vector], d: int) -> IntMatrix:
    if P.shape != (d, d):
        raise BasisFormatError(f"basis matrix must be {d}x{d}, got {P.rows}x{P.cols}")
    if not is_unimodular(P):
        raise BasisFormatError(f"basis matrix has determinant {P.det()}, expected +-1")
    m = len(w)
    if m:
        expected, _ = hnf(from_columns(w, d))
        leading, _ = hnf(P[:, :m])
        if expected != leading:
            raise BasisFormatError(
                f"leading {m} column(s) of the basis do not span the lattice of the w-vectors")
    return P


def _guard(s: Substitution, analysis: AnalysisConfig) -> Tuple[PrimitivityResult, PeriodicityVerdict]:
    primitivity = is_primitive(s)
    if not primitivity.primitive:
        bound = s.d * s.d - 2 * s.d + 2
        raise NotPrimitiveError(f"no power A^n with n <= {bound} is positive")
    periodicity = periodicity_check(s, analysis.horizon)
    if periodicity.periodic:
        raise PeriodicSubstitutionError(periodicity.witness, periodicity.complexity[periodicity.witness - 1])
    return primitivity, periodicity


def compute_cohomology(s: Substitution, config: Optional[AppConfig] = None,
                       basis: Optional[IntMatrix] = None, drop: Optional[int] = None) -> CohomologyResult:
    analysis = (config or AppConfig()).analysis
    timings: Dict[str, float] = {}
    logger.info(f"Computing cohomology of {s.name or s.label(tuple(range(s.d)))}")

    with _stage("guards", timings):
        primitivity, periodicity = _guard(s, analysis)
    with _stage("perron", timings):
        M = transition_matrix(s)
        perron = perron_data(M)
    with _stage("language", timings):
        pairs = tuple(tuple(w) for w in allowed_factors(s, 2).of_length(2))
    with _stage("complex", timings):
        complex = build_transition_complex(pairs, s.alphabet)
        components = decompose_components(complex)
    with _stage("eventual range", timings):
        dynamics = eventual_range(g_edge_map(s, complex.edges), complex)
        decomposition = decompose_components(complex, dynamics.er_edges)
        asymptotics = asymptotic_cycles(dynamics)
    with _stage("basis change", timings):
        dropped = 0 if drop is None else drop
        w = w_vectors(components, complex, dropped)
        if basis is None:
            P = complete_basis(w, s.d)
        else:
            P = _validate_basis(basis, w, s.d)
        change = conjugate_and_extract(M.T, P, components.p)
    with _stage("direct limit", timings):
        limit = direct_limit_invariants(change.A1, analysis.max_prime)

    result = CohomologyResult(
        input=s,
        matrix=M,
        primitivity=primitivity,
        periodicity=periodicity,
        perron=perron,
        pairs=pairs,
        complex=complex,
        decomposition=decomposition,
        dynamics=dynamics,
        asymptotics=asymptotics,
        dropped=dropped,
        w_vectors=tuple(w),
        basis_change=change,
        limit=limit,
        max_prime=analysis.max_prime,
        timings=timings,
    )
    result.invariants = invariant_tuple(result)

    with _stage("checks", timings):
        result.checks = run_checks(result)
    failed = [check for check in result.checks if check.status == FAIL]
    if failed:
        details = "; ".join(f"{c.name}: {c.detail}" for c in failed)
        raise InternalInvariantError(details, stage="checks")

    logger.info(f"H^1 = {result.pretty}")
    return result


def _mod_p_ranks(B: IntMatrix, l: int, max_prime: int) -> Tuple[Tuple[int, int], ...]:
    r = B.rows
    rows = [row + [0] * l for row in to_rows(B)]
    rows += [[0] * r + [int(i == j) for j in range(l)] for i in range(l)]
    block = int_matrix(rows, r + l)
    return tuple((p, eventual_mod_p_rank(block, p)) for p in primerange(2, max_prime + 1))


def _tuple_of(limit: DirectLimitDescriptor, l: int, max_prime: int) -> InvariantTuple:
    return InvariantTuple(
        total_rank=limit.rank + l,
        mod_p_ranks=_mod_p_ranks(limit.B, l, max_prime),
        divisible_primes=limit.divisible_primes,
        group_divisible_primes=limit.divisible_primes if l == 0 else (),
    )


def invariant_tuple(res: CohomologyResult, max_prime: Optional[int] = None) -> InvariantTuple:
    return _tuple_of(res.limit, res.l, max_prime or res.max_prime)


def _check(name: str, ok: bool, detail: str = "") -> Check:
    return Check(name, PASS if ok else FAIL, "" if ok else detail)


def run_checks(res: CohomologyResult) -> List[Check]:
    checks = []
    decomposition = res.decomposition
    d = res.input.d

    if decomposition.p == 1 and decomposition.b1_S == 0:
        full = direct_limit_invariants(res.matrix.T, res.max_prime)
        expected = _tuple_of(full, 0, res.max_prime)
        checks.append(_check(
            "acyclic_s_matches_full_limit", res.l == 0 and res.invariants == expected,
            f"l = {res.l}, tuple {res.invariants} differs from lim A^t tuple {expected}"))
    else:
        checks.append(Check("acyclic_s_matches_full_limit", SKIP, "S is disconnected or has cycles"))

    total = [0] * d
    for component in decomposition.components:
        total = [x + y for x, y in zip(total, _boundary_vector(component, d))]
    checks.append(_check("augmentation", not any(total), f"component boundaries sum to {total}"))

    checks.append(_check("g_bijective_on_er", is_bijective_on_er(res.dynamics),
                         "g does not permute the eventual range"))

    nested = all(
        any(er.nodes <= component.nodes for component in decomposition.components)
        for er in decomposition.er_components
    )
    checks.append(_check("er_in_s", nested and decomposition.k <= decomposition.p,
                         f"k = {decomposition.k}, p = {decomposition.p}"))

    rank = cycle_rank(res.complex, res.dynamics.er_edges)
    checks.append(_check("cycle_rank", rank == res.l, f"cycle basis has {rank} cycles, l = {res.l}"))

    size = d - decomposition.p + 1
    checks.append(_check("block_form", res.basis_change.A1.shape == (size, size),
                         f"A1 is {res.basis_change.A1.shape}, expected {size}x{size}"))
    return checks


@dataclass(frozen=True)
class SuiteEntry:
    transform: str
    label: str
    letters: int
    invariants: InvariantTuple
    pretty: str
    seconds: float


@dataclass(frozen=True)
class SuiteReport:
    name: Optional[str]
    entries: Tuple[SuiteEntry, ...]


def _suite_transforms(analysis: AnalysisConfig):
    transforms = [create_transform("identity"), create_transform("power", {"n": analysis.power})]
    if analysis.collar:
        transforms.append(create_transform("collar"))
    return transforms


def _run_presentation(transform, s: Substitution, config: AppConfig) -> SuiteEntry:
    started = time.perf_counter()
    presentation = transform.apply(s).presentation
    result = compute_cohomology(presentation, config)
    return SuiteEntry(
        transform=transform.name,
        label=transform.describe(),
        letters=presentation.d,
        invariants=result.invariants,
        pretty=result.pretty,
        seconds=time.perf_counter() - started,
    )


async def invariance_suite_async(s: Substitution, config: Optional[AppConfig] = None) -> SuiteReport:
    config = config or AppConfig()
    # guards run once, on the input itself
    _guard(s, config.analysis)

    transforms = _suite_transforms(config.analysis)
    tasks = [asyncio.to_thread(_run_presentation, t, s, config) for t in transforms]
    outcomes = await asyncio.gather(*tasks, return_exceptions=True)
    for outcome in outcomes:
        if isinstance(outcome, BaseException):
            raise outcome

    reference = outcomes[0]
    for entry in outcomes[1:]:
        for name in InvariantTuple.COMPARED:
            expected = getattr(reference.invariants, name)
            actual = getattr(entry.invariants, name)
            if expected != actual:
                raise InvarianceViolation(name, entry.label, expected, actual)

    logger.info(f"Invariance suite passed for {len(outcomes)} presentations")
    return SuiteReport(s.name, tuple(outcomes))


def invariance_suite(s: Substitution, config: Optional[AppConfig] = None) -> SuiteReport:
    return asyncio.run(invariance_suite_async(s, config))
