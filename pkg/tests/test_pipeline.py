import random

import pytest

from src.config import AnalysisConfig, AppConfig
from src.errors import (
    BasisFormatError,
    ComponentIndexError,
    InvarianceViolation,
    NotPrimitiveError,
    PeriodicSubstitutionError,
)
from src.pipeline import (
    FAIL,
    PASS,
    SKIP,
    combine_pretty,
    compute_cohomology,
    invariance_suite,
    invariant_tuple,
    w_vectors,
)
from src.transforms import create_transform
from src.transforms.base import PresentationTransform, TransformResult
from src.substitution import transition_matrix
from src.zlattice import direct_limit_invariants, int_matrix, is_unimodular, parse_basis


def _status(result, name):
    return next(check.status for check in result.checks if check.name == name)


def _random_unimodular(rng, n):
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        q = rng.choice([-2, -1, 1, 2])
        rows[i] = [x + q * y for x, y in zip(rows[i], rows[j])]
    return rows


def _random_completion(rng, P, m):
    """P times a unimodular block-upper-triangular matrix; keeps the lattice of the leading m columns"""
    d = P.rows
    upper = _random_unimodular(rng, m) if m else []
    lower = _random_unimodular(rng, d - m)
    block = [[0] * d for _ in range(d)]
    for i in range(m):
        block[i][:m] = upper[i]
        block[i][m:] = [rng.randint(-3, 3) for _ in range(d - m)]
    for i in range(d - m):
        block[m + i][m:] = lower[i]
    return P * int_matrix(block, d)


def test_fibonacci_regression(fibonacci):
    result = compute_cohomology(fibonacci)
    assert {fibonacci.label(pair) for pair in result.pairs} == {"11", "12", "21"}
    assert {fibonacci.label(pair) for pair in result.dynamics.er_edges} == {"11", "21"}
    assert (result.p, result.k, result.l) == (1, 1, 0)
    assert result.w_vectors == ()
    assert result.pretty == "Z^2"
    assert result.G == "0"


def test_thue_morse_regression(thue_morse):
    result = compute_cohomology(thue_morse)
    assert len(result.pairs) == 4
    assert result.dynamics.er_edges == frozenset(result.complex.edges)
    assert result.decomposition.b1_S == 1
    assert result.l == 1
    assert result.basis_change.A1 == int_matrix([[1, 1], [1, 1]])
    assert result.limit.pretty == "Z[1/2]"
    assert result.pretty == "Z[1/2] ⊕ Z"


def test_two_component_regression_with_explicit_basis(two_component, two_component_basis):
    result = compute_cohomology(two_component, basis=parse_basis(two_component_basis))
    assert {two_component.label(pair) for pair in result.pairs} == {"11", "41", "21", "23", "12", "42", "34"}
    assert result.w_vectors == ((0, 0, 1, -1),)
    assert result.basis_change.conjugate == int_matrix(
        [[1, 0, -1, 0], [0, 2, 1, 1], [0, 1, 1, 0], [0, 0, 2, 2]])
    assert result.basis_change.A1 == int_matrix([[2, 1, 1], [1, 1, 0], [0, 2, 2]])
    assert result.l == 0
    assert result.k == 2
    assert result.G == "Z"


def test_w_vectors_depend_on_dropped_component(two_component):
    result = compute_cohomology(two_component)
    components = result.decomposition
    assert w_vectors(components, result.complex) == [(0, 0, 1, -1)]
    assert w_vectors(components, result.complex, drop=1) == [(0, 0, -1, 1)]
    with pytest.raises(ComponentIndexError):
        w_vectors(components, result.complex, drop=2)
    with pytest.raises(ComponentIndexError) as excinfo:
        compute_cohomology(two_component, drop=5)
    assert excinfo.value.exit_code == 2


def test_choice_independence(two_component):
    rng = random.Random(8)
    reference = compute_cohomology(two_component)
    results = [compute_cohomology(two_component, drop=1)]
    P = reference.basis_change.P
    for _ in range(3):
        basis = _random_completion(rng, P, 1)
        assert is_unimodular(basis)
        results.append(compute_cohomology(two_component, basis=basis))

    for result in results:
        assert result.limit.rank == 3
        assert abs(result.limit.det) == 4
        assert result.limit.charpoly == reference.limit.charpoly
        assert result.limit.divisible_primes == reference.limit.divisible_primes
        assert result.invariants == reference.invariants


def test_basis_is_validated(two_component):
    with pytest.raises(BasisFormatError):
        compute_cohomology(two_component, basis=int_matrix([[1, 0], [0, 1]]))
    with pytest.raises(BasisFormatError):
        compute_cohomology(two_component, basis=int_matrix(
            [[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    with pytest.raises(BasisFormatError):
        # unimodular, but the first column is not +-(f3 - f4)
        compute_cohomology(two_component, basis=int_matrix(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))


def test_guards(reducible_substitution, periodic_substitution):
    with pytest.raises(NotPrimitiveError):
        compute_cohomology(reducible_substitution)
    with pytest.raises(PeriodicSubstitutionError) as excinfo:
        compute_cohomology(periodic_substitution)
    assert excinfo.value.witness == 2
    assert excinfo.value.complexity == 2
    assert excinfo.value.exit_code == 4


def test_checks_on_fixtures(known_fixtures):
    for s in known_fixtures:
        result = compute_cohomology(s)
        assert all(check.status in (PASS, SKIP) for check in result.checks)
        assert _status(result, "augmentation") == PASS
        assert _status(result, "g_bijective_on_er") == PASS
    assert _status(compute_cohomology(known_fixtures[0]), "acyclic_s_matches_full_limit") == PASS
    assert _status(compute_cohomology(known_fixtures[1]), "acyclic_s_matches_full_limit") == SKIP


def test_invariant_tuples(fibonacci, thue_morse):
    fib = compute_cohomology(fibonacci)
    tuple_ = invariant_tuple(fib)
    assert tuple_.total_rank == 2
    assert all(rank == 2 for _, rank in tuple_.mod_p_ranks)
    assert [p for p, _ in tuple_.mod_p_ranks][:4] == [2, 3, 5, 7]
    assert tuple_.mod_p_ranks[-1][0] == 97

    thue = invariant_tuple(compute_cohomology(thue_morse))
    assert thue.total_rank == 2
    assert dict(thue.mod_p_ranks)[2] == 1
    assert dict(thue.mod_p_ranks)[3] == 2
    assert thue.divisible_primes == (2,)
    assert thue.group_divisible_primes == ()
    assert invariant_tuple(compute_cohomology(thue_morse), max_prime=5).mod_p_ranks == ((2, 1), (3, 2), (5, 2))


def test_combine_pretty():
    zero = direct_limit_invariants(int_matrix([], 0))
    assert combine_pretty(zero, 0) == "0"
    assert combine_pretty(zero, 1) == "Z"
    assert combine_pretty(zero, 3) == "Z^3"
    assert combine_pretty(direct_limit_invariants(int_matrix([[1, 1], [1, 0]])), 1) == "Z^3"
    assert combine_pretty(direct_limit_invariants(int_matrix([[3]])), 2) == "Z[1/3] ⊕ Z^2"


def test_deterministic_results(two_component):
    first = compute_cohomology(two_component)
    second = compute_cohomology(two_component)
    assert first.basis_change.P == second.basis_change.P
    assert first.invariants == second.invariants
    assert first.pretty == second.pretty


def test_random_corpus_block_form_and_acyclic_case(fibonacci, corpus, fast_config):
    consistent_cases = 0
    for s in [fibonacci] + corpus(seed=21, count=40, aperiodic=True):
        result = compute_cohomology(s, fast_config)
        change = result.basis_change
        d, p = s.d, result.p
        assert is_unimodular(change.P)
        assert change.conjugate[p - 1:, :p - 1].is_zero_matrix
        assert change.A1.shape == (d - p + 1, d - p + 1)
        assert all(check.status != FAIL for check in result.checks)
        if p == 1 and result.decomposition.b1_S == 0:
            consistent_cases += 1
            assert result.l == 0
            full = direct_limit_invariants(transition_matrix(s).T, result.max_prime)
            assert result.limit.charpoly == full.charpoly
            assert _status(result, "acyclic_s_matches_full_limit") == PASS
    assert consistent_cases > 0


def test_invariance_suite_on_fixtures(known_fixtures):
    for s in known_fixtures:
        suite = invariance_suite(s)
        assert [entry.transform for entry in suite.entries] == ["identity", "power", "collar"]
        tuples = {entry.invariants.comparable() for entry in suite.entries}
        assert len(tuples) == 1


def test_invariance_suite_with_cube_and_without_collar(fibonacci):
    config = AppConfig(analysis=AnalysisConfig(power=3, collar=False))
    suite = invariance_suite(fibonacci, config)
    assert [entry.label for entry in suite.entries] == ["phi", "phi^3"]
    assert suite.entries[1].pretty == "Z^2"


def test_invariance_suite_on_random_corpus(corpus, fast_config):
    for s in corpus(seed=5, count=25, aperiodic=True):
        suite = invariance_suite(s, fast_config)
        assert len({entry.invariants.comparable() for entry in suite.entries}) == 1, s.format_rules()


class _SwapTransform(PresentationTransform):
    def __init__(self, other):
        super().__init__("swap", {})
        self.other = other

    def apply(self, s):
        return TransformResult(self.name, s, self.other)

    def describe(self):
        return "swapped"


def test_invariance_violation_is_reported(monkeypatch, fibonacci, thue_morse):
    monkeypatch.setattr(
        "src.pipeline._suite_transforms",
        lambda analysis: [create_transform("identity"), _SwapTransform(thue_morse)],
    )
    with pytest.raises(InvarianceViolation) as excinfo:
        invariance_suite(fibonacci)
    assert excinfo.value.field == "mod_p_ranks"
    assert excinfo.value.presentation == "swapped"
    assert excinfo.value.exit_code == 5


def test_timings_cover_every_stage(fibonacci):
    result = compute_cohomology(fibonacci)
    assert set(result.timings) == {
        "guards", "perron", "language", "complex", "eventual range", "basis change", "direct limit", "checks"}
