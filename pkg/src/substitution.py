"""Substitutions on a finite alphabet: parsing, transition matrix, language,
primitivity, periodicity screening, Perron data and the power/collar
presentations of the same tiling space.

Letters are interned: a ``Substitution`` keeps the symbols in first-appearance
order and stores every word as a tuple of letter indices into that order.
"""
import logging
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import ImmutableMatrix

from .errors import (
    AlphabetTooSmallError,
    DuplicateRuleError,
    EmptyImageError,
    InternalInvariantError,
    PerronConvergenceError,
    SubstitutionSyntaxError,
    UnknownLetterError,
)

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]

PERRON_TOLERANCE = 1e-12
PERRON_RESIDUAL = 1e-10
PERRON_MAX_ITERATIONS = 100_000

_TOKEN = re.compile(r"->|(?:(?!->)[^\s;#])+")
_HEADER = re.compile(r"^\s*name\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class Substitution:
    """A substitution rule a -> phi(a) over an ordered alphabet"""
    alphabet: Tuple[str, ...]
    images: Tuple[Word, ...]
    name: Optional[str] = None

    def __post_init__(self):
        d = len(self.alphabet)
        seen = set()
        for letter in self.alphabet:
            if letter in seen:
                raise DuplicateRuleError(letter)
            seen.add(letter)
        if len(self.images) != d:
            raise InternalInvariantError(f"{len(self.images)} images for {d} letters")
        for letter, image in zip(self.alphabet, self.images):
            if not image:
                raise EmptyImageError(letter)
            for i in image:
                if not 0 <= i < d:
                    raise UnknownLetterError(str(i))
        if d < 2:
            raise AlphabetTooSmallError(d)

    @classmethod
    def from_rules(cls, rules: Dict[str, Sequence[str]], name: Optional[str] = None) -> "Substitution":
        """Build from a letter -> word mapping; the mapping's order is the alphabet order"""
        alphabet = tuple(rules)
        index = {letter: i for i, letter in enumerate(alphabet)}
        images = []
        for word in rules.values():
            for letter in word:
                if letter not in index:
                    raise UnknownLetterError(letter)
            images.append(tuple(index[letter] for letter in word))
        return cls(alphabet, tuple(images), name)

    @property
    def d(self) -> int:
        return len(self.alphabet)

    def index(self, letter: str) -> int:
        return self.alphabet.index(letter)

    def image(self, letter: str) -> Tuple[str, ...]:
        return self.letters(self.images[self.index(letter)])

    def letters(self, word: Word) -> Tuple[str, ...]:
        return tuple(self.alphabet[i] for i in word)

    def label(self, word: Word) -> str:
        """Readable form of a word: concatenated for one-character letters"""
        symbols = self.letters(word)
        if all(len(symbol) == 1 for symbol in self.alphabet):
            return "".join(symbols)
        return " ".join(symbols)

    def apply(self, word: Word) -> Word:
        out: List[int] = []
        for i in word:
            out.extend(self.images[i])
        return tuple(out)

    def iterate(self, word: Word, n: int) -> Word:
        for _ in range(n):
            word = self.apply(word)
        return word

    def first_letter(self, i: int) -> int:
        return self.images[i][0]

    def last_letter(self, i: int) -> int:
        return self.images[i][-1]

    def format_rules(self) -> str:
        """Canonical input text; parses back to an equal substitution"""
        lines = []
        if self.name:
            lines.append(f"name = {self.name}")
        for letter, image in zip(self.alphabet, self.images):
            lines.append(f"{letter} -> {' '.join(self.letters(image))}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PrimitivityResult:
    primitive: bool
    witness_power: Optional[int] = None


@dataclass(frozen=True)
class LanguageSlice:
    """All allowed words of length <= n"""
    n: int
    words: FrozenSet[Word]

    def of_length(self, k: int) -> List[Word]:
        return sorted(w for w in self.words if len(w) == k)

    def count(self, k: int) -> int:
        return sum(1 for w in self.words if len(w) == k)

    def complexity(self) -> List[int]:
        counts = [0] * (self.n + 1)
        for w in self.words:
            counts[len(w)] += 1
        return counts[1:]


@dataclass(frozen=True)
class PeriodicityVerdict:
    periodic: bool
    horizon: int
    witness: Optional[int] = None
    complexity: Tuple[int, ...] = ()

    @property
    def verdict(self) -> str:
        return "Periodic" if self.periodic else "NoPeriodDetected"


@dataclass(frozen=True)
class PerronData:
    eigenvalue: float
    omega: Tuple[float, ...]


@dataclass(frozen=True)
class ProperResult:
    proper: bool
    first: Optional[int] = None
    last: Optional[int] = None


@dataclass(frozen=True)
class CollarResult:
    collared: Substitution
    legend: Dict[str, Tuple[str, str, str]]


def parse_substitution(text: str) -> Substitution:
    """Parse ``a -> w1 w2 ... ; b -> ...`` rules, with an optional ``name = ...`` header"""
    name: Optional[str] = None
    rules: Dict[str, List[str]] = {}
    rule_lines: Dict[str, int] = {}
    references: List[Tuple[str, int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0]
        if not rules and name is None and '->' not in line:
            header = _HEADER.match(line)
            if header:
                name = header.group(1).strip().strip('"\'') or None
                continue

        offset = 0
        for segment in line.split(';'):
            tokens = [(m.group(0), offset + m.start() + 1) for m in _TOKEN.finditer(segment)]
            offset += len(segment) + 1
            if not tokens:
                continue

            lhs, lhs_col = tokens[0]
            if lhs == '->':
                raise SubstitutionSyntaxError("missing letter before '->'", lineno, lhs_col)
            if len(tokens) < 2:
                raise SubstitutionSyntaxError(f"expected '->' after {lhs!r}", lineno, lhs_col + len(lhs))
            if tokens[1][0] != '->':
                raise SubstitutionSyntaxError(
                    f"expected '->' but found {tokens[1][0]!r}", lineno, tokens[1][1])

            rhs = tokens[2:]
            for token, col in rhs:
                if token == '->':
                    raise SubstitutionSyntaxError("unexpected second '->'", lineno, col)
            if lhs in rules:
                raise DuplicateRuleError(lhs, lineno)
            if not rhs:
                raise EmptyImageError(lhs, lineno)

            rules[lhs] = [token for token, _ in rhs]
            rule_lines[lhs] = lineno
            references.extend((token, lineno, col) for token, col in rhs)

    for token, lineno, col in references:
        if token not in rules:
            raise UnknownLetterError(token, lineno, col)
    if len(rules) < 2:
        raise AlphabetTooSmallError(len(rules))

    substitution = Substitution.from_rules(rules, name)
    logger.debug(f"Parsed substitution {name!r} on {substitution.d} letters")
    return substitution


def split_batch(text: str) -> List[str]:
    """Split a batch file into blank-line separated blocks, dropping comment-only ones"""
    blocks: List[str] = []
    current: List[str] = []
    for raw in text.splitlines() + [""]:
        if raw.strip():
            current.append(raw)
            continue
        if current and any(line.split('#', 1)[0].strip() for line in current):
            blocks.append("\n".join(current) + "\n")
        current = []
    return blocks


def _count_matrix(s: Substitution) -> List[List[int]]:
    counts = [[0] * s.d for _ in range(s.d)]
    for j, image in enumerate(s.images):
        for i in image:
            counts[i][j] += 1
    return counts


def transition_matrix(s: Substitution) -> ImmutableMatrix:
    """Entry (i, j) counts the occurrences of letter i in phi(j)"""
    return ImmutableMatrix(_count_matrix(s))


def is_primitive(s: Substitution) -> PrimitivityResult:
    """Boolean matrix powers up to the Wielandt bound d^2 - 2d + 2"""
    support = (np.array(_count_matrix(s), dtype=np.int64) > 0).astype(np.int64)
    bound = s.d * s.d - 2 * s.d + 2
    current = support.copy()
    for n in range(1, bound + 1):
        if current.all():
            return PrimitivityResult(True, n)
        current = ((current @ support) > 0).astype(np.int64)
    return PrimitivityResult(False, None)


def _spanning_factors(s: Substitution, word: Word, n: int) -> Iterator[Word]:
    """Factors of phi(word) of length <= n that start in phi(word[0]) and end in phi(word[-1])"""
    image = s.apply(word)
    head = len(s.images[word[0]])
    tail_start = len(image) - len(s.images[word[-1]])
    for start in range(head):
        for end in range(max(start + 1, tail_start + 1), min(len(image), start + n) + 1):
            yield image[start:end]


def allowed_factors(s: Substitution, n: int) -> LanguageSlice:
    """Least set containing the letters and closed under factors (length <= n) of phi(w)"""
    if n < 1:
        raise ValueError(f"word length bound must be positive, got {n}")

    words = {(a,) for a in range(s.d)}
    pending = list(words)
    while pending:
        word = pending.pop()
        for factor in _spanning_factors(s, word, n):
            if factor not in words:
                words.add(factor)
                pending.append(factor)

    return LanguageSlice(n, frozenset(words))


def complexity(s: Substitution, n: int) -> List[int]:
    """Factor complexity p(1), ..., p(n)"""
    return allowed_factors(s, n).complexity()


def periodicity_check(s: Substitution, horizon: int = 64) -> PeriodicityVerdict:
    """Complexity screen: p(n) <= n for a minimal subshift certifies periodicity"""
    counts = complexity(s, horizon)
    for n, p in enumerate(counts, 1):
        if p <= n:
            logger.info(f"Periodic substitution: p({n}) = {p}")
            return PeriodicityVerdict(True, horizon, n, tuple(counts))
    return PeriodicityVerdict(False, horizon, None, tuple(counts))


def perron_data(M: ImmutableMatrix) -> PerronData:
    """Power iteration on M^T from the all-ones vector (left Perron eigenvector of M)"""
    At = np.array(M.T.tolist(), dtype=float)
    x = np.ones(At.shape[0])
    previous = None
    for iteration in range(1, PERRON_MAX_ITERATIONS + 1):
        y = At @ x
        quotient = float(x @ y) / float(x @ x)
        x = y / np.max(np.abs(y))
        if previous is not None and abs(quotient - previous) < PERRON_TOLERANCE * abs(quotient):
            residual = np.max(np.abs(At @ x - quotient * x)) / np.max(np.abs(x))
            if residual < PERRON_RESIDUAL:
                break
        previous = quotient
    else:
        raise PerronConvergenceError(
            f"power iteration did not converge after {PERRON_MAX_ITERATIONS} iterations")

    omega = x / np.min(x)
    eigenvalue = float(omega @ (At @ omega)) / float(omega @ omega)
    logger.debug(f"Perron eigenvalue {eigenvalue:.12g} after {iteration} iterations")
    return PerronData(eigenvalue, tuple(float(v) for v in omega))


def power(s: Substitution, n: int) -> Substitution:
    """The substitution a -> phi^n(a); same tiling space"""
    if n < 1:
        raise ValueError(f"power must be positive, got {n}")
    result = Substitution(
        s.alphabet,
        tuple(s.iterate((a,), n) for a in range(s.d)),
        f"{s.name}^{n}" if s.name and n > 1 else s.name,
    )
    if transition_matrix(result) != transition_matrix(s) ** n:
        raise InternalInvariantError(f"transition matrix of phi^{n} is not A^{n}")
    return result


def _eventually_constant(step: Sequence[int]) -> Optional[int]:
    current = set(range(len(step)))
    for _ in range(len(step)):
        current = {step[i] for i in current}
    return next(iter(current)) if len(current) == 1 else None


def is_proper(s: Substitution) -> ProperResult:
    """All high powers phi^k(i) begin with one letter b and end with one letter e"""
    first = _eventually_constant([s.first_letter(a) for a in range(s.d)])
    last = _eventually_constant([s.last_letter(a) for a in range(s.d)])
    if first is None or last is None:
        return ProperResult(False)
    return ProperResult(True, first, last)


def _collared_symbols(s: Substitution, triples: Sequence[Word]) -> List[str]:
    if all(len(symbol) == 1 for symbol in s.alphabet):
        symbols = ["".join(s.letters(t)) for t in triples]
    else:
        symbols = [".".join(s.letters(t)) for t in triples]
    if len(set(symbols)) != len(symbols):
        symbols = [f"c{i}" for i in range(len(triples))]
    return symbols


def collar(s: Substitution) -> CollarResult:
    """Relabel each tile b by its neighbours (a, b, c); the result forces its border"""
    allowed = allowed_factors(s, 3)
    triples = allowed.of_length(3)
    position = {t: i for i, t in enumerate(triples)}

    images = []
    for a, b, c in triples:
        word = s.images[b]
        collared_word = []
        for i, center in enumerate(word):
            left = s.last_letter(a) if i == 0 else word[i - 1]
            right = s.first_letter(c) if i == len(word) - 1 else word[i + 1]
            triple = (left, center, right)
            if triple not in position:
                raise InternalInvariantError(
                    f"collared image of {s.label((a, b, c))} uses disallowed word {s.label(triple)}",
                    stage="collar")
            collared_word.append(position[triple])
        images.append(tuple(collared_word))

    symbols = _collared_symbols(s, triples)
    collared = Substitution(tuple(symbols), tuple(images), f"{s.name} (collared)" if s.name else None)
    if not is_primitive(collared).primitive:
        raise InternalInvariantError("collared substitution is not primitive", stage="collar")

    legend = {symbol: s.letters(t) for symbol, t in zip(symbols, triples)}
    logger.info(f"Collared {s.d} letters into {collared.d}")
    return CollarResult(collared, legend)
