import random
from pathlib import Path
from typing import List

import pytest

from src.config import AnalysisConfig, AppConfig
from src.substitution import Substitution, is_primitive, parse_substitution, periodicity_check

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def random_substitution(rng: random.Random, max_letters: int = 4, max_length: int = 4) -> Substitution:
    d = rng.randint(2, max_letters)
    alphabet = [str(i + 1) for i in range(d)]
    rules = {a: [rng.choice(alphabet) for _ in range(rng.randint(1, max_length))] for a in alphabet}
    return Substitution.from_rules(rules)


def primitive_corpus(seed: int, count: int, aperiodic: bool = False,
                     max_letters: int = 4, max_length: int = 4) -> List[Substitution]:
    """Seeded random primitive substitutions, optionally screened for periodicity"""
    rng = random.Random(seed)
    corpus = []
    while len(corpus) < count:
        s = random_substitution(rng, max_letters, max_length)
        if not is_primitive(s).primitive:
            continue
        if aperiodic and periodicity_check(s, 24).periodic:
            continue
        corpus.append(s)
    return corpus


@pytest.fixture
def fibonacci():
    return parse_substitution("name = Fibonacci\n1 -> 1 2\n2 -> 1\n")


@pytest.fixture
def thue_morse():
    return parse_substitution("name = Morse-Thue\n1 -> 1 2\n2 -> 2 1\n")


@pytest.fixture
def two_component():
    return parse_substitution((SAMPLES / "two_component.sub").read_text())


@pytest.fixture
def proper_substitution():
    return parse_substitution("1 -> 1 2 1 ; 2 -> 1 2 2 1")


@pytest.fixture
def periodic_substitution():
    return parse_substitution("1 -> 1 2\n2 -> 1 2\n")


@pytest.fixture
def reducible_substitution():
    return parse_substitution("1 -> 1 1\n2 -> 2 2\n")


@pytest.fixture
def known_fixtures(fibonacci, thue_morse, two_component):
    return [fibonacci, thue_morse, two_component]


@pytest.fixture
def two_component_basis():
    return (SAMPLES / "two_component_basis.json").read_text()


@pytest.fixture
def corpus():
    return primitive_corpus


@pytest.fixture
def fast_config():
    """Shorter periodicity horizon for the random corpora"""
    return AppConfig(analysis=AnalysisConfig(horizon=24))


@pytest.fixture
def samples_dir():
    return SAMPLES
