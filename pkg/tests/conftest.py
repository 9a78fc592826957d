import random
from fractions import Fraction
from pathlib import Path

import pytest

from motivix.cmlat import build_model, load_model
from motivix.exact import ExactMatrix, QuadInt

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def models_dir():
    return MODELS_DIR


@pytest.fixture(scope="session")
def g2_model():
    return load_model(MODELS_DIR / "g2-lattice.json")


@pytest.fixture(scope="session")
def g3_model():
    return load_model(MODELS_DIR / "g3-lattice.json")


@pytest.fixture(scope="session")
def g4_model():
    return load_model(MODELS_DIR / "g4-lattice.json")


@pytest.fixture(scope="session")
def c6_model():
    return load_model(MODELS_DIR / "c6.json")


@pytest.fixture(scope="session")
def small_exponent_model():
    """Glue of order 3: every proper K has n_K = 3, below the required bound."""
    return build_model(1, 3, [[[1, 3], [1, 3], [1, 3]]], name="order-3")


@pytest.fixture
def rng():
    return random.Random(20240601)


def random_quad(rng: random.Random, d: int, spread: int = 5) -> QuadInt:
    return QuadInt(
        Fraction(rng.randint(-spread, spread), rng.randint(1, 4)),
        Fraction(rng.randint(-spread, spread), rng.randint(1, 4)),
        d,
    )


def random_matrix(rng: random.Random, g: int, d: int) -> ExactMatrix:
    return ExactMatrix(g, g, tuple(random_quad(rng, d) for _ in range(g * g)))
