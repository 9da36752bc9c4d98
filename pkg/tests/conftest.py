from fractions import Fraction

import pytest

from tsilab.corenorm import NormEvaluator
from tsilab.thetaseq import ThetaSeq


@pytest.fixture(scope="session")
def tsirelson():
    return ThetaSeq.geometric(Fraction(1, 2))


@pytest.fixture(scope="session")
def tsirelson_s1():
    return ThetaSeq.from_table([Fraction(1, 2)])


@pytest.fixture(scope="session")
def harmonic():
    return ThetaSeq.harmonic()


# session-scoped evaluators: memo reuse keeps the suite fast
@pytest.fixture(scope="session")
def ev_t(tsirelson):
    return NormEvaluator(tsirelson)


@pytest.fixture(scope="session")
def ev_s1(tsirelson_s1):
    return NormEvaluator(tsirelson_s1)


@pytest.fixture(scope="session")
def ev_h(harmonic):
    return NormEvaluator(harmonic)
