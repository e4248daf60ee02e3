import math

import numpy as np
import pytest

from ttopt import benchmarks as B
from ttopt.errors import DomainError, UnknownBenchmark


# Pointwise reference formulas written with the math module only.
def ref_ackley(x):
    d = len(x)
    s1 = math.sqrt(sum(v * v for v in x) / d)
    s2 = sum(math.cos(2 * math.pi * v) for v in x) / d
    return -20 * math.exp(-0.2 * s1) - math.exp(s2) + 20 + math.e


def ref_alpine(x):
    return sum(abs(v * math.sin(v) + 0.1 * v) for v in x)


def ref_brown(x):
    return sum((x[i] ** 2) ** (x[i + 1] ** 2 + 1) + (x[i + 1] ** 2) ** (x[i] ** 2 + 1)
               for i in range(len(x) - 1))


def ref_exponential(x):
    return -math.exp(-0.5 * sum(v * v for v in x))


def ref_griewank(x):
    prod = 1.0
    for i, v in enumerate(x, start=1):
        prod *= math.cos(v / math.sqrt(i))
    return sum(v * v for v in x) / 4000 - prod + 1


def ref_michalewicz(x, m=10):
    return -sum(math.sin(v) * math.sin(i * v * v / math.pi) ** (2 * m)
                for i, v in enumerate(x, start=1))


def ref_qing(x):
    return sum((v * v - i) ** 2 for i, v in enumerate(x, start=1))


def ref_rastrigin(x):
    return 10 * len(x) + sum(v * v - 10 * math.cos(2 * math.pi * v) for v in x)


def ref_schaffer(x):
    total = 0.0
    for a, b in zip(x[:-1], x[1:]):
        s = a * a + b * b
        total += 0.5 + (math.sin(math.sqrt(s)) ** 2 - 0.5) / (1 + 0.001 * s) ** 2
    return total


def ref_schwefel(x):
    return 418.9829 * len(x) - sum(v * math.sin(math.sqrt(abs(v))) for v in x)


REFERENCE = {
    "F1": ref_ackley, "F2": ref_alpine, "F3": ref_brown, "F4": ref_exponential,
    "F5": ref_griewank, "F6": ref_michalewicz, "F7": ref_qing, "F8": ref_rastrigin,
    "F9": ref_schaffer, "F10": ref_schwefel,
}

TABLE = {
    "F1": (-32.768, 32.768, 0.0), "F2": (-10, 10, 0.0), "F3": (-1, 4, 0.0), "F4": (-1, 1, -1.0),
    "F5": (-600, 600, 0.0), "F6": (0, math.pi, -9.66015), "F7": (0, 500, 0.0),
    "F8": (-5.12, 5.12, 0.0), "F9": (-100, 100, 0.0), "F10": (-500, 500, 0.0),
}


def test_catalog_matches_table():
    cat = B.catalog()
    assert [b.id for b in cat] == [f"F{i}" for i in range(1, 11)]
    for b in cat:
        assert (b.lower, b.upper, b.known_min) == pytest.approx(TABLE[b.id])


@pytest.mark.parametrize("fid", list(REFERENCE))
@pytest.mark.parametrize("d", [1, 2, 7])
def test_batch_matches_reference(fid, d):
    b = B.get(fid)
    rng = np.random.default_rng(d)
    x = rng.uniform(b.lower, b.upper, size=(25, d))
    got = b(x)
    want = [REFERENCE[fid](list(row)) for row in x]
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(got, [b(row)[0] for row in x])


def test_ackley_origin_any_d():
    for d in (1, 10, 100):
        assert abs(B.get("F1")(np.zeros(d))[0]) < 1e-14


def test_exponential_origin():
    assert B.get("F4")(np.zeros(10))[0] == -1.0


def test_rastrigin_values():
    f = B.get("F8")
    assert f(np.zeros(10))[0] == 0.0
    e1 = np.zeros(10)
    e1[0] = 1.0
    assert f(e1)[0] == pytest.approx(1.0, abs=1e-12)


def test_schwefel_near_zero_at_published_minimizer():
    b = B.get("F10")
    assert abs(b(b.argmin(10))[0]) <= 1e-3


@pytest.mark.parametrize("fid", ["F1", "F2", "F3", "F4", "F5", "F7", "F8", "F9"])
@pytest.mark.parametrize("d", [2, 10, 50])
def test_minimizer_attains_minimum(fid, d):
    b = B.get(fid)
    assert b(b.argmin(d))[0] == pytest.approx(b.minimum(d), abs=1e-6)


def test_separable_zero_minimizers_exact():
    for fid in ("F1", "F2", "F4", "F8"):
        b = B.get(fid)
        for d in (1, 3, 20):
            assert abs(b(np.zeros(d))[0] - b.known_min) < 1e-14


def test_michalewicz_two_dim_known_minimum():
    # standard 2-D minimum of the m=10 function
    assert B.get("F6")(np.array([2.20290552, 1.57079633]))[0] == pytest.approx(-1.8013034, abs=1e-6)


def test_michalewicz_minimum_only_for_ten_dims():
    b = B.get("F6")
    assert b.minimum(10) == -9.66015
    assert math.isnan(b.minimum(5))


@pytest.mark.parametrize("fid", list(REFERENCE))
def test_finite_on_box_high_dim(fid):
    b = B.get(fid)
    rng = np.random.default_rng(0)
    x = np.vstack([rng.uniform(b.lower, b.upper, size=(20, 500)),
                   np.full((1, 500), b.lower), np.full((1, 500), b.upper)])
    assert np.all(np.isfinite(b(x)))


def test_domain_error():
    b = B.get("F5")
    with pytest.raises(DomainError):
        b(np.array([[0.0, 600.5]]))


def test_lookup_by_name_and_unknown():
    assert B.get("griewank").id == "F5"
    assert B.get("f10").name == "schwefel"
    with pytest.raises(UnknownBenchmark):
        B.get("rosenbrock")
