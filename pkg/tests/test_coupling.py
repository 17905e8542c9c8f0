import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabires import DomainError
from rabires.basis import HARDWALL, HARMONIC
from rabires.coupling import (
    coupling_exact,
    coupling_leading,
    coupling_matrix,
    coupling_quadrature_oracle,
    cos_sin_elements,
    harmonic_coupling_exact,
    harmonic_coupling_leading,
    hardwall_coupling_exact,
    hardwall_coupling_leading,
    laguerre_assoc,
)

TRAPS = [HARMONIC, HARDWALL]


@pytest.mark.parametrize("n, alpha, x, expected", [(0, 3, 0.7, 1.0), (1, 1, 0.25, 1.75), (2, 0, 1.0, -0.5)])
def test_laguerre_examples(n, alpha, x, expected):
    assert laguerre_assoc(n, alpha, x) == pytest.approx(expected, abs=1e-15)


def test_laguerre_matches_scipy():
    from scipy.special import eval_genlaguerre

    for n in range(12):
        for alpha in range(6):
            for x in (0.01, 0.3, 2.0):
                assert laguerre_assoc(n, alpha, x) == pytest.approx(eval_genlaguerre(n, alpha, x), rel=1e-12, abs=1e-12)


def test_harmonic_examples():
    assert harmonic_coupling_exact(0, 0, 0.4) == pytest.approx(0.923116, abs=1e-6)
    assert harmonic_coupling_exact(0, 0, 0.4) == pytest.approx(math.exp(-0.08), abs=1e-15)
    assert harmonic_coupling_exact(0, 1, 0.1) == pytest.approx(0.0995012j, abs=1e-7)
    assert harmonic_coupling_leading(0, 1, 0.3) == pytest.approx(0.3j)
    assert harmonic_coupling_leading(4, 4, 0.3) == 1.0
    assert harmonic_coupling_leading(0, 3, 0.1) == pytest.approx(-4.0825e-4j, abs=1e-8)


def test_hardwall_examples():
    assert hardwall_coupling_exact(1, 1, 0.5) == pytest.approx(8 * math.sin(math.pi / 4) / (math.pi * 0.5 * 3.75), abs=1e-14)
    # sign fixed by the defining integral (see ledger)
    assert hardwall_coupling_exact(1, 2, 0.4) == pytest.approx(0.22195j, abs=1e-5)
    eta = 0.05
    assert hardwall_coupling_leading(1, 2, eta) == pytest.approx(1j * (8 / 9) * (2 * eta / math.pi))
    assert hardwall_coupling_leading(1, 3, eta) == pytest.approx(0.1875 * eta**2)
    assert abs(hardwall_coupling_leading(1, 4, 0.1)) == pytest.approx(4.527e-3, abs=1e-6)
    with pytest.raises(DomainError):
        hardwall_coupling_leading(2, 2, 0.1)


@pytest.mark.parametrize("trap", TRAPS)
def test_zero_eta_is_identity(trap):
    for n in range(trap.n_min, trap.n_min + 6):
        for m in range(trap.n_min, trap.n_min + 6):
            assert coupling_exact(trap, n, m, 0.0) == pytest.approx(float(n == m), abs=1e-15)
            assert coupling_quadrature_oracle(trap, n, m, 0.0) == pytest.approx(float(n == m), abs=1e-10)


@pytest.mark.parametrize("trap", TRAPS)
@pytest.mark.parametrize("eta", [0.1, 0.4, 1.0, 1.999, 2.001])
def test_oracle_equivalence(trap, eta):
    for n in range(trap.n_min, 11):
        for m in range(n, 11):
            ref = coupling_quadrature_oracle(trap, n, m, eta)
            assert abs(coupling_exact(trap, n, m, eta) - ref) < 1e-9


@pytest.mark.parametrize("n, m", [(1, 1), (1, 3), (2, 4), (1, 2), (3, 4), (2, 5)])
def test_hardwall_exactly_at_singularities(n, m):
    for eta in (m - n, m + n, m - n + 1e-7, m + n - 3e-7):
        if eta <= 0:
            continue
        ref = coupling_quadrature_oracle(HARDWALL, n, m, eta)
        assert abs(hardwall_coupling_exact(n, m, eta) - ref) < 1e-9


@pytest.mark.parametrize("trap", TRAPS)
@pytest.mark.parametrize("eta", [0.05, 0.1, 0.4, 1.0])
def test_symmetry_and_parity(trap, eta):
    for n in range(trap.n_min, 13):
        for m in range(trap.n_min, 13):
            z = coupling_exact(trap, n, m, eta)
            assert z == coupling_exact(trap, m, n, eta)
            if (n - m) % 2:
                assert z.real == 0.0
            else:
                assert z.imag == 0.0


def test_cos_sin_elements():
    assert cos_sin_elements(HARMONIC, 0, 1, 0.3)[0] == 0.0
    c, s = cos_sin_elements(HARMONIC, 0, 0, 0.4)
    assert c == pytest.approx(0.923116, abs=1e-6) and s == 0.0
    assert cos_sin_elements(HARMONIC, 0, 2, 0.3)[1] == 0.0


@pytest.mark.parametrize("trap", TRAPS)
def test_unitarity_sum_rule(trap):
    size = 60
    for eta in (0.1, 0.5):
        m = coupling_matrix(trap, eta, size)
        for n in range(trap.n_min, trap.n_min + 6):
            total = sum(abs(m[n, k]) ** 2 for k in m.levels)
            assert 1.0 - total < 1e-8


@pytest.mark.parametrize("trap, n, m", [(HARMONIC, 0, 1), (HARMONIC, 1, 3), (HARMONIC, 2, 4), (HARDWALL, 1, 2), (HARDWALL, 1, 3), (HARDWALL, 2, 5)])
def test_leading_order_consistency(trap, n, m):
    def rel(eta):
        lead = coupling_leading(trap, n, m, eta)
        return abs(coupling_exact(trap, n, m, eta) - lead) / abs(lead)

    etas = [0.2, 0.1, 0.05, 0.025]
    consts = [rel(e) / e**2 for e in etas]
    # fitted C settles as eta halves
    assert abs(consts[-1] - consts[-2]) / consts[-1] < 0.05
    assert max(consts) < 10 * min(consts)
    # the leading phase is exact
    for e in etas:
        z, lead = coupling_exact(trap, n, m, e), coupling_leading(trap, n, m, e)
        assert abs(np.angle(z * np.conj(lead))) < 1e-12


def test_negative_eta_conjugates():
    for trap in TRAPS:
        assert coupling_exact(trap, trap.n_min, trap.n_min + 1, -0.3) == pytest.approx(
            np.conj(coupling_exact(trap, trap.n_min, trap.n_min + 1, 0.3))
        )


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.floats(0.0, 3.0))
def test_hardwall_bounded_and_symmetric(n, m, eta):
    z = hardwall_coupling_exact(n, m, eta)
    assert abs(z) <= 1.0 + 1e-12
    assert z == hardwall_coupling_exact(m, n, eta)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.floats(0.0, 2.0))
def test_harmonic_bounded(n, m, eta):
    assert abs(harmonic_coupling_exact(n, m, eta)) <= 1.0 + 1e-12
