import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghznet import oracles
from ghznet.protocol import GhzRecord, fuse_ghz_records
from ghznet.topology import build_square_grid


def make_records(sizes):
    out, start = [], 0
    for m in sizes:
        out.append(GhzRecord(frozenset(range(start, start + m))))
        start += m
    return out


def as_sets(groups):
    return sorted((frozenset(getattr(g, "qubits", g)) for g in groups), key=min)


def test_ghz_basis_orthonormal():
    for k in (1, 2, 3):
        b = np.array([v.reshape(-1) for v in oracles.ghz_basis(k)])
        np.testing.assert_allclose(b @ b.conj().T, np.eye(2**k), atol=1e-12)


def test_groups_of_product():
    state = oracles.StateVector.ghz_product([{0, 1, 2}, {3}, {4, 5}])
    assert oracles.ghz_groups(state) == [frozenset({0, 1, 2}), frozenset({3}), frozenset({4, 5})]


def test_groups_reject_non_ghz():
    # W state: no pair has |<ZZ>| = 1 yet the qubits are entangled
    t = np.zeros((2, 2, 2), dtype=complex)
    t[1, 0, 0] = t[0, 1, 0] = t[0, 0, 1] = 1 / np.sqrt(3)
    with pytest.raises(AssertionError):
        oracles.ghz_groups(oracles.StateVector([0, 1, 2], t))


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data(), st.booleans(),
       st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_fusion_matches_state_vector(sizes, data, success, seed):
    if sum(sizes) > 12:
        return
    records = make_records(sizes)
    chosen = data.draw(st.lists(st.integers(0, len(sizes) - 1), min_size=1, max_size=len(sizes), unique=True))
    fused = [data.draw(st.sampled_from(sorted(records[i].qubits))) for i in chosen]
    rng = np.random.default_rng(seed)
    state = oracles.StateVector.ghz_product([r.qubits for r in records])
    if success and len(fused) > 1:
        state.fuse(fused, rng)
    else:
        success = False
        for qb in fused:
            state.measure_x(qb, rng)
    expected = fuse_ghz_records(records, fused, success)
    assert as_sets(oracles.ghz_groups(state)) == as_sets(expected)


def test_two_round_fusion():
    rng = np.random.default_rng(0)
    records = make_records([2, 2, 2, 2])
    state = oracles.StateVector.ghz_product([r.qubits for r in records])
    for fused in ([1, 2], [3, 4], [5, 6]):
        state.fuse(fused, rng)
        records = fuse_ghz_records(records, fused, True)
    assert as_sets(oracles.ghz_groups(state)) == as_sets(records) == [frozenset({0, 7})]


def test_x_distribution():
    d = oracles.ghz_x_distribution(3)
    parity = np.array([bin(i).count("1") % 2 for i in range(8)])
    np.testing.assert_allclose(d[parity == 0], 0.25)
    np.testing.assert_allclose(d[parity == 1], 0.0, atol=1e-15)


def test_enumeration_single_link():
    g = build_square_grid(2, 1, (0, 0), (1, 0))
    assert oracles.exact_expected_shared(g, 2, 0.3, 0.5) == pytest.approx(0.3)


@pytest.mark.parametrize("n", [2, 3])
def test_enumeration_path(n):
    g = build_square_grid(4, 1, (0, 0), (3, 0))
    p, q = 0.6, 0.7
    assert oracles.exact_expected_shared(g, n, p, q) == pytest.approx(p**3 * q**2)


def test_enumeration_bell_only_square():
    # each helper on the 2x2 ring has two edges; both consumer paths need one fusion
    g = build_square_grid(2, 2, (0, 0), (1, 1))
    p, q = 0.5, 0.9
    one_path = p**2 * q
    assert oracles.exact_expected_shared(g, 2, p, q) == pytest.approx(2 * one_path)
