"""Eigenvector overlap matrices and non-orthogonality measures."""
from __future__ import annotations

import numpy as np
import pytest

from pcspectra.chain import TridiagonalMatrix, build, family_b, legacy
from pcspectra.eig import spectrum
from pcspectra.nonortho import OverlapMatrix, f1, f2, overlap_matrix, sweep_nonortho


def hermitian_chain(rng, L):
    d = rng.normal(size=L).astype(complex)
    u = rng.normal(size=L - 1) + 1j * rng.normal(size=L - 1)
    return TridiagonalMatrix(d, u, np.conj(u))


def test_overlap_identity_for_hermitian_chain():
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = hermitian_chain(rng, 8)
        u = overlap_matrix(spectrum(m))
        assert u.max_offdiag() < 1e-8
        assert f1(u) == pytest.approx(0.0, abs=1e-8)
        assert f2(u) == pytest.approx(0.0, abs=1e-7)


def test_overlap_matrix_invariants():
    rng = np.random.default_rng(1)
    d = rng.normal(size=10) + 1j * rng.normal(size=10)
    m = TridiagonalMatrix(d, rng.normal(size=9) + 0j, rng.normal(size=9) + 0j)
    u = overlap_matrix(spectrum(m))
    e = u.entries
    assert np.abs(np.diag(e) - 1.0).max() < 1e-12
    assert np.abs(e - e.conj().T).max() < 1e-12
    # Gram matrix of unit vectors: positive semidefinite, entries in the unit disc
    assert np.linalg.eigvalsh(e).min() > -1e-12
    assert np.abs(e).max() <= 1 + 1e-12


def test_measures_on_hand_built_matrix():
    e = np.array([[1.0, 0.5], [0.5, 1.0]], dtype=complex)
    u = OverlapMatrix(e)
    assert u.L == 2
    assert u.max_offdiag() == pytest.approx(0.5)
    assert f1(u) == pytest.approx(0.5)          # (0 + 0.5 + 0.5 + 0) / 2
    assert f2(u) == pytest.approx(np.sqrt(0.5))
    # raw arrays are accepted too
    assert f1(e) == pytest.approx(f1(u))
    assert f2(e) == pytest.approx(f2(u))


def test_overlap_rejects_zero_column():
    with pytest.raises(ValueError):
        overlap_matrix(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


def test_coalescence_drives_pair_overlap_to_one():
    u = overlap_matrix(spectrum(build(family_b(10, 1.5, 1.0, 0.0, 3.0))))
    e = np.abs(u.entries)
    for j in range(5):
        assert e[2 * j, 2 * j + 1] > 1 - 1e-10


def test_strong_coupling_restores_near_orthogonality():
    # far beyond coalescence the pairs decouple again: a tenfold drop in f2
    m_pc = build(family_b(10, 1.5, 1.0, 0.0, 3.0))
    m_zeno = build(family_b(10, 1.5, 1.0, 0.0, 50.0))
    ratio = f2(overlap_matrix(spectrum(m_pc))) / f2(overlap_matrix(spectrum(m_zeno)))
    assert ratio > 10


def test_sweep_collects_measures_and_counts():
    grid = np.linspace(1.0, 3.0, 5)
    points = sweep_nonortho(lambda g: family_b(10, 1.5, 1.0, 0.0, g), grid)
    assert len(points) == 5
    assert [p.gamma for p in points] == pytest.approx(list(grid))
    assert all(p.f1 >= 0 and p.f2 >= 0 for p in points)
    assert points[-1].distinct == 5  # gamma = 3 sits on the coalesced side
    assert points[0].distinct == 10


def test_sweep_needs_two_points():
    with pytest.raises(ValueError):
        sweep_nonortho(lambda g: legacy(4, 0.0, g), np.array([1.0]))
