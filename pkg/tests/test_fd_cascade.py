import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from deeponet_rates import InputError, ParameterError, SingularUpdateError
from deeponet_rates.fd_cascade import (
    CascadeState,
    RankOneUpdate,
    assemble,
    cascade_solve,
    dense_solve,
    dump_matrix,
    initial_state,
    load_matrix,
    rational_R,
    rational_R_expanded,
    run_cascade,
    sherman_morrison_step,
)
from deeponet_rates.grids import Grid1D, Grid2D
from deeponet_rates.harness import fit_slope
from deeponet_rates.problems import fd_manufactured_error


def unit_square(cells):
    return Grid2D.uniform(0.0, 1.0, cells)


def test_no_coefficients_no_updates():
    s = assemble(unit_square(6), f=lambda x, y: 1 + 0 * x)
    assert s.updates == []
    np.testing.assert_array_equal(s.full_matrix(), s.S)


def test_update_order_a1_a2_a3():
    s = assemble(unit_square(5), a1=0.5, a2=0.5, a3=1.0, f=lambda x, y: 0 * x)
    kinds = [u.kind for u in s.updates]
    assert kinds == sorted(kinds)
    assert kinds.count("a1") == kinds.count("a2") == kinds.count("a3") == 16


def test_unequal_axes_rejected():
    with pytest.raises(InputError):
        Grid2D(Grid1D.uniform(0, 1, 4), Grid1D.uniform(0, 1, 5))


def test_negative_reaction_rejected():
    with pytest.raises(InputError, match="a3"):
        assemble(unit_square(4), a3=-1.0, f=lambda x, y: 0 * x)


def test_advection_step_limit():
    with pytest.raises(ParameterError):
        assemble(unit_square(4), a1=10.0, f=lambda x, y: 0 * x)


def test_dirichlet_poisson_second_order():
    pairs = []
    for cells in (8, 16, 32, 64):
        linf, _, _ = fd_manufactured_error(cells, "dirichlet")
        pairs.append((1 / cells, linf))
    slope, _ = fit_slope(pairs)
    assert abs(slope - 2.0) < 0.15


def test_neumann_up_to_constant():
    errs = [fd_manufactured_error(c, "neumann")[0] for c in (8, 16, 32)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3


def test_robin_is_solvable():
    s = assemble(unit_square(8), a3=1.0, f=lambda x, y: 1 + 0 * x, boundary="robin")
    U, _ = cascade_solve(s)
    np.testing.assert_allclose(U, dense_solve(s), atol=1e-10)


def test_alpha_zero_leaves_state():
    T = np.arange(9.0).reshape(3, 3) + 5 * np.eye(3)
    out = sherman_morrison_step(CascadeState(T), RankOneUpdate(0.0, 1, np.array([1]), np.array([1.0]), "a3"))
    np.testing.assert_array_equal(out.T, T)


def test_single_update_on_identity():
    out = sherman_morrison_step(CascadeState(np.eye(4)), RankOneUpdate(1.0, 0, np.array([0]), np.array([1.0]), "a3"))
    np.testing.assert_allclose(out.T, np.diag([0.5, 1, 1, 1]), rtol=1e-15)
    assert out.condition_log == [2.0]


def test_singular_update_reports_step():
    up = RankOneUpdate(-1.0, 0, np.array([0]), np.array([1.0]), "a3")
    with pytest.raises(SingularUpdateError) as info:
        sherman_morrison_step(CascadeState(np.eye(2)), up)
    assert "1" in str(info.value)


def test_cascade_inverse_matches_lu():
    rng = np.random.default_rng(0)
    g = unit_square(13)
    a3 = rng.uniform(0, 1, 144)
    s = assemble(g, a3=lambda x, y: a3[: len(x)], f=lambda x, y: 0 * x)
    T = run_cascade(s).T
    assert np.max(np.abs(T - np.linalg.inv(s.full_matrix()))) <= 1e-9


def test_empty_update_list_solve():
    s = assemble(unit_square(8), f=lambda x, y: np.sin(3 * x) * y)
    U, log = cascade_solve(s)
    assert log == []
    np.testing.assert_allclose(U, np.linalg.solve(s.S, s.F), atol=1e-10)


def test_reaction_against_dense():
    s = assemble(unit_square(11), a3=1.0, f=lambda x, y: 1 + x * y)
    U, _ = cascade_solve(s)
    assert np.max(np.abs(U - dense_solve(s))) <= 1e-9


def test_advection_against_dense():
    s = assemble(unit_square(16), a1=1.0, f=lambda x, y: np.cos(x + y))
    assert s.h * 1.0 <= 1
    U, _ = cascade_solve(s)
    assert np.max(np.abs(U - dense_solve(s))) <= 1e-8


def test_step_entries_are_rational_R():
    rng = np.random.default_rng(1)
    s = assemble(unit_square(7), a3=2.0, f=lambda x, y: 0 * x)
    state = initial_state(s)
    up = s.updates[10]
    T = state.T
    new = sherman_morrison_step(state, up).T
    for _ in range(100):
        i, j = rng.integers(0, s.size, 2)
        k = up.k
        r = rational_R(up.alpha, T[i, j], T[k, k], T[i, k], T[k, j])
        assert abs(new[i, j] - r) <= 1e-13


def test_rational_R_values():
    assert rational_R(0.0, 0.3, 1.0, 2.0, 3.0) == 0.3
    assert rational_R(1, 1, 1, 1, 1) == 0.5
    with pytest.raises(SingularUpdateError):
        rational_R(1.0, 0.0, -1.0, 1.0, 1.0)


def test_uniform_bound_and_denominators():
    s = assemble(unit_square(10), a3=lambda x, y: 3 * (1 + np.sin(4 * x)), f=lambda x, y: 0 * x)
    state = initial_state(s)
    bound = 2 * np.max(np.abs(state.T))
    worst = 0.0
    for up in s.updates:
        sherman_morrison_step(state, up, inplace=True)
        worst = max(worst, np.max(np.abs(state.T)))
    assert worst <= bound
    assert np.max(np.abs(np.array(state.condition_log) - 1)) < 0.5


@given(*[st.floats(-3, 3)] * 5)
def test_rational_forms_agree(x1, x2, x3, x4, x5):
    den = 1 + x1 * x3
    if abs(den) < 0.1:
        return
    # rounding scale of the expanded numerator over its denominator
    scale = (abs(x2) * (1 + abs(x1 * x3)) + abs(x1 * x4 * x5)) / abs(den)
    a = rational_R(x1, x2, x3, x4, x5)
    b = rational_R_expanded(x1, x2, x3, x4, x5)
    assert abs(a - b) <= 1e-14 * max(1.0, scale)


@given(st.integers(3, 8), st.integers(0, 2**32 - 1))
def test_reaction_order_invariance(cells, seed):
    rng = np.random.default_rng(seed)
    s = assemble(unit_square(cells), a3=lambda x, y: rng.uniform(0, 5, len(x)), f=lambda x, y: 0 * x)
    perm = rng.permutation(len(s.updates))
    np.testing.assert_allclose(run_cascade(s, perm).T, run_cascade(s).T, atol=1e-10)


@given(st.integers(3, 12), st.floats(0, 5), st.floats(-1, 1))
def test_cascade_equals_dense(cells, c3, c1):
    s = assemble(unit_square(cells), a1=c1, a3=c3, f=lambda x, y: np.exp(x) - y)
    U, _ = cascade_solve(s)
    ref = dense_solve(s)
    assert np.max(np.abs(U - ref)) <= 1e-8 * max(np.max(np.abs(ref)), 1e-300)


@given(arrays(float, (4, 5), elements=st.floats(-1e6, 1e6, allow_subnormal=False)))
def test_matrix_dump_round_trip(tmp_path_factory, M):
    path = tmp_path_factory.mktemp("dump") / "m.txt"
    dump_matrix(path, M)
    np.testing.assert_array_equal(load_matrix(path, M.shape), M)
