import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deeponet_rates import DomainError, InputError, ParameterError
from deeponet_rates.advdiff import AdvDiffProblem1D, discrete_operator
from deeponet_rates.deeponet import (
    ADVDIFF_FAMILY,
    BURGERS_FAMILY,
    advdiff_deeponet,
    advdiff_reference,
    assemble_interpolation_deeponet,
    bochner_riesz_deeponet,
    burgers_deeponet,
    burgers_reference,
    error_budget,
    error_budget_terms,
    evaluate_model,
    operator_error,
    read_manifest,
    write_manifest,
)
from deeponet_rates.grids import Grid1D, Grid2D, PiecewiseFunction
from deeponet_rates.harness import fit_slope
from deeponet_rates.relu import linear_branch_net


def test_zero_branches_give_zero_model():
    g = Grid1D.uniform(0.0, 1.0, 8)
    model = assemble_interpolation_deeponet(np.zeros(9), g)
    np.testing.assert_array_equal(model(np.linspace(0, 1, 50)), 0.0)


def test_affine_reproduced():
    g = Grid1D(np.array([0.0, 0.1, 0.5, 0.55, 1.0]))
    model = assemble_interpolation_deeponet(2 * g.nodes - 1, g)
    y = np.linspace(0, 1, 101)
    np.testing.assert_allclose(model(y), 2 * y - 1, atol=1e-14)


def test_count_mismatch():
    with pytest.raises(InputError):
        assemble_interpolation_deeponet(np.zeros(5), Grid1D.uniform(0, 1, 8))


def test_single_term_model():
    g = Grid1D(np.array([0.0, 1.0]))
    model = assemble_interpolation_deeponet(np.array([2.0, 0.0]), g)
    assert evaluate_model(model, 0.0) == 2.0


def test_outside_trunk_domain():
    model = assemble_interpolation_deeponet(np.ones(5), Grid1D.uniform(0, 1, 4))
    with pytest.raises(DomainError):
        model(1.2)


def test_periodic_model_wraps():
    g = Grid1D.uniform(-np.pi, np.pi, 16, periodic=True)
    model = assemble_interpolation_deeponet(np.sin(g.value_nodes), g)
    assert abs(model(0.3) - model(0.3 + 2 * np.pi)) < 1e-13


def test_random_points_against_extended_precision():
    rng = np.random.default_rng(8)
    g = Grid1D(np.cumsum(np.r_[0.0, rng.uniform(0.5, 1.5, 31)]) / 32)
    b = rng.normal(size=32)
    model = assemble_interpolation_deeponet(b, g)
    y = rng.uniform(g.start, g.stop, 100)
    nodes = g.nodes.astype(np.longdouble)
    exact = []
    for yy in y.astype(np.longdouble):
        j = min(np.searchsorted(nodes, yy, side="right") - 1, len(nodes) - 2)
        s = (yy - nodes[j]) / (nodes[j + 1] - nodes[j])
        exact.append((1 - s) * np.longdouble(b[j]) + s * np.longdouble(b[j + 1]))
    exact = np.array(exact, dtype=np.longdouble)
    rel = np.abs(model(y) - exact) / np.maximum(np.abs(exact), 1)
    assert float(rel.max()) <= 1e-12


def test_two_dimensional_tensor_trunks():
    g = Grid2D.uniform(0.0, 1.0, 4)
    pts = g.points()
    b = 1 + pts[:, 0] - 2 * pts[:, 1] + pts[:, 0] * pts[:, 1]
    model = assemble_interpolation_deeponet(b, g)
    q = np.array([[0.1, 0.9], [0.5, 0.33], [1.0, 0.0]])
    np.testing.assert_allclose(model(q), 1 + q[:, 0] - 2 * q[:, 1] + q[:, 0] * q[:, 1], atol=1e-13)
    assert model(np.array([0.25, 0.5])) == pytest.approx(b[1 * 5 + 2], abs=1e-14)


def test_advdiff_family_error():
    err = operator_error(lambda a: advdiff_deeponet(a, 128, 128), advdiff_reference,
                         ADVDIFF_FAMILY, (0.0, 1.0))
    assert err.error_linf <= 0.05


def test_reference_nodes_give_interpolation_error():
    # model from the reference's own node values: only hat interpolation remains
    def build(a):
        ref = advdiff_reference(a)
        g = Grid1D.uniform(0.0, 1.0, 32)
        return assemble_interpolation_deeponet(ref(g.nodes), g)
    err = operator_error(build, advdiff_reference, ADVDIFF_FAMILY, (0.0, 1.0))
    assert err.error_linf <= 1.0 / 32


def test_burgers_family_decreasing_in_m():
    pairs = []
    for m in (16, 32, 64):
        e = operator_error(lambda u: burgers_deeponet(u, m, 256), burgers_reference,
                           BURGERS_FAMILY, (-np.pi, np.pi))
        pairs.append((m, e.error_linf))
    assert pairs[0][1] > pairs[1][1] > pairs[2][1]
    slope, _ = fit_slope(pairs)
    assert abs(slope + 1.0) < 0.2


def test_linear_operator_has_no_branch_error():
    # the discrete advection-diffusion operator is linear in the nodal forcing
    g = Grid1D.uniform(0.0, 1.0, 16)
    a = np.repeat([1.0, -0.5, 0.8, -1.0], 4)
    y = np.linspace(0, 1, 9)

    def op(f_nodes):
        return discrete_operator(AdvDiffProblem1D(g, a, PiecewiseFunction(g, f_nodes, 0)), y)

    C = np.column_stack([op(e) for e in np.eye(17)])
    rng = np.random.default_rng(9)
    for _ in range(5):
        f = rng.normal(size=17)
        direct = op(f)
        via_nets = np.array([linear_branch_net(C[k])(f)[0] for k in range(len(y))])
        assert np.max(np.abs(direct - via_nets)) <= 1e-12


def test_bochner_riesz_assembly_converges():
    g = Grid1D.uniform(-np.pi, np.pi, 64, periodic=True)
    target = np.abs(np.sin(g.value_nodes))
    errs = []
    for R in (4, 8, 16):
        model = bochner_riesz_deeponet(target, g, R)
        errs.append(np.max(np.abs(model(g.value_nodes) - target)))
    assert errs[0] > errs[1] > errs[2]


def test_budget_limits():
    t = error_budget_terms(1, 5, 1, 1.0, 1e300, 1e300, 1e6, omega2=0.01)
    assert t.branch < 1e-100 and t.network < 1e-100
    np.testing.assert_allclose(t.total, 1.0 + 0.01)


def test_budget_network_term_decreasing():
    a = error_budget_terms(10, 5, 1, 1.0, 10, 10, 100).network
    b = error_budget_terms(10, 5, 1, 1.0, 10, 10, 200).network
    assert b < a


@pytest.mark.parametrize("alpha", [0.0, 1.5, -1.0])
def test_budget_alpha_range(alpha):
    with pytest.raises(ParameterError):
        error_budget(10, 5, 1, alpha, 10, 10, 100)


def test_complexity_choice():
    eps, d, alpha = 0.1, 1, 1.0
    m = int(np.ceil(eps ** (-d / alpha)))
    p = int(np.ceil(eps ** (-d / 2)))
    # smallest N L and theta that put the network terms under eps
    NL = (p * np.sqrt(m) / eps) ** (m / (2 * alpha))
    theta = np.log(p / eps) ** (1 + d)
    t = error_budget_terms(m, p, d, alpha, np.sqrt(NL) * 1.01, np.sqrt(NL) * 1.01, theta * 1.01,
                           omega2=eps)
    assert max(t) <= eps * (1 + 1e-12)


def test_manifest_layout(tmp_path):
    model = burgers_deeponet(np.sin, 16, 8)
    path = write_manifest(model, tmp_path, "b")
    lines = open(path).read().splitlines()
    assert lines[0] == "deeponet-manifest v1"
    assert lines[1] == "p 8" and lines[2] == "m 16"
    assert lines[4] == "trunk 0 b.trunk0.relu"
    assert (tmp_path / "b.trunk0.relu").exists()
    assert lines[5].startswith("branch ") and "operator=burgers1d" in lines[5]


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=10), st.booleans())
def test_manifest_round_trip(tmp_path_factory, vals, periodic):
    d = tmp_path_factory.mktemp("manifest")
    n = len(vals) if periodic else len(vals) - 1
    g = Grid1D.uniform(-1.0, 3.0, n, periodic=periodic)
    model = assemble_interpolation_deeponet(vals, g, dict(m=7, operator="test"))
    back = read_manifest(write_manifest(model, d))
    np.testing.assert_array_equal(back.branch_values, model.branch_values)
    y = np.linspace(-1, 3, 23)
    np.testing.assert_array_equal(back(y), model(y))


@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9),
       st.lists(st.floats(-10, 10), min_size=9, max_size=9),
       st.floats(0.0, 2.0))
def test_evaluation_linear_in_branches(b1, b2, y):
    g = Grid1D(np.array([0.0, 0.1, 0.3, 0.35, 0.8, 1.0, 1.4, 1.5, 2.0]))
    m1 = assemble_interpolation_deeponet(b1, g)
    m2 = assemble_interpolation_deeponet(b2, g)
    m12 = assemble_interpolation_deeponet(np.add(b1, b2), g)
    assert abs(m12(y) - m1(y) - m2(y)) <= 1e-13 * max(1.0, np.max(np.abs(b1)) + np.max(np.abs(b2)))


@given(st.lists(st.floats(-10, 10), min_size=4, max_size=20))
def test_node_exact(b):
    g = Grid1D.uniform(0.0, 1.0, len(b) - 1)
    model = assemble_interpolation_deeponet(b, g)
    np.testing.assert_allclose(model(g.nodes), b, rtol=0, atol=1e-13 * max(1.0, np.max(np.abs(b))))
