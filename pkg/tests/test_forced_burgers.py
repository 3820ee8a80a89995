import numpy as np
import pytest

from deeponet_rates import ParameterError
from deeponet_rates.burgers import BurgersProblem1D, cole_hopf_exact
from deeponet_rates.forced_burgers import ForcedBurgersConfig, forced_burgers_mc
from deeponet_rates.harness import fit_slope

KAPPA = 0.5


def test_zero_data_is_exactly_zero():
    cfg = ForcedBurgersConfig.from_callable(lambda x: 0 * x, 16, KAPPA, path_count=500)
    res = forced_burgers_mc(cfg, 0.3, 0.5)
    assert res.value == 0.0 and res.std_error == 0.0


def test_uniform_forcing_gives_linear_growth():
    # u0 = 0 and f = c solve to u = c t, and every path carries c t
    cfg = ForcedBurgersConfig.from_callable(lambda x: 0 * x, 16, KAPPA, path_count=200,
                                            forcing=lambda x, t: 0 * x + 0.7, h_t=0.05)
    res = forced_burgers_mc(cfg, 1.0, 0.5)
    assert res.value == pytest.approx(0.35, rel=1e-12)


def test_unforced_estimate_matches_cole_hopf():
    cfg = ForcedBurgersConfig.from_callable(np.sin, 64, KAPPA, path_count=100_000, seed=3)
    res = forced_burgers_mc(cfg, 0.5, 0.25)
    exact = cole_hopf_exact(BurgersProblem1D(KAPPA, cfg.u0), 0.5, 0.25)
    assert abs(res.value - exact) <= 3 * res.std_error


def test_standard_error_rate():
    pairs = []
    for N in (1_000, 10_000, 100_000):
        cfg = ForcedBurgersConfig.from_callable(np.sin, 32, KAPPA, path_count=N, seed=11)
        pairs.append((N, forced_burgers_mc(cfg, 0.5, 0.25).std_error))
    slope, _ = fit_slope(pairs)
    assert abs(slope + 0.5) < 0.1


def test_seed_reproducibility():
    kw = dict(path_count=5000, forcing=lambda x, t: np.cos(x) * t)
    a = forced_burgers_mc(ForcedBurgersConfig.from_callable(np.sin, 32, KAPPA, seed=5, **kw), 0.1, 0.3)
    b = forced_burgers_mc(ForcedBurgersConfig.from_callable(np.sin, 32, KAPPA, seed=5, **kw), 0.1, 0.3)
    c = forced_burgers_mc(ForcedBurgersConfig.from_callable(np.sin, 32, KAPPA, seed=6, **kw), 0.1, 0.3)
    assert a == b
    assert a.value != c.value


@pytest.mark.parametrize("kw", [dict(path_count=1), dict(h_t=0.0), dict(h_t=-0.1)])
def test_bad_config(kw):
    with pytest.raises(ParameterError):
        ForcedBurgersConfig.from_callable(np.sin, 16, KAPPA, **kw)


def test_time_must_be_positive():
    cfg = ForcedBurgersConfig.from_callable(np.sin, 16, KAPPA, path_count=10)
    with pytest.raises(ParameterError):
        forced_burgers_mc(cfg, 0.0, 0.0)
