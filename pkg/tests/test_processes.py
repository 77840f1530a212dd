import numpy as np
import pytest

from tsboot.processes import (
    AR1Spec,
    ArchSpec,
    HeteroAR1Spec,
    Series,
    TauSchedule,
    _ar_filter,
    arch_sigma2_path,
    read_series_csv,
    simulate_ar1,
    simulate_arch,
    simulate_hetero_ar1,
    write_series_csv,
)
from tsboot.rand_weights import ErrorDist, RngStream


def test_noise_free_ar1_is_x0_theta_power_t():
    # sigma = 0 makes the stationary X_0 draw zero too, so X_t = X_0 theta^t = 0
    x = simulate_ar1(AR1Spec(0.5, sigma=0.0), 10, RngStream(3)).values
    assert np.all(x == 0)
    y = _ar_filter(0.5, 2.0, np.zeros(6))
    assert np.allclose(y, 2.0 * 0.5 ** np.arange(1, 7), atol=0, rtol=1e-15)


def test_ar1_stationary_variance_and_autocorrelation():
    x = simulate_ar1(AR1Spec(0.5), 100_000, RngStream(1)).values
    assert x.var() == pytest.approx(4 / 3, abs=0.05)
    rho = np.corrcoef(x[1:], x[:-1])[0, 1]
    assert rho == pytest.approx(0.5, abs=0.02)


def test_ar1_rejects_unit_root():
    with pytest.raises(ValueError):
        AR1Spec(1.0)
    with pytest.raises(ValueError):
        AR1Spec(-1.2)


def test_ar1_needs_two_points():
    with pytest.raises(ValueError):
        simulate_ar1(AR1Spec(0.5), 1, RngStream(0))


def test_constant_schedule_bit_identical_to_ar1():
    a = simulate_ar1(AR1Spec(0.5, 1.0), 300, RngStream(8, (1,))).values
    b = simulate_hetero_ar1(HeteroAR1Spec(0.5, TauSchedule.constant(1.0)), 300, RngStream(8, (1,))).values
    assert np.array_equal(a, b)


def test_two_period_equal_scales_reduces_to_ar1():
    a = simulate_ar1(AR1Spec(0.3), 200, RngStream(4)).values
    b = simulate_hetero_ar1(HeteroAR1Spec(0.3, TauSchedule.two_period(1.0, 1.0)), 200, RngStream(4)).values
    assert np.array_equal(a, b)


def test_two_period_schedule_parity():
    tau = TauSchedule.two_period_variances(1.0, 2.0).taus(6)
    assert np.allclose(tau**2, [1, 2, 1, 2, 1, 2])


def test_two_period_innovation_variance_by_parity():
    spec = HeteroAR1Spec(0.5, TauSchedule.two_period_variances(1.0, 2.0))
    reps = 100_000
    # innovations are independent across t, so one long path gives reps draws per parity
    x = simulate_hetero_ar1(spec, 2 * reps + 1, RngStream(12)).values
    z = x[1:] - 0.5 * x[:-1]  # z[k] is Z_{k+2}
    odd, even = z[1::2], z[0::2]  # t = 3, 5, ... and t = 2, 4, ...
    assert odd.var() == pytest.approx(1.0, abs=3 * np.sqrt(2 / odd.size))
    assert even.var() == pytest.approx(2.0, abs=3 * 2 * np.sqrt(2 / even.size))


def test_two_period_n50_shape():
    x = simulate_hetero_ar1(HeteroAR1Spec(0.5, TauSchedule.two_period_variances(1, 2)), 50, RngStream(0))
    assert x.n == 50 and np.all(np.isfinite(x.values))


def test_power_and_explicit_schedules():
    tau = TauSchedule.power(2.0, 0.5).taus(4)
    assert np.allclose(tau**2, 2.0 * np.arange(1, 5) ** 0.5)
    assert np.allclose(TauSchedule.explicit([1, 2, 3]).taus(3), [1, 2, 3])
    with pytest.raises(ValueError):
        TauSchedule.explicit([1, 2]).taus(3)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_non_positive_tau_rejected(bad):
    with pytest.raises(ValueError):
        TauSchedule.explicit([1.0, bad])
    with pytest.raises(ValueError):
        TauSchedule.constant(bad)


def test_arch_white_noise_when_b_zero():
    x = simulate_arch(ArchSpec(1.0, (0.0,)), 50_000, RngStream(2)).values
    assert x.var() == pytest.approx(1.0, abs=0.03)
    assert abs(np.corrcoef(x[1:] ** 2, x[:-1] ** 2)[0, 1]) < 0.03


def test_arch_stationary_variance():
    x = simulate_arch(ArchSpec(1.0, (0.5,)), 100_000, RngStream(3), burn_in=500).values
    assert x.var() == pytest.approx(2.0, abs=0.1)


def test_arch_burn_in_sufficiency():
    spec = ArchSpec(1.0, (0.5,))
    reps = [simulate_arch(spec, 2000, RngStream(20, (r,)), burn_in=500).values.var() for r in range(40)]
    doubled = [simulate_arch(spec, 2000, RngStream(20, (r,)), burn_in=1000).values.var() for r in range(40)]
    se = np.std(reps) / np.sqrt(len(reps))
    assert abs(np.mean(reps) - np.mean(doubled)) < se


def test_arch_rejects_non_stationary():
    with pytest.raises(ValueError):
        simulate_arch(ArchSpec(1.0, (0.6, 0.4)), 100, RngStream(0))


def test_arch_spec_validation():
    with pytest.raises(ValueError):
        ArchSpec(0.0, (0.5,))
    with pytest.raises(ValueError):
        ArchSpec(1.0, (-0.1,))


def test_sigma2_path_by_hand():
    assert np.allclose(arch_sigma2_path([1.0, 0.5], [1.0, 2.0]), [1.5])
    assert np.allclose(arch_sigma2_path([2.0, 0.0], [1.0, 5.0, -3.0]), [2.0, 2.0])


def test_sigma2_path_at_least_c0():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.integers(1, 4)
        params = np.concatenate([[rng.uniform(0.1, 3)], rng.uniform(0, 1, p)])
        x = rng.standard_normal(rng.integers(p + 1, 40))
        assert np.all(arch_sigma2_path(params, x) >= params[0])


def test_sigma2_path_needs_more_than_p_points():
    with pytest.raises(ValueError):
        arch_sigma2_path([1.0, 0.2, 0.2], [1.0, 2.0])


def test_series_validation():
    with pytest.raises(ValueError):
        Series([1.0])
    with pytest.raises(ValueError):
        Series([1.0, np.nan])
    s = Series([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 3.0


def test_csv_round_trip_exact(tmp_path):
    x = simulate_arch(ArchSpec(1.0, (0.5,), ErrorDist.parse("t3")), 200, RngStream(5))
    path = tmp_path / "s.csv"
    write_series_csv(x, path)
    assert path.read_text().splitlines()[0] == "t,x"
    y = read_series_csv(path)
    assert np.array_equal(x.values, y.values)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_series_csv(path)


def test_simulation_deterministic():
    spec = ArchSpec(1.0, (0.3, 0.2))
    a = simulate_arch(spec, 100, RngStream(77, (4,)))
    b = simulate_arch(spec, 100, RngStream(77, (4,)))
    assert np.array_equal(a.values, b.values)
