import json

import numpy as np
import pytest

import svi_seg


def test_rng_is_reproducible():
    a = svi_seg.RngStream.root(42).split("xi/0")
    b = svi_seg.RngStream.root(42).split("xi/0")
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]
    assert 0.0 < a.uniform(0.0, 1.0) < 1.0


def test_projection():
    box = svi_seg.FeasibleSet.box(3, 0.0, 4.0)
    np.testing.assert_array_equal(box.project(np.array([5.0, -1.0, 2.0])), [4.0, 0.0, 2.0])
    assert svi_seg.FeasibleSet.orthant(2).contains(np.zeros(2), 0.0)


def test_schedule_and_mixing():
    assert svi_seg.sample_schedule("quad", 0) == 4
    assert svi_seg.sample_schedule("quad", 1) == 22
    assert svi_seg.sample_schedule("linear", 0) == 180
    assert svi_seg.anderson_coefficient(np.array([3.0, 1.0]), np.array([1.0, 1.0])) == -0.5


def test_solve_example1():
    p = svi_seg.gen_scp(5, svi_seg.RngStream.root(1))
    x0 = np.full(5, 0.5)
    res = svi_seg.solve(p, x0, seed=3, record_timing=False)
    again = svi_seg.solve(p, x0, seed=3, record_timing=False)
    assert res.status in ("converged", "max_iters")
    assert res.trace == again.trace
    assert res.anderson_steps == res.theta - 1
    assert res.trace[0]["S_k"] == 180
    seg = svi_seg.solve_seg(p, x0, seed=3, max_iters=5, record_timing=False)
    assert all(r["branch"] != "anderson" for r in seg.trace)


def test_lcp_round_trip():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    q = np.array([-3.0, -3.0])
    sols = svi_seg.brute_force_lcp(M, q)
    np.testing.assert_allclose(sols[0], [1.0, 1.0])
    res = svi_seg.solve(svi_seg.lcp_to_svi(M, q), np.zeros(2), gamma=1.0, cap=1, tol=1e-10, max_iters=2000)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-6)


def test_errors_carry_codes():
    with pytest.raises(svi_seg.SviError) as info:
        svi_seg.RngStream.root(1).split("")
    assert "InvalidLabel" in str(info.value)


def test_portfolio(tmp_path):
    rng = np.random.default_rng(0)
    prices = np.exp(np.cumsum(rng.normal(0.001, 0.02, size=(40, 3)), axis=0))
    path = tmp_path / "prices.csv"
    lines = ["date,A,B,C"] + [f"d{i}," + ",".join(f"{v:.10f}" for v in row) for i, row in enumerate(prices)]
    path.write_text("\n".join(lines) + "\n")
    m = svi_seg.run_portfolio(path, "weekly", max_iters=50, cap=0.6, out=tmp_path / "out")
    assert m["n"] == 3
    assert abs(sum(m["weights"]) - 1.0) < 0.05
    assert json.loads((tmp_path / "out" / "metrics.json").read_text())["T_in"] == m["T_in"]
