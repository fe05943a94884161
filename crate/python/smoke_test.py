"""Smoke test for the quasi_herglotz_py extension module.

Build and run:
    cargo build --release -p quasi-herglotz-py --features extension-module
    cp target/release/libquasi_herglotz_py.so python/quasi_herglotz_py.so
    python3 python/smoke_test.py
"""

import json
import math

import quasi_herglotz_py as qh


def main():
    assert abs(qh.passive_bound(1.0, -1.0, 0.02) - 0.04 / 2.02) < 1e-15

    basis = qh.SplineBasis(0.0, 1.0, 8, 2)
    assert basis.count == 8
    lo, hi = basis.support(3)
    mid = 0.5 * (lo + hi)
    assert abs(basis.eval(3, mid) - 1.0) < 1e-12
    far = basis.hilbert_eval(3, 1e3)
    assert abs(far + basis.moment(3, 0) / (math.pi * 1e3)) < 1e-2 * abs(far)

    assert "passive_5_1" in qh.presets()
    out = qh.solve_preset("passive_5_1")
    assert out["status"] == "Optimal", out["status"]
    delta = qh.passive_bound(1.0, -1.0, 0.02)
    assert delta <= out["error"] <= 1.1 * delta, out["error"]

    rep = out["rep"]
    back = qh.QuasiHerglotzRep.from_json(rep.to_json())
    q = back.eval_boundary(1.0)
    assert isinstance(q, complex)
    for k in (-2, 0, 2):
        assert back.verify_sum_rule(k) < 1e-9

    scenario = json.dumps({"omega": [[0.9, 1.1]], "target": {"kind": "constant", "re": 2.0, "im": 0.0}})
    fit = qh.solve_scenario(scenario)
    assert fit["error"] < 1e-6, fit["error"]

    try:
        qh.solve_preset("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown preset accepted")

    print(f"ok: passive error {out['error']:.6e}, p0 {out['p0']:.3f}")


if __name__ == "__main__":
    main()
