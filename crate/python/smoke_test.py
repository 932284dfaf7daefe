"""Smoke test for the ddro Python extension.

Build and install first:

    pip install --no-build-isolation -e crates/python   # or: maturin develop -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import json
import os
import tempfile

import ddro


def main():
    assert ddro.lift_continuous(7.0, [5.0], 0.0, 10.0) == [5.0, 2.0]
    assert ddro.lift_binary(7.0, [5.0], 0.0, 10.0) == [1.0]
    assert ddro.lift_binary(3.0, [5.0], 0.0, 10.0) == [0.0]
    assert ddro.case_b_closed_form(0.5, "fixed") == 465.0
    assert ddro.case_b_closed_form(0.4, "decision-dependent") == 445.0

    p = ddro.Problem.study("design-3unit", case="b")
    assert p.num_stages == 2
    assert len(p.parameters()) == 4
    p.set_breakpoints("equidistant:3")
    assert all(len(b) == 3 for b in p.breakpoints())

    again = ddro.Problem.from_json(p.to_json())
    assert again.name == p.name

    r = p.solve(recourse="mixed")
    print(r)
    assert r.status == "optimal"
    assert abs(r.objective - 465.0) <= 0.01 * 465.0
    assert r.certified is True
    ok, worst = p.verify(r.policy_json)
    assert ok and worst <= 1e-6

    cont = p.solve(recourse="continuous")
    assert abs(cont.objective - 670.0) <= 0.01 * 670.0

    a = ddro.Problem.study("design-3unit", case="a")
    a.set_breakpoints("equidistant:3")
    assert a.solve(recourse="continuous", verify=False).status == "infeasible"

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "case_b.lp")
        manifest = json.loads(p.export_lp(path))
        assert os.path.getsize(path) > 0
        assert manifest["rows"] == r.rows

    planning = ddro.Problem.study("planning", periods=2)
    assert planning.num_stages == 5

    print("smoke test passed")


if __name__ == "__main__":
    main()
