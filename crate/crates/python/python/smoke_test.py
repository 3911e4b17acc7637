"""Smoke test for the compiled extension module."""

import json
import pathlib

import eds_waves_py as ew

EXAMPLES = pathlib.Path(__file__).resolve().parents[2] / "core" / "examples"


def main():
    f_tilde, v1, v2, frobenius, closed = ew.reduce("-u*u_x + u_xxx")
    assert f_tilde == "-u_xxx*c/(u - c)", f_tilde
    assert frobenius and closed

    assert ew.is_first_integral("-u*u_x - u_xxx", "u_xx + u*(1/2*u - c)")
    assert not ew.is_first_integral("-u*u_x - u_xxx", "u_x^2 + 1/2*u^2*(3*c - u) - 2*u*u_xx")

    res = ew.max_residual("-u*u_x - u_xxx", "3*c*sech(1/2*sqrt(c)*(x - c*t) + M)^2", {"c": 1.0, "M": 0.0})
    assert res < 1e-8, res

    report = json.loads(ew.run((EXAMPLES / "kdv_b.json").read_text()))
    assert report["pass"], report
    print(ew.explain(json.dumps(report)).splitlines()[-1])

    try:
        ew.reduce("u_xxx +")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("syntax error not raised")
    print("smoke test ok")


if __name__ == "__main__":
    main()
