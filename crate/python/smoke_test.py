"""Builds the extension module and exercises it from Python.

    python3 python/smoke_test.py
"""

import importlib
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def build():
    subprocess.run(
        ["cargo", "build", "-p", "satfront-py", "--features", "extension-module", "--release"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libsatfront_py.so"
    dest = Path(tempfile.mkdtemp()) / "satfront_py.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))
    return importlib.import_module("satfront_py")


def main():
    sf = build()

    kernel = sf.Kernel(1.0, 1, 0.025)
    assert len(kernel.weights) == 81
    assert abs(sum(kernel.weights) - 1.0) < 1e-12
    assert abs(kernel.h(0.0) - 0.5) < 1e-12
    s, h = kernel.front_profile()
    assert s[0] == -1.0 and h[0] == 1.0 and h[-1] == 0.0

    growth = sf.GrowthLaw.linear(1.0)
    assert growth.monotone_cap
    assert not sf.GrowthLaw.logistic(1.0, 1.5).monotone_cap

    res = sf.c_star(growth, kernel)
    c = res["c_star"]
    lo, hi = res["analytic_bounds"]
    assert lo <= c <= hi
    assert abs(c - 0.4363247012859922) < 1e-6, c

    s, phi = sf.shoot(2 * c, growth, kernel, 3.0)
    assert phi[0] == 1.0 and all(p > 0 for p in phi)

    coords = sf.grid_coords(1, 10.0, 0.025)
    u0 = [max(0.0, min(1.0, 1.0 - (abs(x) - 1.0) / 0.5)) for x, _ in coords]
    out = sf.simulate(kernel, growth, u0, 10.0, 5.0, dt=0.02, observe_every=50)
    assert out["hard_invariants_hold"]
    assert 0.0 <= out["min_value"] and out["max_value"] <= 1.0
    assert len(out["u"]) == len(coords)
    assert abs(out["times"][-1] - 5.0) < 1e-9
    sat = [x for (x, _), t in zip(coords, out["saturation_times"]) if math.isfinite(t)]
    assert max(sat) > 1.5

    gam = sf.simulate(kernel, growth, u0, 10.0, 1.0, model="gamma", gamma=8.0)
    assert gam["hard_invariants_hold"]

    try:
        sf.simulate(kernel, growth, u0, 10.0, 1.0, dt=1.0, model="gamma", gamma=8.0)
    except ValueError as e:
        assert "dt" in str(e)
    else:
        raise AssertionError("dt above the stability cap was accepted")

    print(f"smoke test passed: c* = {c:.12f}")


if __name__ == "__main__":
    main()
