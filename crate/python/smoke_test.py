"""Smoke test of the mc2py extension.

Build it first:

    cargo build --release -p mc2-py --features extension-module

The script copies the built library next to a temporary import path, so no
install step is needed. Set MC2PY_LIB to point at a specific build.
"""

import glob
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def locate_library():
    env = os.environ.get("MC2PY_LIB")
    if env:
        return env
    found = []
    for profile in ("release", "debug"):
        for pattern in ("libmc2py.so", "libmc2py.dylib", "mc2py.dll"):
            found += glob.glob(os.path.join(ROOT, "target", profile, pattern))
    if not found:
        sys.exit("mc2py library not found; build it with cargo first")
    return max(found, key=os.path.getmtime)


def load():
    lib = locate_library()
    tmp = tempfile.mkdtemp()
    suffix = ".pyd" if lib.endswith(".dll") else ".so"
    shutil.copy(lib, os.path.join(tmp, "mc2py" + suffix))
    sys.path.insert(0, tmp)
    import mc2py

    return mc2py


def main():
    mc2py = load()

    p = mc2py.CodeParams(3, 7, 11, 30, 5)
    assert p.length == 2310, p.length
    assert f"{p.rate:.2f}" == "0.50", p.rate
    assert p.rate_fraction == (1, 2)

    assert mc2py.count_candidates(3, 17, 3) == 4080

    try:
        mc2py.CodeParams(3, 3, 5, 5, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("kappa <= gamma accepted")

    matrix, count, transitions = mc2py.optimize_partition(3, 5, 1, seed=4)
    assert len(matrix) == 3 and all(len(r) == 5 for r in matrix)
    assert abs(count - 33.8) < 1e-9, count
    assert transitions > 0

    params = mc2py.CodeParams(3, 5, 7, 6, 1)
    code = mc2py.Code.optimize(params, matrix, seed=1)
    assert code.n_vars == 5 * 7 * 6
    for g in (2, 3):
        assert code.cycle_count(g) == code.exact_cycle_count(2 * g)
    assert code.cycle_count(2) == 0
    assert code.alist().splitlines()[0].split() == [str(code.n_vars), str(code.n_checks)]

    again = mc2py.Code(params, code.partition, code.lifting)
    assert again.lifting == code.lifting

    fer = code.fer([0.0, 0.3, 0.6], frames=200, seed=3)
    assert fer[0][1] == 0.0
    assert fer[-1][1] >= fer[0][1]

    assert mc2py.q_approx(0.0) == 0.5
    pts = [(b, 0.05 + 0.3 * 2.718281828459045 ** (-500 * b)) for b in (0.0005, 0.001, 0.002, 0.004, 0.008)]
    a, b, c = mc2py.fit_decay(pts)
    assert abs(b / 500 - 1) < 1e-4, (a, b, c)

    print("mc2py smoke test passed")


if __name__ == "__main__":
    main()
