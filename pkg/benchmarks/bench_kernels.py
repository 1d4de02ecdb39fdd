"""Time the numba kernels against the pure-Python fallback (DP5_NO_JIT=1).

Each mode runs in its own interpreter because the switch is read at import.
The JIT column excludes compilation (one warm-up call first).

    python benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = """
import json, sys, time
from dp5count._jit import jit_enabled
from dp5count.cubics import canonical_spec
from dp5count.enumerate import count_direct, count_torsor_naive, count_torsor_reduced
repeat = int(sys.argv[1])
H = canonical_spec("sym12", "Q")
G = canonical_spec("std6", "Q(i)")
cases = {
    "reduced Q sym12 B=50": lambda: count_torsor_reduced("Q", H, 50).N,
    "naive Q sym12 B=50": lambda: count_torsor_naive("Q", H, 50).N,
    "direct Q sym12 B=50": lambda: count_direct("Q", H, 50).N,
    "reduced Q(i) std6 B=10": lambda: count_torsor_reduced("Q(i)", G, 10).N,
}
out = {"jit": jit_enabled(), "cases": {}}
for name, fn in cases.items():
    n = fn()  # warm-up (compilation for the JIT path)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        assert fn() == n
        best = min(best, time.perf_counter() - t)
    out["cases"][name] = {"N": n, "seconds": best}
print(json.dumps(out))
"""


def run(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if no_jit:
        env["DP5_NO_JIT"] = "1"
    else:
        env.pop("DP5_NO_JIT", None)
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    jit = run(False, args.repeat)
    py = run(True, args.repeat)
    print(f"{'case':28s} {'N':>6s} {'numba s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, r in jit["cases"].items():
        p = py["cases"][name]
        if p["N"] != r["N"]:
            raise SystemExit(f"{name}: counts differ ({r['N']} vs {p['N']})")
        print(f"{name:28s} {r['N']:6d} {r['seconds']:10.4f} {p['seconds']:10.4f} "
              f"{p['seconds'] / r['seconds']:8.1f}x")


if __name__ == "__main__":
    main()
