from __future__ import annotations

import json
import os
import subprocess
import sys

from dp5count.cubics import canonical_spec
from dp5count.enumerate import count_direct, count_torsor_reduced

SCRIPT = """
import json
from dp5count._jit import jit_enabled
from dp5count.cubics import canonical_spec
from dp5count.enumerate import count_direct, count_torsor_reduced
H = canonical_spec("sym12", "Q")
G = canonical_spec("std6", "Q(i)")
r = count_torsor_reduced("Q", H, 50)
print(json.dumps({
    "jit": jit_enabled(),
    "reduced": [r.N, list(r.classes)],
    "direct": count_direct("Q", H, 50).N,
    "gauss": [count_torsor_reduced("Q(i)", G, 10).N, count_direct("Q(i)", G, 10).N],
}))
"""


def test_pure_python_path_gives_identical_integers():
    env = dict(os.environ, DP5_NO_JIT="1")
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                         text=True, check=True, timeout=600)
    res = json.loads(out.stdout.strip().splitlines()[-1])
    assert res["jit"] is False
    H = canonical_spec("sym12", "Q")
    G = canonical_spec("std6", "Q(i)")
    r = count_torsor_reduced("Q", H, 50)
    assert res["reduced"] == [r.N, list(r.classes)]
    assert res["direct"] == count_direct("Q", H, 50).N == 420
    assert res["gauss"] == [count_torsor_reduced("Q(i)", G, 10).N,
                            count_direct("Q(i)", G, 10).N]
