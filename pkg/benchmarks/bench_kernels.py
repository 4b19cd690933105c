"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Each kernel is run once per flavour before timing so numba compilation is
excluded. An end-to-end ``discover`` run is timed in a subprocess per flavour
because the flavour is fixed at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from iman import _kernels
from iman.modcore import Distribution
from iman.revcheck import build_r_matrix

DISCOVER_SNIPPET = """
import time
from iman.discover import discover
from iman.simulate import simulate
data, _ = simulate(6, 4, 4**6, 0.5, seed=0)
discover(data, 4)
t = time.perf_counter()
for _ in range(3):
    discover(data, 4)
print((time.perf_counter() - t) / 3 * 1e3)
"""


def cases():
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 4**8, 200_000)
    tables = rng.integers(0, 20, size=(4**6, 4, 4)).astype(np.float64)
    mat = rng.integers(0, 50, size=(4**7, 4))
    shifts = rng.integers(0, 4, 4**7)
    R = build_r_matrix(Distribution(rng.uniform(0.1, 1, 8), normalize=True),
                       Distribution(rng.uniform(0.1, 1, 8), normalize=True)).entries
    return {
        "count_cells (n=2e5, 4^8 cells)": ("count_cells", (codes, 4**8)),
        "g_batch (4096 tables 4x4)": ("g_batch", (tables,)),
        "roll_rows (16384 x 4)": ("roll_rows", (mat, shifts)),
        "shift_witness (m=8, none)": ("shift_witness", (R, 1e-9)),
    }


def discover_ms(flag):
    env = dict(os.environ, IMAN_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", DISCOVER_SNIPPET], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed")
    flavours = {"numpy": _kernels.kernels(False), "numba": _kernels.kernels(True)}
    print(f"{'kernel':34s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for label, (name, a) in cases().items():
        times = {}
        for fl, ks in flavours.items():
            fn = ks[name]
            fn(*a)
            times[fl] = min(timeit.repeat(lambda: fn(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:34s} {times['numpy']:10.3f} {times['numba']:10.3f} {times['numpy'] / times['numba']:8.2f}")
    t_np, t_nb = discover_ms("0"), discover_ms("1")
    print(f"{'discover (d=6, m=4, n=4096)':34s} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
