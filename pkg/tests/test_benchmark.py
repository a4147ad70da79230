import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs():
    out = subprocess.run([sys.executable, str(BENCH), "--n", "50", "--steps", "20", "--sweeps", "20",
                          "--repeat", "1"], capture_output=True, text=True, check=True)
    assert "imex_advance" in out.stdout and "monotone_sweeps" in out.stdout
