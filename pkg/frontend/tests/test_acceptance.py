"""Secondary acceptance: the figure CSV -> PNG pipeline end to end.

Runs the primary CLI at reduced seed count, renders the result twice, and
checks byte determinism plus the aggregation self test.
"""

import subprocess
import sys

import pytest

from starfd_plots.cli import main


@pytest.fixture(scope="module")
def figure3_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig3")
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "starfd.cli",
            "figure",
            "--id",
            "3",
            "--seeds",
            "1",
            "--out",
            str(out),
            "--workers",
            "2",
        ],
        capture_output=True,
        text=True,
        timeout=1200,
    )
    assert proc.returncode == 0, proc.stderr
    return out / "figure3_summary.csv"


def test_figure_then_plot_deterministic(figure3_csv, tmp_path):
    out_a = tmp_path / "a.png"
    out_b = tmp_path / "b.png"
    assert main(["--figure", "3", "--csv", str(figure3_csv), "--out", str(out_a), "--self-test"]) == 0
    assert main(["--figure", "3", "--csv", str(figure3_csv), "--out", str(out_b), "--self-test"]) == 0
    bytes_a = out_a.read_bytes()
    assert bytes_a[:8] == b"\x89PNG\r\n\x1a\n"
    assert bytes_a == out_b.read_bytes()
