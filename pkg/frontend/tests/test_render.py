import numpy as np
import pytest

from starfd_plots.cli import main
from starfd_plots.render import SchemaError, aggregate, read_rows, render

SUMMARY_HEADER = (
    "scheme,sweep_param,sweep_value,seed,p_u_dbm,p_d_dbm,total_dbm,"
    "hd_slot_pu_dbm,hd_slot_pd_dbm,iterations,converged,r_u_achieved,"
    "r_d_achieved,status"
)
TRACE_HEADER = "scheme,seed,n,total_dbm,sca_residual"


def summary_csv(tmp_path, rows, name="summary.csv"):
    path = tmp_path / name
    path.write_text("\n".join([SUMMARY_HEADER] + rows) + "\n")
    return path


def fig3_rows():
    rows = []
    for scheme, base in (("star-fd", 30.0), ("star-hd", 33.0), ("con-fd", 31.0)):
        for m in (8, 12, 16, 20):
            for seed in (0, 1, 2):
                total = base - m / 4.0 + seed * 0.5
                rows.append(
                    f"{scheme},m,{m:.11e},{seed},1.0,2.0,{total:.11e},,,"
                    f"5,true,1.0,4.0,ok"
                )
    return rows


class TestAggregation:
    def test_mean_min_max(self, tmp_path):
        path = summary_csv(tmp_path, fig3_rows())
        rows = read_rows(path, 3)
        curves = {c.scheme: c for c in aggregate(rows, 3)}
        assert set(curves) == {"star-fd", "star-hd", "con-fd"}
        c = curves["star-fd"]
        assert np.allclose(c.x, [8, 12, 16, 20])
        assert np.allclose(c.mean, 30.0 - c.x / 4.0 + 0.5)
        assert np.allclose(c.lo, 30.0 - c.x / 4.0)
        assert np.allclose(c.hi, 30.0 - c.x / 4.0 + 1.0)

    def test_failed_rows_excluded(self, tmp_path):
        rows = fig3_rows() + ["star-fd,m,8.0,9,,,,,,0,false,,,infeasible:X"]
        path = summary_csv(tmp_path, rows)
        curves = {c.scheme: c for c in aggregate(read_rows(path, 3), 3)}
        assert curves["star-fd"].hi[0] == pytest.approx(29.0)  # unchanged

    def test_trace_schema(self, tmp_path):
        path = tmp_path / "trace.csv"
        lines = [TRACE_HEADER]
        for seed in (0, 1):
            for n in (1, 2, 3):
                lines.append(f"star-fd,{seed},{n},{40.0 - n - seed:.11e},1e-8")
        path.write_text("\n".join(lines) + "\n")
        (curve,) = aggregate(read_rows(path, 2), 2)
        assert np.allclose(curve.x, [1, 2, 3])
        assert np.allclose(curve.mean, [38.5, 37.5, 36.5])


class TestRender:
    def test_renders_png(self, tmp_path):
        path = summary_csv(tmp_path, fig3_rows())
        out = tmp_path / "fig3.png"
        render(path, 3, out, run_self_test=True)
        data = out.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"

    def test_deterministic_bytes(self, tmp_path):
        path = summary_csv(tmp_path, fig3_rows())
        out_a, out_b = tmp_path / "a.png", tmp_path / "b.png"
        render(path, 3, out_a)
        render(path, 3, out_b)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_schema_mismatch_names_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("scheme,seed,total_dbm\nstar-fd,0,30.0\n")
        with pytest.raises(SchemaError, match="sweep_value"):
            render(path, 3, tmp_path / "x.png")

    def test_input_not_mutated(self, tmp_path):
        path = summary_csv(tmp_path, fig3_rows())
        before = path.read_bytes()
        render(path, 3, tmp_path / "out.png")
        assert path.read_bytes() == before


class TestSelfTest:
    def test_fig5_flat_hd_passes(self, tmp_path):
        rows = []
        for si in (-130, -100, -80):
            for seed in (0, 1):
                rows.append(
                    f"star-hd,si_pathloss_db,{si:.11e},{seed},1.0,2.0,"
                    f"{30.0 + seed:.11e},3.0,4.0,1,true,1.0,4.0,ok"
                )
        path = summary_csv(tmp_path, rows)
        render(path, 5, tmp_path / "f5.png", run_self_test=True)

    def test_fig5_varying_hd_fails(self, tmp_path):
        rows = []
        for k, si in enumerate((-130, -100, -80)):
            rows.append(
                f"star-hd,si_pathloss_db,{si:.11e},0,1.0,2.0,"
                f"{30.0 + k:.11e},3.0,4.0,1,true,1.0,4.0,ok"
            )
        path = summary_csv(tmp_path, rows)
        with pytest.raises(AssertionError, match="half-duplex"):
            render(path, 5, tmp_path / "f5.png", run_self_test=True)


class TestCli:
    def test_ok(self, tmp_path):
        path = summary_csv(tmp_path, fig3_rows())
        out = tmp_path / "f.png"
        code = main(["--figure", "3", "--csv", str(path), "--out", str(out), "--self-test"])
        assert code == 0 and out.exists()

    def test_schema_error_exit_code(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        assert main(["--figure", "3", "--csv", str(path), "--out", str(tmp_path / "x.png")]) == 2
