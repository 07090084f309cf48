import xml.etree.ElementTree as ET

import numpy as np
import pytest

import radapt1d as r
from radapt1d.errors import InvalidParameterError
from radapt1d.experiments import parse_config_file, write_text_atomic
from radapt1d.svgplot import Series, line_plot


def small_cfg(tmp_path, **kw):
    base = dict(
        f_spec="poly:2",
        n_list=(4, 8),
        out_dir=str(tmp_path),
        max_iter=200,
        tol=1e-6,
    )
    base.update(kw)
    return r.ExperimentConfig(**base)


def test_config_validation(tmp_path):
    with pytest.raises(InvalidParameterError):
        small_cfg(tmp_path, n_list=())
    with pytest.raises(InvalidParameterError):
        small_cfg(tmp_path, n_list=(1, 4))
    with pytest.raises(InvalidParameterError):
        small_cfg(tmp_path, methods=("equi", "newton"))
    with pytest.raises(InvalidParameterError):
        small_cfg(tmp_path, f_spec="bad:spec")


def test_compare_writes_rows_and_csv(tmp_path):
    cfg = small_cfg(tmp_path)
    rows = r.run_compare(cfg)
    assert len(rows) == 2 * 3
    csv = (tmp_path / "compare.csv").read_text().splitlines()
    assert csv[0] == "n,method,rel_l2,rel_h1,energy,disc_l2,disc_l1"
    assert len(csv) == 7
    # methods appear in canonical order per cell count
    assert [line.split(",")[1] for line in csv[1:4]] == ["equi", "amf", "gd"]
    # the gd row discrepancy against itself vanishes
    gd_row = [line for line in csv[1:] if line.split(",")[1] == "gd"][0]
    assert gd_row.split(",")[5] == "0.0"


def test_compare_is_deterministic(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    r.run_compare(small_cfg(tmp_path, out_dir=str(out_a)))
    r.run_compare(small_cfg(tmp_path, out_dir=str(out_b)))
    assert (out_a / "compare.csv").read_bytes() == (out_b / "compare.csv").read_bytes()


def test_constant_forcing_rows_coincide(tmp_path):
    rows = r.run_compare(small_cfg(tmp_path, f_spec="const:1", n_list=(6,)))
    by_method = {row.method: row for row in rows}
    for metric in ("rel_l2", "rel_h1", "renormalized_energy"):
        vals = [getattr(row, metric) for row in by_method.values()]
        assert max(vals) - min(vals) <= 1e-9
    assert by_method["amf"].node_discrepancy_l2 <= 1e-9


def test_compare_plots_are_valid_svg(tmp_path):
    cfg = small_cfg(tmp_path, plot=True)
    r.run_compare(cfg)
    for name in ("compare_rel_l2.svg", "compare_rel_h1.svg"):
        root = ET.parse(tmp_path / name).getroot()
        assert root.tag.endswith("svg")
        polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
        assert len(polylines) == 3


def test_gamma_check_passes_for_constant_forcing(tmp_path):
    cfg = small_cfg(tmp_path, f_spec="const:1", n_list=(4, 8, 16))
    rows, verdict, _ = r.run_gamma_check(cfg)
    assert verdict == "PASS"
    for row in rows:
        assert row.ratio == pytest.approx(1.0, abs=1e-9)
    csv = (tmp_path / "gamma_check.csv").read_text().splitlines()
    assert csv[0] == "n,energy_gd,min_limit,ratio"
    assert len(csv) == 4


def test_gamma_check_single_n_is_inconclusive(tmp_path):
    cfg = small_cfg(tmp_path, n_list=(8,))
    _, verdict, diagnostics = r.run_gamma_check(cfg)
    assert verdict == "INCONCLUSIVE"
    assert "trend" in diagnostics


def test_gamma_check_fails_far_from_the_limit(tmp_path):
    # a sharp bump at coarse resolution sits far above the limit energy
    cfg = small_cfg(tmp_path, f_spec="gauss:0.5,0.03", n_list=(2, 3), max_iter=10)
    _, verdict, _ = r.run_gamma_check(cfg)
    assert verdict == "FAIL"


def test_mesh_dump_outputs(tmp_path):
    cfg = small_cfg(tmp_path, f_spec="poly:2", n_list=(6,), plot=True)
    mesh, u = r.run_mesh_dump(cfg)
    assert mesh.n == 6
    nodes = (tmp_path / "amf_nodes.csv").read_text().splitlines()
    assert nodes[0] == "x"
    assert len(nodes) == 8
    interp = (tmp_path / "interpolant.csv").read_text().splitlines()
    assert interp[0] == "x,u"
    exact_lines = (tmp_path / "exact.csv").read_text().splitlines()
    assert len(exact_lines) == 514
    root = ET.parse(tmp_path / "mesh_dump.svg").getroot()
    polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(polylines) == 2
    # interior nodes cluster toward x = 1 where the forcing is largest
    assert np.all(mesh.interior > np.arange(1, 6) / 6)


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "file.txt"
    write_text_atomic(target, "hello\n")
    assert target.read_text() == "hello\n"
    assert list(target.parent.iterdir()) == [target]


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nf = poly:2\nn_list = 8,16\n\nplot = true\n")
    mapping = parse_config_file(path)
    assert mapping == {"f": "poly:2", "n_list": "8,16", "plot": "true"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("just a line\n")
    with pytest.raises(InvalidParameterError):
        parse_config_file(bad)


def test_line_plot_structure():
    s = [Series("a", [1, 2, 4], [1.0, 0.5, 0.1]), Series("b", [1, 2, 4], [2.0, 1.0, 0.2])]
    svg = line_plot(s, xlabel="n", ylabel="err", title="demo", loglog=True)
    root = ET.fromstring(svg)
    polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(polylines) == 2
    with pytest.raises(InvalidParameterError):
        line_plot([Series("bad", [0.0, 1.0], [1.0, 2.0])], loglog=True)
    with pytest.raises(InvalidParameterError):
        line_plot([])
