import io

import numpy as np
import pytest

from lsreinit.cli import ConfigError, main, parse_config
from lsreinit.field import init_analytic
from lsreinit.mesh import Mesh, generate_cartesian
from lsreinit.space import Space
from lsreinit.vtk import write_level_set, write_vtk


def test_case_defaults_from_config():
    cfg = parse_config("case = hartmann\n")
    assert (cfg.eps, cfg.cfl, cfg.cutoff, cfg.s_up, cfg.s_low, cfg.n) == (20.0, 0.9, 1.0, -5.5, -6.5, 2)


def test_config_overrides_and_comments():
    cfg = parse_config("# rectangle run\ncase = rectangle\ndegree = 3\ncutoff = 0.3\n")
    assert cfg.degree == 3 and cfg.cutoff == 0.3 and cfg.s_low == -7.5


@pytest.mark.parametrize("text,msg", [
    ("case = rectangle\ns_low = -5\ns_up = -6\n", "s_low"),
    ("case = rectangle\nn = 3\n", "n"),
    ("case = rectangle\ncolour = red\n", "line 2"),
    ("case = rectangle\neps = lots\n", "eps"),
    ("case = rectangle\ncfl = 1.5\n", "cfl"),
])
def test_config_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(text)


def _single(N):
    return Space(Mesh(2, [[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]]), N)


def test_vtk_counts_single_element(tmp_path):
    sp = _single(1)
    text = write_vtk(sp, tmp_path / "a.vtk", point_data={"phi": np.zeros(sp.tensor_shape)},
                     cell_data={"fv_ratio": np.zeros(1)})
    assert "POINTS 9 double" in text and "CELLS 4 20" in text and "CELL_DATA 4" in text


def test_vtk_lattice_values_interpolate(tmp_path):
    sp = Space(generate_cartesian((0, 0), (1, 1), (2, 2)), 2)
    fld = init_analytic(sp, lambda x, y: x + 2 * y)
    import meshio
    write_vtk(sp, tmp_path / "b.vtk", point_data={"phi": fld.phi})
    m = meshio.read(tmp_path / "b.vtk")
    p = m.points
    assert np.allclose(m.point_data["phi"].ravel(), p[:, 0] + 2 * p[:, 1])


def test_vtk_roundtrip_meshio(tmp_path):
    import meshio
    sp = Space(generate_cartesian((0, 0, 0), (1, 1, 1), (2, 1, 1)), 1)
    fld = init_analytic(sp, lambda x, y, z: x - 0.5)
    alpha = np.array([0.0, 1.0])
    write_level_set(sp, fld, tmp_path / "c.vtk", alpha=alpha)
    m = meshio.read(tmp_path / "c.vtk")
    assert len(m.points) == 2 * 27
    assert m.cells[0].type == "hexahedron" and len(m.cells[0].data) == 2 * 8
    fv = m.cell_data["fv_ratio"][0].ravel()
    assert set(np.unique(fv)) == {0.0, 1.0} and fv.min() >= 0 and fv.max() <= 1
    assert {"phi", "grad_abs", "kappa"} <= set(m.point_data)


def test_vtk_bad_path_names_file():
    sp = _single(1)
    with pytest.raises(OSError, match="no/such/dir"):
        write_vtk(sp, "/no/such/dir/x.vtk")


def test_vtk_shape_check(tmp_path):
    sp = _single(2)
    with pytest.raises(ValueError, match="phi"):
        write_vtk(sp, tmp_path / "x.vtk", point_data={"phi": np.zeros((1, 2, 2))})


def test_main_missing_config(capsys):
    assert main(["run", "--config", "/nonexistent/run.cfg"]) != 0
    assert "/nonexistent/run.cfg" in capsys.readouterr().err


def test_main_mesh_generate_and_validate(tmp_path):
    path = tmp_path / "m.txt"
    assert main(["mesh", "generate", "--cells", "3,2", "--perturb", "0.1", "-o", str(path)]) == 0
    out = io.StringIO()
    assert main(["mesh", "validate", str(path)], out) == 0
    assert "elements=6" in out.getvalue()


def test_main_curvature():
    out = io.StringIO()
    assert main(["curvature", "--cells", "8", "--degree", "3"], out) == 0
    assert "L1=" in out.getvalue()


def test_main_run_writes_snapshots_and_csv(tmp_path):
    out = io.StringIO()
    stem = tmp_path / "rect"
    rc = main(["run", "--case", "rectangle", "--cells", "6", "--degree", "2", "--max-iter", "4",
               "--every", "2", "--vtk", str(stem), "--csv", str(tmp_path / "r.csv")], out)
    assert rc == 0
    names = sorted(p.name for p in tmp_path.glob("rect_*.vtk"))
    assert names == ["rect_000002.vtk", "rect_000004.vtk", "rect_final.vtk"]
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "iteration,residual"
    assert "iterations=4" in out.getvalue()


def test_convergence_csv_deterministic(tmp_path):
    args = ["convergence", "--scheme", "ldg", "--levels", "2", "--degree", "2",
            "--start-cells", "4", "--max-iter", "30"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("level,h,n_elem")
