import pytest

from orientforge import formats
from orientforge.cli import main
from orientforge.gadgets import write_default_store
from orientforge.harness import gen_random_po
from orientforge.reductions import ProvenanceMap, decode_orientation

from conftest import STORE_DIR

F1 = "po 2 1\nv 0 0 1 0\nv 1 1 0 0\ne 0 0 1\n"


@pytest.fixture(autouse=True)
def gadget_store(monkeypatch):
    monkeypatch.setenv("ORIENTFORGE_GADGET_STORE", str(STORE_DIR))


def run(*argv):
    return main([str(a) for a in argv])


def test_pipeline_through_files(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 3 1\n1 2 3 0\n")
    po, prov, cert = tmp_path / "f.po", tmp_path / "f.prov", tmp_path / "f.ori"
    assert run("reduce", "sat2po", "--in", cnf, "--out", po, "--prov", prov) == 0
    assert run("solve", "po", "--in", po, "--cert", cert) == 0
    assert capsys.readouterr().out.strip() == "YES"
    assert run("verify", "orientation", "--in", po, "--cert", cert) == 0
    # the decode step can run in a fresh process from the two files
    assignment = decode_orientation(formats.parse_orientation(cert.read_text()),
                                    ProvenanceMap.from_text(prov.read_text()))
    assert formats.parse_cnf(cnf.read_text()).satisfied_by(assignment)


def test_sat2smedep_simple(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 3 2\n1 -2 3 0\n-1 2 2 0\n")
    medep, prov = tmp_path / "f.medep", tmp_path / "f.prov"
    assert run("reduce", "sat2smedep", "--in", cnf, "--out", medep, "--prov", prov, "--require-simple") == 0
    both = ProvenanceMap.from_text(prov.read_text())
    assert both.sat is not None and both.medep is not None
    assert run("solve", "medep", "--in", medep, "--cert", tmp_path / "p.cert") == 0
    assert run("verify", "packing", "--in", medep, "--cert", tmp_path / "p.cert") == 0


def test_solve_medep_f3(tmp_path, capsys):
    (tmp_path / "f1.po").write_text(F1)
    assert run("reduce", "po2medep", "--in", tmp_path / "f1.po", "--out", tmp_path / "f3.medep",
               "--prov", tmp_path / "f3.prov") == 0
    assert (tmp_path / "f3.medep").read_text() == "medep 4 3 0 3 1\ne 0 0 1\ne 1 1 2\ne 2 2 3\n"
    assert run("solve", "medep", "--in", tmp_path / "f3.medep", "--cert", tmp_path / "f3.cert") == 0
    assert (tmp_path / "f3.cert").read_text() == "p 0 1 2\n"


def test_po2medep_trivially_infeasible(tmp_path, capsys):
    (tmp_path / "bad.po").write_text("po 3 2\nv 0 0 1 0\nv 1 0 1 0\nv 2 1 0 1\ne 0 0 2\ne 1 1 2\n")
    status = run("reduce", "po2medep", "--in", tmp_path / "bad.po", "--out", tmp_path / "x", "--prov", tmp_path / "y")
    assert status == 1
    assert "trivially infeasible" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_require_simple_rejects_multigraph(tmp_path, capsys):
    # delta(0) = 2 puts two parallel s-edges at vertex 0; sums balance but the output is not simple
    (tmp_path / "m.po").write_text("po 2 2\nv 0 0 2 0\nv 1 2 0 0\ne 0 0 1\ne 1 0 1\n")
    status = run("reduce", "po2medep", "--in", tmp_path / "m.po", "--out", tmp_path / "x",
                 "--prov", tmp_path / "y", "--require-simple")
    assert status == 2
    assert "--require-simple" in capsys.readouterr().err


def test_verify_tampered_orientation(tmp_path, capsys):
    (tmp_path / "f1.po").write_text(F1)
    (tmp_path / "bad.cert").write_text("o 0 und\n")
    assert run("verify", "orientation", "--in", tmp_path / "f1.po", "--cert", tmp_path / "bad.cert") == 1
    captured = capsys.readouterr()
    assert captured.out.strip() == "INVALID"
    assert "vertex 0" in captured.err


def test_solve_no_and_budget(tmp_path, capsys):
    (tmp_path / "f2.po").write_text("po 2 1\nv 0 0 1 0\nv 1 0 0 1\ne 0 0 1\n")
    assert run("solve", "po", "--in", tmp_path / "f2.po") == 1
    (tmp_path / "u.cnf").write_text("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n")
    assert run("solve", "sat", "--in", tmp_path / "u.cnf") == 1
    (tmp_path / "p.po").write_text(formats.write_po(gen_random_po(8, 14, 1, 1, 5, planted=True)))
    assert run("solve", "po", "--in", tmp_path / "p.po", "--budget", 1) == 3


def test_solve_sat_cert(tmp_path, capsys):
    (tmp_path / "f.cnf").write_text("p cnf 3 1\n1 2 3 0\n")
    assert run("solve", "sat", "--in", tmp_path / "f.cnf", "--cert", tmp_path / "s") == 0
    assert (tmp_path / "s").read_text() == "v -1 -2 3 0\n"


@pytest.mark.parametrize("argv, flag", [
    (["solve", "po"], "--in"),
    (["reduce", "sat2po", "--in", "x.cnf", "--out", "y"], "--prov"),
    (["gen", "cnf", "--vars", "3", "--clauses", "1"], "--seed"),
    (["gen", "cnf", "--vars", "three", "--clauses", "1", "--seed", "1"], "--vars"),
])
def test_usage_errors(argv, flag, capsys):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert flag in err and len(err.strip().splitlines()) == 1


def test_input_errors(tmp_path, capsys):
    assert run("solve", "po", "--in", tmp_path / "missing.po") == 2
    (tmp_path / "loop.po").write_text("po 1 1\nv 0 0 0 2\ne 0 0 0\n")
    assert run("solve", "po", "--in", tmp_path / "loop.po") == 2
    assert run("gen", "cnf", "--vars", 1, "--clauses", 2, "--seed", 1, "--occurrence-cap", 1) == 2


def test_gadget_unavailable_is_input_error(tmp_path, monkeypatch, capsys):
    write_default_store(tmp_path / "store", ms=(1,))
    monkeypatch.setenv("ORIENTFORGE_GADGET_STORE", str(tmp_path / "store"))
    (tmp_path / "f.cnf").write_text("p cnf 1 1\n1 1 1 0\n")
    assert run("reduce", "sat2po", "--in", tmp_path / "f.cnf", "--out", tmp_path / "o", "--prov", tmp_path / "p") == 2
    assert "m=3" in capsys.readouterr().err


def test_gen_outputs(tmp_path, capsys):
    assert run("gen", "cnf", "--vars", 3, "--clauses", 1, "--seed", 7) == 0
    assert capsys.readouterr().out == "p cnf 3 1\n-3 -1 -2 0\n"
    assert run("gen", "po", "--vertices", 2, "--edges", 1, "--seed", 1, "--out", tmp_path / "g.po") == 0
    assert (tmp_path / "g.po").read_text() == "po 2 1\nv 0 1 0 0\nv 1 0 1 0\ne 0 0 1\n"


def test_gadget_commands(tmp_path, capsys):
    assert run("gadget", "verify", "--template", STORE_DIR / "var_m2.gadget") == 0
    assert run("gadget", "verify", "--template", STORE_DIR / "clause.gadget") == 0
    assert run("gadget", "show", "--template", STORE_DIR / "var_m1.gadget") == 0
    assert "orientations with ports free: 2" in capsys.readouterr().out
    broken = tmp_path / "broken.gadget"
    broken.write_text("po 4 2\nkind variable\nv 0 1 1 0\nv 1 1 1 0\nv 2 1 1 0\nv 3 1 1 0\n"
                      "e 0 0 1\ne 1 2 3\nport 0 0 tport\nport 1 2 tport\nport 2 1 fport\nport 3 3 fport\n")
    assert run("gadget", "verify", "--template", broken) == 1
    assert "4 orientations" in capsys.readouterr().err


def test_gadget_synth(tmp_path, capsys):
    out = tmp_path / "g.gadget"
    assert run("gadget", "synth", "--t", 1, "--f", 1, "--max-vertices", 2, "--out", out) == 0
    sub, kind = formats.parse_gadget(out.read_text())
    assert kind == "variable" and sub.graph.num_vertices == 2
    assert run("gadget", "synth", "--t", 2, "--f", 2, "--max-vertices", 3, "--out", out) == 1
    assert run("gadget", "synth", "--t", 2, "--f", 2, "--max-vertices", 8, "--budget", 10,
               "--alphabet", "tree", "--out", out) == 3


def test_experiment(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"seed": 3, "oracle_agreement_instances": 20, "equivalence_instances": 20}\n')
    assert run("experiment", "--config", cfg, "--out", tmp_path / "r") == 0
    assert (tmp_path / "r" / "report.tsv").read_text().startswith("property\tinstances")
    bad = tmp_path / "store"
    write_default_store(bad)
    (bad / "var_m2.gadget").write_text((bad / "var_m2.gadget").read_text().replace("tport", "fport", 1))
    cfg.write_text('{"store": "%s", "properties": ["gadget_integrity"]}\n' % bad)
    assert run("experiment", "--config", cfg, "--out", tmp_path / "r2") == 1
    assert "var_m2.gadget" in (tmp_path / "r2" / "report.txt").read_text()
