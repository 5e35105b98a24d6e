"""End-to-end runs of the klspoly command line."""

import json

import pytest

from klspoly import cli
from klspoly.ehrhart import ComplexCylinder
from klspoly.poset import chain
from klspoly.schemas import save_document
from klspoly.verify import load_complex_fixture


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out + captured.err


def test_check_passes_on_boolean_algebra(capsys):
    code, out = run(capsys, ["check", "fixture:boolean3.json"])
    assert code == 0
    assert "lower-eulerian: ok" in out


def test_check_fails_on_a_three_chain_with_witness(capsys, tmp_path):
    path = tmp_path / "chain3.json"
    save_document(path, "poset", chain(3).to_json())
    code, out = run(capsys, ["check", str(path)])
    assert code == 1
    assert "(0, 2)" in out


def test_kls_z_of_boolean4(capsys):
    code, out = run(capsys, ["kls", "fixture:boolean4.json", "--what", "z"])
    assert code == 0
    assert out.strip() == "1,4,6,4,1"


def test_kls_g_of_pentagon_triple(capsys):
    code, out = run(capsys, ["kls", "fixture:polygon_s2.json",
                             "--what", "g"])
    assert code == 0
    assert out.strip() == "1,2"


def test_kls_toric_h_of_boolean3(capsys):
    code, out = run(capsys, ["kls", "fixture:boolean3.json",
                             "--what", "toric-h"])
    assert code == 0
    assert out.strip() == "1,1,1"


def test_kls_interval_and_all(capsys):
    code, out = run(capsys, ["kls", "fixture:boolean3.json", "--what", "g",
                             "--interval", "0", "7"])
    assert code == 0 and out.strip() == "1"
    code, out = run(capsys, ["kls", "fixture:boolean3.json", "--what", "g",
                             "--all"])
    assert code == 0
    assert len(out.strip().splitlines()) == 27  # one line per interval
    code, out = run(capsys, ["kls", "fixture:boolean3.json", "--what", "g",
                             "--interval", "0", "7", "--all"])
    assert code == 2  # mutually exclusive


def test_kls_corrupted_kernel_names_the_interval(capsys):
    code, out = run(capsys, ["kls", "fixture:boolean3.json", "--what", "g",
                             "--kernel",
                             str(cli._resolve("fixture:corrupted_kernel_b3.json"))])
    assert code == 1
    assert "kernel rejected" in out
    assert "(0, 3)" in out  # the offending interval


def test_local_table_of_the_hexagon_triple(capsys):
    code, out = run(capsys, ["local", "fixture:polygon_s3.json"])
    assert code == 0
    assert "h_sigma: 1,3" in out
    assert "ell_sigma: 0,3" in out
    assert "delta_ell: 0,3" in out


def test_local_relative_g_of_the_cube_at_a_facet(capsys):
    code, out = run(capsys, ["local", "fixture:cube3_facet.json",
                             "--relative-g"])
    assert code == 0
    assert out.strip() == "0,3"


def test_local_equivariant_class_table(capsys):
    # hexagon boundary subdividing a point, acted on by the rotations
    code, out = run(capsys, ["local", "fixture:polygon_s3_top.json",
                             "--equivariant",
                             "fixture:polygon_s3_rotation.json"])
    assert code == 0
    assert "group order 6" in out
    assert "  0 13 w0: 1,4,1" in out
    assert out.count("0 13 w5: 1,-2,1") == 2  # h and ell agree here
    assert "  0 13 w0: 1,3" in out  # delta ell at the identity


def test_local_equivariant_requires_q_fixed(capsys):
    # the rotations move the vertex q of this triple: unanswerable request
    code, out = run(capsys, ["local", "fixture:polygon_s3.json",
                             "--equivariant",
                             "fixture:polygon_s3_rotation.json"])
    assert code == 2
    assert "q-not-fixed" in out


def test_verify_named_suites(capsys):
    code, out = run(capsys, ["verify", "--suite", "composition"])
    assert code == 0
    passed = out.strip().splitlines()[-1]
    assert passed.startswith("passed ")
    left, right = passed.split()[1].split("/")
    assert left == right and int(left) > 0


def test_verify_glued_swap_is_refused(capsys):
    code, out = run(capsys, ["verify", "fixture:glued_semisuspension.json",
                             "fixture:glued_swap.json",
                             "--suite", "equivariant"])
    assert code == 1
    assert "[0, 1, 2, 3, 4, 5, 6, 8, 7, 9]" in out


def test_ehrhart_hstar_of_the_crosscut_square(capsys):
    code, out = run(capsys, ["ehrhart", "fixture:crosscut_d4.json",
                             "--what", "hstar"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "w0: 1,6,1"
    assert "w3: 1,0,1" in lines
    assert sum(1 for l in lines if l.endswith("1,2,1")) == 3


def test_ehrhart_local_hstar(capsys):
    code, out = run(capsys, ["ehrhart", "fixture:crosscut_d4.json",
                             "--what", "local-hstar"])
    assert code == 0
    assert all(line.endswith("0,1,1") for line in out.strip().splitlines())


def test_ehrhart_series_of_the_unit_square(capsys):
    code, out = run(capsys, ["ehrhart", "fixture:unit_square.json",
                             "--what", "series", "--order", "3"])
    assert code == 0
    lines = sorted(out.strip().splitlines())
    assert lines == ["w0: 1,4,9,16", "w1: 1,2,3,4"]


def test_ehrhart_reciprocity_passes(capsys):
    code, out = run(capsys, ["ehrhart", "fixture:seg2_flip.json",
                             "--what", "reciprocity", "--order", "6"])
    assert code == 0
    assert "reciprocity w0: ok" in out


def test_unimodular_cylinder_headline_matches_hstar(capsys, tmp_path):
    # for the flip-symmetric [0,2] segment, the h* polynomial equals the
    # h_sigma of its fine-to-coarse mapping cylinder
    cx = load_complex_fixture("seg2_flip.json")
    cyl = ComplexCylinder(cx)
    path = tmp_path / "cylinder.json"
    save_document(path, "triple", cyl.triple.to_json())
    code, out = run(capsys, ["local", str(path)])
    assert code == 0
    hline = next(l for l in out.splitlines() if l.startswith("h_sigma"))
    code, out = run(capsys, ["ehrhart", "fixture:seg2_flip.json",
                             "--what", "hstar"])
    assert code == 0
    assert out.splitlines()[0] == "w0: 1,1"
    assert hline == "h_sigma: 1,1"


def test_json_format_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        code, out = run(capsys, ["ehrhart", "fixture:unit_cube.json",
                                 "--what", "hstar", "--format", "json"])
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    payload = json.loads(outs[0])
    assert payload["v"] == 1
    assert payload["hstar"]["values"][0] == [0, ["1", "4", "1"]]


def test_malformed_document_is_an_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = run(capsys, ["check", str(bad)])
    assert code == 2
    code, out = run(capsys, ["check", str(tmp_path / "missing.json")])
    assert code == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"schema": "poset", "v": 1}))
    code, out = run(capsys, ["kls", str(wrong), "--what", "g"])
    assert code == 2


def test_group_size_bound_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("KLS_MAX_GROUP", "2")
    code, out = run(capsys, ["check", "fixture:cone_square_z4.json"])
    assert code == 2
    monkeypatch.setenv("KLS_MAX_GROUP", "not-a-number")
    code, out = run(capsys, ["check", "fixture:cone_square_z4.json"])
    assert code == 2


def test_unknown_flags_exit_two():
    with pytest.raises(SystemExit) as err:
        cli.main(["kls", "fixture:boolean3.json", "--what", "nonsense"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main([])
    assert err.value.code == 2
