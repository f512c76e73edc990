import json
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

from flexsheaf.cli import main

GOLDEN = Path(__file__).parent / "golden"
DATA = Path(__file__).parent / "data"
REGEN = os.environ.get("FLEXSHEAF_REGEN_GOLDEN") == "1"

CIRCLE = ["--site", "fixture:pseudocircle"]
SPHERE = ["--site", "fixture:pseudosphere"]

# name -> (argv, expected exit code)
CASES = {
    "cech_circle_h1": (["cech", *CIRCLE, "--presheaf", "locally-constant:Z", "--cover", "Uc,Ud", "--degree", "1"], 0),
    "cech_sphere_h2": (["cech", *SPHERE, "--presheaf", "locally-constant:Z", "--cover", "Ue,Uf", "--degree", "2"], 0),
    "tree_disk_2": (["tree-disk", "--width", "2", "--assert"], 0),
    "tree_disk_5": (["tree-disk", "--width", "5", "--assert"], 0),
    "stack_check_bg_s3": (["stack-check", "--pseudofunctor", "fixture:bg:S3", *CIRCLE, "--assert"], 2),
    "sheaf_check_constant": (["sheaf-check", *CIRCLE, "--presheaf", "constant:Z"], 0),
    "sheafify_constant": (["sheafify", *CIRCLE, "--presheaf", "constant:Z"], 0),
    "h1_nonab_s3": (["h1-nonab", *CIRCLE, "--presheaf", "locally-constant:S3", "--cover", "Uc,Ud"], 0),
    "sheaf_cohomology_sphere": (["sheaf-cohomology", *SPHERE, "--presheaf", "locally-constant:Z", "--degree", "2"], 0),
    "pc_cohomology_arrow": (["pc-cohomology", "--category", "fixture:arrow"], 0),
    "flex05_strip": (["flex05", "--config", "strip", "--assert"], 0),
    "flex05_ibar": (["flex05", "--config", "ibar", "--assert"], 0),
    "em_sections_circle": (["em-sections", *CIRCLE, "--presheaf", "locally-constant:Z", "--cover", "Uc,Ud",
                            "--n", "2", "--j", "1", "--assert"], 0),
    "brown_sphere": (["brown", *SPHERE, "--presheaf", "locally-constant:Z", "--n", "2", "--j", "0"], 0),
    "illusie_circle": (["illusie", *CIRCLE, "--presheaf", "constant:Z"], 0),
    "stackify_bg_s3": (["stackify", "--pseudofunctor", "fixture:bg:S3", *CIRCLE, "--assert"], 0),
    "strictify_twisted": (["strictify", "--pseudofunctor", "fixture:twisted_square", "--assert"], 0),
    "torsors_s3": (["torsors", *CIRCLE, "--presheaf", "locally-constant:S3", "--cover", "Uc,Ud"], 0),
    "tower_e2_circle": (["tower-e2", *CIRCLE, "--sheaf", "1=locally-constant:Z", "--sheaf", "2=locally-constant:Z"], 0),
    "nonab_s3_endpoint": (["nonab-cohomology", "--complex", "s3-endpoint:2"], 0),
    "validate_fixture": (["validate", "--site", "fixture:pseudosphere"], 0),
}


def run(args: list[str]):
    return CliRunner().invoke(main, args)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    args, code = CASES[name]
    res = run(args)
    assert res.exit_code == code, res.output
    path = GOLDEN / f"{name}.txt"
    if REGEN:
        path.write_text(res.output, encoding="utf-8")
    assert res.output == path.read_text(encoding="utf-8")


def test_spec_examples_key_lines():
    assert "H^1 = Z" in run(CASES["cech_circle_h1"][0]).output
    assert "verdict: PASS" in run(CASES["tree_disk_2"][0]).output
    assert "verdict: FAIL" in run(CASES["stack_check_bg_s3"][0]).output


def test_without_assert_a_failing_verdict_exits_zero():
    args = [a for a in CASES["stack_check_bg_s3"][0] if a != "--assert"]
    res = run(args)
    assert res.exit_code == 0 and "verdict: FAIL" in res.output


@pytest.mark.parametrize("name", ["cech_circle_h1", "h1_nonab_s3", "strictify_twisted"])
def test_deterministic(name):
    args, _ = CASES[name]
    assert run(args).output == run(args).output
    assert run([*args, "--format", "json"]).output == run([*args, "--format", "json"]).output


def test_json_fields_match_text():
    args, _ = CASES["cech_circle_h1"]
    data = json.loads(run([*args, "--format", "json"]).output)
    assert data["command"] == "cech"
    assert data["H^1"] == "Z"
    res = run([*CASES["tree_disk_2"][0], "--format", "json"])
    assert json.loads(res.output)["verdict"] == "PASS"


def test_input_errors_exit_one():
    assert run(["cech", "--site", "fixture:nope", "--presheaf", "constant:Z", "--cover", "Uc", "--degree", "0"]).exit_code == 1
    assert run(["cech", *CIRCLE, "--presheaf", "constant:Q", "--cover", "Uc,Ud", "--degree", "0"]).exit_code == 1
    assert run(["validate", "--doc", str(DATA / "missing.yaml")]).exit_code == 1


def test_budget_exceeded_exits_three():
    res = run(["stackify", "--pseudofunctor", "fixture:bg:S3", *CIRCLE, "--max-fiber", "2"])
    assert res.exit_code == 3


def test_documents_from_files():
    res = run(["validate", "--doc", str(DATA / "circle.yaml"), "--doc", str(DATA / "arrow_bg.yaml"), "--assert"])
    assert res.exit_code == 0, res.output
    res = run(["cech", "--doc", str(DATA / "circle.yaml"), "--site", "C", "--presheaf", "doubled",
               "--cover", "cd", "--degree", "1"])
    assert res.exit_code == 0 and "H^1 = Z" in res.output
    res = run(["pc-cohomology", "--doc", str(DATA / "arrow_bg.yaml"), "--category", "A", "--natsys", "ZZ"])
    assert res.exit_code == 0 and "H^0 = Z" in res.output
    res = run(["strictify", "--doc", str(DATA / "arrow_bg.yaml"), "--pseudofunctor", "BZ2", "--assert"])
    assert res.exit_code == 0, res.output


def test_invalid_document_fails_validation():
    res = run(["validate", "--doc", str(DATA / "broken.yaml"), "--assert"])
    assert res.exit_code == 2
    assert "compose(g,f) = f" in res.output
