import pytest

from fluxfem import cli, study
from fluxfem.report import parse_report


def test_fluxCommandWritesReport(tmp_path):
    output = tmp_path / "flux90.csv"
    status = cli.main(["flux", "--omega-degrees", "90", "--levels", "1..2", "--output", str(output)])
    assert status == cli.EXIT_OK
    report = parse_report(output)
    assert report.experiment == "flux"
    assert [record.level for record in report.records] == [1, 2]
    assert not report.failed


def test_controlCommandTakesAlpha(tmp_path):
    output = tmp_path / "control.csv"
    status = cli.main(
        ["control", "--omega-degrees", "120", "--levels", "1", "--alpha", "0.5", "--output", str(output)]
    )
    assert status == cli.EXIT_OK
    report = parse_report(output)
    assert report.metadata["alpha"] == 0.5
    assert "gmres_iters" in report.columns


def test_markdownOutput(tmp_path):
    output = tmp_path / "flux.md"
    cli.main(["flux", "--omega-degrees", "90", "--levels", "1..2", "--output", str(output)])
    assert output.read_text().rstrip().endswith("Expected: (2.00)")


def test_failedLevelExitsWithTwo(monkeypatch, tmp_path):
    def broken(config, level):
        raise RuntimeError("no convergence")

    monkeypatch.setitem(study._LEVEL_RUNNERS, "flux", broken)
    output = tmp_path / "flux.csv"
    status = cli.main(["flux", "--omega-degrees", "90", "--levels", "1..2", "--output", str(output)])
    assert status == cli.EXIT_PARTIAL_FAILURE
    # the rows are still written
    assert all(record.failed for record in parse_report(output).records)


def test_unwritableOutput(tmp_path):
    output = tmp_path / "missing" / "flux.csv"
    status = cli.main(["flux", "--omega-degrees", "90", "--levels", "1", "--output", str(output)])
    assert status == cli.EXIT_WRITE_FAILURE


@pytest.mark.parametrize(
    "argv",
    [
        ["flux", "--omega-degrees", "90", "--levels", "one..two", "--output", "out.csv"],
        ["flux", "--omega-degrees", "45", "--levels", "1..2", "--output", "out.csv"],
        ["flux", "--omega-degrees", "360", "--levels", "1..2", "--output", "out.csv"],
        ["flux", "--omega-degrees", "90", "--levels", "3..1", "--output", "out.csv"],
        ["flux", "--omega-degrees", "90", "--levels", "1..2", "--alpha", "1", "--output", "out.csv"],
        ["control", "--omega-degrees", "90", "--levels", "1..2", "--alpha", "-1", "--output", "out.csv"],
        ["heat", "--omega-degrees", "90", "--levels", "1..2", "--output", "out.csv"],
    ],
)
def test_badArgumentsExit(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == cli.EXIT_USAGE
    assert not (tmp_path / "out.csv").exists()


def test_dumpOptions(tmp_path):
    cli.main(
        [
            "flux",
            "--omega-degrees", "270",
            "--levels", "1",
            "--output", str(tmp_path / "flux.csv"),
            "--dump-mesh", str(tmp_path / "mesh.txt"),
            "--dump-matrix", str(tmp_path / "matrix.txt"),
        ]
    )
    assert (tmp_path / "mesh.txt").read_text().startswith("v ")
    assert (tmp_path / "matrix.txt").is_file()


def test_configFile(tmp_path):
    config = tmp_path / "study.yaml"
    config.write_text("mesh:\n    max_level: 1\n")
    argv = ["--config", str(config), "flux", "--omega-degrees", "90", "--levels", "1..2", "--output", str(tmp_path / "a.csv")]
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == cli.EXIT_USAGE
    config.write_text("solver:\n    method: direct\n")
    argv[-1] = str(tmp_path / "b.csv")
    assert cli.main(argv) == cli.EXIT_OK


def test_invalidConfigFile(tmp_path):
    config = tmp_path / "study.yaml"
    config.write_text("solver:\n    method: multigrid\n")
    with pytest.raises(SystemExit) as info:
        cli.main(
            ["--config", str(config), "flux", "--omega-degrees", "90", "--levels", "1", "--output", str(tmp_path / "a.csv")]
        )
    assert info.value.code == cli.EXIT_USAGE


def test_usageExitDiffersFromStudyExits():
    assert cli.EXIT_USAGE not in (cli.EXIT_OK, cli.EXIT_WRITE_FAILURE, cli.EXIT_PARTIAL_FAILURE)


@pytest.mark.parametrize("argv", [["--help"], ["flux", "--help"], ["compare", "--help"]])
def test_helpListsExitCodesAndLevels(argv, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 0
    text = capsys.readouterr().out
    assert "exit status:" in text
    for code in (cli.EXIT_OK, cli.EXIT_WRITE_FAILURE, cli.EXIT_PARTIAL_FAILURE, cli.EXIT_USAGE):
        assert f"  {code} " in text
    assert "bisection sweeps" in text
    assert "h = 2^(-N/2)" in text
