import pytest

from fluxfem.settings import SettingsError, load_settings


def test_defaults(settings):
    assert settings["solver"]["method"] == "cg"
    assert settings["solver"]["cg_rtol"] == 1e-12
    assert settings["quadrature"]["corner_degree"] == 10
    assert settings["control"]["gmres_restart"] == 50
    assert settings["study"]["parallel_levels"] is False


def test_userFileIsMergedOverDefaults(tmp_path):
    path = tmp_path / "study.yaml"
    path.write_text("solver:\n    method: direct\ncontrol:\n    alpha: 0.5\n")
    settings = load_settings(path)
    assert settings["solver"]["method"] == "direct"
    assert settings["solver"]["cg_rtol"] == 1e-12
    assert settings["control"]["alpha"] == 0.5


def test_emptyUserFile(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_settings(path) == load_settings()


def test_overrides():
    settings = load_settings(overrides={"mesh": {"max_level": 4}})
    assert settings["mesh"]["max_level"] == 4


@pytest.mark.parametrize(
    "overrides",
    [
        {"mesh": {"refinement": "red-green"}},
        {"solver": {"method": "multigrid"}},
        {"solver": {"cg_rtol": 0.5}},
        {"control": {"gmres_restart": 2.5}},
        {"study": {"parallel_levels": "yes"}},
        {"quadrature": 4},
    ],
)
def test_rejectsInvalidSettings(overrides):
    with pytest.raises(SettingsError):
        load_settings(overrides=overrides)


def test_errorNamesTheDottedKey():
    with pytest.raises(SettingsError, match=r"solver\.method"):
        load_settings(overrides={"solver": {"method": "lu"}})


def test_rejectsNonMappingFile(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(SettingsError):
        load_settings(path)


def test_seedVariableIsAccepted(monkeypatch):
    monkeypatch.setenv("FLUXFEM_SEED", "42")
    assert load_settings() == load_settings()
