"""Test cases for the __main__ module."""
from pathlib import Path
from typing import List

import pytest
from pytest_mock import MockerFixture

import qze_purify.constants as const
from qze_purify import __main__
from qze_purify.emitters import read_metadata
from qze_purify.exceptions import NoConvergenceError
from qze_purify.utils import ENV_CONFIG
from qze_purify.utils import ENV_WORKERS

# =========================================================
#          G L O B A L S   A N D   H E L P E R S
# =========================================================
SMALL_GRID = [
    "--eps-tau-min",
    "0.5",
    "--eps-tau-max",
    "4",
    "--eps-tau-count",
    "3",
    "--theta-over-pi-min",
    "0.2",
    "--theta-over-pi-max",
    "0.6",
    "--theta-over-pi-count",
    "2",
]


@pytest.fixture
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Run in an empty directory with a single worker and no config file."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.setenv(ENV_WORKERS, "1")
    monkeypatch.delenv(ENV_CONFIG, raising=False)
    return tmp_path


def _run(workdir: Path, args: List[str]) -> None:
    __main__.main(args + ["--log", str(workdir / "run.log")])


# =========================================================
#                        T E S T S
# =========================================================
@pytest.mark.parametrize("args", [[], ["-V"], ["--version"]])
def test_main_exits_ok(args: List[str]) -> None:
    with pytest.raises(SystemExit) as e:
        __main__.main(args)
    assert e.value.code == const.EXIT_OK


@pytest.mark.parametrize(
    "args",
    [
        ["point", "--theta-over-pi", "2"],
        ["launch"],
        ["point", "--units", "raw", "--eps-tau", "1"],
        ["point", "--config", "no-such-file.ini"],
    ],
)
def test_main_usage_errors(workdir: Path, args: List[str]) -> None:
    with pytest.raises(SystemExit) as e:
        _run(workdir, args)
    assert e.value.code == const.EXIT_USAGE
    assert not list(workdir.glob("*.csv"))


def test_main_numerical_error(workdir: Path, mocker: MockerFixture) -> None:
    mocker.patch(
        "qze_purify.__main__.evaluate_point", side_effect=NoConvergenceError()
    )
    with pytest.raises(SystemExit) as e:
        _run(workdir, ["point"])
    assert e.value.code == const.EXIT_NUMERICAL


def test_main_output_error(workdir: Path) -> None:
    (workdir / "blocker").write_text("", encoding="utf-8")
    with pytest.raises(SystemExit) as e:
        _run(workdir, ["point", "--output", "blocker/out"])
    assert e.value.code == const.EXIT_NUMERICAL


@pytest.mark.smoke
def test_point(workdir: Path) -> None:
    _run(workdir, ["point", "--output", "pt", "--initial-state", "singlet"])
    meta = read_metadata(workdir / "pt.csv")
    assert meta["command"] == const.CMD_POINT
    assert meta["initial_state"] == "singlet"


@pytest.mark.smoke
def test_sweep_then_diff_against_stored_baseline(workdir: Path) -> None:
    _run(workdir, ["sweep", "--output", "base"] + SMALL_GRID)
    for qty in const.WITNESS_QUANTITIES:
        assert (workdir / f"base_{qty}.ppm").exists()

    args = ["diff", "--output", "d", "--eta-over-eps", "0.5", "--format", "csv"]
    _run(workdir, args + SMALL_GRID + ["--baseline-csv", "base.csv"])
    assert read_metadata(workdir / "d.csv")["baseline"] == "base.csv"
    assert not list(workdir.glob("d_*.ppm"))


@pytest.mark.smoke
def test_diff_with_computed_baseline(workdir: Path) -> None:
    _run(
        workdir,
        ["diff", "--output", "out/d", "--preset", "weak_quadrature", "--format", "ppm"]
        + SMALL_GRID,
    )
    for qty in const.DIFF_QUANTITIES:
        assert (workdir / "out" / f"d_{qty}.ppm").exists()


@pytest.mark.smoke
@pytest.mark.parametrize("regime", ["weak", "strong"])
def test_perturb(workdir: Path, regime: str) -> None:
    _run(
        workdir,
        ["perturb", "--regime", regime, "--eta-over-eps", "0.7", "--output", "p"],
    )
    assert read_metadata(workdir / "p.csv")["regime"] == regime


@pytest.mark.smoke
def test_oracle_check(workdir: Path) -> None:
    _run(workdir, ["oracle-check", "--oracle-steps", "1,3", "--n-steps", "4"])
    lines = (workdir / f"{const.DEF_OUTPUT}.csv").read_text(encoding="utf-8")
    rows = [ln for ln in lines.splitlines() if not ln.startswith("#")]
    assert [r.split(",")[0] for r in rows[1:]] == ["1", "3", "4"]


@pytest.mark.smoke
def test_trajectories_from_config_file(workdir: Path) -> None:
    (workdir / const.DEF_CONFIG).write_text(
        "command = trajectories\ntrials = 2000\nseed = 5\nn_steps = 3\n",
        encoding="utf-8",
    )
    _run(workdir, ["--output", "traj"])
    meta = read_metadata(workdir / "traj.csv")
    assert (meta["trials"], meta["seed"]) == ("2000", "5")
