from crossdipole.capture_logs import capture_logs
from crossdipole.versions import describe_version, get_dependency_versions, parse_requirements


def test_parse_requirements(tmp_path):
    path = tmp_path / "requirements.txt"
    path.write_text(
        "# numerics\n"
        "numpy>=1.26,<3\n"
        "Scipy_Stack[extra] ~= 1.0  # comment\n"
        "-r other.txt\n"
        "\n"
        "pandas\n"
    )
    assert parse_requirements(path) == ["numpy", "Scipy_Stack", "pandas"]


def test_dependency_versions(tmp_path):
    path = tmp_path / "requirements.txt"
    path.write_text("NumPy>=1\nsurely-not-an-installed-package\n")
    numpy, missing = get_dependency_versions(path)
    assert numpy["name"] == "NumPy" and numpy["version"] is not None
    assert missing == {"name": "surely-not-an-installed-package", "version": None}
    assert get_dependency_versions(tmp_path / "missing.txt") == []


def test_describe_version_keeps_the_base():
    assert describe_version("1.0.0").startswith("1.0.0")


def test_capture_logs_returns_the_result():
    def work(n):
        print("working on", n)
        return n * 2

    run = capture_logs(work, 21)
    assert run.ok
    assert run.result == 42
    assert run.log == "working on 21\n"
    assert run.wall_time >= 0


def test_capture_logs_keeps_the_error():
    def fail():
        print("about to fail")
        raise ValueError("boom")

    run = capture_logs(fail)
    assert not run.ok
    assert run.result is None
    assert isinstance(run.error, ValueError)
    assert run.log.startswith("about to fail\n")
    assert "ValueError: boom" in run.log
