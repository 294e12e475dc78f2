from pathlib import Path
import importlib.metadata as metadata
import re
import subprocess
from packaging.utils import canonicalize_name

# Base folders
__dirname = Path(__file__).resolve().parent
root_dir = __dirname.parent.parent

requirements_txt_path = root_dir / "requirements.txt"


def parse_requirements(path: Path) -> list[str]:
    """Package names listed in a requirements.txt file, in order."""
    names: list[str] = []

    for raw_line in path.read_text().splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line or line.startswith("-"):
            continue

        name = re.split(r"[<>=!~\[;@ ]", line, maxsplit=1)[0].strip()
        if name:
            names.append(name)

    return names


def get_dependency_versions(path: Path = requirements_txt_path) -> list[dict]:
    """The installed version of every requirement, None when it is not installed."""
    if not path.exists():
        return []

    output: list[dict] = []

    for name in parse_requirements(path):
        # Canonicalize because requirement names and dist metadata can differ (Foo_Bar -> foo-bar)
        normalized = canonicalize_name(name)
        try:
            installed = metadata.version(normalized)
        except metadata.PackageNotFoundError:
            installed = None

        output.append({"name": name, "version": installed})

    return output


def describe_version(base: str) -> str:
    """`base` plus a git-describe suffix when the sources live in a git checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=root_dir,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return base

    suffix = result.stdout.strip()
    if result.returncode != 0 or not suffix:
        return base
    return f"{base}+{suffix}"
