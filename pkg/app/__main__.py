# Entry point: `python app <command> ...` from the repository root.
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "app_packages"))

from crossdipole.cli import main  # noqa: E402

sys.exit(main())
