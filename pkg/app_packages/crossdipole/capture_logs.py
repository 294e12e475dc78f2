import contextlib
import io
import time
import traceback
from dataclasses import dataclass
from typing import Callable, Generic, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class CapturedRun(Generic[T]):
    result: T | None
    log: str
    wall_time: float  # seconds
    error: BaseException | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def capture_logs(func: Callable[..., T], *args, **kwargs) -> CapturedRun[T]:
    """
    Run a callable while capturing stdout/stderr. A failure is not raised: its traceback
    ends the log and the exception is kept on the returned record.
    """
    log_buffer = io.StringIO()
    result: T | None = None
    error: BaseException | None = None

    start = time.perf_counter()
    with contextlib.redirect_stdout(log_buffer), contextlib.redirect_stderr(log_buffer):
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            error = e
            traceback.print_exc()

    return CapturedRun(result, log_buffer.getvalue(), time.perf_counter() - start, error)
