"""Single-writer lock file guarding a project directory."""

from __future__ import annotations

import os

from .errors import LockHeldError

LOCK_FILENAME = ".imgvc.lock"


class WriterLock:
    """Exclusive advisory lock: a file holding the owner's pid.

    Stale locks (owner process gone) are stolen silently.
    """

    def __init__(self, project_dir: str):
        self.path = os.path.join(str(project_dir), LOCK_FILENAME)
        self._owned = False

    def acquire(self) -> None:
        for attempt in (0, 1):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                with os.fdopen(fd, "w") as fh:
                    fh.write(str(os.getpid()))
                self._owned = True
                return
            except FileExistsError:
                if attempt == 1 or not self._steal_if_stale():
                    raise LockHeldError(
                        f"writer lock {self.path} is held by another process"
                    ) from None

    def _steal_if_stale(self) -> bool:
        try:
            with open(self.path) as fh:
                pid = int(fh.read().strip() or "0")
        except (OSError, ValueError):
            pid = 0
        if pid and _pid_alive(pid):
            return False
        try:
            os.unlink(self.path)
        except FileNotFoundError:
            pass
        return True

    def release(self) -> None:
        if self._owned:
            self._owned = False
            try:
                os.unlink(self.path)
            except FileNotFoundError:
                pass

    def __enter__(self) -> "WriterLock":
        self.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self.release()


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True
