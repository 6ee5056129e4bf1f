"""Seam to the external version-control tool.

The store only ever talks to this interface, so tests can swap in a
scripted backend and the real one stays a thin porcelain wrapper around the
``git`` command line.
"""

from __future__ import annotations

import os
import shutil
import subprocess
from datetime import datetime

from .errors import BackendCommandError, BackendUnavailableError, EmptyCommitError

DEFAULT_BRANCH = "main"


class GitBackend:
    """Runs the external git tool inside a project work tree."""

    def __init__(self, workdir: str, git_exe: str = "git"):
        self.workdir = str(workdir)
        self.git_exe = git_exe

    # -- plumbing -------------------------------------------------------------

    def run(self, *args: str, check: bool = True, env: dict | None = None) -> str:
        if shutil.which(self.git_exe) is None:
            raise BackendUnavailableError(f"{self.git_exe!r} is not on PATH")
        full_env = dict(os.environ)
        if env:
            full_env.update(env)
        proc = subprocess.run(
            [self.git_exe, *args],
            cwd=self.workdir,
            capture_output=True,
            text=True,
            env=full_env,
        )
        if check and proc.returncode != 0:
            raise BackendCommandError(
                f"git {' '.join(args)} failed ({proc.returncode})",
                output=(proc.stdout + proc.stderr).strip(),
            )
        return proc.stdout

    # -- porcelain ------------------------------------------------------------

    def ensure_available(self) -> None:
        if shutil.which(self.git_exe) is None:
            raise BackendUnavailableError(f"{self.git_exe!r} is not on PATH")

    def is_repo(self) -> bool:
        # the project's own repo only; an enclosing work tree does not count
        return os.path.exists(os.path.join(self.workdir, ".git"))

    def status_clean(self) -> bool:
        return not self.run("status", "--porcelain").strip()

    def init(self) -> None:
        self.run("init", "-b", DEFAULT_BRANCH)
        self.ensure_identity()

    def ensure_identity(self) -> None:
        # a local identity so commits work in clean environments
        if not self.run("config", "user.name", check=False).strip():
            self.run("config", "user.name", "imgvc")
            self.run("config", "user.email", "imgvc@localhost")

    def add_all(self) -> None:
        self.run("add", "-A")

    def commit(self, message: str, when: datetime | None = None) -> None:
        env = None
        if when is not None:
            stamp = when.strftime("%Y-%m-%dT%H:%M:%S%z")
            env = {"GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp}
        if self.status_clean():
            raise EmptyCommitError("nothing changed since the previous commit")
        self.run("commit", "-m", message, env=env)

    def remote_add(self, url: str, name: str = "origin") -> None:
        self.run("remote", "add", name, url)

    def has_remote(self, name: str = "origin") -> bool:
        return name in self.run("remote").split()

    def push(self, name: str = "origin") -> str:
        return self.run("push", name, DEFAULT_BRANCH)

    def fetch(self, name: str = "origin") -> str:
        return self.run("fetch", name, DEFAULT_BRANCH)

    def show_fetched_file(self, path: str) -> str | None:
        """Contents of a file at FETCH_HEAD, or None if absent."""
        proc = subprocess.run(
            [self.git_exe, "show", f"FETCH_HEAD:{path}"],
            cwd=self.workdir,
            capture_output=True,
            text=True,
        )
        return proc.stdout if proc.returncode == 0 else None

    def merge_ff_only(self) -> None:
        self.run("merge", "--ff-only", "FETCH_HEAD")

    @staticmethod
    def clone(url: str, dest: str, git_exe: str = "git") -> "GitBackend":
        if shutil.which(git_exe) is None:
            raise BackendUnavailableError(f"{git_exe!r} is not on PATH")
        proc = subprocess.run(
            [git_exe, "clone", url, dest], capture_output=True, text=True
        )
        if proc.returncode != 0:
            raise BackendCommandError(
                f"git clone {url} failed", output=(proc.stdout + proc.stderr).strip()
            )
        return GitBackend(dest, git_exe)
