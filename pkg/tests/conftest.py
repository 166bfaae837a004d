from __future__ import annotations

import numpy as np
import pytest

from rmkit.simulator.rig import make_default_rig


@pytest.fixture(scope="session")
def default_rig():
    return make_default_rig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def short_capture(tmp_path_factory):
    """A 0.2 s capture of the example scene with the default rig (no noise)."""
    from dataclasses import replace

    from rmkit.simulator.config import example_config
    from rmkit.simulator.simulate import simulate_config

    cfg = example_config()
    cfg = replace(cfg, trajectory=replace(cfg.trajectory, duration=0.2))
    out = tmp_path_factory.mktemp("capture") / "short.rmrc"
    return simulate_config(cfg, out)


# -- acceptance bookkeeping -------------------------------------------------------

_ACCEPTANCE: dict[int, str] = {}


class _Criterion:
    """Times one acceptance criterion; a criterion fails on any assertion
    error or when it overruns its time budget."""

    def __init__(self, number: int, title: str, budget_s: float):
        self.number, self.title, self.budget = number, title, budget_s
        self.notes: list[str] = []

    def note(self, text: str) -> None:
        self.notes.append(text)

    def __enter__(self):
        import time

        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time

        elapsed = time.perf_counter() - self._t0
        over = elapsed >= self.budget
        ok = exc_type is None and not over
        detail = "; ".join(self.notes)
        if exc_type is not None:
            detail = f"{exc_type.__name__}: {exc}".splitlines()[0] + (f"; {detail}" if detail else "")
        elif over:
            detail = f"over budget; {detail}" if detail else "over budget"
        line = (
            f"{'PASS' if ok else 'FAIL'} criterion {self.number:>2} {self.title}: "
            f"{elapsed:.2f} s of {self.budget:g} s" + (f" ({detail})" if detail else "")
        )
        _ACCEPTANCE[self.number] = line
        print(line)
        if exc_type is None and over:
            raise AssertionError(f"criterion {self.number} took {elapsed:.2f} s, budget {self.budget:g} s")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
