"""Collects one verdict per acceptance criterion for the terminal summary."""
from contextlib import contextmanager

RESULTS = {}


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def ok(self):
        return bool(self.items) and all(ok for _, ok, _ in self.items)

    def failures(self):
        return [f"{n} ({d})" if d else n for n, ok, d in self.items if not ok]

    def summary(self):
        return "; ".join(f"{n}={'ok' if ok else 'FAIL'}" + (f" [{d}]" if d else "")
                         for n, ok, d in self.items)


@contextmanager
def criterion(number, title):
    checks = Checks()
    try:
        yield checks
    except Exception as exc:
        checks.add("exception", False, f"{type(exc).__name__}: {exc}")
        RESULTS[number] = (title, False, checks.summary())
        raise
    RESULTS[number] = (title, checks.ok, checks.summary())
    assert checks.ok, "failed: " + ", ".join(checks.failures())


def report_lines():
    lines = []
    for n in sorted(RESULTS):
        title, ok, detail = RESULTS[n]
        lines.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return lines
