"""Collects one line per acceptance criterion for the terminal summary."""
import contextlib
import time

LINES = []


@contextlib.contextmanager
def criterion(name):
    """Record PASS or FAIL for ``name``; the body may add notes to the yielded list."""
    notes = []
    start = time.perf_counter()
    try:
        yield notes
    except BaseException:
        LINES.append(f"FAIL  {name}  [{time.perf_counter() - start:.1f}s] " + "; ".join(notes))
        raise
    LINES.append(f"PASS  {name}  [{time.perf_counter() - start:.1f}s] " + "; ".join(notes))
    print(LINES[-1])
