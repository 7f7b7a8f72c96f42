import pytest

ACCEPTANCE = pytest.StashKey[dict]()


class AcceptanceRecorder:
    """Collects per-criterion check results; a criterion passes only if every part does."""

    def __init__(self, store: dict):
        self.store = store

    def __call__(self, criterion: int, part: str, ok: bool, detail: str) -> bool:
        self.store.setdefault(criterion, []).append((part, bool(ok), detail))
        print(f"criterion {criterion} [{part}] {'PASS' if ok else 'FAIL'}: {detail}")
        return bool(ok)

    def lines(self) -> list[str]:
        out = []
        for k in sorted(self.store):
            parts = self.store[k]
            verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
            detail = "; ".join(f"{p} {'ok' if ok else 'FAILED'} ({d})" for p, ok, d in parts)
            out.append(f"criterion {k:2d}: {verdict}  {detail}")
        return out


@pytest.fixture
def acceptance(request):
    return AcceptanceRecorder(request.config.stash.setdefault(ACCEPTANCE, {}))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for line in AcceptanceRecorder(store).lines():
        terminalreporter.write_line(line)
