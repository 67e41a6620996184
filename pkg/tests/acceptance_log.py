"""Shared registry for the one-line acceptance verdicts."""

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    RESULTS.append(line)
    print(line)
    return ok
