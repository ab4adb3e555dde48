from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def pytest_runtest_logreport(report):
    """Emit one PASS/FAIL line per acceptance criterion as the gate runs."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1].split("[")[0]
    criterion = name.removeprefix("test_").replace("_", " ")
    print(f"[acceptance] {status}: {criterion}", flush=True)
