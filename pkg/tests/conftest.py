import warnings


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: spec acceptance criteria (slow, full physics runs)")
    # old-TBB advisory from numba's threading-layer probe
    warnings.filterwarnings("ignore", message=".*TBB.*")
