"""Shared pytest configuration."""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: wide seeded sweeps over the acceptance ranges (deselect with -m 'not slow')")
