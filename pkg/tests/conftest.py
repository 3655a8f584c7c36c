import pytest
from hypothesis import settings

from tilecohom.substitution import fibonacci, generate_window, load_rule

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fib():
    return fibonacci()


@pytest.fixture(scope="session")
def rational_rule():
    return load_rule("fibonacci_rational")


@pytest.fixture(scope="session")
def fib_window(fib):
    return generate_window(fib, "a|a", 12)


@pytest.fixture(scope="session")
def fib_window22(fib):
    return generate_window(fib, "a|a", 22)
