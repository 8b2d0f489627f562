import pytest

import gradcv.tape as _tape


@pytest.fixture(autouse=True)
def fresh_ambient_tape():
    """Abandoned graphs (ops without backward) must not leak across tests."""
    _tape._ambient.tape = None
    yield
    _tape._ambient.tape = None
