import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Sequence

import pytest

from diffbkk import LatticePolytope, hull
from diffbkk.polytope import to_json


@pytest.fixture
def tmp_work_path(tmp_path: Path):
    """
    Create a temporary working directory.
    """
    previous_cwd = Path.cwd()
    os.chdir(tmp_path)

    yield tmp_path

    os.chdir(previous_cwd)


@pytest.fixture(autouse=True)
def anyio_backend():
    return 'asyncio'


@pytest.fixture(autouse=True)
def ensure_logging_framework_not_altered():
    """
    https://github.com/pytest-dev/pytest/issues/5743
    """
    pkg_logger = logging.getLogger('diffbkk')
    before_handlers = list(pkg_logger.handlers)
    before_level = pkg_logger.level

    yield

    pkg_logger.handlers = before_handlers
    pkg_logger.setLevel(before_level)


def unit_simplex(dim: int, scale: int = 1) -> LatticePolytope:
    points = [(0,) * dim] + [tuple(scale if i == j else 0 for j in range(dim)) for i in range(dim)]
    return hull(points)


@pytest.fixture
def write_polytope(tmp_work_path: Path) -> Callable[[str, Any], str]:
    def write(name: str, poly: Any) -> str:
        path = tmp_work_path / name
        if isinstance(poly, LatticePolytope):
            obj = to_json(poly)
        elif isinstance(poly, Sequence):
            obj = {'dim': len(poly[0]), 'points': [list(p) for p in poly]}
        else:
            obj = poly
        path.write_text(json.dumps(obj))
        return str(path)

    return write
